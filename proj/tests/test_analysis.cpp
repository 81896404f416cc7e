#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "shadowgame/analysis.hpp"

using namespace shadowgame;
using Catch::Approx;

namespace {

// Pascal-triangle binomials and the equivalent ratio C(m+n, n-1) / (C(m+n+1, n) - 1).
double pascal_ratio(unsigned n, unsigned m) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  const unsigned top = m + n + 1;
  std::vector<std::vector<cpp_int>> row(top + 1);
  for (unsigned i = 0; i <= top; ++i) {
    row[i].assign(i + 1, cpp_int(1));
    for (unsigned k = 1; k < i; ++k) row[i][k] = row[i - 1][k - 1] + row[i - 1][k];
  }
  return cpp_rational(row[m + n][n - 1], row[m + n + 1][n] - 1).convert_to<double>();
}

std::string csv_of(const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  write_records_csv(records, out);
  return out.str();
}

}  // namespace

TEST_CASE("change probability examples", "[analysis]") {
  CHECK(prob_change(2, 2) == Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(prob_change(2, 1) == Approx(0.6).epsilon(1e-15));
  CHECK(prob_change(10, 100) == Approx(10.0 / 111.0).epsilon(1e-10));
  CHECK(prob_change(10, 100) == Approx(0.09009).margin(1e-5));
  CHECK(expected_visit_ratio(2, 2) == prob_change(2, 2));
  CHECK(expected_visit_ratio(10, 100) == prob_change(10, 100));
  CHECK_THROWS_AS(prob_change(1, 5), Error);
  CHECK_THROWS_AS(prob_change(3, 0), Error);
}

TEST_CASE("change probability matches an independent binomial form", "[analysis][property]") {
  for (unsigned n = 2; n <= 12; ++n)
    for (unsigned m = 1; m <= 150; m += (m < 20 ? 1 : 13)) {
      INFO("n=" << n << " m=" << m);
      CHECK(prob_change(n, m) == Approx(pascal_ratio(n, m)).epsilon(1e-12));
      CHECK(expected_visit_ratio(n, m) == prob_change(n, m));
    }
}

TEST_CASE("change probability decreases in m and vanishes", "[analysis][property]") {
  for (std::size_t n : {2u, 3u, 5u, 10u}) {
    double previous = prob_change(n, 1);
    for (std::size_t m = 2; m <= 2000; ++m) {
      const double p = prob_change(n, m);
      CHECK(p < previous);
      previous = p;
    }
    double far = prob_change(n, 1000);
    for (std::size_t m = 10000; m <= 1000000; m *= 10) {
      const double p = prob_change(n, m);
      CHECK(p < far);
      far = p;
    }
    CHECK(far < 1e-4 * static_cast<double>(n));
  }
}

TEST_CASE("experiment records are consistent", "[analysis]") {
  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.m_list = {5, 20};
  cfg.trials = 60;
  cfg.payoff_low = -10;
  cfg.payoff_high = 10;
  cfg.seed = 17;
  const auto records = run_growth_experiment(cfg);
  REQUIRE(records.size() == 2);
  for (const auto& r : records) {
    CHECK(r.trials == 60);
    CHECK(r.failed_trials == 0);
    CHECK(r.change_count <= r.trials);
    CHECK(r.empirical_change_prob >= 0.0);
    CHECK(r.empirical_change_prob <= 1.0);
    CHECK(r.theory_change_prob == prob_change(3, r.m));
    CHECK(r.retention_infeasible == 0);
    CHECK(r.persistence_violations == 0);
    CHECK(r.value_mismatches == 0);
    CHECK(r.stats.non_increasing_steps == 0);
  }
}

TEST_CASE("experiment output does not depend on the thread count", "[analysis]") {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.m_list = {10, 30};
  cfg.trials = 80;
  cfg.seed = 99;
  cfg.threads = 1;
  const std::string serial = csv_of(run_growth_experiment(cfg));
  cfg.threads = 4;
  CHECK(csv_of(run_growth_experiment(cfg)) == serial);
  cfg.seed = 100;
  CHECK(csv_of(run_growth_experiment(cfg)) != serial);
}

TEST_CASE("change frequency tracks the formula", "[analysis][statistical]") {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.m_list = {30};
  cfg.trials = 2000;
  cfg.seed = 4;
  cfg.threads = 0;
  const auto r = run_growth_experiment(cfg).front();
  const double p = r.theory_change_prob;
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(r.trials - r.failed_trials));
  INFO("empirical " << r.empirical_change_prob << " theory " << p << " se " << se);
  CHECK(std::abs(r.empirical_change_prob - p) <= 3 * se);
}

TEST_CASE("invalid configurations are rejected", "[analysis]") {
  ExperimentConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(run_growth_experiment(cfg), Error);
  cfg = ExperimentConfig{};
  cfg.payoff_low = 5;
  cfg.payoff_high = 5;
  CHECK_THROWS_AS(run_growth_experiment(cfg), Error);
  cfg = ExperimentConfig{};
  cfg.m_list.clear();
  CHECK_THROWS_AS(run_growth_experiment(cfg), Error);
  cfg = ExperimentConfig{};
  cfg.n = 1;
  CHECK_THROWS_AS(run_growth_experiment(cfg), Error);
}

TEST_CASE("CSV layout", "[analysis]") {
  ExperimentRecord r;
  r.m = 100;
  r.trials = 500;
  r.change_count = 45;
  r.empirical_change_prob = 0.09;
  r.theory_change_prob = 10.0 / 111.0;
  r.mean_pivots_iterative = 1.5;
  r.mean_pivots_full = 12.25;
  r.mean_pivots_iterative_given_recompute = 8.0;
  r.mean_pivots_full_given_recompute = 12.0;
  const std::string csv = csv_of({r});
  CHECK(csv ==
        "m,trials,changes,empirical_p,theory_p,mean_piv_iter,mean_piv_full,mean_piv_iter_recompute,"
        "mean_piv_full_recompute\n"
        "100,500,45,0.09,0.09009009009,1.5,12.25,8,12\n");

  std::vector<ExperimentRecord> ten(10, r);
  for (std::size_t i = 0; i < 10; ++i) ten[i].m = 100 * (i + 1);
  const std::string many = csv_of(ten);
  CHECK(std::count(many.begin(), many.end(), '\n') == 11);

  CHECK_THROWS_AS(csv_of({}), Error);
  try {
    write_records_csv({r}, "/nonexistent-dir/out.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
  const auto path = std::filesystem::temp_directory_path() / "shadowgame_records.csv";
  write_records_csv({r}, path.string());
  std::ifstream in(path);
  std::stringstream back;
  back << in.rdbuf();
  CHECK(back.str() == csv);
  std::filesystem::remove(path);
}

TEST_CASE("trial seeds are independent of scheduling", "[analysis]") {
  CHECK(trial_seed(1, 100, 0) == trial_seed(1, 100, 0));
  CHECK(trial_seed(1, 100, 0) != trial_seed(1, 100, 1));
  CHECK(trial_seed(1, 100, 0) != trial_seed(1, 200, 0));
  CHECK(trial_seed(1, 100, 0) != trial_seed(2, 100, 0));
  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.m_list = {7};
  cfg.trials = 10;
  cfg.seed = 5;
  const auto a = run_growth_trial(cfg, 7, 6);
  const auto all = run_trials(cfg, 7);
  CHECK(a.changed == all[6].changed);
  CHECK(a.pivots_full == all[6].pivots_full);
  CHECK(a.pivots_iterative == all[6].pivots_iterative);
}
