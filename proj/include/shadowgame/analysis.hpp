#pragma once

// Change-probability formula and the growing-action-set experiment.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "shadowgame/errors.hpp"
#include "shadowgame/incremental.hpp"
#include "shadowgame/lp_core.hpp"
#include "shadowgame/shadow_simplex.hpp"

namespace shadowgame {

namespace detail {

inline boost::multiprecision::cpp_int binomial(unsigned top, unsigned k) {
  boost::multiprecision::cpp_int value = 1;
  for (unsigned i = 1; i <= k; ++i) {
    value *= top - k + i;
    value /= i;
  }
  return value;
}

}  // namespace detail

/// Probability that a new random action changes player 1's security strategy:
/// n / (m + 1 + n - (m + 1) / C(m + n, n)). Exact big-integer binomials up to
/// n + m = 120, log-gamma beyond.
inline double prob_change(std::size_t n, std::size_t m) {
  if (n < 2 || m < 1) throw Error(ErrorCode::InvalidInput, "need n >= 2 and m >= 1");
  if (n + m <= 120) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    const cpp_int C = detail::binomial(static_cast<unsigned>(m + n), static_cast<unsigned>(n));
    const cpp_rational ratio(cpp_int(n) * C, cpp_int(m + 1 + n) * C - cpp_int(m + 1));
    return ratio.convert_to<double>();
  }
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double log_c = std::lgamma(mm + nn + 1.0) - std::lgamma(nn + 1.0) - std::lgamma(mm + 1.0);
  const double correction = std::exp(std::log(mm + 1.0) - log_c);
  return nn / (mm + 1.0 + nn - correction);
}

/// Expected fraction of shadow vertices that contain the new constraint; the
/// same factor as prob_change.
inline double expected_visit_ratio(std::size_t n, std::size_t m) { return prob_change(n, m); }

struct ExperimentConfig {
  std::size_t n = 10;
  std::vector<std::size_t> m_list{100};
  std::size_t trials = 500;
  int payoff_low = -100;
  int payoff_high = 100;
  std::uint64_t seed = 1;
  bool perturbation = true;
  // worker threads; 0 uses the hardware concurrency
  std::size_t threads = 1;
  SolveOptions solve;
};

inline constexpr double kPerturbation = 1e-7;

struct ExperimentRecord {
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t change_count = 0;
  double empirical_change_prob = 0.0;
  double theory_change_prob = 0.0;
  double mean_pivots_iterative = 0.0;
  double mean_pivots_full = 0.0;
  double mean_pivots_iterative_given_recompute = 0.0;
  double mean_pivots_full_given_recompute = 0.0;

  // trials aborted by a solver error
  std::size_t failed_trials = 0;
  // trials with a non-strict pivot; excluded from the pivot means
  std::size_t degenerate_trials = 0;
  std::size_t recompute_events = 0;
  // recompute trials whose iterative and from-scratch values differ by > 1e-9
  std::size_t value_mismatches = 0;
  std::size_t persistence_violations = 0;
  // retained optima that are infeasible for the extended LP
  std::size_t retention_infeasible = 0;
  double max_value_gap = 0.0;
  SolveStats stats;
  std::vector<std::string> errors;
};

/// Independent 64-bit seed for trial `t` of the batch with action count `m`.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t m, std::size_t t) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ static_cast<std::uint64_t>(m)) ^ static_cast<std::uint64_t>(t));
}

/// Uniform integer payoffs, optionally jittered by U(-1e-7, 1e-7) per entry.
inline Eigen::MatrixXd sample_payoffs(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int low, int high,
                                      bool perturb) {
  std::uniform_int_distribution<int> entry(low, high);
  std::uniform_real_distribution<double> jitter(-kPerturbation, kPerturbation);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      g(i, j) = entry(rng);
      if (perturb) g(i, j) += jitter(rng);
    }
  return g;
}

struct TrialOutcome {
  bool failed = false;
  bool degenerate = false;
  bool changed = false;
  bool retention_infeasible = false;
  std::size_t pivots_iterative = 0;
  std::size_t pivots_full = 0;
  std::size_t persistence_violations = 0;
  double value_gap = 0.0;
  SolveStats stats;
  std::string error;
};

/// One trial: solve a random game, add a random column, then compare the
/// warm-started update against a from-scratch solve of the extended game.
inline TrialOutcome run_growth_trial(const ExperimentConfig& cfg, std::size_t m, std::size_t t) {
  TrialOutcome out;
  std::mt19937_64 rng(trial_seed(cfg.seed, m, t));
  SolveOptions options = cfg.solve;
  options.aux_seed = rng();
  try {
    const PayoffMatrix G(sample_payoffs(rng, cfg.n, m, cfg.payoff_low, cfg.payoff_high, cfg.perturbation));
    const Eigen::VectorXd g = sample_payoffs(rng, cfg.n, 1, cfg.payoff_low, cfg.payoff_high, cfg.perturbation).col(0);

    ExtensionEvent<double> event;
    event.old_lp = canonicalize<double>(G);
    auto base = solve(event.old_lp, options);
    out.stats.merge(base.stats);
    if (base.solution.status != SolutionStatus::optimal) throw Error(ErrorCode::NoSolution, "game LP unbounded");
    event.new_lp = extend_with_action(event.old_lp, g);
    event.old_solution = base.solution;
    event.old_path = std::move(base.path);

    out.changed = !retains_optimality(event.old_solution, event.new_lp);
    auto full = solve(event.new_lp, options);
    out.stats.merge(full.stats);
    auto iterative = iterative_solve(event, options);
    out.stats.merge(iterative.stats);

    out.pivots_full = full.stats.pivots;
    out.pivots_iterative = iterative.pivots_used;
    out.persistence_violations = iterative.persistence_violations;
    out.value_gap = std::abs(iterative.solution.value - full.solution.value);
    if (!out.changed)
      out.retention_infeasible = max_violation(event.new_lp, event.old_solution.x) > eps<double>();
    out.degenerate = out.stats.non_increasing_steps > 0;
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

inline std::vector<TrialOutcome> run_trials(const ExperimentConfig& cfg, std::size_t m) {
  std::vector<TrialOutcome> outcomes(cfg.trials);
  std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  workers = std::min(workers, cfg.trials);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t t = next++; t < cfg.trials; t = next++) outcomes[t] = run_growth_trial(cfg, m, t);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return outcomes;
}

/// Folds trial outcomes in trial order.
inline ExperimentRecord aggregate(const ExperimentConfig& cfg, std::size_t m, const std::vector<TrialOutcome>& outcomes) {
  ExperimentRecord r;
  r.m = m;
  r.trials = outcomes.size();
  r.theory_change_prob = prob_change(cfg.n, m);
  std::size_t counted = 0;
  std::size_t pivot_trials = 0;
  std::size_t pivot_recompute = 0;
  double sum_iter = 0.0;
  double sum_full = 0.0;
  double sum_iter_re = 0.0;
  double sum_full_re = 0.0;
  for (const auto& o : outcomes) {
    r.stats.merge(o.stats);
    if (o.failed) {
      ++r.failed_trials;
      if (r.errors.size() < 10) r.errors.push_back(o.error);
      continue;
    }
    ++counted;
    r.persistence_violations += o.persistence_violations;
    if (o.retention_infeasible) ++r.retention_infeasible;
    if (o.value_gap > 1e-9) ++r.value_mismatches;
    r.max_value_gap = std::max(r.max_value_gap, o.value_gap);
    if (o.changed) {
      ++r.change_count;
      ++r.recompute_events;
    }
    if (o.degenerate) {
      ++r.degenerate_trials;
      continue;
    }
    ++pivot_trials;
    sum_iter += static_cast<double>(o.pivots_iterative);
    sum_full += static_cast<double>(o.pivots_full);
    if (o.changed) {
      ++pivot_recompute;
      sum_iter_re += static_cast<double>(o.pivots_iterative);
      sum_full_re += static_cast<double>(o.pivots_full);
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.empirical_change_prob = counted ? static_cast<double>(r.change_count) / static_cast<double>(counted) : nan;
  r.mean_pivots_iterative = pivot_trials ? sum_iter / static_cast<double>(pivot_trials) : nan;
  r.mean_pivots_full = pivot_trials ? sum_full / static_cast<double>(pivot_trials) : nan;
  r.mean_pivots_iterative_given_recompute = pivot_recompute ? sum_iter_re / static_cast<double>(pivot_recompute) : nan;
  r.mean_pivots_full_given_recompute = pivot_recompute ? sum_full_re / static_cast<double>(pivot_recompute) : nan;
  return r;
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 2) throw Error(ErrorCode::InvalidInput, "n must be at least 2");
  if (cfg.m_list.empty()) throw Error(ErrorCode::InvalidInput, "m list is empty");
  for (auto m : cfg.m_list)
    if (m < 1) throw Error(ErrorCode::InvalidInput, "every m must be at least 1");
  if (cfg.trials < 1) throw Error(ErrorCode::InvalidInput, "trials must be at least 1");
  if (cfg.payoff_low >= cfg.payoff_high) throw Error(ErrorCode::InvalidInput, "payoff_low must be below payoff_high");
}

/// Runs the experiment for every m in the config. Deterministic in cfg.seed
/// regardless of the thread count.
inline std::vector<ExperimentRecord> run_growth_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<ExperimentRecord> records;
  for (auto m : cfg.m_list) records.push_back(aggregate(cfg, m, run_trials(cfg, m)));
  return records;
}

inline std::string format_sig10(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_records_csv(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  if (records.empty()) throw Error(ErrorCode::InvalidInput, "no records to write");
  out << "m,trials,changes,empirical_p,theory_p,mean_piv_iter,mean_piv_full,mean_piv_iter_recompute,"
         "mean_piv_full_recompute\n";
  for (const auto& r : records) {
    out << r.m << ',' << r.trials << ',' << r.change_count << ',' << format_sig10(r.empirical_change_prob) << ','
        << format_sig10(r.theory_change_prob) << ',' << format_sig10(r.mean_pivots_iterative) << ','
        << format_sig10(r.mean_pivots_full) << ',' << format_sig10(r.mean_pivots_iterative_given_recompute) << ','
        << format_sig10(r.mean_pivots_full_given_recompute) << '\n';
  }
}

inline void write_records_csv(const std::vector<ExperimentRecord>& records, const std::string& destination) {
  if (records.empty()) throw Error(ErrorCode::InvalidInput, "no records to write");
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + destination + " for writing");
  write_records_csv(records, out);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + destination);
}

}  // namespace shadowgame
