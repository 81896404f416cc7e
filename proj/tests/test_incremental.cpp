#include <catch_amalgamated.hpp>

#include <random>

#include "shadowgame/incremental.hpp"

using namespace shadowgame;
using Catch::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

CanonicalLP<double> pennies() {
  Eigen::MatrixXd g(2, 2);
  g << 1, -1, -1, 1;
  return canonicalize(PayoffMatrix(g));
}

Eigen::MatrixXd random_game(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> d(-10, 10);
  std::uniform_real_distribution<double> jitter(-1e-7, 1e-7);
  Eigen::MatrixXd g(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = d(rng) + jitter(rng);
  return g;
}

ExtensionEvent<double> make_event(const CanonicalLP<double>& lp, const Eigen::VectorXd& g,
                                  const SolveOptions& options = {}) {
  ExtensionEvent<double> event;
  event.old_lp = lp;
  auto r = solve(lp, options);
  event.old_solution = r.solution;
  event.old_path = r.path;
  event.new_lp = extend_with_action(lp, g);
  return event;
}

void check_path(const SearchPath<double>& path, const CanonicalLP<double>& lp) {
  for (std::size_t i = 0; i < path.entries.size(); ++i) {
    const auto& e = path.entries[i];
    CHECK(max_violation(lp, e.vertex.x) <= 1e-7);
    CHECK(verify_table(e.table, lp).empty());
    if (i == 0) continue;
    const auto& prev = path.entries[i - 1];
    CHECK(e.table.objective() > prev.table.objective() + kStrictIncrease);
    std::size_t shared = 0;
    for (auto a : e.vertex.active_set)
      shared += std::find(prev.vertex.active_set.begin(), prev.vertex.active_set.end(), a) !=
                prev.vertex.active_set.end();
    CHECK(shared + 1 == lp.variables());
  }
}

}  // namespace

TEST_CASE("retention test examples", "[incremental]") {
  const auto lp = pennies();
  const auto old = solve(lp).solution;
  REQUIRE(old.x.isApprox(vec({0.5, 0})));
  CHECK(retains_optimality(old, extend_with_action(lp, vec({0, 0}))));
  CHECK_FALSE(retains_optimality(old, extend_with_action(lp, vec({-2, -0.5}))));
  CHECK(retains_optimality(old, extend_with_action(lp, vec({100, 100}))));
}

TEST_CASE("inserting the new row into a stored table", "[incremental]") {
  const auto lp = pennies();
  const auto init = init_table(lp);
  const auto ext = extend_with_action(lp, vec({-2, -0.5}));
  const auto t = insert_constraint_row(init.table, ext);
  CHECK(t.active_set == ActiveSet{0, 4});
  CHECK(t.gamma.row(2).isApprox(Eigen::RowVector2d(1, -3.5)));
  CHECK(t.phi(2) == Approx(0.5));
  CHECK(t.rows() == 5);
  CHECK(t.gamma.row(4) == init.table.gamma.row(3));
  CHECK(verify_table(t, ext).empty());

  // duplicate of the active row 0
  const auto same = insert_constraint_row(init.table, extend_with_action(lp, vec({1, -1})));
  CHECK(same.gamma.row(2).isApprox(Eigen::RowVector2d(1, 0)));
  CHECK(same.phi(2) == Approx(0.0).margin(1e-15));

  try {
    insert_constraint_row(init.table, extend_with_action(lp, vec({-2, -2})));
    FAIL("expected InfeasibleAtVertex");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleAtVertex);
  }
}

TEST_CASE("iterative solve restarts from the feasible prefix", "[incremental]") {
  const auto event = make_event(pennies(), vec({-2, -0.5}));
  const auto r = iterative_solve(event);
  CHECK_FALSE(r.retained);
  REQUIRE(r.restart_index.has_value());
  CHECK(*r.restart_index == 0);
  CHECK(r.solution.value == Approx(-5.0 / 7.0).margin(1e-12));
  CHECK(r.solution.strategy.isApprox(vec({1.0 / 7.0, 6.0 / 7.0})));
  CHECK(r.pivots_used >= 1);
  CHECK(r.persistence_violations == 0);
  CHECK(r.path.status == PathStatus::optimal);
  check_path(r.path, event.new_lp);
}

TEST_CASE("iterative solve keeps a surviving optimum", "[incremental]") {
  const auto event = make_event(pennies(), vec({0, 0}));
  const auto r = iterative_solve(event);
  CHECK(r.retained);
  CHECK(r.pivots_used == 0);
  CHECK(r.solution.value == event.old_solution.value);
  CHECK(r.solution.x == event.old_solution.x);
  REQUIRE(r.path.entries.size() == event.old_path.entries.size());
  for (const auto& e : r.path.entries) CHECK(e.table.rows() == event.new_lp.rows());
  check_path(r.path, event.new_lp);
}

TEST_CASE("iterative solve falls back to a full solve when no old vertex survives", "[incremental]") {
  const auto event = make_event(pennies(), vec({-3, -3}));
  const auto r = iterative_solve(event);
  CHECK_FALSE(r.retained);
  CHECK_FALSE(r.restart_index.has_value());
  CHECK(r.solution.value == Approx(-3.0));
  CHECK(r.solution.value == Approx(solve(event.new_lp).solution.value).margin(1e-12));
}

TEST_CASE("repair_path contract cases", "[incremental]") {
  const auto lp = pennies();
  const auto old = solve(lp);
  const auto keep = repair_path(old.path, extend_with_action(lp, vec({100, 100})));
  REQUIRE(keep.entries.size() == old.path.entries.size());
  for (std::size_t i = 0; i < keep.entries.size(); ++i)
    CHECK(keep.entries[i].vertex.active_set == shift_active_set(old.path.entries[i].vertex.active_set, 2));
  try {
    repair_path(old.path, extend_with_action(lp, vec({-2, -0.5})));
    FAIL("expected OptimumCutOff");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OptimumCutOff);
  }
}

TEST_CASE("repaired paths cut mid-way rejoin and end at the old optimum", "[incremental][property]") {
  std::mt19937_64 rng(404);
  std::size_t mid_cuts = 0;
  for (int trial = 0; trial < 3000 && mid_cuts < 40; ++trial) {
    const auto lp = canonicalize(PayoffMatrix(random_game(rng, 4, 8)));
    const auto old = solve(lp);
    const Eigen::VectorXd g = random_game(rng, 4, 1).col(0);
    const auto ext = extend_with_action(lp, g);
    if (!retains_optimality(old.solution, ext)) continue;
    const auto prefix = detail::feasible_prefix(old.path, ext);
    if (prefix.size() == old.path.entries.size()) continue;
    ++mid_cuts;
    const auto repaired = repair_path(old.path, ext);
    check_path(repaired, ext);
    CHECK(repaired.status == PathStatus::optimal);
    CHECK(repaired.back().vertex.x.isApprox(old.solution.x, 1e-9));
    CHECK(repaired.back().table.objective() == Approx(solve(ext).solution.value).margin(1e-9));
    // the tail after the rejoin point coincides with the old tail
    const auto shifted_last = shift_active_set(old.path.back().vertex.active_set, ext.normal_count - 1);
    CHECK(detail::sorted(repaired.back().vertex.active_set) == detail::sorted(shifted_last));
  }
  CHECK(mid_cuts >= 10);
}

TEST_CASE("retention, activity and persistence on random events", "[incremental][property]") {
  std::mt19937_64 rng(2024);
  std::size_t recomputes = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 2 + trial % 4;
    const int m = 2 + trial % 7;
    const auto lp = canonicalize(PayoffMatrix(random_game(rng, n, m)));
    const Eigen::VectorXd g = random_game(rng, n, 1).col(0);
    SolveOptions options;
    options.aux_seed = rng();
    options.verify_every = 1;
    const auto event = make_event(lp, g, options);
    const auto old_oracle = solve_oracle(lp);
    const auto new_oracle = solve_oracle(event.new_lp);
    const bool kept = retains_optimality(event.old_solution, event.new_lp);
    const bool same_value = std::abs(new_oracle.value - old_oracle.value) <= 1e-9;
    const bool still_feasible = max_violation(event.new_lp, event.old_solution.x) <= 1e-9;
    CHECK(kept == (same_value && still_feasible));
    const std::size_t at = event.new_lp.normal_count - 1;
    if (!kept) {
      ++recomputes;
      const double slack = event.new_lp.b(at) - event.new_lp.A.row(at).dot(new_oracle.x);
      INFO("trial " << trial << " violation " << max_violation(event.new_lp, event.old_solution.x) << " old " << old_oracle.value << " new " << new_oracle.value << " ours " << event.old_solution.value);
      CHECK(std::abs(slack) <= 1e-7);
    }
    const auto r = iterative_solve(event, options);
    const auto fresh = solve(event.new_lp, options);
    CHECK(r.solution.value == Approx(fresh.solution.value).margin(1e-9));
    CHECK(r.solution.value == Approx(new_oracle.value).margin(1e-6));
    CHECK(r.persistence_violations == 0);
    CHECK(r.stats.non_increasing_steps == 0);
    CHECK(r.stats.table_diagnostics == 0);
    if (!kept && r.restart_index) {
      for (std::size_t i = *r.restart_index + 1; i < r.path.entries.size(); ++i)
        CHECK(detail::contains(r.path.entries[i].vertex.active_set, at));
    }
    for (const auto& e : r.path.entries) CHECK(max_violation(event.new_lp, e.vertex.x) <= 1e-7);
  }
  CHECK(recomputes > 50);
}

TEST_CASE("sequential extensions track a growing game", "[incremental]") {
  std::mt19937_64 rng(8);
  Eigen::MatrixXd G = random_game(rng, 4, 3);
  auto lp = canonicalize(PayoffMatrix(G));
  auto current = solve(lp);
  Solution<double> sol = current.solution;
  SearchPath<double> path = current.path;
  for (int step = 0; step < 25; ++step) {
    const Eigen::VectorXd g = random_game(rng, 4, 1).col(0);
    ExtensionEvent<double> event{lp, extend_with_action(lp, g), sol, path};
    auto r = iterative_solve(event);
    G.conservativeResize(Eigen::NoChange, G.cols() + 1);
    G.col(G.cols() - 1) = g;
    lp = event.new_lp;
    sol = r.solution;
    path = r.path;
    CHECK(sol.value == Approx(solve_oracle(canonicalize(PayoffMatrix(G))).value).margin(1e-6));
    CHECK(path.back().vertex.x.isApprox(sol.x, 1e-9));
  }
}

TEST_CASE("background repair publishes complete paths", "[incremental]") {
  const auto lp = pennies();
  const auto old = solve(lp);
  SearchPathStore<double> store(old.path);
  const auto before = store.snapshot();
  store.repair_async(extend_with_action(lp, vec({100, 100})));
  // readers see either the old or the repaired path, never a mix
  const auto during = store.snapshot();
  CHECK((during->entries.front().table.rows() == 4 || during->entries.front().table.rows() == 5));
  store.wait();
  const auto after = store.snapshot();
  CHECK(before->entries.front().table.rows() == 4);
  CHECK(after->entries.front().table.rows() == 5);
  for (const auto& e : after->entries) CHECK(e.table.rows() == 5);

  SearchPathStore<double> cut(old.path);
  cut.repair_async(extend_with_action(lp, vec({-2, -0.5})));
  CHECK_THROWS_AS(cut.wait(), Error);
  CHECK(cut.snapshot()->entries.front().table.rows() == 4);
}
