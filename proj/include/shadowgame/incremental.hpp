#pragma once

// Warm-started reoptimization after player 2 gains an action.
//
// The new action becomes constraint index m (0-based) of the extended LP,
// where m is the old normal-row count; every old index >= m moves up by one.
// Stored search paths are reused: vertices of the old path that satisfy the
// new row stay valid shadow vertices once their tables learn the new row.

#include <algorithm>
#include <cstddef>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "shadowgame/errors.hpp"
#include "shadowgame/lp_core.hpp"
#include "shadowgame/shadow_simplex.hpp"

namespace shadowgame {

template <typename Scalar>
struct ExtensionEvent {
  CanonicalLP<Scalar> old_lp;
  CanonicalLP<Scalar> new_lp;
  Solution<Scalar> old_solution;
  SearchPath<Scalar> old_path;
};

template <typename Scalar>
struct IterativeResult {
  Solution<Scalar> solution;
  SearchPath<Scalar> path;
  // index in `path` of the vertex the pivots resumed from
  std::optional<std::size_t> restart_index;
  std::size_t pivots_used = 0;
  bool retained = false;
  // pivots spent repairing the stored path when the optimum was retained
  std::size_t repair_pivots = 0;
  // steps where the new constraint failed to enter first or left again
  std::size_t persistence_violations = 0;
  // whether the restart vertex has the best objective among all feasible
  // old-path vertices (not only the scanned prefix)
  bool restart_is_best_feasible = true;
  SolveStats stats;
};

/// Index of the row added by the most recent extend_with_action.
template <typename Scalar>
std::size_t new_row_index(const CanonicalLP<Scalar>& new_lp) {
  if (new_lp.normal_count == 0) throw Error(ErrorCode::InvalidInput, "LP has no normal rows");
  return new_lp.normal_count - 1;
}

template <typename Scalar>
bool satisfies_row(const CanonicalLP<Scalar>& lp, std::size_t row, const Vector<Scalar>& x) {
  const auto r = static_cast<Eigen::Index>(row);
  return dot(Vector<Scalar>(lp.A.row(r).transpose()), x) <= lp.b(r) + eps<Scalar>();
}

/// The old optimum stays optimal iff it satisfies the new row.
template <typename Scalar>
bool retains_optimality(const Solution<Scalar>& old_solution, const CanonicalLP<Scalar>& new_lp) {
  if (old_solution.status != SolutionStatus::optimal)
    throw Error(ErrorCode::InvalidInput, "retention test needs an optimal old solution");
  return satisfies_row(new_lp, new_row_index(new_lp), old_solution.x);
}

inline ActiveSet shift_active_set(const ActiveSet& active, std::size_t inserted_at) {
  ActiveSet out = active;
  for (auto& idx : out)
    if (idx >= inserted_at) ++idx;
  return out;
}

/// Adds the new row to a table of the old LP. Returns nullopt when the row's
/// slack at the table's vertex is below -eps.
template <typename Scalar>
std::optional<SearchTable<Scalar>> try_insert_constraint_row(const SearchTable<Scalar>& table,
                                                             const CanonicalLP<Scalar>& new_lp) {
  const std::size_t at = new_row_index(new_lp);
  const std::size_t n = new_lp.variables();
  if (table.rows() + 1 != new_lp.rows() || table.active_set.size() != n)
    throw Error(ErrorCode::InvalidInput, "table does not belong to the LP before extension");

  SearchTable<Scalar> out;
  out.alpha = table.alpha;
  out.beta = table.beta;
  out.qc = table.qc;
  out.qu = table.qu;
  out.active_set = shift_active_set(table.active_set, at);

  const Matrix<Scalar> basis = basis_matrix(new_lp, out.active_set);
  Vector<Scalar> b_active(n);
  for (std::size_t j = 0; j < n; ++j) b_active(j) = new_lp.b(out.active_set[j]);
  const auto row = static_cast<Eigen::Index>(at);
  auto gamma_new = solve_system(Matrix<Scalar>(basis.transpose()), Vector<Scalar>(new_lp.A.row(row).transpose()));
  auto x = solve_system(basis, b_active);
  if (!gamma_new || !x) throw Error(ErrorCode::SingularBasis, "active rows are linearly dependent");
  const Scalar phi_new = new_lp.b(row) - dot(Vector<Scalar>(new_lp.A.row(row).transpose()), *x);
  if (phi_new < -eps<Scalar>()) return std::nullopt;

  const Eigen::Index old_rows = table.gamma.rows();
  out.gamma.resize(old_rows + 1, table.gamma.cols());
  out.phi.resize(old_rows + 1);
  out.gamma.topRows(row) = table.gamma.topRows(row);
  out.phi.head(row) = table.phi.head(row);
  out.gamma.row(row) = gamma_new->transpose();
  out.phi(row) = phi_new;
  out.gamma.bottomRows(old_rows - row) = table.gamma.bottomRows(old_rows - row);
  out.phi.tail(old_rows - row) = table.phi.tail(old_rows - row);
  return out;
}

template <typename Scalar>
SearchTable<Scalar> insert_constraint_row(const SearchTable<Scalar>& table, const CanonicalLP<Scalar>& new_lp) {
  auto out = try_insert_constraint_row(table, new_lp);
  if (!out) throw Error(ErrorCode::InfeasibleAtVertex, "vertex violates the new constraint");
  return *std::move(out);
}

namespace detail {

template <typename Scalar>
std::optional<PathEntry<Scalar>> augment_entry(const PathEntry<Scalar>& entry, const CanonicalLP<Scalar>& new_lp) {
  auto table = try_insert_constraint_row(entry.table, new_lp);
  if (!table) return std::nullopt;
  Vertex<Scalar> v{entry.vertex.x, table->active_set};
  return PathEntry<Scalar>{std::move(v), *std::move(table)};
}

/// Front-to-back scan keeping old entries until the first that violates the
/// new row. No tolerance here: pivoting onward from a vertex that is outside
/// the new row by less than eps can lower the objective.
template <typename Scalar>
std::vector<PathEntry<Scalar>> feasible_prefix(const SearchPath<Scalar>& old_path, const CanonicalLP<Scalar>& new_lp) {
  const auto at = static_cast<Eigen::Index>(new_row_index(new_lp));
  std::vector<PathEntry<Scalar>> prefix;
  for (const auto& entry : old_path.entries) {
    auto augmented = augment_entry(entry, new_lp);
    if (!augmented || augmented->table.phi(at) < Scalar(0)) break;
    prefix.push_back(*std::move(augmented));
  }
  return prefix;
}

inline ActiveSet sorted(ActiveSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

inline bool contains(const ActiveSet& s, std::size_t idx) {
  return std::find(s.begin(), s.end(), idx) != s.end();
}

}  // namespace detail

/// Rebuilds a stored path for the extended LP when the old optimum survives.
/// The feasible prefix is kept, pivots run from its last vertex until they
/// land on a vertex of the old path (compared by active set) or reach the
/// optimum, and the old tail is re-attached from there.
template <typename Scalar>
SearchPath<Scalar> repair_path(const SearchPath<Scalar>& old_path, const CanonicalLP<Scalar>& new_lp,
                               const SolveOptions& options = {}, SolveStats* stats_out = nullptr) {
  if (old_path.entries.empty()) throw Error(ErrorCode::InvalidInput, "empty search path");
  const std::size_t at = new_row_index(new_lp);
  if (!satisfies_row(new_lp, at, old_path.back().vertex.x))
    throw Error(ErrorCode::OptimumCutOff, "old optimum violates the new constraint; use iterative_solve");

  SolveStats stats;
  SearchPath<Scalar> path;
  path.entries = detail::feasible_prefix(old_path, new_lp);
  if (path.entries.size() == old_path.entries.size()) {
    path.status = old_path.status;
    if (stats_out) *stats_out = stats;
    return path;
  }

  Vector<Scalar> u;
  if (path.entries.empty()) {
    auto init = init_table(new_lp, options.aux_seed);
    u = init.auxiliary.u;
    path.entries.push_back(PathEntry<Scalar>{std::move(init.vertex), std::move(init.table)});
  } else {
    u = auxiliary_vector(path.back().table, new_lp);
  }

  std::map<ActiveSet, std::size_t> old_index;
  for (std::size_t i = 0; i < old_path.entries.size(); ++i)
    old_index.emplace(detail::sorted(shift_active_set(old_path.entries[i].vertex.active_set, at)), i);

  std::optional<std::size_t> last_attached;
  while (true) {
    std::size_t rejoin = 0;
    auto status = detail::run_pivots(new_lp, path, u, options, stats,
                                     [&](const PathEntry<Scalar>& e, std::size_t, std::size_t) {
                                       auto it = old_index.find(detail::sorted(e.vertex.active_set));
                                       if (it == old_index.end()) return true;
                                       if (last_attached && it->second <= *last_attached) return true;
                                       rejoin = it->second;
                                       return false;
                                     });
    if (status == detail::RunStatus::optimal) break;
    if (status == detail::RunStatus::no_solution)
      throw Error(ErrorCode::NoSolution, "path repair met an unbounded edge");
    last_attached = rejoin;
    bool reached_end = true;
    for (std::size_t i = rejoin + 1; i < old_path.entries.size(); ++i) {
      auto augmented = detail::augment_entry(old_path.entries[i], new_lp);
      if (!augmented) {
        reached_end = false;
        break;
      }
      path.entries.push_back(*std::move(augmented));
      last_attached = i;
    }
    if (reached_end) {
      path.status = old_path.status;
      break;
    }
  }
  if (stats_out) *stats_out = stats;
  return path;
}

/// Reoptimizes after one new action, reusing the stored path of the old LP.
template <typename Scalar>
IterativeResult<Scalar> iterative_solve(const ExtensionEvent<Scalar>& event, const SolveOptions& options = {}) {
  const CanonicalLP<Scalar>& lp = event.new_lp;
  if (lp.rows() != event.old_lp.rows() + 1 || lp.normal_count != event.old_lp.normal_count + 1)
    throw Error(ErrorCode::InvalidInput, "new LP is not a one-row extension of the old LP");
  if (event.old_path.entries.empty()) throw Error(ErrorCode::InvalidInput, "empty search path");
  const std::size_t at = new_row_index(lp);

  IterativeResult<Scalar> result;
  if (retains_optimality(event.old_solution, lp)) {
    result.retained = true;
    result.solution = event.old_solution;
    result.path = repair_path(event.old_path, lp, options, &result.stats);
    result.repair_pivots = result.stats.pivots;
    return result;
  }

  result.path.entries = detail::feasible_prefix(event.old_path, lp);
  if (result.path.entries.empty()) {
    auto fresh = solve(lp, options);
    result.solution = std::move(fresh.solution);
    result.path = std::move(fresh.path);
    result.stats = std::move(fresh.stats);
    result.pivots_used = result.stats.pivots;
    return result;
  }

  result.restart_index = result.path.entries.size() - 1;
  {
    const Scalar restart_value = result.path.back().table.objective();
    for (const auto& entry : event.old_path.entries)
      if (satisfies_row(lp, at, entry.vertex.x) && entry.table.objective() > restart_value + eps<Scalar>())
        result.restart_is_best_feasible = false;
  }

  const Vector<Scalar> u = auxiliary_vector(result.path.back().table, lp);
  bool first = true;
  bool inside = false;
  auto status = detail::run_pivots(lp, result.path, u, options, result.stats,
                                   [&](const PathEntry<Scalar>& e, std::size_t, std::size_t) {
                                     const bool now = detail::contains(e.vertex.active_set, at);
                                     if ((first && !now) || (inside && !now)) ++result.persistence_violations;
                                     inside = inside || now;
                                     first = false;
                                     return true;
                                   });
  result.pivots_used = result.stats.pivots;
  result.solution = detail::solution_from_path(lp, result.path, status);
  return result;
}

/// Holds the current search path and swaps in repaired versions computed in
/// the background. Readers always get a complete path.
template <typename Scalar>
class SearchPathStore {
 public:
  explicit SearchPathStore(SearchPath<Scalar> path)
      : current_(std::make_shared<const SearchPath<Scalar>>(std::move(path))) {}

  SearchPathStore(const SearchPathStore&) = delete;
  SearchPathStore& operator=(const SearchPathStore&) = delete;

  ~SearchPathStore() {
    if (pending_.valid()) pending_.wait();
  }

  std::shared_ptr<const SearchPath<Scalar>> snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return current_;
  }

  /// Starts repairing the current path for `new_lp`; the result replaces the
  /// stored path when it completes. Waits for any earlier repair first.
  void repair_async(CanonicalLP<Scalar> new_lp, SolveOptions options = {}) {
    wait();
    auto base = snapshot();
    pending_ = std::async(std::launch::async, [this, base, lp = std::move(new_lp), options]() {
      auto repaired = std::make_shared<const SearchPath<Scalar>>(repair_path(*base, lp, options));
      std::lock_guard<std::mutex> lock(mutex_);
      current_ = std::move(repaired);
    });
  }

  /// Blocks until the pending repair finishes; rethrows its error if any.
  void wait() {
    if (pending_.valid()) pending_.get();
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const SearchPath<Scalar>> current_;
  std::future<void> pending_;
};

}  // namespace shadowgame
