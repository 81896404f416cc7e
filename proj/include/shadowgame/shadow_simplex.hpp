#pragma once

// Shadow-vertex simplex method over the canonical LP  max c^T x, A x <= b.
//
// The search keeps a table relative to the ordered active set Omega:
//   c   = sum_j alpha_j A_{Omega_j},   Qc = -sum_j alpha_j b_{Omega_j}
//   u   = sum_j beta_j  A_{Omega_j},   Qu = -sum_j beta_j  b_{Omega_j}
//   A_i = sum_j gamma_ij A_{Omega_j},  phi_i = b_i - sum_j gamma_ij b_{Omega_j}
// so -Qc is the objective at the vertex and phi holds the row slacks. The
// auxiliary objective u makes the starting vertex optimal for w(0) = u; each
// pivot advances w(mu) = u + mu c to the next breakpoint without ever
// materializing mu.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "shadowgame/errors.hpp"
#include "shadowgame/lp_core.hpp"
#include "shadowgame/numeric.hpp"

namespace shadowgame {

template <typename Scalar>
struct SearchTable {
  Vector<Scalar> alpha;
  Vector<Scalar> beta;
  Scalar qc = Scalar(0);
  Scalar qu = Scalar(0);
  Matrix<Scalar> gamma;
  Vector<Scalar> phi;
  ActiveSet active_set;

  Scalar objective() const { return -qc; }
  std::size_t rows() const { return static_cast<std::size_t>(gamma.rows()); }
};

template <typename Scalar>
struct AuxiliaryObjective {
  Vector<Scalar> u;
  Vector<Scalar> beta0;
  // 0 when the all-ones weights passed the screen, otherwise the number of
  // randomized draws taken
  std::size_t random_draws = 0;
};

enum class PathStatus { optimal, truncated };

template <typename Scalar>
struct PathEntry {
  Vertex<Scalar> vertex;
  SearchTable<Scalar> table;
};

template <typename Scalar>
struct SearchPath {
  std::vector<PathEntry<Scalar>> entries;
  PathStatus status = PathStatus::truncated;

  std::size_t pivots() const { return entries.empty() ? 0 : entries.size() - 1; }
  const PathEntry<Scalar>& back() const { return entries.back(); }
};

template <typename Scalar>
struct PivotOptimal {
  Scalar value;
};

struct PivotNoSolution {};

template <typename Scalar>
struct PivotStep {
  SearchTable<Scalar> table;
  std::size_t position;   // k: slot in the active set that changed
  std::size_t moved_out;  // constraint that left
  std::size_t moved_in;   // constraint that entered
  Scalar increase;        // objective gain of this step
};

template <typename Scalar>
using PivotOutcome = std::variant<PivotOptimal<Scalar>, PivotNoSolution, PivotStep<Scalar>>;

struct SolveOptions {
  std::uint64_t aux_seed = 0x5eedc0ffee123457ULL;
  std::size_t refactor_every = 50;
  // run verify_table every this many pivots; 0 disables
  std::size_t verify_every = 0;
  // 0 selects 10 * min(C(rows, n), 1e6)
  std::size_t iteration_limit = 0;
};

struct SolveStats {
  std::size_t pivots = 0;
  std::size_t non_increasing_steps = 0;
  std::size_t table_checks = 0;
  std::size_t table_diagnostics = 0;
  std::size_t refactorizations = 0;
  double min_increase = std::numeric_limits<double>::infinity();
  std::vector<std::string> diagnostics;

  void merge(const SolveStats& other) {
    pivots += other.pivots;
    non_increasing_steps += other.non_increasing_steps;
    table_checks += other.table_checks;
    table_diagnostics += other.table_diagnostics;
    refactorizations += other.refactorizations;
    if (other.min_increase < min_increase) min_increase = other.min_increase;
    for (const auto& d : other.diagnostics)
      if (diagnostics.size() < 20) diagnostics.push_back(d);
  }
};

template <typename Scalar>
struct SolveResult {
  Solution<Scalar> solution;
  SearchPath<Scalar> path;
  SolveStats stats;
};

// A step must raise the objective by more than this to count as strict.
inline constexpr double kStrictIncrease = 1e-12;
// Tolerance of the representation identities checked by verify_table.
inline constexpr double kTableTolerance = 1e-7;

/// Builds the table for `active` from scratch by direct solves against A_active.
template <typename Scalar>
SearchTable<Scalar> table_from_active_set(const CanonicalLP<Scalar>& lp, const ActiveSet& active,
                                          const Vector<Scalar>& beta) {
  const std::size_t n = lp.variables();
  if (active.size() != n) throw Error(ErrorCode::InvalidInput, "active set must have n members");
  const Matrix<Scalar> basis = basis_matrix(lp, active);
  Matrix<Scalar> rhs(n, lp.rows() + 1);
  rhs.leftCols(lp.rows()) = lp.A.transpose();
  rhs.col(lp.rows()) = lp.c;
  auto reps = solve_system(Matrix<Scalar>(basis.transpose()), rhs);
  Vector<Scalar> b_active(n);
  for (std::size_t j = 0; j < n; ++j) b_active(j) = lp.b(active[j]);
  auto x = solve_system(basis, b_active);
  if (!reps || !x) throw Error(ErrorCode::SingularBasis, "active rows are linearly dependent");

  SearchTable<Scalar> t;
  t.active_set = active;
  t.alpha = reps->col(lp.rows());
  t.beta = beta;
  t.qc = -dot(lp.c, *x);
  t.qu = -dot(t.beta, b_active);
  t.gamma = reps->leftCols(lp.rows()).transpose();
  t.phi = lp.b - lp.A * *x;
  for (std::size_t j = 0; j < n; ++j) {
    t.gamma.row(active[j]).setZero();
    t.gamma(active[j], j) = Scalar(1);
    t.phi(active[j]) = Scalar(0);
  }
  return t;
}

/// u = sum_j beta_j A_{Omega_j} for the table's active set.
template <typename Scalar>
Vector<Scalar> auxiliary_vector(const SearchTable<Scalar>& table, const CanonicalLP<Scalar>& lp) {
  return (table.beta.transpose() * basis_matrix(lp, table.active_set)).transpose();
}

/// Rebuilds alpha, gamma, phi and the Q values from the active set, and beta
/// from the auxiliary vector u, discarding accumulated update error.
template <typename Scalar>
SearchTable<Scalar> refactorize(const SearchTable<Scalar>& table, const CanonicalLP<Scalar>& lp,
                                const Vector<Scalar>& u) {
  auto beta = solve_system(Matrix<Scalar>(basis_matrix(lp, table.active_set).transpose()), u);
  if (!beta) throw Error(ErrorCode::SingularBasis, "active rows are linearly dependent");
  return table_from_active_set(lp, table.active_set, *beta);
}

namespace detail {

template <typename Scalar>
bool parallel(const Vector<Scalar>& u, const Vector<Scalar>& c) {
  const Scalar uc = dot(u, c);
  const Scalar cc = dot(c, c);
  const Scalar uu = dot(u, u);
  // |u|^2 |c|^2 - (u.c)^2 vanishes exactly when u and c are parallel
  const Scalar gram = uu * cc - uc * uc;
  if (ScalarTraits<Scalar>::exact) return gram == Scalar(0);
  return to_double(gram) <= 1e-24 * to_double(uu) * to_double(cc);
}

// Every pair of candidates for the first ratio test must give distinct ratios:
// beta_j alpha_k - beta_k alpha_j is, up to det(A_Omega), the determinant of
// the active rows with slots j and k replaced by u and c.
template <typename Scalar>
bool ratios_distinct(const Vector<Scalar>& alpha, const Vector<Scalar>& beta) {
  const Scalar tol = eps<Scalar>();
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (!(alpha(j) < -tol)) continue;
    for (Eigen::Index k = j + 1; k < alpha.size(); ++k) {
      if (!(alpha(k) < -tol)) continue;
      const Scalar minor = beta(j) * alpha(k) - beta(k) * alpha(j);
      if (ScalarTraits<Scalar>::exact) {
        if (minor == Scalar(0)) return false;
      } else {
        const double scale = std::abs(to_double(beta(j) * alpha(k))) + std::abs(to_double(beta(k) * alpha(j)));
        if (std::abs(to_double(minor)) <= 1e-12 * scale) return false;
      }
    }
  }
  return true;
}

inline double capped_binomial(std::size_t rows, std::size_t n) {
  double value = 1.0;
  for (std::size_t i = 1; i <= n && i <= rows; ++i) {
    value = value * static_cast<double>(rows - n + i) / static_cast<double>(i);
    if (value > 1e6) return 1e6;
  }
  return value;
}

}  // namespace detail

/// Picks positive weights beta for the initial active rows so that
/// u = sum beta_j A_{Omega0_j} is not parallel to c and the first ratio test
/// has no ties. Tries all-ones first, then up to 10 draws from U[0.5, 1.5].
template <typename Scalar>
AuxiliaryObjective<Scalar> choose_auxiliary(const CanonicalLP<Scalar>& lp, const ActiveSet& initial,
                                            std::uint64_t seed) {
  const std::size_t n = lp.variables();
  Matrix<Scalar> basis = basis_matrix(lp, initial);
  auto solved = solve_system(Matrix<Scalar>(basis.transpose()), lp.c);
  if (!solved) throw Error(ErrorCode::SingularBasis, "initial active rows are linearly dependent");
  const Vector<Scalar> alpha = *solved;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(0.5, 1.5);
  constexpr std::size_t kMaxDraws = 10;
  for (std::size_t attempt = 0; attempt <= kMaxDraws; ++attempt) {
    Vector<Scalar> beta(n);
    for (std::size_t j = 0; j < n; ++j) beta(j) = attempt == 0 ? Scalar(1) : from_double<Scalar>(draw(rng));
    Vector<Scalar> u = (beta.transpose() * basis).transpose();
    if (detail::parallel(u, lp.c)) continue;
    if (!detail::ratios_distinct(alpha, beta)) continue;
    return AuxiliaryObjective<Scalar>{std::move(u), std::move(beta), attempt};
  }
  throw Error(ErrorCode::RetryExhausted, "no auxiliary objective passed the general-position screen");
}

/// Starting active set. Plain games: the normal row of the smallest last-row
/// payoff plus the n-1 lower bounds. Budgeted games: ceil(B)-1 of the first
/// n-1 shares at their upper bound (the highest indices), the rest at zero,
/// plus the tightest normal row.
template <typename Scalar>
ActiveSet initial_active_set(const CanonicalLP<Scalar>& lp) {
  if (!lp.is_game()) throw Error(ErrorCode::InvalidInput, "initialization needs a game LP");
  const std::size_t n = lp.variables();
  const std::size_t m = lp.normal_count;
  std::vector<bool> at_upper(n - 1, false);
  if (lp.variant == LpVariant::budgeted) {
    const double budget = to_double(lp.budget);
    const auto ones = static_cast<std::size_t>(std::ceil(budget - 1e-12)) - 1;
    for (std::size_t i = 0; i < ones && i + 1 < n; ++i) at_upper[n - 2 - i] = true;
  }
  Vector<Scalar> shares = Vector<Scalar>::Zero(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (at_upper[i]) shares(i) = Scalar(1);

  std::size_t best = 0;
  Scalar best_level(0);
  for (std::size_t j = 0; j < m; ++j) {
    Scalar level = lp.b(j);
    for (std::size_t i = 0; i + 1 < n; ++i) level -= lp.A(j, i) * shares(i);
    if (j == 0 || level < best_level) {
      best = j;
      best_level = level;
    }
  }
  ActiveSet active{best};
  for (std::size_t i = 0; i + 1 < n; ++i) active.push_back(at_upper[i] ? m + n + i : m + 1 + i);
  return active;
}

template <typename Scalar>
struct InitResult {
  SearchTable<Scalar> table;
  Vertex<Scalar> vertex;
  AuxiliaryObjective<Scalar> auxiliary;
};

/// Initial table. For plain games alpha, gamma and phi come from closed forms
/// of the Omega0 = {l, m+1, ..., m+n-1} basis; budgeted games go through a
/// direct inversion.
template <typename Scalar>
InitResult<Scalar> init_table(const CanonicalLP<Scalar>& lp, std::uint64_t aux_seed = SolveOptions{}.aux_seed) {
  const ActiveSet active = initial_active_set(lp);
  auto aux = choose_auxiliary(lp, active, aux_seed);
  const std::size_t n = lp.variables();
  const std::size_t m = lp.normal_count;
  const std::size_t rows = lp.rows();
  const std::size_t l = active[0];

  if (lp.variant != LpVariant::simplex) {
    SearchTable<Scalar> t = table_from_active_set(lp, active, aux.beta0);
    Vertex<Scalar> v = vertex_from_active_set(lp, active);
    return InitResult<Scalar>{std::move(t), std::move(v), std::move(aux)};
  }

  SearchTable<Scalar> t;
  t.active_set = active;
  t.alpha.resize(n);
  t.alpha(0) = Scalar(1);
  for (std::size_t j = 1; j < n; ++j) t.alpha(j) = lp.A(l, j - 1);
  t.beta = aux.beta0;
  // only slot 0 has a nonzero right-hand side
  t.qc = -lp.b(l);
  t.qu = -t.beta(0) * lp.b(l);
  t.gamma = Matrix<Scalar>::Zero(rows, n);
  for (std::size_t i = 0; i < m; ++i) {
    t.gamma(i, 0) = Scalar(1);
    for (std::size_t j = 1; j < n; ++j) t.gamma(i, j) = lp.A(l, j - 1) - lp.A(i, j - 1);
  }
  for (std::size_t j = 1; j < n; ++j) t.gamma(m, j) = Scalar(-1);
  for (std::size_t j = 1; j < n; ++j) t.gamma(m + j, j) = Scalar(1);
  t.phi.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) t.phi(i) = lp.b(i) - t.gamma(i, 0) * lp.b(l);
  t.phi(l) = Scalar(0);

  Vertex<Scalar> v;
  v.x = Vector<Scalar>::Zero(n);
  v.x(n - 1) = lp.b(l);
  v.active_set = active;
  return InitResult<Scalar>{std::move(t), std::move(v), std::move(aux)};
}

/// Slot k leaving the active set: argmin over alpha_i < 0 of -beta_i/alpha_i.
/// Exact ties go to the lowest constraint index.
template <typename Scalar>
std::optional<std::size_t> select_leaving(const SearchTable<Scalar>& t) {
  const Scalar tol = eps<Scalar>();
  std::optional<std::size_t> best;
  Scalar best_ratio(0);
  for (Eigen::Index i = 0; i < t.alpha.size(); ++i) {
    if (!(t.alpha(i) < -tol)) continue;
    const Scalar ratio = -t.beta(i) / t.alpha(i);
    const auto slot = static_cast<std::size_t>(i);
    if (!best || ratio < best_ratio ||
        (ratio == best_ratio && t.active_set[slot] < t.active_set[*best])) {
      best = slot;
      best_ratio = ratio;
    }
  }
  return best;
}

/// Entering constraint l: argmax over inactive i with gamma_ik < 0 of
/// phi_i/gamma_ik, lowest index on exact ties. nullopt means unbounded.
template <typename Scalar>
std::optional<std::size_t> select_entering(const SearchTable<Scalar>& t, std::size_t k) {
  const Scalar tol = eps<Scalar>();
  std::vector<bool> active(t.rows(), false);
  for (auto idx : t.active_set) active[idx] = true;
  std::optional<std::size_t> best;
  Scalar best_ratio(0);
  const auto col = static_cast<Eigen::Index>(k);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (active[i]) continue;
    const Scalar g = t.gamma(static_cast<Eigen::Index>(i), col);
    if (!(g < -tol)) continue;
    const Scalar ratio = t.phi(static_cast<Eigen::Index>(i)) / g;
    if (!best || ratio > best_ratio) {
      best = i;
      best_ratio = ratio;
    }
  }
  return best;
}

/// Exchanges slot k for constraint l in place and returns the objective gain.
template <typename Scalar>
Scalar apply_pivot(SearchTable<Scalar>& t, std::size_t k, std::size_t l) {
  const auto n = t.alpha.size();
  const auto kk = static_cast<Eigen::Index>(k);
  const auto ll = static_cast<Eigen::Index>(l);
  const Vector<Scalar> pivot_row = t.gamma.row(ll).transpose();
  const Scalar glk = pivot_row(kk);
  const Scalar phi_l = t.phi(ll);
  Vector<Scalar> factor = pivot_row / glk;

  const Scalar ak = t.alpha(kk);
  const Scalar bk = t.beta(kk);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == kk) continue;
    t.alpha(j) -= ak * factor(j);
    t.beta(j) -= bk * factor(j);
  }
  t.alpha(kk) = ak / glk;
  t.beta(kk) = bk / glk;
  const Scalar gain = phi_l * ak / glk;
  t.qc -= gain;
  t.qu -= phi_l * bk / glk;

  for (Eigen::Index i = 0; i < t.gamma.rows(); ++i) {
    if (i == ll) continue;
    const Scalar gik = t.gamma(i, kk);
    if (gik == Scalar(0)) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == kk) continue;
      t.gamma(i, j) -= gik * factor(j);
    }
    t.gamma(i, kk) = gik / glk;
    t.phi(i) -= gik / glk * phi_l;
  }
  t.gamma.row(ll).setZero();
  t.gamma(ll, kk) = Scalar(1);
  t.phi(ll) = Scalar(0);
  t.active_set[k] = l;
  return gain;
}

/// Cheap structural screen run before every pivot.
template <typename Scalar>
void check_table_structure(const SearchTable<Scalar>& t, const CanonicalLP<Scalar>& lp) {
  const std::size_t n = lp.variables();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidTable, what); };
  if (t.active_set.size() != n || static_cast<std::size_t>(t.alpha.size()) != n ||
      static_cast<std::size_t>(t.beta.size()) != n)
    fail("table dimensions do not match the LP");
  if (t.rows() != lp.rows() || static_cast<std::size_t>(t.gamma.cols()) != n ||
      static_cast<std::size_t>(t.phi.size()) != lp.rows())
    fail("table row count does not match the LP");
  std::vector<bool> seen(lp.rows(), false);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t idx = t.active_set[j];
    if (idx >= lp.rows() || seen[idx]) fail("active set has an invalid or repeated index");
    seen[idx] = true;
    for (std::size_t c = 0; c < n; ++c)
      if (t.gamma(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(c)) != Scalar(c == j ? 1 : 0))
        fail("gamma row of active constraint " + std::to_string(idx) + " is not a unit row");
  }
}

/// One pivot of the shadow-vertex method.
template <typename Scalar>
PivotOutcome<Scalar> pivot_step(const SearchTable<Scalar>& table, const CanonicalLP<Scalar>& lp) {
  check_table_structure(table, lp);
  auto k = select_leaving(table);
  if (!k) return PivotOptimal<Scalar>{table.objective()};
  auto l = select_entering(table, *k);
  if (!l) return PivotNoSolution{};
  PivotStep<Scalar> step{table, *k, table.active_set[*k], *l, Scalar(0)};
  step.increase = apply_pivot(step.table, *k, *l);
  return step;
}

/// Checks every table identity; an empty result means the table is sound.
/// Pass u to also check the beta representation.
template <typename Scalar>
std::vector<std::string> verify_table(const SearchTable<Scalar>& t, const CanonicalLP<Scalar>& lp,
                                      const Vector<Scalar>* u = nullptr) {
  std::vector<std::string> out;
  const std::size_t n = lp.variables();
  try {
    check_table_structure(t, lp);
  } catch (const Error& e) {
    out.emplace_back(std::string("structure: ") + e.what());
    return out;
  }
  const Scalar scale = std::max(max_abs(lp.A), Scalar(1));
  const Scalar tol = ScalarTraits<Scalar>::exact ? Scalar(0) : from_double<Scalar>(kTableTolerance) * scale;
  const Matrix<Scalar> basis = basis_matrix(lp, t.active_set);
  Vector<Scalar> b_active(n);
  for (std::size_t j = 0; j < n; ++j) b_active(j) = lp.b(t.active_set[j]);
  auto off = [&](const Vector<Scalar>& have, const Vector<Scalar>& want) {
    Scalar worst(0);
    for (Eigen::Index i = 0; i < have.size(); ++i)
      if (abs_value(Scalar(have(i) - want(i))) > worst) worst = abs_value(Scalar(have(i) - want(i)));
    return worst;
  };
  auto describe = [](const char* what, const Scalar& err) {
    std::ostringstream s;
    s << what << " off by " << to_double(err);
    return s.str();
  };

  const Vector<Scalar> c_rep = (t.alpha.transpose() * basis).transpose();
  if (Scalar e = off(c_rep, lp.c); e > tol) out.push_back(describe("c-representation (alpha)", e));
  if (Scalar e = abs_value(Scalar(t.qc + dot(t.alpha, b_active))); e > tol)
    out.push_back(describe("Qc = -alpha . b_active", e));
  if (u) {
    const Vector<Scalar> u_rep = (t.beta.transpose() * basis).transpose();
    if (Scalar e = off(u_rep, *u); e > tol) out.push_back(describe("u-representation (beta)", e));
  }
  if (Scalar e = abs_value(Scalar(t.qu + dot(t.beta, b_active))); e > tol)
    out.push_back(describe("Qu = -beta . b_active", e));

  for (std::size_t i = 0; i < lp.rows(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Vector<Scalar> rep = (t.gamma.row(ii) * basis).transpose();
    const Vector<Scalar> row = lp.A.row(ii).transpose();
    if (Scalar e = off(rep, row); e > tol) {
      out.push_back(describe(("row-representation (gamma) of constraint " + std::to_string(i)).c_str(), e));
    }
    const Scalar slack = lp.b(ii) - dot(Vector<Scalar>(t.gamma.row(ii).transpose()), b_active);
    if (Scalar e = abs_value(Scalar(slack - t.phi(ii))); e > tol)
      out.push_back(describe(("slack (phi) of constraint " + std::to_string(i)).c_str(), e));
    if (t.phi(ii) < -eps<Scalar>()) {
      std::ostringstream s;
      s << "feasibility: phi of constraint " << i << " is " << to_double(t.phi(ii));
      out.push_back(s.str());
    }
  }

  auto x = solve_system(basis, b_active);
  if (!x) {
    out.emplace_back("active rows are singular");
  } else {
    if (Scalar e = abs_value(Scalar(dot(lp.c, *x) - t.objective())); e > tol)
      out.push_back(describe("objective -Qc vs c^T x", e));
  }
  return out;
}

namespace detail {

enum class RunStatus { optimal, no_solution, interrupted };

/// Pivots from the last entry of `path` until termination. `on_step` sees each
/// appended entry together with the constraints that left and entered, and
/// returns false to stop early.
template <typename Scalar, typename OnStep>
RunStatus run_pivots(const CanonicalLP<Scalar>& lp, SearchPath<Scalar>& path, const Vector<Scalar>& u,
                     const SolveOptions& options, SolveStats& stats, OnStep&& on_step) {
  const std::size_t limit =
      options.iteration_limit != 0
          ? options.iteration_limit
          : static_cast<std::size_t>(10.0 * detail::capped_binomial(lp.rows(), lp.variables()));
  std::size_t taken = 0;
  while (true) {
    const SearchTable<Scalar>& current = path.entries.back().table;
    check_table_structure(current, lp);
    auto k = select_leaving(current);
    if (!k) {
      path.status = PathStatus::optimal;
      return RunStatus::optimal;
    }
    auto l = select_entering(current, *k);
    if (!l) {
      path.status = PathStatus::truncated;
      return RunStatus::no_solution;
    }
    if (++taken > limit) throw Error(ErrorCode::IterationLimit, "pivot limit reached; cycling suspected");

    SearchTable<Scalar> next = current;
    const std::size_t out = next.active_set[*k];
    const double gain = to_double(apply_pivot(next, *k, *l));
    ++stats.pivots;
    if (gain < stats.min_increase) stats.min_increase = gain;
    if (!(gain > kStrictIncrease)) ++stats.non_increasing_steps;
    if (options.refactor_every != 0 && stats.pivots % options.refactor_every == 0) {
      next = refactorize(next, lp, u);
      ++stats.refactorizations;
    }
    if (options.verify_every != 0 && stats.pivots % options.verify_every == 0) {
      ++stats.table_checks;
      auto found = verify_table(next, lp, &u);
      stats.table_diagnostics += found.size();
      for (auto& d : found)
        if (stats.diagnostics.size() < 20) stats.diagnostics.push_back(std::move(d));
    }
    Vertex<Scalar> v = vertex_from_active_set(lp, next.active_set);
    path.entries.push_back(PathEntry<Scalar>{std::move(v), std::move(next)});
    if (!on_step(path.entries.back(), out, *l)) return RunStatus::interrupted;
  }
}

template <typename Scalar>
Solution<Scalar> solution_from_path(const CanonicalLP<Scalar>& lp, const SearchPath<Scalar>& path,
                                    RunStatus status) {
  if (status != RunStatus::optimal) return Solution<Scalar>{};
  return make_solution(lp, path.back().vertex.x);
}

}  // namespace detail

/// Full shadow-vertex solve: initialization followed by pivots to termination,
/// recording every visited vertex with its table.
template <typename Scalar>
SolveResult<Scalar> solve(const CanonicalLP<Scalar>& lp, const SolveOptions& options = {}) {
  SolveResult<Scalar> result;
  auto init = init_table(lp, options.aux_seed);
  result.path.entries.push_back(PathEntry<Scalar>{std::move(init.vertex), std::move(init.table)});
  if (options.verify_every != 0) {
    ++result.stats.table_checks;
    auto found = verify_table(result.path.back().table, lp, &init.auxiliary.u);
    result.stats.table_diagnostics += found.size();
    for (auto& d : found) result.stats.diagnostics.push_back(std::move(d));
  }
  auto status = detail::run_pivots(lp, result.path, init.auxiliary.u, options, result.stats,
                                   [](const PathEntry<Scalar>&, std::size_t, std::size_t) { return true; });
  result.solution = detail::solution_from_path(lp, result.path, status);
  return result;
}

}  // namespace shadowgame
