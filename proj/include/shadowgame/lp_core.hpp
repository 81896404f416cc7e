#pragma once

// Game-to-LP transformations.
//
// A zero-sum game with payoff G (n x m, player 1 maximizes) is rewritten in
// the canonical form  max c^T x  s.t.  A x <= b  over x = [xbar_1..xbar_{n-1}, l],
// where xbar_n is eliminated through the probability (or budget) constraint.
// Row layout, 0-based:
//
//   [0, m)             normal rows      [-(G^T T) | 1] x <= B * G^T e_n
//   m                  mass row         [1^T | 0] x <= B
//   [m+1, m+n)         lower bounds     [-I | 0] x <= 0
//   [m+n, m+2n-1)      upper bounds     [ I | 0] x <= 1          (budgeted only)
//   m+2n-1             last-share cap   [-1^T | 0] x <= -(B-1)   (budgeted only)
//
// with B = 1 for the plain game.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "shadowgame/errors.hpp"
#include "shadowgame/numeric.hpp"

namespace shadowgame {

using ActiveSet = std::vector<std::size_t>;

/// Player 1's payoff matrix: rows are player-1 actions, columns player-2 actions.
class PayoffMatrix {
 public:
  PayoffMatrix() = default;

  explicit PayoffMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 2) throw Error(ErrorCode::InvalidInput, "payoff matrix needs at least 2 rows");
    if (entries_.cols() < 1) throw Error(ErrorCode::InvalidInput, "payoff matrix needs at least 1 column");
    if (!entries_.allFinite()) throw Error(ErrorCode::InvalidInput, "payoff matrix has non-finite entries");
  }

  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  const Eigen::MatrixXd& entries() const { return entries_; }

  PayoffMatrix with_column(const Eigen::VectorXd& g) const {
    if (static_cast<std::size_t>(g.size()) != rows())
      throw Error(ErrorCode::InvalidInput, "new column length does not match row count");
    Eigen::MatrixXd grown(entries_.rows(), entries_.cols() + 1);
    grown << entries_, g;
    return PayoffMatrix(std::move(grown));
  }

 private:
  Eigen::MatrixXd entries_;
};

/// Reads "n m" followed by n rows of m numbers.
inline PayoffMatrix read_payoff_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError(0, "empty matrix document");
  long long n = 0;
  long long m = 0;
  {
    std::istringstream header(line);
    std::string rest;
    if (!(header >> n >> m) || (header >> rest)) throw ParseError(line_no, "expected header \"n m\"");
  }
  if (n < 2 || m < 1) throw ParseError(line_no, "need n >= 2 and m >= 1");
  Eigen::MatrixXd entries(n, m);
  for (long long i = 0; i < n; ++i) {
    if (!next_line()) throw ParseError(line_no, "missing matrix row " + std::to_string(i + 1));
    std::istringstream row(line);
    for (long long j = 0; j < m; ++j) {
      std::string token;
      if (!(row >> token)) throw ParseError(line_no, "row has fewer than m entries");
      try {
        std::size_t used = 0;
        entries(i, j) = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ParseError(line_no, "not a number: " + token);
      }
      if (!std::isfinite(entries(i, j))) throw ParseError(line_no, "non-finite entry");
    }
    std::string extra;
    if (row >> extra) throw ParseError(line_no, "row has more than m entries");
  }
  if (next_line()) throw ParseError(line_no, "trailing content after matrix");
  return PayoffMatrix(std::move(entries));
}

enum class LpVariant { simplex, budgeted, general };

template <typename Scalar>
struct CanonicalLP {
  Matrix<Scalar> A;
  Vector<Scalar> b;
  Vector<Scalar> c;
  std::size_t normal_count = 0;
  std::size_t prob_block_start = 0;
  LpVariant variant = LpVariant::general;
  Scalar budget = Scalar(1);

  std::size_t rows() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t variables() const { return static_cast<std::size_t>(A.cols()); }
  bool is_game() const { return variant != LpVariant::general; }
};

template <typename Scalar>
struct Vertex {
  Vector<Scalar> x;
  ActiveSet active_set;
};

enum class SolutionStatus { optimal, no_solution };

template <typename Scalar>
struct Solution {
  Vector<Scalar> x;
  Scalar value = Scalar(0);
  Vector<Scalar> strategy;
  SolutionStatus status = SolutionStatus::no_solution;
};

template <typename Scalar>
struct StrategyValue {
  Vector<Scalar> strategy;
  Scalar value;
};

namespace detail {

template <typename Scalar>
void fill_normal_rows(CanonicalLP<Scalar>& lp, const PayoffMatrix& G, const Scalar& budget) {
  const std::size_t n = G.rows();
  const std::size_t m = G.cols();
  for (std::size_t j = 0; j < m; ++j) {
    const Scalar last = from_double<Scalar>(G(n - 1, j));
    for (std::size_t i = 0; i + 1 < n; ++i) lp.A(j, i) = last - from_double<Scalar>(G(i, j));
    lp.A(j, n - 1) = Scalar(1);
    lp.b(j) = budget * last;
  }
}

}  // namespace detail

/// Canonical LP of player 1's security-strategy program.
template <typename Scalar = double>
CanonicalLP<Scalar> canonicalize(const PayoffMatrix& G) {
  const std::size_t n = G.rows();
  const std::size_t m = G.cols();
  if (n < 2 || m < 1) throw Error(ErrorCode::InvalidInput, "payoff matrix too small");
  if (!G.entries().allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite payoff");
  CanonicalLP<Scalar> lp;
  lp.A = Matrix<Scalar>::Zero(m + n, n);
  lp.b = Vector<Scalar>::Zero(m + n);
  lp.c = Vector<Scalar>::Zero(n);
  lp.c(n - 1) = Scalar(1);
  lp.normal_count = m;
  lp.prob_block_start = m;
  lp.variant = LpVariant::simplex;
  lp.budget = Scalar(1);
  detail::fill_normal_rows(lp, G, lp.budget);
  for (std::size_t i = 0; i + 1 < n; ++i) lp.A(m, i) = Scalar(1);
  lp.b(m) = Scalar(1);
  for (std::size_t i = 0; i + 1 < n; ++i) lp.A(m + 1 + i, i) = Scalar(-1);
  return lp;
}

/// Canonical LP of the budgeted checkpoint game: 0 <= xbar <= 1, sum xbar = B.
template <typename Scalar = double>
CanonicalLP<Scalar> canonicalize_budgeted(const PayoffMatrix& G, double budget) {
  const std::size_t n = G.rows();
  const std::size_t m = G.cols();
  if (!std::isfinite(budget) || budget <= 0.0 || budget > static_cast<double>(n))
    throw Error(ErrorCode::InvalidInput, "budget must lie in (0, n]");
  if (!G.entries().allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite payoff");
  const Scalar B = from_double<Scalar>(budget);
  CanonicalLP<Scalar> lp;
  lp.A = Matrix<Scalar>::Zero(m + 2 * n, n);
  lp.b = Vector<Scalar>::Zero(m + 2 * n);
  lp.c = Vector<Scalar>::Zero(n);
  lp.c(n - 1) = Scalar(1);
  lp.normal_count = m;
  lp.prob_block_start = m;
  lp.variant = LpVariant::budgeted;
  lp.budget = B;
  detail::fill_normal_rows(lp, G, B);
  for (std::size_t i = 0; i + 1 < n; ++i) lp.A(m, i) = Scalar(1);
  lp.b(m) = B;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lp.A(m + 1 + i, i) = Scalar(-1);
    lp.A(m + n + i, i) = Scalar(1);
    lp.b(m + n + i) = Scalar(1);
    lp.A(m + 2 * n - 1, i) = Scalar(-1);
  }
  lp.b(m + 2 * n - 1) = Scalar(1) - B;
  return lp;
}

/// Arbitrary max c^T x s.t. A x <= b, for hand-built test problems.
template <typename Scalar>
CanonicalLP<Scalar> make_general_lp(Matrix<Scalar> A, Vector<Scalar> b, Vector<Scalar> c) {
  if (A.rows() != b.size() || A.cols() != c.size())
    throw Error(ErrorCode::InvalidInput, "inconsistent LP dimensions");
  CanonicalLP<Scalar> lp;
  lp.normal_count = static_cast<std::size_t>(A.rows());
  lp.prob_block_start = lp.normal_count;
  lp.A = std::move(A);
  lp.b = std::move(b);
  lp.c = std::move(c);
  lp.variant = LpVariant::general;
  return lp;
}

/// The canonical row for a new player-2 action with payoff column g.
template <typename Scalar>
std::pair<Vector<Scalar>, Scalar> action_row(const CanonicalLP<Scalar>& lp, const Vector<Scalar>& g) {
  const std::size_t n = lp.variables();
  if (static_cast<std::size_t>(g.size()) != n)
    throw Error(ErrorCode::InvalidInput, "new column length does not match player-1 action count");
  Vector<Scalar> row(n);
  for (std::size_t i = 0; i + 1 < n; ++i) row(i) = g(n - 1) - g(i);
  row(n - 1) = Scalar(1);
  return {row, lp.budget * g(n - 1)};
}

/// Inserts the constraint of a new player-2 action at index normal_count;
/// every later row shifts down by one.
template <typename Scalar>
CanonicalLP<Scalar> extend_with_action(const CanonicalLP<Scalar>& lp, const Vector<Scalar>& g) {
  if (!lp.is_game()) throw Error(ErrorCode::InvalidInput, "only game LPs can be extended");
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (!std::isfinite(to_double(g(i)))) throw Error(ErrorCode::InvalidInput, "non-finite column entry");
  auto [row, rhs] = action_row(lp, g);
  const Eigen::Index at = static_cast<Eigen::Index>(lp.normal_count);
  const Eigen::Index rows = lp.A.rows();
  const Eigen::Index n = lp.A.cols();
  CanonicalLP<Scalar> out = lp;
  out.A.resize(rows + 1, n);
  out.b.resize(rows + 1);
  out.A.topRows(at) = lp.A.topRows(at);
  out.b.head(at) = lp.b.head(at);
  out.A.row(at) = row.transpose();
  out.b(at) = rhs;
  out.A.bottomRows(rows - at) = lp.A.bottomRows(rows - at);
  out.b.tail(rows - at) = lp.b.tail(rows - at);
  out.normal_count = lp.normal_count + 1;
  out.prob_block_start = out.normal_count;
  return out;
}

template <typename Scalar>
  requires(!std::is_same_v<Scalar, double>)
CanonicalLP<Scalar> extend_with_action(const CanonicalLP<Scalar>& lp, const Eigen::VectorXd& g) {
  Vector<Scalar> converted(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) converted(i) = from_double<Scalar>(g(i));
  return extend_with_action(lp, converted);
}

/// Maps x = [xbar_1..xbar_{n-1}, l] back to the full strategy; xbar_n is
/// budget - sum of the others (budget 1 for a probability vector).
template <typename Scalar>
StrategyValue<Scalar> recover_strategy(const Vector<Scalar>& x, const Scalar& budget = Scalar(1)) {
  const Eigen::Index n = x.size();
  StrategyValue<Scalar> out{Vector<Scalar>(n), x(n - 1)};
  Scalar rest = budget;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    out.strategy(i) = x(i);
    rest -= x(i);
  }
  out.strategy(n - 1) = rest;
  return out;
}

template <typename Scalar>
Solution<Scalar> make_solution(const CanonicalLP<Scalar>& lp, const Vector<Scalar>& x) {
  Solution<Scalar> s;
  s.x = x;
  auto recovered = recover_strategy(x, lp.budget);
  s.strategy = std::move(recovered.strategy);
  s.value = dot(lp.c, x);
  s.status = SolutionStatus::optimal;
  return s;
}

template <typename Scalar>
Matrix<Scalar> basis_matrix(const CanonicalLP<Scalar>& lp, const ActiveSet& active) {
  const std::size_t n = lp.variables();
  Matrix<Scalar> basis(n, n);
  for (std::size_t j = 0; j < active.size(); ++j) {
    if (active[j] >= lp.rows()) throw Error(ErrorCode::InvalidInput, "active index out of range");
    basis.row(j) = lp.A.row(active[j]);
  }
  return basis;
}

/// Solves A_active x = b_active.
template <typename Scalar>
Vertex<Scalar> vertex_from_active_set(const CanonicalLP<Scalar>& lp, const ActiveSet& active) {
  const std::size_t n = lp.variables();
  if (active.size() != n) throw Error(ErrorCode::InvalidInput, "active set must have n members");
  Vector<Scalar> rhs(n);
  for (std::size_t j = 0; j < n; ++j) rhs(j) = lp.b(active[j]);
  auto x = solve_system(basis_matrix(lp, active), rhs);
  if (!x) throw Error(ErrorCode::SingularBasis, "active rows are linearly dependent");
  return Vertex<Scalar>{std::move(*x), active};
}

/// Largest constraint violation max_i (A_i x - b_i), or -inf for no rows.
template <typename Scalar>
Scalar max_violation(const CanonicalLP<Scalar>& lp, const Vector<Scalar>& x) {
  Vector<Scalar> r = lp.A * x - lp.b;
  Scalar worst = r.size() > 0 ? r(0) : Scalar(0);
  for (Eigen::Index i = 1; i < r.size(); ++i)
    if (r(i) > worst) worst = r(i);
  return worst;
}

template <typename Scalar>
Scalar feasibility_tolerance(const CanonicalLP<Scalar>& lp) {
  if (ScalarTraits<Scalar>::exact) return Scalar(0);
  Scalar scale = std::max(max_abs(lp.A), Scalar(1));
  for (Eigen::Index i = 0; i < lp.b.size(); ++i)
    if (abs_value(lp.b(i)) > scale) scale = abs_value(lp.b(i));
  return eps<Scalar>() * scale;
}

namespace detail {

// Enumerates every n-subset of the rows, keeping the feasible point with the
// largest objective. Ties keep the lexicographically first subset. The
// feasibility slack is far below the solver's sign tolerance so that the
// oracle does not accept vertices the solver would reject.
template <typename Scalar>
std::optional<Vector<Scalar>> best_vertex_by_enumeration(const CanonicalLP<Scalar>& lp) {
  const std::size_t rows = lp.rows();
  const std::size_t n = lp.variables();
  if (n > rows) return std::nullopt;
  const Scalar tol = feasibility_tolerance(lp) * from_double<Scalar>(1e-2);
  std::optional<Vector<Scalar>> best;
  Scalar best_value(0);
  ActiveSet subset(n);
  for (std::size_t i = 0; i < n; ++i) subset[i] = i;
  while (true) {
    Vector<Scalar> rhs(n);
    for (std::size_t j = 0; j < n; ++j) rhs(j) = lp.b(subset[j]);
    if (auto solved = solve_system(basis_matrix(lp, subset), rhs)) {
      const Vector<Scalar>& x = *solved;
      if (max_violation(lp, x) <= tol) {
        const Scalar value = dot(lp.c, x);
        if (!best || value > best_value) {
          best = x;
          best_value = value;
        }
      }
    }
    std::size_t pos = n;
    while (pos > 0 && subset[pos - 1] == rows - n + pos - 1) --pos;
    if (pos == 0) break;
    ++subset[pos - 1];
    for (std::size_t j = pos; j < n; ++j) subset[j] = subset[j - 1] + 1;
  }
  return best;
}

}  // namespace detail

/// Ground-truth solver: exhaustive vertex enumeration. Unboundedness is
/// detected by re-enumerating with the cut c^T x <= best + 1, which moves the
/// optimum iff the objective is unbounded above.
template <typename Scalar>
Solution<Scalar> solve_oracle(const CanonicalLP<Scalar>& lp) {
  if (lp.rows() > 40 || lp.variables() > 8)
    throw Error(ErrorCode::TooLarge, "oracle is limited to 40 rows and 8 variables");
  auto best = detail::best_vertex_by_enumeration(lp);
  if (!best) return Solution<Scalar>{};
  const Scalar value = dot(lp.c, *best);

  CanonicalLP<Scalar> capped = lp;
  capped.A.conservativeResize(lp.A.rows() + 1, Eigen::NoChange);
  capped.b.conservativeResize(lp.b.size() + 1);
  capped.A.row(lp.A.rows()) = lp.c.transpose();
  capped.b(lp.b.size()) = value + Scalar(1);
  auto capped_best = detail::best_vertex_by_enumeration(capped);
  if (capped_best && dot(lp.c, *capped_best) > value + feasibility_tolerance(capped))
    return Solution<Scalar>{};
  return make_solution(lp, *best);
}

}  // namespace shadowgame
