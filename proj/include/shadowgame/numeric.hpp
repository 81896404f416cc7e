#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <type_traits>

namespace shadowgame {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Sign tolerance and conversions for a scalar type. Floating point types
/// test signs against `eps()`; exact types specialize this with eps() == 0.
template <typename Scalar, typename Enable = void>
struct ScalarTraits;

template <typename Scalar>
struct ScalarTraits<Scalar, std::enable_if_t<std::is_floating_point_v<Scalar>>> {
  static constexpr bool exact = false;
  static Scalar eps() { return Scalar(1e-9); }
  // below this magnitude a pivot is treated as zero
  static Scalar singular_threshold() { return Scalar(1e-12); }
  static Scalar from_double(double v) { return Scalar(v); }
  static double to_double(const Scalar& v) { return static_cast<double>(v); }
};

template <typename Scalar>
Scalar eps() {
  return ScalarTraits<Scalar>::eps();
}

template <typename Scalar>
double to_double(const Scalar& v) {
  return ScalarTraits<Scalar>::to_double(v);
}

template <typename Scalar>
Scalar from_double(double v) {
  return ScalarTraits<Scalar>::from_double(v);
}

template <typename Scalar>
Scalar abs_value(const Scalar& v) {
  return v < Scalar(0) ? Scalar(-v) : v;
}

template <typename Scalar>
Scalar max_abs(const Matrix<Scalar>& m) {
  Scalar best(0);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (abs_value(m(i, j)) > best) best = abs_value(m(i, j));
  return best;
}

/// Solves a X = rhs by Gaussian elimination with partial pivoting. Returns
/// nullopt when a pivot falls below the singularity threshold relative to the
/// largest entry.
template <typename Scalar>
std::optional<Matrix<Scalar>> solve_system(Matrix<Scalar> a, Matrix<Scalar> rhs) {
  const Eigen::Index n = a.rows();
  Scalar scale = max_abs(a);
  if (scale < Scalar(1)) scale = Scalar(1);
  const Scalar threshold = ScalarTraits<Scalar>::singular_threshold() * scale;
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (abs_value(a(r, col)) > abs_value(a(pivot, col))) pivot = r;
    if (abs_value(a(pivot, col)) <= threshold) return std::nullopt;
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      rhs.row(pivot).swap(rhs.row(col));
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const Scalar f = a(r, col) / a(col, col);
      if (f == Scalar(0)) continue;
      for (Eigen::Index j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      for (Eigen::Index j = 0; j < rhs.cols(); ++j) rhs(r, j) -= f * rhs(col, j);
    }
  }
  for (Eigen::Index col = n - 1; col >= 0; --col) {
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
      Scalar acc = rhs(col, j);
      for (Eigen::Index k = col + 1; k < n; ++k) acc -= a(col, k) * rhs(k, j);
      rhs(col, j) = acc / a(col, col);
    }
  }
  return rhs;
}

template <typename Scalar>
std::optional<Vector<Scalar>> solve_system(const Matrix<Scalar>& a, const Vector<Scalar>& rhs) {
  auto x = solve_system(a, Matrix<Scalar>(rhs));
  if (!x) return std::nullopt;
  return Vector<Scalar>(x->col(0));
}

/// Determinant by elimination; only used for general-position screens.
template <typename Scalar>
Scalar determinant(Matrix<Scalar> a) {
  const Eigen::Index n = a.rows();
  Scalar det(1);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (abs_value(a(r, col)) > abs_value(a(pivot, col))) pivot = r;
    if (a(pivot, col) == Scalar(0)) return Scalar(0);
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      det = -det;
    }
    det *= a(col, col);
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const Scalar f = a(r, col) / a(col, col);
      for (Eigen::Index j = col; j < n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return det;
}

template <typename Scalar>
Scalar dot(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  Scalar s(0);
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a(i) * b(i);
  return s;
}

}  // namespace shadowgame
