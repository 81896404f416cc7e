#pragma once

// Exact rational arithmetic for crosschecking the floating point path on
// small instances. Requires linking against GMP.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

#include "shadowgame/numeric.hpp"

namespace shadowgame {

using Rational =
    boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

template <>
struct ScalarTraits<Rational, void> {
  static constexpr bool exact = true;
  static Rational eps() { return Rational(0); }
  static Rational singular_threshold() { return Rational(0); }
  static Rational from_double(double v) { return Rational(v); }
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
};

}  // namespace shadowgame
