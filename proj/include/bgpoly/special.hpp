#pragma once

// Digamma / polygamma by upward recurrence into the asymptotic region followed
// by the Bernoulli-number asymptotic expansion. Log-gamma and log-beta delegate
// to Boost.Math (thread-safe, unlike std::lgamma's signgam).

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "bgpoly/errors.hpp"

namespace bgpoly::special {

inline constexpr int kMaxPolygammaOrder = 12;

namespace detail {

// B_2, B_4, ..., B_30
inline constexpr std::array<double, 15> kBernoulliEven = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline double asymptotic_threshold(int order) { return 20.0 + 2.0 * order; }

inline double digamma_asymptotic(double x) {
  const double inv2 = 1.0 / (x * x);
  double term = inv2;
  double series = 0.0;
  for (int k = 1; k <= 12; ++k) {
    series += kBernoulliEven[k - 1] / (2.0 * k) * term;
    term *= inv2;
  }
  return std::log(x) - 0.5 / x - series;
}

// (-1)^{n+1} [ (n-1)!/x^n + n!/(2x^{n+1}) + sum_k B_2k (2k+n-1)!/((2k)! x^{2k+n}) ]
inline double polygamma_asymptotic(int n, double x) {
  const double xn = std::pow(x, n);
  double sum = factorial(n - 1) / xn + factorial(n) / (2.0 * xn * x);
  // ratio (2k+n-1)!/(2k)! built incrementally
  double ratio = 1.0;  // (n+1)!/2! / ... seeded below
  for (int i = 1; i <= n - 1; ++i) ratio *= (2.0 + i);  // (n+1)!/2!
  double xpow = xn * x * x;
  for (int k = 1; k <= 14; ++k) {
    const double t = kBernoulliEven[k - 1] * ratio / xpow;
    sum += t;
    if (std::abs(t) < 1e-18 * std::abs(sum)) break;
    // advance (2k+n-1)!/(2k)! -> (2k+n+1)!/(2k+2)!
    ratio *= (2.0 * k + n) * (2.0 * k + n + 1) / ((2.0 * k + 1) * (2.0 * k + 2));
    xpow *= x * x;
  }
  return (n % 2 == 1) ? sum : -sum;
}

}  // namespace detail

/// psi(x) = d/dx log Gamma(x) for x > 0.
inline double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("digamma: argument must be a positive finite real, got " + std::to_string(x));
  }
  double shift = 0.0;
  while (x < detail::asymptotic_threshold(0)) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  return detail::digamma_asymptotic(x) + shift;
}

/// psi^{(n)}(x) for 0 <= n <= kMaxPolygammaOrder and x > 0.
inline double polygamma(int n, double x) {
  if (n < 0 || n > kMaxPolygammaOrder) {
    throw CapabilityError("polygamma: order " + std::to_string(n) + " not supported (0.." +
                          std::to_string(kMaxPolygammaOrder) + ")");
  }
  if (n == 0) return digamma(x);
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("polygamma: argument must be a positive finite real, got " + std::to_string(x));
  }
  // psi^{(n)}(x) = psi^{(n)}(x+1) + (-1)^{n+1} n! / x^{n+1}; every shift term has the same sign.
  const double nfact = detail::factorial(n);
  double shift = 0.0;
  while (x < detail::asymptotic_threshold(n)) {
    shift += nfact / std::pow(x, n + 1);
    x += 1.0;
  }
  const double sign = (n % 2 == 1) ? 1.0 : -1.0;
  return detail::polygamma_asymptotic(n, x) + sign * shift;
}

inline double trigamma(double x) { return polygamma(1, x); }

inline double lgamma(double x) { return boost::math::lgamma(x); }

/// log B(p, q) for p, q > 0.
inline double lbeta(double p, double q) { return lgamma(p) + lgamma(q) - lgamma(p + q); }

}  // namespace bgpoly::special
