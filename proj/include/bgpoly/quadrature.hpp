#pragma once

// Adaptive quadrature on intervals that may be half- or fully infinite.
// Backed by Boost.Math double-exponential rules: tanh-sinh on finite pieces
// (robust to integrable endpoint singularities), exp-sinh on half-infinite ones.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bgpoly/errors.hpp"

namespace bgpoly::quad {

inline constexpr double kTolerance = 1e-12;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Result {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

namespace detail {

inline void check(const Result& r, const char* what, double lo, double hi) {
  if (!std::isfinite(r.value)) {
    std::ostringstream os;
    os << "quadrature (" << what << ") did not converge on [" << lo << ", " << hi
       << "]: value=" << r.value << " error=" << r.error << " L1=" << r.l1;
    throw NumericError(os.str());
  }
}

template <class F>
Result finite_piece(F&& g, double lo, double hi, double tol) {
  if (lo == hi) return {};
  if (hi - lo <= 1024.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
    // a few ulps wide: the rule cannot place nodes, the midpoint value is exact to rounding
    const double v = g(0.5 * (lo + hi));
    const double w = std::isfinite(v) ? v * (hi - lo) : 0.0;
    return {w, 0.0, std::abs(w)};
  }
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  Result r;
  r.value = rule.integrate(
      [&](double u) {
        const double v = g(u);
        return std::isfinite(v) ? v : 0.0;
      },
      lo, hi, tol, &r.error, &r.l1);
  check(r, "tanh-sinh", lo, hi);
  return r;
}

template <class F>
Result half_infinite_piece(F&& g, double lo, double hi, double tol) {
  thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  Result r;
  // exp_sinh wants [a, inf); reflect (-inf, b] onto [-b, inf).
  if (std::isinf(lo)) {
    r.value = rule.integrate(
        [&](double u) {
          const double v = g(-u);
          return std::isfinite(v) ? v : 0.0;
        },
        -hi, kInf, tol, &r.error, &r.l1);
  } else {
    r.value = rule.integrate(
        [&](double u) {
          const double v = g(u);
          return std::isfinite(v) ? v : 0.0;
        },
        lo, kInf, tol, &r.error, &r.l1);
  }
  check(r, "exp-sinh", lo, hi);
  return r;
}

template <class F>
Result piece(F&& g, double lo, double hi, double tol) {
  if (std::isinf(lo) || std::isinf(hi)) return half_infinite_piece(g, lo, hi, tol);
  return finite_piece(g, lo, hi, tol);
}

}  // namespace detail

/// Integral of g over (lo, hi), split at `center`. Either endpoint may be infinite.
/// Non-finite integrand values (overflow/underflow at extreme nodes) are treated as 0.
template <class F>
Result integrate(F&& g, double lo, double hi, double center, double tol = kTolerance) {
  if (!(lo < hi)) throw RangeError("integrate: empty interval");
  if (!(center > lo && center < hi)) {
    if (std::isfinite(lo) && std::isfinite(hi)) {
      center = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      center = lo + 1.0;
    } else if (std::isfinite(hi)) {
      center = hi - 1.0;
    } else {
      center = 0.0;
    }
  }
  const Result left = detail::piece(g, lo, center, tol);
  const Result right = detail::piece(g, center, hi, tol);
  return {left.value + right.value, left.error + right.error, left.l1 + right.l1};
}

}  // namespace bgpoly::quad
