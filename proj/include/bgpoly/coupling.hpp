#pragma once

// Inverse-CDF coupling H^f(a, p), the function
//   L^f(a, x) = (x^a f(x))^{-1} int_0^x (psi_0(a) - log y) y^{a-1} f(y) dy,
// the operators T and S, the polynomials h_n, and the coupled derivative
// d~ g(a, x) = d/da g(a, H(a, p)) at p = F(a, x).
//
// Integrals are taken in u = log(x/y) so the factor x^{-a} f(x)^{-1} never
// has to be formed: the integrand is exp(-a u + log f(x e^{-u}) - log f(x)).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bgpoly/errors.hpp"
#include "bgpoly/mellin.hpp"
#include "bgpoly/numdiff.hpp"
#include "bgpoly/quadrature.hpp"
#include "bgpoly/symbolic.hpp"

namespace bgpoly {

enum class SamplerMode { CDF, Inverse };

/// Distribution function and its inverse for X ~ m_f(a). Immutable.
class CoupledSampler {
 public:
  CoupledSampler(MellinFamily family, double a) : fam_(family), a_(a) {
    fam_.require_domain(a, "CoupledSampler");
    log_m_ = fam_.log_mellin(a);
    mean_ = fam_.psi(0, a);
    sd_ = std::sqrt(fam_.psi(1, a));
  }

  const MellinFamily& family() const { return fam_; }
  double a() const { return a_; }

  /// P(log X <= u).
  double cdf_log(double u) const { return tail(u, false); }
  /// P(log X > u).
  double ccdf_log(double u) const { return tail(u, true); }

  double cdf(double x) const {
    require_support(x, "cdf");
    return cdf_log(std::log(x));
  }
  double ccdf(double x) const {
    require_support(x, "ccdf");
    return ccdf_log(std::log(x));
  }

  /// Density of log X at u.
  double log_density_at(double u) const { return std::exp(a_ * u + fam_.log_kernel_at_log(u) - log_m_); }

  /// log H^f(a, p): the u with P(log X <= u) = p. For p > 1/2 the upper tail
  /// 1 - p is solved instead (exact in floating point for p in (1/2, 1)).
  double log_inverse(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw RangeError("inverse: probability must lie in (0, 1), got " + std::to_string(p));
    return p > 0.5 ? solve(1.0 - p, true) : solve(p, false);
  }

  /// The u with P(log X > u) = q; keeps precision for upper-tail probabilities.
  double log_inverse_upper(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw RangeError("inverse: probability must lie in (0, 1), got " + std::to_string(q));
    return solve(q, true);
  }

  double inverse(double p) const { return std::exp(log_inverse(p)); }

  double cdf_and_inverse(SamplerMode mode, double v) const {
    return mode == SamplerMode::CDF ? cdf(v) : inverse(v);
  }

 private:
  void require_support(double x, const char* op) const {
    if (!fam_.in_support(x))
      throw RangeError(std::string(op) + ": x=" + std::to_string(x) + " outside the support " +
                       describe(fam_.support()));
  }

  // P(log X <= u) (upper = false) or P(log X > u) (upper = true), each from its own closed form.
  double tail(double u, bool upper) const {
    const Interval ls = fam_.log_support();
    if (!(u > ls.lo)) return upper ? 1.0 : 0.0;
    if (!(u < ls.hi)) return upper ? 0.0 : 1.0;
    namespace bm = boost::math;
    const double b = fam_.b();
    switch (fam_.kind()) {
      case KernelKind::ExpDecay: {
        const double t = b * std::exp(u);
        if (t == 0.0) return upper ? 1.0 : 0.0;
        if (std::isinf(t)) return upper ? 0.0 : 1.0;
        return upper ? bm::gamma_q(a_, t) : bm::gamma_p(a_, t);
      }
      case KernelKind::ExpDecayInv: {
        const double t = b * std::exp(-u);
        if (t == 0.0) return upper ? 0.0 : 1.0;
        if (std::isinf(t)) return upper ? 1.0 : 0.0;
        return upper ? bm::gamma_p(-a_, t) : bm::gamma_q(-a_, t);
      }
      case KernelKind::BetaKernel: {
        // near x = 1 use 1 - x = -expm1(u) with the swapped parameters
        const double x = std::exp(u);
        if (x < 0.5) return upper ? bm::ibetac(a_, b, x) : bm::ibeta(a_, b, x);
        const double y = -std::expm1(u);
        return upper ? bm::ibeta(b, a_, y) : bm::ibetac(b, a_, y);
      }
      case KernelKind::BetaInvKernel: {
        const double y = std::exp(-u);
        if (y < 0.5) return upper ? bm::ibeta(-a_, b, y) : bm::ibetac(-a_, b, y);
        const double w = -std::expm1(-u);
        return upper ? bm::ibetac(b, -a_, w) : bm::ibeta(b, -a_, w);
      }
      case KernelKind::BetaPrimeKernel: {
        // x/(1+x) and 1/(1+x) from u without cancellation
        const double w = 1.0 / (1.0 + std::exp(-u));
        const double v = 1.0 / (1.0 + std::exp(u));
        if (w == 0.0) return upper ? 1.0 : 0.0;
        if (v == 0.0) return upper ? 0.0 : 1.0;
        return upper ? bm::ibeta(-a_, a_ + b, v) : bm::ibeta(a_ + b, -a_, w);
      }
    }
    return 0.0;
  }

  // Signed residual in the chosen tail: increasing in u.
  double residual(double u, double target, bool upper) const {
    return upper ? target - tail(u, true) : tail(u, false) - target;
  }

  double solve(double target, bool upper) const {
    const Interval ls = fam_.log_support();
    const double step0 = std::max(1.0, sd_);
    double lo = mean_, hi = mean_;
    double step = step0;
    while (residual(lo, target, upper) > 0.0) {
      lo -= step;
      step *= 2.0;
      if (!(lo > ls.lo)) {
        lo = ls.lo;
        break;
      }
      if (step > 1e6) throw NumericError("inverse: could not bracket the lower end");
    }
    step = step0;
    while (residual(hi, target, upper) < 0.0) {
      hi += step;
      step *= 2.0;
      if (!(hi < ls.hi)) {
        hi = ls.hi;
        break;
      }
      if (step > 1e6) throw NumericError("inverse: could not bracket the upper end");
    }
    // infinite ends cannot be bisected; replace with a finite point still on the right side
    if (std::isinf(lo)) lo = hi - 1.0;
    if (std::isinf(hi)) hi = lo + 1.0;

    // bisection safeguarded by Newton steps in u (dF/du is the density of log X)
    double u = std::clamp(mean_, lo, hi);
    if (!(u > lo && u < hi)) u = 0.5 * (lo + hi);
    double r = residual(u, target, upper);
    for (int it = 0; it < 400 && std::abs(r) > 1e-12; ++it) {
      if (r > 0.0) hi = u;
      else lo = u;
      const double g = log_density_at(u);
      double next = (g > 0.0 && std::isfinite(g)) ? u - r / g : lo;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double rn = residual(next, target, upper);
      if (std::abs(rn) > 0.5 * std::abs(r) && !(std::abs(rn) <= 1e-12)) {
        // slow progress: take a plain bisection step as well
        if (rn > 0.0) hi = next;
        else lo = next;
        next = 0.5 * (lo + hi);
        r = residual(next, target, upper);
      } else {
        r = rn;
      }
      u = next;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) break;
    }
    // three Newton refinements for relative accuracy in the tails
    for (int it = 0; it < 3 && r != 0.0; ++it) {
      const double g = log_density_at(u);
      if (!(g > 0.0) || !std::isfinite(g)) break;
      const double next = u - r / g;
      if (!(next > lo && next < hi)) break;
      const double rn = residual(next, target, upper);
      if (std::abs(rn) >= std::abs(r)) break;
      u = next;
      r = rn;
    }
    return u;
  }

  MellinFamily fam_;
  double a_;
  double log_m_;
  double mean_;
  double sd_;
};

inline double cdf_and_inverse(const CoupledSampler& s, SamplerMode mode, double v) { return s.cdf_and_inverse(mode, v); }

// ---------------------------------------------------------------------------
// T operator

/// T(h)(a, x) = (x^a f(x))^{-1} int_0^x h(a, y) y^{a-1} f(y) dy, with h called as h(log y).
/// If `mean` (= E[h(a, X)], X ~ m_f(a)) is given, the upper-tail form
///   mean * M(a)/(x^a f(x)) - (x^a f(x))^{-1} int_x^inf h y^{a-1} f dy
/// is used whenever F(a, x) > 1/2, which keeps relative accuracy in the right tail.
template <class H>
double t_operator(const MellinFamily& fam, H&& h, double a, double x, std::optional<double> mean = std::nullopt) {
  fam.require_domain(a, "t_operator");
  if (!fam.in_support(x))
    throw RangeError("t_operator: x=" + std::to_string(x) + " outside the support " + describe(fam.support()));
  const double lx = std::log(x);
  const double scale = std::max(1.0, std::abs(a + fam.log_slope(x)));
  bool upper = false;
  if (mean) upper = CoupledSampler(fam, a).cdf(x) > 0.5;

  const Interval ls = fam.log_support();
  if (!upper) {
    // y = x e^{-u}
    const double umax = std::isfinite(ls.lo) ? lx - ls.lo : quad::kInf;
    auto g = [&](double v) {
      const double u = v / scale;
      const double lr = fam.log_kernel_ratio(x, -u);
      if (std::isinf(lr)) return 0.0;
      return h(lx - u) * std::exp(-a * u + lr);
    };
    return quad::integrate(g, 0.0, umax * scale, 1.0).value / scale;
  }
  // y = x e^{u}
  const double umax = std::isfinite(ls.hi) ? ls.hi - lx : quad::kInf;
  auto g = [&](double v) {
    const double u = v / scale;
    const double lr = fam.log_kernel_ratio(x, u);
    if (std::isinf(lr)) return 0.0;
    return h(lx + u) * std::exp(a * u + lr);
  };
  const double tail = quad::integrate(g, 0.0, umax * scale, 1.0).value / scale;
  double total = 0.0;
  if (*mean != 0.0) total = *mean * std::exp(fam.log_mellin(a) - a * lx - fam.log_kernel(x));
  return total - tail;
}

// ---------------------------------------------------------------------------
// h_n and the coupled derivative, symbolically

namespace detail {

// d/da at fixed x: psi_j -> psi_{j+1}, a -> 1.
inline const sym::Derivation& partial_a() {
  static const sym::Derivation d([](int v) {
    if (v == sym::kA) return sym::Poly(1.0);
    // the top psi slot is never differentiated by any caller (h_n needs psi_{n-1}, n <= 10)
    if (v >= sym::kPsi0 && v + 1 < sym::kPsi0 + sym::kPsiSlots) return sym::Poly::var(v + 1);
    return sym::Poly();
  });
  return d;
}

inline const std::vector<sym::Poly>& h_table() {
  static const std::vector<sym::Poly> table = [] {
    std::vector<sym::Poly> t(sym::kTSlots + 1);
    t[1] = sym::Poly::var(sym::psi_var(0)) - sym::Poly::var(sym::kLogX);
    for (int n = 2; n <= sym::kTSlots; ++n) t[n] = partial_a()(t[n - 1]) + t[n - 1] * sym::Poly::var(sym::kLogX);
    return t;
  }();
  return table;
}

}  // namespace detail

inline constexpr int kMaxHOrder = 8;

/// h_n(a, x) as a polynomial in lx = log x with psi_j(a) coefficients.
struct HPoly {
  int n;
  sym::Poly poly;

  double eval(const MellinFamily& fam, double a, double log_x) const {
    std::array<double, sym::kNumVars> vals{};
    const int top = std::min(n, sym::kPsiSlots);
    for (int j = 0; j < top; ++j) vals[sym::psi_var(j)] = fam.psi(j, a);
    vals[sym::kLogX] = log_x;
    return poly.eval(vals);
  }
};

inline HPoly make_h_poly(int n) {
  if (n < 1 || n > kMaxHOrder) throw CapabilityError("h_poly: order " + std::to_string(n) + " not supported (1..8)");
  return {n, detail::h_table()[n]};
}

inline double h_poly(const MellinFamily& fam, int n, double a, double x) {
  if (!(x > 0.0)) throw RangeError("h_poly: x must be positive");
  return make_h_poly(n).eval(fam, a, std::log(x));
}

/// L^f(a, x) = T(h_1)(a, x).
inline double l_func(const MellinFamily& fam, double a, double x) {
  const double p0 = fam.psi(0, a);
  return t_operator(fam, [p0](double ly) { return p0 - ly; }, a, x, 0.0);
}

inline constexpr int kMaxTildeOrder = 4;

enum class TildeRoute { FiniteDifference, Recursion };

/// Symbolic expressions for d~^k L, k = 0..K, in a, psi_j, lx, z, T_n.
/// d~ a = 1, d~ psi_j = psi_{j+1}, d~ lx = T_1, d~ z = (alpha z + beta z^2) T_1,
/// d~ T_n = T_{n+1} - [(a + s z) T_1 + lx] T_n + h_n T_1   with r(x) = s z(x).
class TildeDerivatives {
 public:
  TildeDerivatives(const MellinFamily& fam, int max_order) : fam_(fam), k_(max_order) {
    if (max_order < 0 || max_order > kMaxTildeOrder)
      throw CapabilityError("tilde_deriv_L: order " + std::to_string(max_order) + " not supported (0..4)");
    const KernelLogSlope st = fam.log_slope_structure();
    const auto& h = detail::h_table();
    sym::Derivation d([&](int v) {
      using sym::Poly;
      if (v == sym::kA) return Poly(1.0);
      if (v >= sym::kPsi0 && v + 1 < sym::kPsi0 + sym::kPsiSlots) return Poly::var(v + 1);
      const Poly t1 = Poly::var(sym::t_var(1));
      if (v == sym::kLogX) return t1;
      if (v == sym::kZ) {
        const Poly z = Poly::var(sym::kZ);
        return (st.alpha * z + st.beta * Poly::var(sym::kZ, 2)) * t1;
      }
      if (v >= sym::kT1 && v < sym::kT1 + sym::kTSlots) {
        const int n = v - sym::kT1 + 1;
        if (n + 1 > sym::kTSlots) return Poly();
        const Poly tn = Poly::var(v);
        return Poly::var(sym::t_var(n + 1)) -
               (Poly::var(sym::kA) * t1 + st.scale * Poly::var(sym::kZ) * t1 + Poly::var(sym::kLogX)) * tn +
               h[n] * t1;
      }
      return Poly();
    });
    polys_.push_back(sym::Poly::var(sym::t_var(1)));
    for (int k = 1; k <= k_; ++k) polys_.push_back(d(polys_.back()));
  }

  const sym::Poly& expression(int k) const { return polys_.at(k); }
  int max_order() const { return k_; }

  /// d~^k L at (a, x) for k = 0..K.
  std::vector<double> evaluate(double a, double x) const {
    std::array<double, sym::kNumVars> vals{};
    vals[sym::kA] = a;
    for (int j = 0; j <= k_ + 1; ++j) vals[sym::psi_var(j)] = fam_.psi(j, a);
    const double lx = std::log(x);
    vals[sym::kLogX] = lx;
    vals[sym::kZ] = fam_.log_slope_variable(x);
    const auto& h = detail::h_table();
    for (int n = 1; n <= k_ + 1; ++n) {
      const sym::Poly& hn = h[n];
      vals[sym::t_var(n)] = t_operator(fam_, [&](double ly) {
        auto v2 = vals;
        v2[sym::kLogX] = ly;
        return hn.eval(v2);
      }, a, x, 0.0);
    }
    std::vector<double> out;
    out.reserve(k_ + 1);
    for (const auto& p : polys_) out.push_back(p.eval(vals));
    return out;
  }

 private:
  MellinFamily fam_;
  int k_;
  std::vector<sym::Poly> polys_;
};

/// Step used by the finite-difference route for order k.
inline double tilde_fd_step(int k, double a) {
  static constexpr double base[] = {1e-4, 1e-4, 1e-3, 1e-2, 2e-2};
  return base[std::clamp(k, 0, 4)] * std::max(1.0, std::abs(a));
}

/// d~^k L^f(a, x) either by nested central differences of a' -> L(a', H(a', p)), p = F(a, x),
/// or by the T/S recursion.
inline double tilde_deriv_L(const MellinFamily& fam, int k, double a, double x,
                            TildeRoute route = TildeRoute::Recursion) {
  if (k < 0 || k > kMaxTildeOrder)
    throw CapabilityError("tilde_deriv_L: order " + std::to_string(k) + " not supported (0..4)");
  if (k == 0 || route == TildeRoute::Recursion) return TildeDerivatives(fam, k).evaluate(a, x)[k];

  const CoupledSampler base(fam, a);
  const double lx = std::log(x);
  const double f = base.cdf_log(lx);
  const bool upper = f > 0.5;
  const double q = upper ? base.ccdf_log(lx) : f;
  const Interval d = fam.domain();
  double h = tilde_fd_step(k, a);
  const double room = std::min(a - d.lo, d.hi - a);
  h = std::min(h, room / (2.0 * k + 2.0));
  auto g = [&](double ap) {
    const CoupledSampler s(fam, ap);
    const double u = upper ? s.log_inverse_upper(q) : s.log_inverse(q);
    return l_func(fam, ap, std::exp(u));
  };
  return numdiff::derivative(g, a, k, h, 2);
}

// ---------------------------------------------------------------------------
// Growth-bound diagnostics

struct BoundReport {
  int k = 0;
  double max_ratio = 0.0;
  double argmax_a = 0.0;
  double argmax_x = 0.0;
  /// max ratio with the j outermost decades removed at each end, j = 0, 1, 2
  std::array<double, 3> trimmed_max{};
  bool finite = true;

  /// Variation across the two outermost decades: trimmed_max[0] / trimmed_max[2].
  double outer_variation() const { return trimmed_max[2] > 0.0 ? trimmed_max[0] / trimmed_max[2] : quad::kInf; }
  bool stable() const { return finite && outer_variation() < 2.0; }
};

/// A point on the x-grid; `decade_depth` counts how many decades from the outer end it sits.
struct BoundGridPoint {
  double x;
  int decade_depth;
};

/// 61 points per decade across [1e-decades, 1e+decades] mapped onto the support:
/// (0, inf) uses x = 10^t; (0, 1) uses x = 10^t for t < 0 and 1 - 10^t near 1;
/// (1, inf) uses x = 1 + 10^t near 1 and 10^t above.
inline std::vector<BoundGridPoint> bound_x_grid(const MellinFamily& fam, int decades = 6, int per_decade = 61) {
  std::vector<BoundGridPoint> out;
  const Interval s = fam.support();
  const int total = 2 * decades * (per_decade - 1);
  for (int i = 0; i <= total; ++i) {
    const double t = -decades + static_cast<double>(i) / (per_decade - 1);
    const int depth = static_cast<int>(std::floor(std::min(t + decades, decades - t) + 1e-12));
    double x;
    if (s.hi == 1.0) {
      // t < 0: x = 10^t near 0; t >= 0: x = 1 - 10^{-t} near 1
      if (t >= 0.0 && t < 1e-12) continue;
      x = t < 0.0 ? std::pow(10.0, t) : 1.0 - std::pow(10.0, -t);
    } else if (s.lo == 1.0) {
      if (t <= 0.0 && t > -1e-12) continue;
      x = t < 0.0 ? 1.0 + std::pow(10.0, t) : std::pow(10.0, t);
      if (t > 0.0 && x <= 1.0) continue;
    } else {
      x = std::pow(10.0, t);
    }
    if (!fam.in_support(x)) continue;
    out.push_back({x, depth});
  }
  return out;
}

/// 11 interior points of the domain.
inline std::vector<double> bound_a_grid(const MellinFamily& fam) {
  const Interval d = fam.domain();
  std::vector<double> out;
  for (int i = 1; i <= 11; ++i) {
    if (std::isfinite(d.lo) && std::isfinite(d.hi)) out.push_back(d.lo + (d.hi - d.lo) * i / 12.0);
    else if (std::isfinite(d.lo)) out.push_back(d.lo + 0.25 * i);
    else out.push_back(d.hi - 0.25 * i);
  }
  return out;
}

/// max over the grid of |d~^k L^f(a, x)| / (1 + |log x|^{k+1}).
inline BoundReport bound_check(const MellinFamily& fam, int k, const std::vector<double>& a_grid,
                               const std::vector<BoundGridPoint>& x_grid) {
  BoundReport rep;
  rep.k = k;
  const TildeDerivatives td(fam, k);
  for (double a : a_grid) {
    for (const auto& pt : x_grid) {
      double ratio;
      try {
        const double v = td.evaluate(a, pt.x)[k];
        ratio = std::abs(v) / (1.0 + std::pow(std::abs(std::log(pt.x)), k + 1));
      } catch (const NumericError&) {
        ratio = quad::kInf;
      }
      if (!std::isfinite(ratio)) rep.finite = false;
      for (int j = 0; j < 3; ++j)
        if (pt.decade_depth >= j) rep.trimmed_max[j] = std::max(rep.trimmed_max[j], ratio);
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.argmax_a = a;
        rep.argmax_x = pt.x;
      }
    }
  }
  return rep;
}

inline BoundReport bound_check(const MellinFamily& fam, int k) {
  return bound_check(fam, k, bound_a_grid(fam), bound_x_grid(fam));
}

}  // namespace bgpoly
