#pragma once

// The five Mellin kernels f and the induced families m_f(a) with density
// x^{a-1} f(x) / M_f(a).
//
// Closed forms (substitute y = 1/x for the inverted kernels, y = x/(1+x) for
// the beta-prime kernel):
//   ExpDecay         f = e^{-bx}                 M(a) = Gamma(a) b^{-a}    a in (0, inf)
//   ExpDecayInv      f = e^{-b/x}                M(a) = Gamma(-a) b^{a}    a in (-inf, 0)
//   BetaKernel       f = (1-x)^{b-1} 1{x<1}      M(a) = B(a, b)            a in (0, inf)
//   BetaInvKernel    f = (1-1/x)^{b-1} 1{x>1}    M(a) = B(-a, b)           a in (-inf, 0)
//   BetaPrimeKernel  f = (x/(1+x))^b             M(a) = B(a+b, -a)         a in (-b, 0)
// psi_k(a) = d^{k+1}/da^{k+1} log M(a) then reduces to polygamma values.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bgpoly/errors.hpp"
#include "bgpoly/quadrature.hpp"
#include "bgpoly/special.hpp"

namespace bgpoly {

enum class KernelKind : std::uint8_t { ExpDecay, ExpDecayInv, BetaKernel, BetaInvKernel, BetaPrimeKernel };

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::ExpDecay: return "ExpDecay";
    case KernelKind::ExpDecayInv: return "ExpDecayInv";
    case KernelKind::BetaKernel: return "BetaKernel";
    case KernelKind::BetaInvKernel: return "BetaInvKernel";
    case KernelKind::BetaPrimeKernel: return "BetaPrimeKernel";
  }
  return "?";
}

inline constexpr KernelKind kAllKernels[] = {KernelKind::ExpDecay, KernelKind::ExpDecayInv,
                                             KernelKind::BetaKernel, KernelKind::BetaInvKernel,
                                             KernelKind::BetaPrimeKernel};

/// Open interval (lo, hi); endpoints may be infinite.
struct Interval {
  double lo;
  double hi;

  bool contains(double v) const { return v > lo && v < hi; }
  bool empty() const { return !(lo < hi); }
};

inline std::string describe(const Interval& iv) {
  std::ostringstream os;
  os << "(" << iv.lo << ", " << iv.hi << ")";
  return os.str();
}

/// Largest psi order served (h_n for n <= 8 and p_n for n <= 10 need psi_7 and psi_9).
inline constexpr int kMaxPsiOrder = special::kMaxPolygammaOrder - 1;

/// x f'(x)/f(x) written as scale * z(x), with x dz/dx = alpha z + beta z^2.
struct KernelLogSlope {
  double scale;
  double alpha;
  double beta;
};

class MellinFamily {
 public:
  MellinFamily(KernelKind kind, double b) : kind_(kind), b_(b) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw ValidationError("MellinFamily: shape parameter b must be positive and finite");
    }
  }

  KernelKind kind() const { return kind_; }
  double b() const { return b_; }

  Interval domain() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case KernelKind::ExpDecay:
      case KernelKind::BetaKernel: return {0.0, inf};
      case KernelKind::ExpDecayInv:
      case KernelKind::BetaInvKernel: return {-inf, 0.0};
      case KernelKind::BetaPrimeKernel: return {-b_, 0.0};
    }
    return {0.0, 0.0};
  }

  Interval support() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case KernelKind::BetaKernel: return {0.0, 1.0};
      case KernelKind::BetaInvKernel: return {1.0, inf};
      default: return {0.0, inf};
    }
  }

  /// Support of log X.
  Interval log_support() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case KernelKind::BetaKernel: return {-inf, 0.0};
      case KernelKind::BetaInvKernel: return {0.0, inf};
      default: return {-inf, inf};
    }
  }

  void require_domain(double a, std::string_view op) const {
    if (!domain().contains(a)) {
      std::ostringstream os;
      os << op << ": a=" << a << " outside the domain " << describe(domain()) << " of " << to_string(kind_)
         << "(b=" << b_ << ")";
      throw DomainError(os.str());
    }
  }

  bool in_support(double x) const { return support().contains(x); }

  /// log f(x) on the support; -inf off it.
  double log_kernel(double x) const {
    if (!in_support(x)) return -std::numeric_limits<double>::infinity();
    switch (kind_) {
      case KernelKind::ExpDecay: return -b_ * x;
      case KernelKind::ExpDecayInv: return -b_ / x;
      case KernelKind::BetaKernel: return (b_ - 1.0) * std::log1p(-x);
      case KernelKind::BetaInvKernel: return (b_ - 1.0) * std::log1p(-1.0 / x);
      case KernelKind::BetaPrimeKernel: return -b_ * std::log1p(1.0 / x);
    }
    return 0.0;
  }

  /// log f evaluated at exp(log_x); keeps precision when x is extreme.
  double log_kernel_at_log(double log_x) const {
    if (!log_support().contains(log_x)) return -std::numeric_limits<double>::infinity();
    switch (kind_) {
      case KernelKind::ExpDecay: return -b_ * std::exp(log_x);
      case KernelKind::ExpDecayInv: return -b_ * std::exp(-log_x);
      case KernelKind::BetaKernel: return (b_ - 1.0) * std::log(-std::expm1(log_x));
      case KernelKind::BetaInvKernel: return (b_ - 1.0) * std::log(-std::expm1(-log_x));
      case KernelKind::BetaPrimeKernel: return -b_ * std::log1p(std::exp(-log_x));
    }
    return 0.0;
  }

  /// log f(x e^u) - log f(x), cancellation-free; -inf when x e^u leaves the support.
  double log_kernel_ratio(double x, double u) const {
    switch (kind_) {
      case KernelKind::ExpDecay: return -b_ * x * std::expm1(u);
      case KernelKind::ExpDecayInv: return -(b_ / x) * std::expm1(-u);
      case KernelKind::BetaKernel: {
        const double arg = -x * std::expm1(u) / (1.0 - x);
        if (!(arg > -1.0)) return -std::numeric_limits<double>::infinity();
        return (b_ - 1.0) * std::log1p(arg);
      }
      case KernelKind::BetaInvKernel: {
        const double arg = -std::expm1(-u) / (x - 1.0);
        if (!(arg > -1.0)) return -std::numeric_limits<double>::infinity();
        return (b_ - 1.0) * std::log1p(arg);
      }
      case KernelKind::BetaPrimeKernel: return b_ * (u - std::log1p(x * std::expm1(u) / (1.0 + x)));
    }
    return 0.0;
  }

  /// r(x) = x f'(x) / f(x), hard-coded per kernel.
  double log_slope(double x) const {
    switch (kind_) {
      case KernelKind::ExpDecay: return -b_ * x;
      case KernelKind::ExpDecayInv: return b_ / x;
      case KernelKind::BetaKernel: return -(b_ - 1.0) * x / (1.0 - x);
      case KernelKind::BetaInvKernel: return (b_ - 1.0) / (x - 1.0);
      case KernelKind::BetaPrimeKernel: return b_ / (1.0 + x);
    }
    return 0.0;
  }

  /// The variable z(x) with r(x) = scale * z(x).
  double log_slope_variable(double x) const {
    switch (kind_) {
      case KernelKind::ExpDecay: return x;
      case KernelKind::ExpDecayInv: return 1.0 / x;
      case KernelKind::BetaKernel: return x / (1.0 - x);
      case KernelKind::BetaInvKernel: return 1.0 / (x - 1.0);
      case KernelKind::BetaPrimeKernel: return 1.0 / (1.0 + x);
    }
    return 0.0;
  }

  KernelLogSlope log_slope_structure() const {
    switch (kind_) {
      case KernelKind::ExpDecay: return {-b_, 1.0, 0.0};
      case KernelKind::ExpDecayInv: return {b_, -1.0, 0.0};
      case KernelKind::BetaKernel: return {-(b_ - 1.0), 1.0, 1.0};
      case KernelKind::BetaInvKernel: return {b_ - 1.0, -1.0, -1.0};
      case KernelKind::BetaPrimeKernel: return {b_, -1.0, 1.0};
    }
    return {0.0, 0.0, 0.0};
  }

  double log_mellin(double a) const {
    require_domain(a, "mellin_transform");
    return log_mellin_unchecked(a);
  }

  double mellin_transform(double a) const { return std::exp(log_mellin(a)); }

  /// (k+1)-th derivative of log M_f at a; psi_0 is E[log X], psi_1 is Var[log X].
  double psi(int k, double a) const {
    if (k < 0 || k > kMaxPsiOrder) {
      throw CapabilityError("psi: order " + std::to_string(k) + " not supported (0.." +
                            std::to_string(kMaxPsiOrder) + ")");
    }
    require_domain(a, "psi");
    using special::polygamma;
    const double sgn = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1}
    switch (kind_) {
      case KernelKind::ExpDecay: return polygamma(k, a) - (k == 0 ? std::log(b_) : 0.0);
      case KernelKind::ExpDecayInv: return sgn * polygamma(k, -a) + (k == 0 ? std::log(b_) : 0.0);
      case KernelKind::BetaKernel: return polygamma(k, a) - polygamma(k, a + b_);
      case KernelKind::BetaInvKernel: return sgn * (polygamma(k, -a) - polygamma(k, b_ - a));
      case KernelKind::BetaPrimeKernel: return polygamma(k, a + b_) + sgn * polygamma(k, -a);
    }
    return 0.0;
  }

  /// log of the density of X ~ m_f(a) at x (-inf off the support).
  double log_density(double a, double x) const {
    require_domain(a, "density");
    if (!in_support(x)) return -std::numeric_limits<double>::infinity();
    return (a - 1.0) * std::log(x) + log_kernel(x) - log_mellin_unchecked(a);
  }

  double density(double a, double x) const {
    const double ld = log_density(a, x);
    return std::isinf(ld) ? 0.0 : std::exp(ld);
  }

  /// Density of log X at u.
  double log_density_of_log(double a, double u) const {
    return a * u + log_kernel_at_log(u) - log_mellin_unchecked(a);
  }

  /// E[(log X)^k] from the cumulants psi_0, psi_1, ... via the moment-cumulant recursion.
  double log_moment(double a, int k) const {
    if (k < 0 || k > kMaxPsiOrder + 1) {
      throw CapabilityError("log_moment: order " + std::to_string(k) + " not supported");
    }
    require_domain(a, "log_moment");
    std::vector<double> kappa(k + 1, 0.0);
    for (int j = 1; j <= k; ++j) kappa[j] = psi(j - 1, a);
    std::vector<double> m(k + 1, 0.0);
    m[0] = 1.0;
    for (int n = 1; n <= k; ++n) {
      double s = 0.0;
      double binom = 1.0;  // C(n-1, j)
      for (int j = 0; j <= n - 1; ++j) {
        s += binom * kappa[j + 1] * m[n - 1 - j];
        binom = binom * (n - 1 - j) / (j + 1);
      }
      m[n] = s;
    }
    return m[k];
  }

  /// E[g(log X)] for X ~ m_f(a) by quadrature in u = log x.
  template <class G>
  double expect_log(double a, G&& g, double tol = quad::kTolerance) const {
    require_domain(a, "expect_log");
    const double lm = log_mellin_unchecked(a);
    const Interval ls = log_support();
    const double center = psi(0, a);
    return quad::integrate(
               [&](double u) {
                 const double lk = log_kernel_at_log(u);
                 if (std::isinf(lk)) return 0.0;
                 return g(u) * std::exp(a * u + lk - lm);
               },
               ls.lo, ls.hi, center, tol)
        .value;
  }

  friend bool operator==(const MellinFamily& x, const MellinFamily& y) {
    return x.kind_ == y.kind_ && x.b_ == y.b_;
  }

 private:
  double log_mellin_unchecked(double a) const {
    using special::lbeta;
    using special::lgamma;
    switch (kind_) {
      case KernelKind::ExpDecay: return lgamma(a) - a * std::log(b_);
      case KernelKind::ExpDecayInv: return lgamma(-a) + a * std::log(b_);
      case KernelKind::BetaKernel: return lbeta(a, b_);
      case KernelKind::BetaInvKernel: return lbeta(-a, b_);
      case KernelKind::BetaPrimeKernel: return lbeta(a + b_, -a);
    }
    return 0.0;
  }

  KernelKind kind_;
  double b_;
};

/// M_f(a) by direct quadrature of x^{a-1} f(x) (in u = log x); independent of the closed forms.
inline double mellin_by_quadrature(const MellinFamily& fam, double a, double center = 0.0) {
  const Interval ls = fam.log_support();
  if (!ls.contains(center)) center = std::isfinite(ls.lo) ? ls.lo + 1.0 : (std::isfinite(ls.hi) ? ls.hi - 1.0 : 0.0);
  return quad::integrate(
             [&](double u) {
               const double lk = fam.log_kernel_at_log(u);
               if (std::isinf(lk)) return 0.0;
               return std::exp(a * u + lk);
             },
             ls.lo, ls.hi, center)
      .value;
}

}  // namespace bgpoly
