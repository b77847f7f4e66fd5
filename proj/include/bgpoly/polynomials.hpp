#pragma once

// p_0 = 1, p_n(t, a; r) = d/da p_{n-1} + p_{n-1} (t - r psi_0(a)).
// Kept in the centred variable u = t - r psi_0(a): d/da u = -r psi_1(a), so
//   p_n = sum_j c_j(a) u^{a_j} r^{b_j},
// with c_j a monomial in psi_1, psi_2, ... . The generating function is
//   e^{lambda t} (M(a) / M(a + lambda))^r = sum_k lambda^k p_k(t, a; r) / k!.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bgpoly/coupling.hpp"
#include "bgpoly/errors.hpp"
#include "bgpoly/mellin.hpp"
#include "bgpoly/quadrature.hpp"
#include "bgpoly/random.hpp"
#include "bgpoly/symbolic.hpp"

namespace bgpoly {

inline constexpr int kMaxPnOrder = 10;

namespace detail {

// d/da at fixed t: u -> -r psi_1, psi_j -> psi_{j+1}
inline const sym::Derivation& pn_derivation() {
  static const sym::Derivation d([](int v) {
    if (v == sym::kU) return -1.0 * (sym::Poly::var(sym::kR) * sym::Poly::var(sym::psi_var(1)));
    if (v >= sym::kPsi0 && v + 1 < sym::kPsi0 + sym::kPsiSlots) return sym::Poly::var(v + 1);
    return sym::Poly();
  });
  return d;
}

inline const std::vector<sym::Poly>& pn_table() {
  static const std::vector<sym::Poly> table = [] {
    std::vector<sym::Poly> t(kMaxPnOrder + 1);
    t[0] = sym::Poly(1.0);
    for (int n = 1; n <= kMaxPnOrder; ++n) t[n] = pn_derivation()(t[n - 1]) + t[n - 1] * sym::Poly::var(sym::kU);
    return t;
  }();
  return table;
}

}  // namespace detail

/// One term c (t - r psi_0)^{u_power} r^{r_power}; `psi_powers[j]` is the exponent of psi_j in c.
struct PnTerm {
  double coefficient;  // numeric prefactor
  int u_power;
  int r_power;
  std::array<int, sym::kPsiSlots> psi_powers{};
  double value = 0.0;  // coefficient * prod psi_j(a)^{psi_powers[j]}

  /// u_power + sum_j (j+1) psi_powers[j]
  int weight() const {
    int w = u_power;
    for (int j = 0; j < sym::kPsiSlots; ++j) w += (j + 1) * psi_powers[j];
    return w;
  }
  int psi_factor_count() const {
    int c = 0;
    for (int p : psi_powers) c += p;
    return c;
  }
};

class PnPoly {
 public:
  PnPoly(const MellinFamily& fam, int n, double a, int r) : fam_(fam), n_(n), a_(a), r_(r) {
    if (n < 0 || n > kMaxPnOrder) throw CapabilityError("build_p: order " + std::to_string(n) + " not supported (0..10)");
    if (r < 1) throw ValidationError("build_p: r must be a positive integer");
    fam.require_domain(a, "build_p");
    std::array<double, sym::kPsiSlots> psi{};
    for (int j = 0; j <= n && j < sym::kPsiSlots; ++j) psi[j] = fam.psi(j, a);
    center_ = r * psi[0];
    for (const auto& [m, c] : detail::pn_table()[n].terms()) {
      PnTerm t;
      t.coefficient = c;
      t.u_power = m[sym::kU];
      t.r_power = m[sym::kR];
      double v = c;
      for (int j = 0; j < sym::kPsiSlots; ++j) {
        t.psi_powers[j] = m[sym::psi_var(j)];
        if (t.psi_powers[j]) v *= std::pow(psi[j], t.psi_powers[j]);
      }
      t.value = v;
      terms_.push_back(t);
    }
  }

  int order() const { return n_; }
  int r() const { return r_; }
  double a() const { return a_; }
  const MellinFamily& family() const { return fam_; }
  const std::vector<PnTerm>& terms() const { return terms_; }
  /// r psi_0(a)
  double center() const { return center_; }

  double eval(double t) const { return eval_centered(t - center_); }

  /// Value at t = center + u.
  double eval_centered(double u) const {
    double s = 0.0;
    const double rr = r_;
    for (const auto& t : terms_) s += t.value * std::pow(u, t.u_power) * std::pow(rr, t.r_power);
    return s;
  }

  std::string to_string() const { return detail::pn_table()[n_].to_string(); }

 private:
  MellinFamily fam_;
  int n_;
  double a_;
  int r_;
  double center_ = 0.0;
  std::vector<PnTerm> terms_;
};

inline PnPoly build_p(const MellinFamily& fam, int n, double a, int r) { return PnPoly(fam, n, a, r); }

/// |e^{lambda s} (M(a)/M(a+lambda))^r - sum_{k<=K} lambda^k p_k(s, a; r) / k!|
inline double generating_check(const MellinFamily& fam, double a, int r, double s, double lambda, int K) {
  if (K < 0 || K > kMaxPnOrder) throw CapabilityError("generating_check: K must lie in 0..10");
  fam.require_domain(a, "generating_check");
  fam.require_domain(a + lambda, "generating_check");
  const double lhs = std::exp(lambda * s + r * (fam.log_mellin(a) - fam.log_mellin(a + lambda)));
  double rhs = 0.0;
  double coef = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) coef *= lambda / k;
    rhs += coef * build_p(fam, k, a, r).eval(s);
  }
  return std::abs(lhs - rhs);
}

/// E[g(log X_1, log X_2)] for X_i i.i.d. m_f(a), by nested quadrature.
template <class G>
double expect2(const MellinFamily& fam, double a, G&& g, double tol = 1e-12) {
  return fam.expect_log(a, [&](double u1) {
    return fam.expect_log(a, [&](double u2) { return g(u1, u2); }, tol);
  }, tol);
}

struct MeanZeroResult {
  double value = 0.0;
  double std_error = 0.0;  // 0 for the quadrature route
  long samples = 0;
};

/// E[p_n(S_r, a; r)], S_r = sum of r i.i.d. log X_i. Quadrature for r <= 2, Monte Carlo otherwise
/// (or when `mc_samples` > 0).
inline MeanZeroResult mean_zero_check(const MellinFamily& fam, int n, double a, int r, long mc_samples = 0,
                                      std::uint64_t seed = 1) {
  if (n < 1) throw ValidationError("mean_zero_check: n must be positive");
  const PnPoly p(fam, n, a, r);
  MeanZeroResult out;
  if (mc_samples == 0 && r <= 2) {
    if (r == 1) {
      out.value = fam.expect_log(a, [&](double u) { return p.eval(u); });
    } else {
      out.value = expect2(fam, a, [&](double u1, double u2) { return p.eval(u1 + u2); });
    }
    return out;
  }
  if (mc_samples <= 1) mc_samples = 100000;
  const CoupledSampler s(fam, a);
  Rng rng(seed);
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < mc_samples; ++i) {
    double sum = 0.0;
    for (int j = 0; j < r; ++j) sum += s.log_inverse(rng.uniform());
    const double v = p.eval(sum);
    const double d = v - mean;
    mean += d / (i + 1);
    m2 += d * (v - mean);
  }
  out.value = mean;
  out.std_error = std::sqrt(m2 / (mc_samples - 1) / mc_samples);
  out.samples = mc_samples;
  return out;
}

}  // namespace bgpoly
