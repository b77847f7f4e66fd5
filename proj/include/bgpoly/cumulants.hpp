#pragma once

// Empirical joint cumulants with delete-1 jackknife errors, and Monte Carlo checks of
// the cumulant expansion of log Z and of the moment integration-by-parts identity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bgpoly/errors.hpp"
#include "bgpoly/lattice.hpp"
#include "bgpoly/numdiff.hpp"
#include "bgpoly/parallel.hpp"
#include "bgpoly/partition.hpp"
#include "bgpoly/polynomials.hpp"
#include "bgpoly/quenched.hpp"
#include "bgpoly/setpart.hpp"

namespace bgpoly {

struct CumulantEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int k = 0;
  std::size_t n_samples = 0;
};

/// sqrt((n-1)/n sum (theta_i - mean theta)^2) over leave-one-out estimates.
inline double jackknife_stderr(const std::vector<double>& loo) {
  const std::size_t n = loo.size();
  if (n < 2) return 0.0;
  long double mean = 0.0L;
  for (double v : loo) mean += v;
  mean /= n;
  long double ss = 0.0L;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return static_cast<double>(std::sqrt(ss * (n - 1) / n));
}

/// A statistic together with its leave-one-out replicates; linear combinations
/// of these keep a valid jackknife.
struct Jackknifed {
  double value = 0.0;
  std::vector<double> loo;

  double std_error() const { return jackknife_stderr(loo); }
  Jackknifed& add(const Jackknifed& o, double c) {
    if (loo.empty()) loo.assign(o.loo.size(), 0.0);
    if (loo.size() != o.loo.size()) throw StateError("Jackknifed: sample counts differ");
    value += c * o.value;
    for (std::size_t i = 0; i < loo.size(); ++i) loo[i] += c * o.loo[i];
    return *this;
  }
};

/// Columns of one sample (cols[v][i] = variable v in draw i), shifted by their means.
/// Plug-in joint cumulants of any multiset of the variables, with delete-1 replicates
/// computed from the subset totals in O(n 2^k).
class SampleCumulants {
 public:
  explicit SampleCumulants(std::vector<std::vector<double>> cols) : cols_(std::move(cols)) {
    if (cols_.empty()) throw RangeError("joint cumulant: no columns");
    n_ = cols_.front().size();
    for (const auto& c : cols_)
      if (c.size() != n_) throw RangeError("joint cumulant: columns differ in length");
    if (n_ < 30) throw RangeError("joint cumulant: needs at least 30 samples (got " + std::to_string(n_) + ")");
    for (auto& c : cols_) {
      long double s = 0.0L;
      for (double v : c) s += v;
      shift_.push_back(static_cast<double>(s / n_));
      const bool constant = std::all_of(c.begin(), c.end(), [&](double v) { return v == c.front(); });
      for (double& v : c) v = constant ? 0.0 : v - shift_.back();
    }
  }

  std::size_t size() const { return n_; }

  /// kappa(X_{vars[0]}, ..., X_{vars[k-1]}).
  Jackknifed joint(const std::vector<int>& vars) const {
    const int k = static_cast<int>(vars.size());
    if (k < 1) throw RangeError("joint cumulant: empty variable list");
    if (k > kMaxPartitionOrder)
      throw CapabilityError("joint cumulant: order " + std::to_string(k) + " exceeds " +
                            std::to_string(kMaxPartitionOrder));
    for (int v : vars)
      if (v < 0 || v >= static_cast<int>(cols_.size())) throw RangeError("joint cumulant: variable index out of range");
    Jackknifed out;
    out.loo.resize(n_);
    if (k == 1) {
      const auto& c = cols_[vars[0]];
      long double t = 0.0L;
      for (double v : c) t += v;
      const double sh = shift_[vars[0]];
      out.value = sh + static_cast<double>(t / n_);
      for (std::size_t i = 0; i < n_; ++i) out.loo[i] = sh + static_cast<double>((t - c[i]) / (n_ - 1));
      return out;
    }
    const std::uint32_t full = (1u << k) - 1;
    std::vector<long double> total(full + 1, 0.0L);
    std::vector<double> prod(full + 1);
    auto products = [&](std::size_t i) {
      prod[0] = 1.0;
      for (std::uint32_t m = 1; m <= full; ++m) {
        const int low = __builtin_ctz(m);
        prod[m] = prod[m & (m - 1)] * cols_[vars[low]][i];
      }
    };
    for (std::size_t i = 0; i < n_; ++i) {
      products(i);
      for (std::uint32_t m = 1; m <= full; ++m) total[m] += prod[m];
    }
    std::vector<double> mom(full + 1);
    auto eval = [&] { return cumulant_from_moments(k, [&](std::uint32_t m) { return mom[m]; }); };
    for (std::uint32_t m = 1; m <= full; ++m) mom[m] = static_cast<double>(total[m] / n_);
    out.value = eval();
    for (std::size_t i = 0; i < n_; ++i) {
      products(i);
      for (std::uint32_t m = 1; m <= full; ++m) mom[m] = static_cast<double>((total[m] - prod[m]) / (n_ - 1));
      out.loo[i] = eval();
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> cols_;
  std::vector<double> shift_;
  std::size_t n_ = 0;
};

/// Plug-in joint cumulant of all k columns (cols[c][i]); order 1 is the sample mean.
inline CumulantEstimate joint_cumulant_empirical(const std::vector<std::vector<double>>& cols) {
  const SampleCumulants sc(cols);
  std::vector<int> vars(cols.size());
  for (std::size_t c = 0; c < vars.size(); ++c) vars[c] = static_cast<int>(c);
  const Jackknifed j = sc.joint(vars);
  return {j.value, j.std_error(), static_cast<int>(cols.size()), sc.size()};
}

/// lhs vs rhs with a combined standard error; passes when |lhs - rhs| <= sigmas * std_error
/// (or, for exact comparisons, <= abs_tol).
struct IdentityReport {
  std::string name;
  double lhs = 0.0, rhs = 0.0, diff = 0.0, std_error = 0.0;
  bool pass = false;
};

inline IdentityReport make_report(std::string name, double lhs, double rhs, double se, double sigmas = 4.0,
                                  double abs_tol = 0.0) {
  IdentityReport r{std::move(name), lhs, rhs, lhs - rhs, se, false};
  r.pass = std::isfinite(r.diff) && std::abs(r.diff) <= std::max(sigmas * se, abs_tol);
  return r;
}

struct CumulantIdentityReport {
  int k = 0;
  int replicas = 0;
  IdentityReport expansion;  // kappa_k(log Z) against the E/S expansion
  IdentityReport south;      // kappa_k(S_m) vs m psi_{k-1}^{f1}(a1)
  IdentityReport east;       // kappa_k(E_n) vs n psi_{k-1}^{f2}(a2)
  bool pass() const { return expansion.pass && south.pass && east.pass; }
};

namespace detail {

inline double binom(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

struct NsewSample {
  std::vector<double> log_z, south, east;
};

inline NsewSample nsew_sample(const ModelSpec& spec, int m, int n, int replicas, std::uint64_t seed, int threads) {
  NsewSample s;
  s.log_z.resize(replicas);
  s.south.resize(replicas);
  s.east.resize(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    const PartitionTable t = log_partition(sample_environment(spec, m, n, seed, r));
    const auto d = nsew_decompose(t);
    s.log_z[r] = t.log_z();
    s.south[r] = d.S;
    s.east[r] = d.E;
  });
  return s;
}

}  // namespace detail

/// kappa_k(log Z) = kappa_k(E) - (-1)^k kappa_k(S) - sum_{j=1}^{k-1} C(k,j) (-1)^{k-j} kappa(log Z^{(j)}, S^{(k-j)}),
/// every term estimated on the same replicas.
inline CumulantIdentityReport cumulant_identity_check(const ModelSpec& spec, int m, int n, int k, int replicas,
                                                      std::uint64_t seed, int threads = 0) {
  if (k < 2 || k > 4) throw RangeError("cumulant_identity_check: k must be 2, 3 or 4");
  if (replicas < 10000) throw RangeError("cumulant_identity_check: needs at least 10^4 replicas");
  if (m < 1 || n < 1) throw RangeError("cumulant_identity_check: box must be at least 1x1");
  const auto s = detail::nsew_sample(spec, m, n, replicas, seed, threads);
  const SampleCumulants sc({s.log_z, s.south, s.east});
  constexpr int Z = 0, S = 1, E = 2;
  auto vars = [](int j, int a, int b, int bvar) {
    std::vector<int> v(j, a);
    v.insert(v.end(), b, bvar);
    return v;
  };
  const Jackknifed lhs = sc.joint(vars(k, Z, 0, S));
  const Jackknifed kE = sc.joint(vars(k, E, 0, S));
  const Jackknifed kS = sc.joint(vars(0, Z, k, S));
  Jackknifed rhs;
  rhs.add(kE, 1.0).add(kS, k % 2 == 0 ? -1.0 : 1.0);
  for (int j = 1; j < k; ++j) rhs.add(sc.joint(vars(j, Z, k - j, S)), -detail::binom(k, j) * (((k - j) % 2) ? -1.0 : 1.0));
  const double se = std::hypot(lhs.std_error(), rhs.std_error());
  CumulantIdentityReport out;
  out.k = k;
  out.replicas = replicas;
  out.expansion = make_report("kappa_" + std::to_string(k) + "(log Z) expansion", lhs.value, rhs.value, se);
  out.south = make_report("kappa_" + std::to_string(k) + "(S_m)", kS.value, m * spec.f1.psi(k - 1, spec.a1),
                          kS.std_error());
  out.east = make_report("kappa_" + std::to_string(k) + "(E_n)", kE.value, n * spec.f2.psi(k - 1, spec.a2),
                         kE.std_error());
  return out;
}

namespace detail {

/// All (l_1..l_j), l_i >= 0, summing to k, with k!/(l_1!...l_j!).
inline std::vector<std::pair<std::vector<int>, double>> compositions(int k, int j) {
  std::vector<std::pair<std::vector<int>, double>> out;
  if (j == 0) {
    if (k == 0) out.push_back({{}, 1.0});
    return out;
  }
  std::vector<int> l(j, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == j - 1) {
      l[pos] = left;
      double c = std::tgamma(k + 1.0);
      for (int v : l) c /= std::tgamma(v + 1.0);
      out.push_back({l, c});
      return;
    }
    for (int v = 0; v <= left; ++v) {
      l[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, k);
  return out;
}

}  // namespace detail

/// E[(log Z - E log Z)^j p_k(S_r, a1; r)] against sum_{l_1+..+l_j=k} k!/(l_1!..l_j!) E[prod sigma_{l_i}(t1 ^ r)],
/// sigma_0 = log Z - E log Z. The standard error is that of the per-replica difference.
inline IdentityReport ibp_moment_identity_check(const ModelSpec& spec, int m, int n, int j, int k, int r,
                                                int replicas, std::uint64_t seed, int threads = 0) {
  if (j < 0 || k < 0 || j + k > 4) throw RangeError("ibp_moment_identity_check: need j, k >= 0 and j + k <= 4");
  if (r < 1 || r > m) throw RangeError("ibp_moment_identity_check: need 1 <= r <= m");
  if (replicas < 10000) throw RangeError("ibp_moment_identity_check: needs at least 10^4 replicas");
  if (n < 0 || m + n < 1) throw RangeError("ibp_moment_identity_check: empty box");
  const PnPoly p(spec.f1, k, spec.a1, r);
  std::vector<double> log_z(replicas), pk(replicas);
  std::vector<std::vector<double>> sig(replicas);
  parallel_for(replicas, threads, [&](std::size_t i) {
    const Environment env = sample_environment(spec, m, n, seed, i, r);
    long double s = 0.0L;
    for (int l = 0; l < r; ++l) s += env.south[l];
    pk[i] = p.eval(static_cast<double>(s));
    if (k == 0 || j == 0) {
      log_z[i] = log_partition_value(env);
      return;
    }
    const QuenchedExit qe = quenched_exit(env);
    log_z[i] = qe.log_z;
    sig[i] = sigma_values(qe.south, tilde_site_values(env, k - 1, r, spec.a1), k, r);
  });
  long double mz = 0.0L;
  for (double v : log_z) mz += v;
  const double mean_z = static_cast<double>(mz / replicas);
  const auto comps = detail::compositions(k, j);
  stats::RunningMoments L, R, D;
  for (int i = 0; i < replicas; ++i) {
    const double zbar = log_z[i] - mean_z;
    const double lhs = std::pow(zbar, j) * pk[i];
    double rhs = 0.0;
    for (const auto& [ls, c] : comps) {
      double prod = c;
      for (int l : ls) prod *= l == 0 ? zbar : sig[i][l - 1];
      rhs += prod;
    }
    L.add(lhs);
    R.add(rhs);
    D.add(lhs - rhs);
  }
  IdentityReport rep = make_report("E[logZbar^" + std::to_string(j) + " p_" + std::to_string(k) + "(S_r)] (r=" +
                                       std::to_string(r) + ")",
                                   L.mean(), R.mean(), D.std_error(), 4.0, 1e-12);
  return rep;
}

/// Var(log Z) = n psi_1^{f2}(a2) - m psi_1^{f1}(a1) + 2 E[sigma_1(t1)] on the full box (r = m).
inline IdentityReport variance_formula_check(const ModelSpec& spec, int m, int n, int replicas, std::uint64_t seed,
                                             int threads = 0) {
  if (m < 1 || n < 1) throw RangeError("variance_formula_check: box must be at least 1x1");
  if (replicas < 1000) throw RangeError("variance_formula_check: needs at least 1000 replicas");
  std::vector<double> log_z(replicas), s1(replicas);
  parallel_for(replicas, threads, [&](std::size_t i) {
    const Environment env = sample_environment(spec, m, n, seed, i);
    const QuenchedExit qe = quenched_exit(env);
    log_z[i] = qe.log_z;
    s1[i] = sigma_values(qe.south, tilde_site_values(env, 0, m, spec.a1), 1, m)[0];
  });
  stats::RunningMoments z;
  for (double v : log_z) z.add(v);
  // per-replica (logZ - mean)^2 - 2 sigma_1 has mean Var - 2E[sigma_1]
  stats::RunningMoments d, s;
  for (int i = 0; i < replicas; ++i) {
    const double c = log_z[i] - z.mean();
    d.add(c * c - 2.0 * s1[i]);
    s.add(s1[i]);
  }
  const double exact = n * spec.f2.psi(1, spec.a2) - m * spec.f1.psi(1, spec.a1);
  return make_report("Var(log Z) exact formula", z.central(2), exact + 2.0 * s.mean(), d.std_error());
}

struct IbpLogSquarePoint {
  int n = 0;
  double derivative = 0.0;  // d^n/da^n E^a[(log X_1)^2] by quadrature + finite differences
  double weighted = 0.0;    // E^a[(log X_1)^2 p_n(log X_1 + log X_2, a; 2)] by quadrature
  double rel_error = 0.0;
  bool pass = false;
};

/// d^n/da^n E^a[A] = E^a[A p_n(S_2, a; 2)] for A = (log X_1)^2, X_1, X_2 i.i.d. m_f(a).
inline IbpLogSquarePoint ibp_log_square_check(const MellinFamily& fam, double a, int n, double tol = 1e-6) {
  if (n < 1 || n > 2) throw CapabilityError("ibp_log_square_check: n must be 1 or 2");
  fam.require_domain(a, "ibp_log_square_check");
  const Interval d = fam.domain();
  const double room = std::min(a - d.lo, d.hi - a);
  const double h = n == 1 ? std::min(1e-3, room / 3.0) : std::min(0.25, room / 8.0);
  auto g = [&](double ap) { return fam.expect_log(ap, [](double u) { return u * u; }); };
  IbpLogSquarePoint pt;
  pt.n = n;
  pt.derivative = numdiff::derivative(g, a, n, h, n == 1 ? 2 : 3);
  const PnPoly p(fam, n, a, 2);
  pt.weighted = expect2(fam, a, [&](double u1, double u2) { return u1 * u1 * p.eval(u1 + u2); });
  const double scale = std::max(std::abs(pt.derivative), std::abs(pt.weighted));
  pt.rel_error = scale == 0.0 ? 0.0 : std::abs(pt.derivative - pt.weighted) / scale;
  // exact zeros (symmetric BetaPrime centre) are compared with an absolute floor
  pt.pass = pt.rel_error <= tol || std::abs(pt.derivative - pt.weighted) <= 1e-10;
  return pt;
}

}  // namespace bgpoly
