#pragma once

// Quenched exit-point laws, quenched cumulants of boundary sums and the
// a-derivatives sigma_k of the coupled free energy.
//
// t1 = l >= 1: the path runs along the south axis to (l, 0), steps up to (l, 1)
// and then crosses the bulk to (m, n). For l = m that last part is the east
// column. t1 = 0 is the event t2 >= 1, with the mirror-image decomposition.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "bgpoly/coupling.hpp"
#include "bgpoly/errors.hpp"
#include "bgpoly/lattice.hpp"
#include "bgpoly/numdiff.hpp"
#include "bgpoly/partition.hpp"
#include "bgpoly/setpart.hpp"

namespace bgpoly {

/// Bulk-only log partition functions (i, j) -> (m, n) for i, j >= 1.
inline PartitionTable reverse_partition(const Environment& env) {
  PartitionTable t;
  t.m = env.m;
  t.n = env.n;
  t.direction = TableDirection::ReverseBulk;
  t.v.assign(static_cast<std::size_t>(env.m + 1) * (env.n + 1), std::numeric_limits<double>::quiet_NaN());
  t.at(env.m, env.n) = 0.0;
  for (int i = env.m; i >= 1; --i)
    for (int j = env.n; j >= 1; --j) {
      if (i == env.m && j == env.n) continue;
      double v = -std::numeric_limits<double>::infinity();
      if (i < env.m) v = env.y1(i + 1, j) + t.at(i + 1, j);
      if (j < env.n) v = lse(v, env.y2(i, j + 1) + t.at(i, j + 1));
      t.at(i, j) = v;
    }
  return t;
}

enum class Axis { South, West };

/// q[l] = Q(t = l), l = 0..extent, for t1 (South) or t2 (West).
struct ExitDistribution {
  Axis axis = Axis::South;
  std::vector<double> q;
  int extent() const { return static_cast<int>(q.size()) - 1; }
  double total() const {
    double s = 0.0;
    for (double x : q) s += x;
    return s;
  }
};

namespace detail {

inline void check_probabilities(std::vector<double>& q, const char* what) {
  for (double& x : q) {
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
      throw NumericError(std::string(what) + ": exit probability " + std::to_string(x) + " outside [0, 1]");
    x = std::clamp(x, 0.0, 1.0);
  }
}

// log-weights of the two exit families: south[l-1] = S_l + log Y2(l,1) + B(l,1) (l = 1..m),
// west[j-1] = W_j + log Y1(1,j) + B(1,j) (j = 1..n).
struct ExitLogWeights {
  std::vector<double> south, west;
};

inline ExitDistribution exit_from_log_weights(const ExitLogWeights& w, double log_z, Axis axis) {
  const auto& own = axis == Axis::South ? w.south : w.west;
  const auto& other = axis == Axis::South ? w.west : w.south;
  ExitDistribution d;
  d.axis = axis;
  d.q.assign(own.size() + 1, 0.0);
  for (std::size_t l = 0; l < own.size(); ++l) d.q[l + 1] = std::exp(own[l] - log_z);
  long double q0 = 0.0L;
  for (double x : other) q0 += std::exp(x - log_z);
  d.q[0] = static_cast<double>(q0);
  check_probabilities(d.q, "exit_distribution");
  return d;
}

// A single path: along one axis only.
inline ExitDistribution degenerate_exit(const Environment& env, Axis axis) {
  ExitDistribution d;
  d.axis = axis;
  const int extent = axis == Axis::South ? env.m : env.n;
  d.q.assign(extent + 1, 0.0);
  d.q[extent] = 1.0;
  return d;
}

}  // namespace detail

inline ExitDistribution exit_distribution(const Environment& env, const PartitionTable& fwd,
                                          const PartitionTable& rev, Axis axis) {
  if (fwd.direction != TableDirection::Forward || rev.direction != TableDirection::ReverseBulk)
    throw StateError("exit_distribution: needs a forward and a reverse-bulk table");
  if (fwd.m != env.m || fwd.n != env.n || rev.m != env.m || rev.n != env.n)
    throw StateError("exit_distribution: tables do not match the environment");
  if (env.m == 0 || env.n == 0) return detail::degenerate_exit(env, axis);
  detail::ExitLogWeights w;
  for (int l = 1; l <= env.m; ++l) w.south.push_back(fwd.at(l, 0) + env.y2(l, 1) + rev.at(l, 1));
  for (int j = 1; j <= env.n; ++j) w.west.push_back(fwd.at(0, j) + env.y1(1, j) + rev.at(1, j));
  return detail::exit_from_log_weights(w, fwd.log_z(), axis);
}

/// log Z and both exit laws from one reverse sweep, O(n) extra memory.
struct QuenchedExit {
  double log_z = 0.0;
  ExitDistribution south, west;
};

inline QuenchedExit quenched_exit(const Environment& env) {
  const int m = env.m, n = env.n;
  if (m == 0 || n == 0)
    return {log_partition_value(env), detail::degenerate_exit(env, Axis::South), detail::degenerate_exit(env, Axis::West)};
  std::vector<double> b(n + 1), next(n + 1);  // B(i, j), B(i+1, j), j = 1..n
  detail::ExitLogWeights w;
  w.south.resize(m);
  for (int i = m; i >= 1; --i) {
    const double* y2 = &env.bulk2[static_cast<std::size_t>(i - 1) * n];  // y2(i, j) = y2[j-1]
    if (i == m) {
      b[n] = 0.0;
      for (int j = n - 1; j >= 1; --j) b[j] = y2[j] + b[j + 1];
    } else {
      const double* y1 = &env.bulk1[static_cast<std::size_t>(i) * n];  // y1(i+1, j) = y1[j-1]
      b[n] = y1[n - 1] + next[n];
      for (int j = n - 1; j >= 1; --j) b[j] = lse(y1[j - 1] + next[j], y2[j] + b[j + 1]);
    }
    w.south[i - 1] = b[1] + y2[0];
    std::swap(b, next);
  }
  // next now holds B(1, j)
  long double s = 0.0L;
  for (int l = 1; l <= m; ++l) w.south[l - 1] += static_cast<double>(s += env.south[l - 1]);
  w.west.resize(n);
  long double acc = 0.0L;
  for (int j = 1; j <= n; ++j) w.west[j - 1] = static_cast<double>(acc += env.west[j - 1]) + env.y1(1, j) + next[j];
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : w.south) mx = std::max(mx, x);
  for (double x : w.west) mx = std::max(mx, x);
  long double tot = 0.0L;
  for (double x : w.south) tot += std::exp(static_cast<long double>(x - mx));
  for (double x : w.west) tot += std::exp(static_cast<long double>(x - mx));
  QuenchedExit out;
  out.log_z = mx + static_cast<double>(std::log(tot));
  out.south = detail::exit_from_log_weights(w, out.log_z, Axis::South);
  out.west = detail::exit_from_log_weights(w, out.log_z, Axis::West);
  return out;
}

/// sum_l l^p q_l.
inline double exit_moment(const ExitDistribution& d, double p) {
  if (!(p >= 0.0)) throw RangeError("exit_moment: p must be >= 0");
  long double s = 0.0L;
  for (std::size_t l = 0; l < d.q.size(); ++l) s += (p == 0.0 ? 1.0L : std::pow(static_cast<long double>(l), p)) * d.q[l];
  return static_cast<double>(s);
}

inline constexpr int kMaxQuenchedOrder = 6;

/// Quenched joint cumulant of X_c = sum_{i <= t1 ^ r} g_c(i), c = 1..j, where
/// site_values[c][i-1] = g_c(i).
inline double quenched_cumulant_of_sums(const ExitDistribution& d, const std::vector<std::vector<double>>& site_values,
                                        int r) {
  const int j = static_cast<int>(site_values.size());
  if (j < 1) throw RangeError("quenched cumulant: need at least one sum");
  if (j > kMaxQuenchedOrder)
    throw CapabilityError("quenched cumulant: order " + std::to_string(j) + " exceeds " +
                          std::to_string(kMaxQuenchedOrder));
  if (d.axis != Axis::South) throw StateError("quenched cumulant: sums run along the south axis");
  r = std::clamp(r, 0, d.extent());
  // the sums depend on t1 only through t1 ^ r
  std::vector<double> w(r + 1, 0.0);
  for (int l = 0; l <= d.extent(); ++l) w[std::min(l, r)] += d.q[l];
  std::vector<std::vector<double>> x(j, std::vector<double>(r + 1, 0.0));
  for (int c = 0; c < j; ++c) {
    if (static_cast<int>(site_values[c].size()) < r) throw RangeError("quenched cumulant: fewer site values than r");
    long double acc = 0.0L;
    for (int l = 1; l <= r; ++l) x[c][l] = static_cast<double>(acc += site_values[c][l - 1]);
  }
  std::vector<double> mean(j, 0.0);
  for (int c = 0; c < j; ++c) {
    long double s = 0.0L;
    for (int l = 0; l <= r; ++l) s += static_cast<long double>(w[l]) * x[c][l];
    mean[c] = static_cast<double>(s);
  }
  if (j == 1) return mean[0];
  for (int c = 0; c < j; ++c)
    for (double& v : x[c]) v -= mean[c];
  auto moment = [&](std::uint32_t mask) {
    long double s = 0.0L;
    for (int l = 0; l <= r; ++l) {
      long double p = w[l];
      for (int c = 0; c < j; ++c)
        if (mask & (1u << c)) p *= x[c][l];
      s += p;
    }
    return static_cast<double>(s);
  };
  return cumulant_from_moments(j, moment, true);
}

inline constexpr int kMaxSigmaOrder = 4;

/// sigma_k as a combination of quenched cumulants: each term is
/// coefficient * kappa_j(sum d~^{l_1} L, ..., sum d~^{l_j} L), l sorted ascending.
struct SigmaTerm {
  std::vector<int> orders;
  double coefficient;
};

/// Terms of d^k/da^k log Z, from d/da kappa_j(l_1..l_j) = sum_i kappa_j(.., l_i + 1, ..) + kappa_{j+1}(l_1..l_j, 0)
/// starting at kappa_1(0).
inline std::vector<SigmaTerm> sigma_terms(int k) {
  if (k < 1) throw RangeError("sigma_terms: k must be >= 1");
  if (k > kMaxSigmaOrder)
    throw CapabilityError("sigma_k: order " + std::to_string(k) + " exceeds " + std::to_string(kMaxSigmaOrder));
  std::map<std::vector<int>, double> cur{{{0}, 1.0}};
  for (int step = 1; step < k; ++step) {
    std::map<std::vector<int>, double> nxt;
    for (const auto& [ord, c] : cur) {
      for (std::size_t i = 0; i < ord.size(); ++i) {
        auto o = ord;
        ++o[i];
        std::sort(o.begin(), o.end());
        nxt[o] += c;
      }
      auto o = ord;
      o.push_back(0);
      std::sort(o.begin(), o.end());
      nxt[o] += c;
    }
    cur = std::move(nxt);
  }
  std::vector<SigmaTerm> out;
  for (const auto& [ord, c] : cur) out.push_back({ord, c});
  return out;
}

namespace detail {

inline const TildeDerivatives& tilde_cached(const MellinFamily& fam, int order) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, int>, std::unique_ptr<TildeDerivatives>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(static_cast<int>(fam.kind()), fam.b(), order);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<TildeDerivatives>(fam, order)).first;
  return *it->second;
}

}  // namespace detail

/// site[l][i-1] = d~^l L^{f1}(a, R1_{i,0}) for l = 0..max_order, i = 1..r.
inline std::vector<std::vector<double>> tilde_site_values(const Environment& env, int max_order, int r, double a) {
  r = std::clamp(r, 0, env.m);
  const TildeDerivatives& td = detail::tilde_cached(env.spec.f1, max_order);
  std::vector<std::vector<double>> site(max_order + 1, std::vector<double>(r));
  for (int i = 0; i < r; ++i) {
    const auto v = td.evaluate(a, std::exp(env.south[i]));
    for (int l = 0; l <= max_order; ++l) site[l][i] = v[l];
  }
  return site;
}

/// sigma_1..sigma_K of the environment for truncation r at parameter a, given its south exit law.
inline std::vector<double> sigma_values(const ExitDistribution& south, const std::vector<std::vector<double>>& site,
                                        int K, int r) {
  std::vector<double> out;
  for (int k = 1; k <= K; ++k) {
    double s = 0.0;
    for (const auto& term : sigma_terms(k)) {
      std::vector<std::vector<double>> args;
      for (int l : term.orders) args.push_back(site.at(l));
      s += term.coefficient * quenched_cumulant_of_sums(south, args, r);
    }
    out.push_back(s);
  }
  return out;
}

struct SigmaValues {
  int k = 0, r = 0;
  double value = 0.0;
};

inline SigmaValues sigma_k(const Environment& env, int k, int r, double a) {
  if (k < 1) throw RangeError("sigma_k: k must be >= 1");
  if (k > kMaxSigmaOrder)
    throw CapabilityError("sigma_k: order " + std::to_string(k) + " exceeds " + std::to_string(kMaxSigmaOrder));
  r = std::clamp(r, 0, env.m);
  if (r == 0) return {k, 0, 0.0};
  const auto qe = quenched_exit(env);
  const auto site = tilde_site_values(env, k - 1, r, a);
  return {k, r, sigma_values(qe.south, site, k, r).back()};
}

inline SigmaValues sigma_k(const Environment& env, int k, int r) { return sigma_k(env, k, r, env.spec.a1); }

struct DerivCheck {
  double finite_difference = 0.0;
  double sigma = 0.0;
  double rel_error = 0.0;
};

/// log Z(perturb_boundary(env, a', r)) - log Z(env) from the south exit law of env:
/// Z'/Z = sum_l q_l prod_{i <= min(l, r)} R'_i / R_i. Free of the cancellation in a DP difference,
/// which matters once the path rarely uses the perturbed edges.
inline double log_partition_shift(const Environment& env, const QuenchedExit& qe, double a1_prime, int r) {
  const Environment p = perturb_boundary(env, a1_prime, r);
  long double acc = 0.0L, cum = 0.0L;
  for (int l = 1; l <= env.m; ++l) {
    if (l <= r) cum += static_cast<long double>(p.south[l - 1]) - env.south[l - 1];
    acc += static_cast<long double>(qe.south.q[l]) * std::expm1(cum);
  }
  return static_cast<double>(std::log1p(acc));
}

/// k-th derivative of a' -> log Z(perturb_boundary(env, a', r)) at a1 by central differences
/// (step h, one Richardson level) against sigma_k.
inline DerivCheck deriv_consistency_check(const Environment& env, int k, int r, double h) {
  if (k < 1 || k > 2) throw CapabilityError("deriv_consistency_check: k must be 1 or 2");
  const double a = env.spec.a1;
  const Interval dom = env.spec.f1.domain();
  if (!dom.contains(a - k * h) || !dom.contains(a + k * h))
    throw DomainError("deriv_consistency_check: a1 +- k h leaves the domain");
  DerivCheck out;
  out.sigma = sigma_k(env, k, r, a).value;
  const QuenchedExit qe = quenched_exit(env);
  auto g = [&](double ap) { return log_partition_shift(env, qe, ap, r); };
  out.finite_difference = numdiff::derivative(g, a, k, h, 2);
  const double scale = std::max(std::abs(out.sigma), std::abs(out.finite_difference));
  out.rel_error = scale == 0.0 ? 0.0 : std::abs(out.finite_difference - out.sigma) / scale;
  return out;
}

}  // namespace bgpoly
