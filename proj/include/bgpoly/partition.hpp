#pragma once

// log Z over the box by dynamic programming, a path-enumeration oracle, the
// NSEW boundary decomposition and ratio collection along down-right paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bgpoly/errors.hpp"
#include "bgpoly/lattice.hpp"
#include "bgpoly/parallel.hpp"
#include "bgpoly/stats.hpp"

namespace bgpoly {

/// log(e^x + e^y), max-shifted.
template <class Real>
inline Real lse(Real x, Real y) {
  if (x < y) std::swap(x, y);
  if (y == -std::numeric_limits<Real>::infinity()) return x;
  return x + std::log1p(std::exp(y - x));
}
inline double lse(double x, double y) { return lse<double>(x, y); }

enum class TableDirection { Forward, ReverseBulk };

/// Grid of log Z over {0..m} x {0..n}. Forward: log Z_{(i,j)} from the origin.
/// ReverseBulk: log of the bulk-only partition function (i,j) -> (m,n), defined
/// for i, j >= 1 (NaN elsewhere).
struct PartitionTable {
  int m = 0, n = 0;
  TableDirection direction = TableDirection::Forward;
  std::vector<double> v;

  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * (n + 1) + j]; }
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * (n + 1) + j]; }
  double log_z() const {
    if (direction != TableDirection::Forward) throw StateError("log_z: table is not a forward table");
    return at(m, n);
  }
};

inline PartitionTable log_partition(const Environment& env) {
  PartitionTable t;
  t.m = env.m;
  t.n = env.n;
  t.direction = TableDirection::Forward;
  t.v.assign(static_cast<std::size_t>(env.m + 1) * (env.n + 1), 0.0);
  long double acc = 0.0L;
  for (int i = 1; i <= env.m; ++i) t.at(i, 0) = static_cast<double>(acc += env.south[i - 1]);
  acc = 0.0L;
  for (int j = 1; j <= env.n; ++j) t.at(0, j) = static_cast<double>(acc += env.west[j - 1]);
  for (int i = 1; i <= env.m; ++i)
    for (int j = 1; j <= env.n; ++j) t.at(i, j) = lse(env.y1(i, j) + t.at(i - 1, j), env.y2(i, j) + t.at(i, j - 1));
  return t;
}

/// log Z_{m,n} alone, keeping one column of the grid. Real = long double gives an
/// extended-precision value for finite differences in the boundary parameter.
template <class Real = double>
inline Real log_partition_value(const Environment& env) {
  std::vector<Real> col(env.n + 1);
  long double acc = 0.0L;
  col[0] = 0.0;
  for (int j = 1; j <= env.n; ++j) col[j] = static_cast<Real>(acc += env.west[j - 1]);
  long double s = 0.0L;
  for (int i = 1; i <= env.m; ++i) {
    col[0] = static_cast<Real>(s += env.south[i - 1]);
    const double* y1 = &env.bulk1[static_cast<std::size_t>(i - 1) * env.n];
    const double* y2 = &env.bulk2[static_cast<std::size_t>(i - 1) * env.n];
    for (int j = 1; j <= env.n; ++j) col[j] = lse<Real>(y1[j - 1] + col[j], y2[j - 1] + col[j - 1]);
  }
  return col[env.n];
}

inline constexpr int kBruteForceMaxSteps = 14;

/// Calls visit(log_weight, t1, t2) for every up-right path (0,0) -> (m,n), where t1/t2
/// are the last south/west axis indices the path visits. Requires m + n <= 14.
template <class Visit>
void for_each_path(const Environment& env, Visit&& visit) {
  if (env.m + env.n > kBruteForceMaxSteps)
    throw CapabilityError("path enumeration limited to m + n <= 14 (got " + std::to_string(env.m + env.n) + ")");
  const int steps = env.m + env.n;
  // bit k set: step k goes right
  for (std::uint32_t mask = 0; mask < (1u << steps); ++mask) {
    if (__builtin_popcount(mask) != env.m) continue;
    int i = 0, j = 0, t1 = 0, t2 = 0;
    long double w = 0.0L;
    for (int k = 0; k < steps; ++k) {
      if (mask & (1u << k)) {
        ++i;
        w += env.horizontal(i, j);
        if (j == 0) t1 = i;
      } else {
        ++j;
        w += env.vertical(i, j);
        if (i == 0) t2 = j;
      }
    }
    visit(static_cast<double>(w), t1, t2);
  }
}

/// Oracle for the DP: logsumexp of all C(m+n, n) path log-weights.
inline double brute_force_logZ(const Environment& env) {
  std::vector<double> w;
  for_each_path(env, [&](double lw, int, int) { w.push_back(lw); });
  const double mx = *std::max_element(w.begin(), w.end());
  long double s = 0.0L;
  for (double x : w) s += std::exp(static_cast<long double>(x - mx));
  return mx + static_cast<double>(std::log(s));
}

/// W + N = S + E = log Z_{m,n}, each a sum of log-ratios along one side of the box.
struct NSEWDecomposition {
  double W = 0.0, N = 0.0, S = 0.0, E = 0.0;
};

inline NSEWDecomposition nsew_decompose(const PartitionTable& t) {
  if (t.direction != TableDirection::Forward) throw StateError("nsew_decompose: needs a forward table");
  NSEWDecomposition d;
  d.W = t.at(0, t.n);
  d.S = t.at(t.m, 0);
  long double acc = 0.0L;
  for (int i = 1; i <= t.m; ++i) acc += static_cast<long double>(t.at(i, t.n)) - t.at(i - 1, t.n);
  d.N = static_cast<double>(acc);
  acc = 0.0L;
  for (int j = 1; j <= t.n; ++j) acc += static_cast<long double>(t.at(t.m, j)) - t.at(t.m, j - 1);
  d.E = static_cast<double>(acc);
  return d;
}

/// Staircase inside the box: start point, then moves 'R' (+e1) and 'D' (-e2).
struct DownRightPath {
  int i0 = 0, j0 = 0;
  std::string moves;
};

enum class EdgeType { Horizontal, Vertical };

/// Horizontal edge ending at (i, j): log Z(i,j) - log Z(i-1,j), law of R1.
/// Vertical edge with upper end (i, j): log Z(i,j) - log Z(i,j-1), law of R2.
struct LabeledRatio {
  EdgeType type;
  int i, j;
  double log_ratio;
};

inline void validate_path(const DownRightPath& p, int m, int n) {
  auto inside = [&](int i, int j) { return i >= 0 && i <= m && j >= 0 && j <= n; };
  if (!inside(p.i0, p.j0))
    throw ValidationError("down-right path: start (" + std::to_string(p.i0) + "," + std::to_string(p.j0) +
                          ") outside the box");
  int i = p.i0, j = p.j0;
  for (std::size_t k = 0; k < p.moves.size(); ++k) {
    const char c = p.moves[k];
    if (c == 'R') ++i;
    else if (c == 'D') --j;
    else throw ValidationError("down-right path: move " + std::to_string(k) + " is '" + std::string(1, c) +
                               "', expected R or D");
    if (!inside(i, j)) throw ValidationError("down-right path: move " + std::to_string(k) + " leaves the box");
  }
}

inline std::vector<LabeledRatio> down_right_collect(const PartitionTable& t, const DownRightPath& p) {
  if (t.direction != TableDirection::Forward) throw StateError("down_right_collect: needs a forward table");
  validate_path(p, t.m, t.n);
  std::vector<LabeledRatio> out;
  out.reserve(p.moves.size());
  int i = p.i0, j = p.j0;
  for (char c : p.moves) {
    if (c == 'R') {
      ++i;
      out.push_back({EdgeType::Horizontal, i, j, t.at(i, j) - t.at(i - 1, j)});
    } else {
      out.push_back({EdgeType::Vertical, i, j, t.at(i, j) - t.at(i, j - 1)});
      --j;
    }
  }
  return out;
}

/// West side downwards, then the south side: the raw boundary weights.
inline DownRightPath boundary_path(int m, int n) { return {0, n, std::string(n, 'D') + std::string(m, 'R')}; }

/// North side, then the east side downwards.
inline DownRightPath north_east_path(int m, int n) { return {0, n, std::string(m, 'R') + std::string(n, 'D')}; }

/// Staircase from (0, n) to (m, 0) hugging the anti-diagonal.
inline DownRightPath antidiagonal_path(int m, int n) {
  DownRightPath p{0, n, {}};
  int r = 0, d = 0;
  while (r < m || d < n) {
    // keep r/m and d/n level; R first on ties
    if (d >= n || (r < m && static_cast<long>(r) * n <= static_cast<long>(d) * m)) {
      p.moves += 'R';
      ++r;
    } else {
      p.moves += 'D';
      ++d;
    }
  }
  return p;
}

struct BurkeReport {
  std::vector<stats::KsResult> ks;  // per edge
  double ks_pass_fraction = 0.0;
  std::size_t pairs = 0;
  double corr_pass_fraction = 0.0;  // pairs with |corr| <= corr_bound
  double corr_bound = 0.0;
  double max_abs_corr = 0.0;
  bool pass(double fraction = 0.95) const { return ks_pass_fraction >= fraction && corr_pass_fraction >= fraction; }
};

/// Down-right check on ratios collected over replicas. samples[e][r] is edge e in replica r.
/// Horizontal edges are tested against the law of log R1 (f1 at a1), vertical ones
/// against log R2 (f2 at a2), KS at `level`; correlations against 4/sqrt(replicas).
inline BurkeReport burke_test(const ModelSpec& spec, const std::vector<EdgeType>& types,
                              const std::vector<std::vector<double>>& samples, double level = 0.01) {
  if (types.size() != samples.size() || samples.empty()) throw RangeError("burke_test: need one column per edge");
  const std::size_t reps = samples.front().size();
  if (reps < 1000) throw RangeError("burke_test: needs at least 1000 replicas");
  const CoupledSampler c1(spec.f1, spec.a1), c2(spec.f2, spec.a2);
  BurkeReport rep;
  std::size_t ks_ok = 0;
  for (std::size_t e = 0; e < samples.size(); ++e) {
    const CoupledSampler& c = types[e] == EdgeType::Horizontal ? c1 : c2;
    rep.ks.push_back(stats::ks_test(samples[e], [&](double u) { return c.cdf_log(u); }));
    if (rep.ks.back().passes(level)) ++ks_ok;
  }
  rep.ks_pass_fraction = static_cast<double>(ks_ok) / samples.size();
  rep.corr_bound = 4.0 / std::sqrt(static_cast<double>(reps));
  std::size_t corr_ok = 0;
  for (std::size_t a = 0; a < samples.size(); ++a)
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      const double r = std::abs(stats::pearson(samples[a], samples[b]));
      rep.max_abs_corr = std::max(rep.max_abs_corr, r);
      ++rep.pairs;
      if (r <= rep.corr_bound) ++corr_ok;
    }
  rep.corr_pass_fraction = rep.pairs ? static_cast<double>(corr_ok) / rep.pairs : 1.0;
  return rep;
}

/// Samples `replicas` environments on (m, n), collects ratios along `path` and runs burke_test.
inline BurkeReport run_burke(const ModelSpec& spec, int m, int n, const DownRightPath& path, int replicas,
                             std::uint64_t master, int threads = 0) {
  validate_path(path, m, n);
  std::vector<std::vector<LabeledRatio>> per(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    const Environment env = sample_environment(spec, m, n, master, r);
    per[r] = down_right_collect(log_partition(env), path);
  });
  const std::size_t edges = path.moves.size();
  std::vector<EdgeType> types(edges);
  std::vector<std::vector<double>> cols(edges, std::vector<double>(replicas));
  for (std::size_t e = 0; e < edges; ++e) {
    types[e] = per[0][e].type;
    for (int r = 0; r < replicas; ++r) cols[e][r] = per[r][e].log_ratio;
  }
  return burke_test(spec, types, cols);
}

}  // namespace bgpoly
