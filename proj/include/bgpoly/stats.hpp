#pragma once

// Kolmogorov-Smirnov, Pearson correlation, streaming central moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bgpoly/errors.hpp"

namespace bgpoly::stats {

/// P(K > lambda) for the limiting Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.3) {
    // theta-function form converges quickly for small lambda
    const double c = std::sqrt(2.0 * M_PI) / lambda;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double t = (2 * k - 1) * M_PI * M_PI / (8.0 * lambda * lambda);
      s += std::exp(-t * (2 * k - 1));
    }
    return std::clamp(1.0 - c * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1) ? t : -t;
    if (t < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  bool passes(double level) const { return p_value >= level; }
};

/// One-sample KS of `sample` against a continuous CDF; p-value from the asymptotic
/// distribution with the Stephens small-sample correction.
template <class Cdf>
KsResult ks_test(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw RangeError("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d), sample.size()};
}

/// Pearson correlation; 0 when either column is constant.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw RangeError("pearson: need two equal-length samples of size >= 2");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Streaming mean and central sums M2..M4; merge is Pebay's pairwise update.
class RunningMoments {
 public:
  void add(double x) {
    RunningMoments one;
    one.n_ = 1;
    one.mean_ = x;
    merge(one);
  }

  void merge(const RunningMoments& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = n_, nb = o.n_, n = na + nb;
    const double d = o.mean_ - mean_;
    const double d2 = d * d, d3 = d2 * d, d4 = d3 * d;
    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) + 4.0 * d * (na * o.m3_ - nb * m3_) / n;
    n_ += o.n_;
    mean_ += d * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Plug-in central moment E[(X - mean)^p], p = 2..4.
  double central(int p) const {
    if (n_ == 0) return 0.0;
    switch (p) {
      case 2: return m2_ / n_;
      case 3: return m3_ / n_;
      case 4: return m4_ / n_;
      default: throw CapabilityError("RunningMoments: central moment order must be 2..4");
    }
  }
  double variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
  double std_error() const { return n_ > 1 ? std::sqrt(variance() / n_) : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

}  // namespace bgpoly::stats
