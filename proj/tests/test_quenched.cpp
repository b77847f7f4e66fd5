#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "bgpoly/quenched.hpp"

using namespace bgpoly;

namespace {

// Exit law of t1 by listing every path with its weight.
std::vector<double> enumerated_exit(const Environment& e, Axis axis) {
  std::vector<double> w;
  std::vector<int> t;
  for_each_path(e, [&](double lw, int t1, int t2) {
    w.push_back(lw);
    t.push_back(axis == Axis::South ? t1 : t2);
  });
  double mx = -INFINITY;
  for (double x : w) mx = std::max(mx, x);
  long double tot = 0.0L;
  for (double x : w) tot += std::exp(static_cast<long double>(x - mx));
  std::vector<double> q((axis == Axis::South ? e.m : e.n) + 1, 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) q[t[k]] += static_cast<double>(std::exp(static_cast<long double>(w[k] - mx)) / tot);
  return q;
}

// Bulk-only partition function from (i0, j0) to (m, n), forward in linear scale.
double bulk_forward(const Environment& e, int i0, int j0) {
  std::map<std::pair<int, int>, long double> z;
  z[{i0, j0}] = 1.0L;
  for (int i = i0; i <= e.m; ++i)
    for (int j = j0; j <= e.n; ++j) {
      if (i == i0 && j == j0) continue;
      long double v = 0.0L;
      if (i > i0) v += std::exp(static_cast<long double>(e.y1(i, j))) * z[{i - 1, j}];
      if (j > j0) v += std::exp(static_cast<long double>(e.y2(i, j))) * z[{i, j - 1}];
      z[{i, j}] = v;
    }
  return static_cast<double>(std::log(z[{e.m, e.n}]));
}

// Quenched joint moments of prefix sums by direct summation over t1.
double direct_quenched_cov(const ExitDistribution& d, const std::vector<double>& g, const std::vector<double>& h, int r) {
  auto sum_to = [&](const std::vector<double>& v, int l) {
    double s = 0.0;
    for (int i = 0; i < std::min(l, r); ++i) s += v[i];
    return s;
  };
  double eg = 0, eh = 0, egh = 0;
  for (int l = 0; l <= d.extent(); ++l) {
    const double a = sum_to(g, l), b = sum_to(h, l);
    eg += d.q[l] * a;
    eh += d.q[l] * b;
    egh += d.q[l] * a * b;
  }
  return egh - eg * eh;
}

}  // namespace

TEST(Reverse, CornersAndCrossCheck) {
  for (ModelKind k : kAllModels) {
    const Environment e = sample_environment(default_model(k), 5, 5, 3);
    const PartitionTable rv = reverse_partition(e);
    EXPECT_EQ(rv.at(5, 5), 0.0);
    EXPECT_DOUBLE_EQ(rv.at(4, 5), e.y1(5, 5));
    EXPECT_DOUBLE_EQ(rv.at(5, 4), e.y2(5, 5));
    for (int i = 1; i <= 5; ++i)
      for (int j = 1; j <= 5; ++j) EXPECT_NEAR(rv.at(i, j), bulk_forward(e, i, j), 1e-11);
  }
}

TEST(Exit, MatchesEnumerationSmallBoxes) {
  for (ModelKind k : kAllModels)
    for (int m = 1; m <= 6; ++m)
      for (int n = 1; m + n <= 10; ++n)
        for (int seed = 0; seed < 5; ++seed) {
          const Environment e = sample_environment(default_model(k), m, n, 7 * m + n, seed);
          const PartitionTable f = log_partition(e), rv = reverse_partition(e);
          for (Axis ax : {Axis::South, Axis::West}) {
            const auto d = exit_distribution(e, f, rv, ax);
            const auto want = enumerated_exit(e, ax);
            ASSERT_EQ(d.q.size(), want.size());
            for (std::size_t l = 0; l < want.size(); ++l) ASSERT_NEAR(d.q[l], want[l], 1e-10);
          }
        }
}

TEST(Exit, ThreeByThree) {
  const Environment e = sample_environment(default_model(ModelKind::IG), 3, 3, 44);
  int paths = 0;
  for_each_path(e, [&](double, int, int) { ++paths; });
  EXPECT_EQ(paths, 20);
  const auto d = exit_distribution(e, log_partition(e), reverse_partition(e), Axis::South);
  const auto want = enumerated_exit(e, Axis::South);
  for (int l = 0; l <= 3; ++l) EXPECT_NEAR(d.q[l], want[l], 1e-10);
}

TEST(Exit, AxesAreComplementary) {
  for (ModelKind k : kAllModels) {
    const Environment e = sample_environment(default_model(k), 30, 25, 6);
    const auto qe = quenched_exit(e);
    double s = 0.0;
    for (int l = 1; l <= 30; ++l) s += qe.south.q[l];
    double w = 0.0;
    for (int j = 1; j <= 25; ++j) w += qe.west.q[j];
    EXPECT_NEAR(s + w, 1.0, 1e-10);
    EXPECT_NEAR(qe.south.q[0], w, 1e-12);
    EXPECT_NEAR(qe.west.q[0], s, 1e-12);
    EXPECT_NEAR(qe.log_z, log_partition(e).log_z(), 1e-10 * std::abs(qe.log_z));
  }
}

TEST(Exit, RollingSweepMatchesTables) {
  const Environment e = sample_environment(default_model(ModelKind::B), 40, 33, 6);
  const auto qe = quenched_exit(e);
  const auto d = exit_distribution(e, log_partition(e), reverse_partition(e), Axis::South);
  for (int l = 0; l <= 40; ++l) EXPECT_NEAR(qe.south.q[l], d.q[l], 1e-12);
}

TEST(Exit, DegenerateBoxes) {
  const Environment e = sample_environment(default_model(ModelKind::G), 5, 0, 1);
  const auto qe = quenched_exit(e);
  EXPECT_EQ(qe.south.q.back(), 1.0);
  EXPECT_DOUBLE_EQ(exit_moment(qe.south, 2.0), 25.0);
  EXPECT_DOUBLE_EQ(exit_moment(qe.south, 0.0), 1.0);
  const auto d = exit_distribution(e, log_partition(e), reverse_partition(e), Axis::South);
  EXPECT_EQ(d.q.back(), 1.0);
}

TEST(Exit, MomentsMatchEnumeration) {
  for (ModelKind k : kAllModels) {
    const Environment e = sample_environment(default_model(k), 4, 4, 12);
    const auto qe = quenched_exit(e);
    const auto want = enumerated_exit(e, Axis::South);
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      double s = 0.0;
      for (int l = 0; l <= 4; ++l) s += std::pow(l, p) * want[l];
      EXPECT_NEAR(exit_moment(qe.south, p), s, 1e-10);
    }
    EXPECT_NEAR(exit_moment(qe.south, 0.0) + exit_moment(qe.west, 0.0), 2.0, 1e-12);
  }
}

TEST(QuenchedCumulant, FirstAndSecondOrders) {
  const Environment e = sample_environment(default_model(ModelKind::IG), 10, 8, 2);
  const auto d = quenched_exit(e).south;
  std::vector<double> g(10), h(10);
  for (int i = 0; i < 10; ++i) {
    g[i] = std::sin(i + 1.0);
    h[i] = 0.3 * i - 1.0;
  }
  for (int r : {0, 3, 10}) {
    double mean = 0.0;
    for (int l = 0; l <= 10; ++l) {
      double s = 0.0;
      for (int i = 0; i < std::min(l, r); ++i) s += g[i];
      mean += d.q[l] * s;
    }
    EXPECT_NEAR(quenched_cumulant_of_sums(d, {g}, r), mean, 1e-13);
    EXPECT_NEAR(quenched_cumulant_of_sums(d, {g, h}, r), direct_quenched_cov(d, g, h, r), 1e-12);
  }
  EXPECT_THROW(quenched_cumulant_of_sums(d, std::vector<std::vector<double>>(7, g), 5), CapabilityError);
}

TEST(QuenchedCumulant, PointMassHasNoHigherCumulants) {
  const Environment e = sample_environment(default_model(ModelKind::B), 6, 0, 2);
  const auto d = quenched_exit(e).south;
  const std::vector<double> g{1, 2, 3, 4, 5, 6};
  EXPECT_DOUBLE_EQ(quenched_cumulant_of_sums(d, {g}, 6), 21.0);
  for (int j = 2; j <= 6; ++j) EXPECT_NEAR(quenched_cumulant_of_sums(d, std::vector<std::vector<double>>(j, g), 6), 0.0, 1e-12);
}

TEST(QuenchedCumulant, ThirdOrderAgainstCentralMoment) {
  const Environment e = sample_environment(default_model(ModelKind::G), 12, 12, 5);
  const auto d = quenched_exit(e).south;
  std::vector<double> g(12);
  for (int i = 0; i < 12; ++i) g[i] = 0.1 * (i + 1) * (i % 3 == 0 ? -1 : 1);
  std::vector<double> x(13, 0.0);
  for (int l = 1; l <= 12; ++l) x[l] = x[l - 1] + g[l - 1];
  double mean = 0.0;
  for (int l = 0; l <= 12; ++l) mean += d.q[l] * x[l];
  double c3 = 0.0, c2 = 0.0, c4 = 0.0;
  for (int l = 0; l <= 12; ++l) {
    c2 += d.q[l] * std::pow(x[l] - mean, 2);
    c3 += d.q[l] * std::pow(x[l] - mean, 3);
    c4 += d.q[l] * std::pow(x[l] - mean, 4);
  }
  EXPECT_NEAR(quenched_cumulant_of_sums(d, {g, g, g}, 12), c3, 1e-12);
  EXPECT_NEAR(quenched_cumulant_of_sums(d, {g, g, g, g}, 12), c4 - 3 * c2 * c2, 1e-12);
}

TEST(Sigma, TermStructure) {
  const auto t1 = sigma_terms(1);
  ASSERT_EQ(t1.size(), 1u);
  EXPECT_EQ(t1[0].orders, std::vector<int>{0});
  const auto t2 = sigma_terms(2);
  ASSERT_EQ(t2.size(), 2u);
  std::map<std::vector<int>, double> m2;
  for (const auto& t : t2) m2[t.orders] = t.coefficient;
  EXPECT_EQ(m2[(std::vector<int>{1})], 1.0);
  EXPECT_EQ(m2[(std::vector<int>{0, 0})], 1.0);
  std::map<std::vector<int>, double> m3;
  for (const auto& t : sigma_terms(3)) m3[t.orders] = t.coefficient;
  EXPECT_EQ(m3.size(), 3u);
  EXPECT_EQ(m3[(std::vector<int>{2})], 1.0);
  EXPECT_EQ(m3[(std::vector<int>{0, 1})], 3.0);
  EXPECT_EQ(m3[(std::vector<int>{0, 0, 0})], 1.0);
  EXPECT_THROW(sigma_terms(5), CapabilityError);
}

TEST(Sigma, FirstOrderIsQuenchedMeanOfL) {
  const Environment e = sample_environment(default_model(ModelKind::G), 6, 6, 3);
  const auto d = quenched_exit(e).south;
  std::vector<double> L(6);
  for (int i = 0; i < 6; ++i) L[i] = l_func(e.spec.f1, e.spec.a1, std::exp(e.south[i]));
  double want = 0.0;
  for (int l = 0; l <= 6; ++l) {
    double s = 0.0;
    for (int i = 0; i < l; ++i) s += L[i];
    want += d.q[l] * s;
  }
  EXPECT_NEAR(sigma_k(e, 1, 6).value, want, 1e-10 * std::abs(want));
  const double want2 = direct_quenched_cov(d, L, L, 6) + [&] {
    std::vector<double> D(6);
    for (int i = 0; i < 6; ++i) D[i] = tilde_deriv_L(e.spec.f1, 1, e.spec.a1, std::exp(e.south[i]));
    double s = 0.0;
    for (int l = 0; l <= 6; ++l) {
      double p = 0.0;
      for (int i = 0; i < l; ++i) p += D[i];
      s += d.q[l] * p;
    }
    return s;
  }();
  EXPECT_NEAR(sigma_k(e, 2, 6).value, want2, 1e-9 * std::abs(want2));
}

TEST(Sigma, DeterministicPath) {
  const Environment e = sample_environment(default_model(ModelKind::IB), 5, 0, 3);
  double want = 0.0;
  for (int i = 0; i < 5; ++i) want += l_func(e.spec.f1, e.spec.a1, std::exp(e.south[i]));
  EXPECT_NEAR(sigma_k(e, 1, 5).value, want, 1e-10 * want);
  EXPECT_NEAR(sigma_k(e, 2, 5).value, [&] {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += tilde_deriv_L(e.spec.f1, 1, e.spec.a1, std::exp(e.south[i]));
    return s;
  }(), 1e-8);
}

TEST(Sigma, ZeroTruncation) {
  const Environment e = sample_environment(default_model(ModelKind::G), 6, 6, 3);
  EXPECT_EQ(sigma_k(e, 1, 0).value, 0.0);
  EXPECT_EQ(sigma_k(e, 2, 0).value, 0.0);
  const auto c = deriv_consistency_check(e, 1, 0, 1e-3);
  EXPECT_EQ(c.finite_difference, 0.0);
  EXPECT_EQ(c.rel_error, 0.0);
}

TEST(Sigma, MatchesCoupledFiniteDifferences) {
  for (ModelKind k : kAllModels)
    for (int seed = 0; seed < 4; ++seed) {
      const Environment e = sample_environment(default_model(k), 6, 6, 50 + seed);
      const auto c1 = deriv_consistency_check(e, 1, 6, 1e-3);
      EXPECT_LE(c1.rel_error, 1e-5) << to_string(k) << " fd=" << c1.finite_difference << " sigma=" << c1.sigma;
      const auto c2 = deriv_consistency_check(e, 2, 6, 1e-3);
      EXPECT_LE(c2.rel_error, 1e-3) << to_string(k) << " fd=" << c2.finite_difference << " sigma=" << c2.sigma;
    }
}

TEST(Sigma, ShiftMatchesPartitionDifference) {
  for (ModelKind k : kAllModels) {
    const ModelSpec spec = default_model(k);
    const Environment e = sample_environment(spec, 7, 5, 9);
    const QuenchedExit qe = quenched_exit(e);
    const double base = log_partition_value(e);
    for (int r : {1, 3, 7})
      for (double d : {-0.3, -0.01, 0.02, 0.4}) {
        const double want = log_partition_value(perturb_boundary(e, spec.a1 + d, r)) - base;
        EXPECT_NEAR(log_partition_shift(e, qe, spec.a1 + d, r), want, 1e-12 * (1.0 + std::abs(base)))
            << to_string(k) << " r=" << r << " d=" << d;
      }
    EXPECT_EQ(log_partition_shift(e, qe, spec.a1 + 0.5, 0), 0.0);
  }
}

// An environment whose path almost never uses the south boundary: sigma_k is ~1e-14 and a
// DP difference of log Z would be pure roundoff.
TEST(Sigma, TinySigmaStillMatches) {
  const Environment e = sample_environment(default_model(ModelKind::B), 8, 8, 20240601, 6);
  const auto c1 = deriv_consistency_check(e, 1, 8, 1e-3);
  const auto c2 = deriv_consistency_check(e, 2, 8, 1e-3);
  EXPECT_LT(std::abs(c1.sigma), 1e-12);
  EXPECT_LE(c1.rel_error, 1e-6);
  EXPECT_LE(c2.rel_error, 1e-4);
}

TEST(Sigma, PartialTruncation) {
  const Environment e = sample_environment(default_model(ModelKind::IG), 8, 8, 1);
  for (int r : {1, 3, 5}) {
    const auto c = deriv_consistency_check(e, 1, r, 1e-3);
    EXPECT_LE(c.rel_error, 1e-5) << "r=" << r;
  }
}
