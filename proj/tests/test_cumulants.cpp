#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bgpoly/cumulants.hpp"

using namespace bgpoly;

namespace {

std::vector<double> draws(std::size_t n, std::uint64_t seed, auto dist) {
  std::mt19937_64 g(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(g);
  return v;
}

// Third joint cumulant written out: mean of the product of centred columns.
double kappa3_direct(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& z) {
  const double n = x.size();
  double mx = 0, my = 0, mz = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i], mz += z[i];
  mx /= n, my /= n, mz /= n;
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my) * (z[i] - mz);
  return s / n;
}

}  // namespace

TEST(SetPartitions, BellNumbers) {
  const int bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (int k = 0; k <= 8; ++k) EXPECT_EQ(enumerate_partitions(k).size(), static_cast<std::size_t>(bell[k]));
  EXPECT_THROW(enumerate_partitions(9), CapabilityError);
}

TEST(SetPartitions, BlocksCoverDisjointly) {
  for (int k = 1; k <= 6; ++k)
    for (const auto& p : enumerate_partitions(k)) {
      std::uint32_t all = 0;
      for (auto m : p.masks()) {
        EXPECT_EQ(all & m, 0u);
        all |= m;
      }
      EXPECT_EQ(all, (1u << k) - 1);
    }
}

TEST(JointCumulant, OrderOneAndTwo) {
  const auto x = draws(200, 1, std::normal_distribution<double>(3.0, 2.0));
  const auto y = draws(200, 2, std::normal_distribution<double>(-1.0, 1.0));
  double mx = 0, my = 0;
  for (int i = 0; i < 200; ++i) mx += x[i], my += y[i];
  mx /= 200, my /= 200;
  double cov = 0;
  for (int i = 0; i < 200; ++i) cov += (x[i] - mx) * (y[i] - my);
  cov /= 200;
  EXPECT_NEAR(joint_cumulant_empirical({x}).value, mx, 1e-13);
  EXPECT_NEAR(joint_cumulant_empirical({x, y}).value, cov, 1e-13);
  EXPECT_NEAR(joint_cumulant_empirical({x, x, y}).value, kappa3_direct(x, x, y), 1e-12);
}

TEST(JointCumulant, JackknifeMatchesRecomputation) {
  const auto x = draws(40, 3, std::exponential_distribution<double>(1.0));
  const auto y = draws(40, 4, std::exponential_distribution<double>(2.0));
  std::vector<double> loo;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> xs, ys;
    for (int j = 0; j < 40; ++j)
      if (j != i) xs.push_back(x[j]), ys.push_back(y[j]);
    loo.push_back(kappa3_direct(xs, xs, ys));
  }
  const SampleCumulants sc({x, y});
  const Jackknifed j = sc.joint({0, 0, 1});
  for (int i = 0; i < 40; ++i) EXPECT_NEAR(j.loo[i], loo[i], 1e-12);
  EXPECT_NEAR(j.std_error(), jackknife_stderr(loo), 1e-12);
}

TEST(JointCumulant, ExponentialThirdCumulant) {
  const auto x = draws(100000, 5, std::gamma_distribution<double>(1.0, 1.0));
  const auto e = joint_cumulant_empirical({x, x, x});
  EXPECT_EQ(e.k, 3);
  EXPECT_EQ(e.n_samples, 100000u);
  EXPECT_LE(std::abs(e.value - 2.0), 4.0 * e.std_error);
}

TEST(JointCumulant, NormalHigherCumulantsVanish) {
  const auto x = draws(100000, 6, std::normal_distribution<double>(0.5, 1.0));
  const auto k3 = joint_cumulant_empirical({x, x, x});
  const auto k4 = joint_cumulant_empirical({x, x, x, x});
  EXPECT_LE(std::abs(k3.value), 4.0 * k3.std_error);
  EXPECT_LE(std::abs(k4.value), 4.0 * k4.std_error);
  const auto k2 = joint_cumulant_empirical({x, x});
  EXPECT_LE(std::abs(k2.value - 1.0), 4.0 * k2.std_error);
}

TEST(JointCumulant, IndependentColumns) {
  const auto x = draws(20000, 7, std::gamma_distribution<double>(2.0, 1.0));
  const auto y = draws(20000, 8, std::gamma_distribution<double>(0.5, 1.0));
  for (const std::vector<std::vector<double>>& c :
       std::vector<std::vector<std::vector<double>>>{{x, y}, {x, x, y}, {x, y, y, y}}) {
    const auto e = joint_cumulant_empirical(c);
    EXPECT_LE(std::abs(e.value), 4.0 * e.std_error) << c.size();
  }
}

TEST(JointCumulant, ConstantColumnGivesZero) {
  const auto x = draws(100, 9, std::normal_distribution<double>());
  const std::vector<double> c(100, 0.1);
  EXPECT_EQ(joint_cumulant_empirical({x, c}).value, 0.0);
  EXPECT_EQ(joint_cumulant_empirical({c, c, c}).value, 0.0);
  EXPECT_EQ(joint_cumulant_empirical({c, c, c}).std_error, 0.0);
  EXPECT_NEAR(joint_cumulant_empirical({c}).value, 0.1, 1e-16);
}

TEST(JointCumulant, Multilinear) {
  const auto x = draws(500, 10, std::gamma_distribution<double>(2.0, 1.0));
  const auto y = draws(500, 11, std::normal_distribution<double>());
  const auto z = draws(500, 12, std::exponential_distribution<double>(1.0));
  std::vector<double> w(500);
  for (int i = 0; i < 500; ++i) w[i] = 2.5 * x[i] - 0.7 * y[i] + 0.25 * z[i];
  const SampleCumulants sc({x, y, z, w});
  for (const auto& tail : std::vector<std::vector<int>>{{2}, {2, 0}, {1, 2, 2}}) {
    auto with = [&](int v) {
      std::vector<int> vars{v};
      vars.insert(vars.end(), tail.begin(), tail.end());
      return sc.joint(vars).value;
    };
    const double lin = 2.5 * with(0) - 0.7 * with(1) + 0.25 * with(2);
    EXPECT_NEAR(with(3), lin, 1e-12 * std::max(1.0, std::abs(lin)));
  }
}

TEST(JointCumulant, StderrHalvesWithFourTimesData) {
  const auto x = draws(40000, 13, std::gamma_distribution<double>(1.0, 1.0));
  const std::vector<double> q(x.begin(), x.begin() + 10000);
  const double ratio = joint_cumulant_empirical({x, x}).std_error / joint_cumulant_empirical({q, q}).std_error;
  EXPECT_GT(ratio, 0.4);
  EXPECT_LT(ratio, 0.6);
}

TEST(JointCumulant, Preconditions) {
  const std::vector<double> s(29, 1.0), t(30, 1.0);
  EXPECT_THROW(joint_cumulant_empirical({s}), RangeError);
  EXPECT_THROW(joint_cumulant_empirical({t, s}), RangeError);
  EXPECT_THROW(joint_cumulant_empirical(std::vector<std::vector<double>>(9, t)), CapabilityError);
}

TEST(CumulantIdentity, SecondOrderAllModels) {
  for (ModelKind k : kAllModels) {
    const auto rep = cumulant_identity_check(default_model(k), 8, 8, 2, 10000, 21, 1);
    EXPECT_TRUE(rep.expansion.pass) << to_string(k);
    // same-sample algebra: the expansion holds to rounding
    EXPECT_NEAR(rep.expansion.diff, 0.0, 1e-9);
    EXPECT_TRUE(rep.south.pass) << to_string(k) << " " << rep.south.lhs << " vs " << rep.south.rhs;
    EXPECT_TRUE(rep.east.pass) << to_string(k) << " " << rep.east.lhs << " vs " << rep.east.rhs;
  }
}

TEST(CumulantIdentity, ThirdOrderIG) {
  const auto rep = cumulant_identity_check(make_model(ModelKind::IG, 2, 1, 1), 16, 16, 3, 10000, 22, 1);
  EXPECT_TRUE(rep.pass()) << rep.south.lhs << " " << rep.south.rhs << " " << rep.east.lhs << " " << rep.east.rhs;
  EXPECT_THROW(cumulant_identity_check(default_model(ModelKind::G), 4, 4, 5, 10000, 1, 1), RangeError);
  EXPECT_THROW(cumulant_identity_check(default_model(ModelKind::G), 4, 4, 2, 100, 1, 1), RangeError);
}

TEST(Ibp, TrivialCases) {
  const ModelSpec s = make_model(ModelKind::IG, 2, 1, 1);
  const auto centred = ibp_moment_identity_check(s, 6, 6, 1, 0, 6, 10000, 3, 1);
  EXPECT_NEAR(centred.lhs, 0.0, 1e-12);
  EXPECT_NEAR(centred.rhs, 0.0, 1e-12);
  EXPECT_TRUE(centred.pass);
  for (int k = 1; k <= 3; ++k) {
    const auto mean_zero = ibp_moment_identity_check(s, 6, 6, 0, k, 4, 10000, 3, 1);
    EXPECT_EQ(mean_zero.rhs, 0.0);
    EXPECT_TRUE(mean_zero.pass) << k << " " << mean_zero.lhs << " +- " << mean_zero.std_error;
  }
}

TEST(Ibp, FirstOrderIG) {
  const auto rep = ibp_moment_identity_check(make_model(ModelKind::IG, 2, 1, 1), 8, 8, 1, 1, 8, 10000, 4, 1);
  EXPECT_TRUE(rep.pass) << rep.lhs << " vs " << rep.rhs << " +- " << rep.std_error;
  EXPECT_GT(std::abs(rep.lhs), 4.0 * rep.std_error);
}

TEST(Ibp, HigherOrdersAllModels) {
  for (ModelKind k : kAllModels) {
    const ModelSpec s = default_model(k);
    for (auto [j, kk, r] : std::vector<std::tuple<int, int, int>>{{1, 2, 5}, {2, 1, 6}, {2, 2, 3}, {1, 3, 6}}) {
      const auto rep = ibp_moment_identity_check(s, 6, 6, j, kk, r, 10000, 5, 1);
      EXPECT_TRUE(rep.pass) << to_string(k) << " j=" << j << " k=" << kk << ": " << rep.lhs << " vs " << rep.rhs
                            << " +- " << rep.std_error;
    }
  }
  EXPECT_THROW(ibp_moment_identity_check(default_model(ModelKind::B), 4, 4, 3, 2, 2, 10000, 1, 1), RangeError);
  EXPECT_THROW(ibp_moment_identity_check(default_model(ModelKind::B), 4, 4, 1, 1, 5, 10000, 1, 1), RangeError);
}

TEST(VarianceFormula, MatchesEmpiricalVariance) {
  for (ModelKind k : kAllModels) {
    const auto rep = variance_formula_check(default_model(k), 10, 10, 10000, 6, 1);
    EXPECT_TRUE(rep.pass) << to_string(k) << ": " << rep.lhs << " vs " << rep.rhs << " +- " << rep.std_error;
  }
}

TEST(IbpLogSquare, DerivativeOfSquaredLogMoment) {
  const std::vector<std::pair<MellinFamily, double>> cases = {
      {MellinFamily(KernelKind::ExpDecay, 1.0), 1.5},     {MellinFamily(KernelKind::ExpDecayInv, 1.0), -1.0},
      {MellinFamily(KernelKind::BetaKernel, 2.0), 1.0},   {MellinFamily(KernelKind::BetaInvKernel, 1.5), -1.2},
      {MellinFamily(KernelKind::BetaPrimeKernel, 2.0), -1.0}};
  for (const auto& [fam, a] : cases) {
    // E[(log X)^2] = psi_1 + psi_0^2, differentiated by hand
    const double p0 = fam.psi(0, a), p1 = fam.psi(1, a), p2 = fam.psi(2, a), p3 = fam.psi(3, a);
    const double d1 = p2 + 2 * p0 * p1, d2 = p3 + 2 * p1 * p1 + 2 * p0 * p2;
    const auto c1 = ibp_log_square_check(fam, a, 1);
    const auto c2 = ibp_log_square_check(fam, a, 2);
    EXPECT_TRUE(c1.pass) << c1.rel_error;
    EXPECT_TRUE(c2.pass) << c2.rel_error;
    EXPECT_NEAR(c1.weighted, d1, 1e-8 * std::max(1.0, std::abs(d1)));
    EXPECT_NEAR(c2.weighted, d2, 1e-8 * std::max(1.0, std::abs(d2)));
  }
  EXPECT_THROW(ibp_log_square_check(MellinFamily(KernelKind::ExpDecay, 1.0), 1.0, 3), CapabilityError);
}
