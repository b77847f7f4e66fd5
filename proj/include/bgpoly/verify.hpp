#pragma once

// Named pass/fail checks over the library's identities; the `verify` subcommand and
// the acceptance runner are thin loops over these.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "bgpoly/coupling.hpp"
#include "bgpoly/cumulants.hpp"
#include "bgpoly/lattice.hpp"
#include "bgpoly/mellin.hpp"
#include "bgpoly/numdiff.hpp"
#include "bgpoly/partition.hpp"
#include "bgpoly/polynomials.hpp"
#include "bgpoly/quenched.hpp"

namespace bgpoly {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

template <class F>
CheckResult timed(std::string name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = std::move(name);
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline std::string family_name(const MellinFamily& f) {
  std::ostringstream os;
  os << to_string(f.kind()) << "(" << f.b() << ")";
  return os.str();
}

}  // namespace detail

/// Closed-form M_f against quadrature on the 11-point a-grid, relative error.
inline CheckResult check_mellin_closed_forms(const MellinFamily& fam, double tol = 1e-9) {
  return detail::timed("mellin closed form " + detail::family_name(fam), [&](CheckResult& r) {
    double worst = 0.0;
    for (double a : bound_a_grid(fam)) {
      const double c = fam.mellin_transform(a), q = mellin_by_quadrature(fam, a, fam.psi(0, a));
      worst = std::max(worst, std::abs(c - q) / std::abs(c));
    }
    r.pass = worst <= tol;
    r.detail = "max rel err " + detail::sci(worst) + " (tol " + detail::sci(tol) + ")";
  });
}

/// psi_k against finite differences of log M_f, k <= kmax.
inline CheckResult check_psi_fd(const MellinFamily& fam, int kmax = 3, double tol = 1e-5) {
  return detail::timed("psi vs d/da log M " + detail::family_name(fam), [&](CheckResult& r) {
    double worst = 0.0;
    const Interval d = fam.domain();
    for (double a : bound_a_grid(fam)) {
      const double room = std::min(a - d.lo, d.hi - a);
      for (int k = 0; k <= kmax; ++k) {
        const double h = k <= 1 ? std::min(1e-3, room / (k + 2)) : std::min(0.25, room / (2.0 * (k + 2)));
        const double fd = numdiff::derivative([&](double t) { return fam.log_mellin(t); }, a, k + 1, h, 3);
        const double ref = fam.psi(k, a);
        // exact zeros (symmetric BetaPrime centre) use an absolute floor
        const double err = std::abs(fd - ref) <= 1e-10 ? 0.0 : std::abs(fd - ref) / std::abs(ref);
        worst = std::max(worst, err);
      }
    }
    r.pass = worst <= tol;
    r.detail = "max rel err " + detail::sci(worst) + " (tol " + detail::sci(tol) + ")";
  });
}

/// E[p_n(S_r, a; r)] = 0 by quadrature (r = 1, 2; n <= nmax) and the generating-function residual.
inline CheckResult check_pn_identities(const MellinFamily& fam, double a, int nmax = 4, double tol = 1e-8,
                                       double lambda = 0.01, int K = 6, double gen_tol = 1e-12) {
  return detail::timed("p_n identities " + detail::family_name(fam), [&](CheckResult& r) {
    double worst = 0.0, gen = 0.0;
    for (int rr = 1; rr <= 2; ++rr) {
      for (int n = 1; n <= nmax; ++n) worst = std::max(worst, std::abs(mean_zero_check(fam, n, a, rr).value));
      const double c = rr * fam.psi(0, a), s = std::sqrt(rr * fam.psi(1, a));
      for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0}) gen = std::max(gen, generating_check(fam, a, rr, c + z * s, lambda, K));
    }
    r.pass = worst <= tol && gen <= gen_tol;
    r.detail = "max |E p_n| " + detail::sci(worst) + " (tol " + detail::sci(tol) + "), generating residual " +
               detail::sci(gen) + " (tol " + detail::sci(gen_tol) + ")";
  });
}

inline CheckResult check_ibp_log_square(const MellinFamily& fam, double a, double tol = 1e-6) {
  return detail::timed("IBP with A=(log X1)^2, r=2 " + detail::family_name(fam), [&](CheckResult& r) {
    const auto c1 = ibp_log_square_check(fam, a, 1, tol), c2 = ibp_log_square_check(fam, a, 2, tol);
    r.pass = c1.pass && c2.pass;
    r.detail = "n=1 rel " + detail::sci(c1.rel_error) + ", n=2 rel " + detail::sci(c2.rel_error);
  });
}

/// DP vs path enumeration over shapes with m + n <= max_steps, `seeds` environments.
inline CheckResult check_dp_exact(const ModelSpec& spec, int seeds, std::uint64_t master, int max_steps = 12,
                                  double tol = 1e-9) {
  return detail::timed("DP vs enumeration " + std::string(to_string(spec.kind)), [&](CheckResult& r) {
    double worst = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const int m = 1 + s % max_steps;
      const int n = (7 * s + 3) % (max_steps - m + 1);
      const Environment env = sample_environment(spec, m, n, master, s);
      worst = std::max(worst, std::abs(log_partition(env).log_z() - brute_force_logZ(env)));
    }
    r.pass = worst <= tol;
    r.detail = "max |diff| " + detail::sci(worst) + " over " + std::to_string(seeds) + " shapes";
  });
}

inline CheckResult check_nsew(const ModelSpec& spec, int m, int n, int samples, std::uint64_t master,
                              double tol = 1e-9) {
  return detail::timed("NSEW identity " + std::string(to_string(spec.kind)), [&](CheckResult& r) {
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      const PartitionTable t = log_partition(sample_environment(spec, m, n, master, s));
      const auto d = nsew_decompose(t);
      worst = std::max({worst, std::abs(d.W + d.N - d.S - d.E), std::abs(d.W + d.N - t.log_z())});
    }
    r.pass = worst <= tol;
    r.detail = "max residual " + detail::sci(worst) + " over " + std::to_string(samples) + " samples";
  });
}

inline CheckResult check_burke(const ModelSpec& spec, int m, int n, int replicas, std::uint64_t master,
                               int threads = 0) {
  return detail::timed("down-right property " + std::string(to_string(spec.kind)), [&](CheckResult& r) {
    const auto rep = run_burke(spec, m, n, antidiagonal_path(m, n), replicas, master, threads);
    r.pass = rep.pass(0.95);
    std::ostringstream os;
    os << "KS pass " << rep.ks_pass_fraction << ", corr pass " << rep.corr_pass_fraction << " (bound "
       << rep.corr_bound << ", max " << rep.max_abs_corr << ")";
    r.detail = os.str();
  });
}

/// sigma_1, sigma_2 against coupled finite differences of log Z, r = m.
inline CheckResult check_sigma_fd(const ModelSpec& spec, int m, int n, int envs, std::uint64_t master,
                                  double tol1 = 1e-4, double tol2 = 1e-2, double h = 1e-3) {
  return detail::timed("sigma_k vs coupled FD " + std::string(to_string(spec.kind)), [&](CheckResult& r) {
    double w1 = 0.0, w2 = 0.0;
    for (int e = 0; e < envs; ++e) {
      const Environment env = sample_environment(spec, m, n, master, e);
      w1 = std::max(w1, deriv_consistency_check(env, 1, m, h).rel_error);
      w2 = std::max(w2, deriv_consistency_check(env, 2, m, h).rel_error);
    }
    r.pass = w1 <= tol1 && w2 <= tol2;
    r.detail = "max rel err k=1 " + detail::sci(w1) + " (tol " + detail::sci(tol1) + "), k=2 " + detail::sci(w2) +
               " (tol " + detail::sci(tol2) + ")";
  });
}

/// Exit laws from the forward/reverse tables against path enumeration.
inline CheckResult check_exit_oracle(const ModelSpec& spec, int envs, std::uint64_t master, double tol = 1e-10) {
  return detail::timed("exit law vs enumeration " + std::string(to_string(spec.kind)), [&](CheckResult& r) {
    double worst = 0.0;
    for (int e = 0; e < envs; ++e) {
      const int m = 1 + e % 6, n = 1 + (3 * e) % 5;
      const Environment env = sample_environment(spec, m, n, master, e);
      const double lz = log_partition_value(env);
      std::vector<double> q1(m + 1, 0.0), q2(n + 1, 0.0);
      for_each_path(env, [&](double lw, int t1, int t2) {
        const double p = std::exp(lw - lz);
        q1[t1] += p;
        q2[t2] += p;
      });
      const QuenchedExit qe = quenched_exit(env);
      for (int l = 0; l <= m; ++l) worst = std::max(worst, std::abs(qe.south.q[l] - q1[l]));
      for (int l = 0; l <= n; ++l) worst = std::max(worst, std::abs(qe.west.q[l] - q2[l]));
    }
    r.pass = worst <= tol;
    r.detail = "max |q - q_enum| " + detail::sci(worst);
  });
}

/// Growth bound |d~^k L^f| / (1 + |log x|^{k+1}) finite and stable over the outer decades, k <= kmax.
inline CheckResult check_hypothesis_bounds(const MellinFamily& fam, int kmax = 2) {
  return detail::timed("growth bound of d~^k L " + detail::family_name(fam), [&](CheckResult& r) {
    bool ok = true;
    std::ostringstream os;
    for (int k = 0; k <= kmax; ++k) {
      const auto rep = bound_check(fam, k);
      ok = ok && rep.stable();
      os << (k ? "; " : "") << "k=" << k << " max " << detail::sci(rep.max_ratio) << " variation "
         << rep.outer_variation();
    }
    r.pass = ok;
    r.detail = os.str();
  });
}

inline CheckResult check_cumulant_identity(const ModelSpec& spec, int m, int n, int k, int replicas,
                                           std::uint64_t master, int threads = 0) {
  return detail::timed("cumulant expansion k=" + std::to_string(k) + " " + std::string(to_string(spec.kind)),
                       [&](CheckResult& r) {
                         const auto rep = cumulant_identity_check(spec, m, n, k, replicas, master, threads);
                         r.pass = rep.pass();
                         std::ostringstream os;
                         for (const auto* x : {&rep.expansion, &rep.south, &rep.east})
                           os << (x == &rep.expansion ? "" : "; ") << x->name << ": " << x->lhs << " vs " << x->rhs
                              << " (diff " << detail::sci(x->diff) << ", se " << detail::sci(x->std_error) << ")";
                         r.detail = os.str();
                       });
}

inline CheckResult check_ibp(const ModelSpec& spec, int m, int n, int j, int k, int r_trunc, int replicas,
                             std::uint64_t master, int threads = 0) {
  return detail::timed("moment IBP j=" + std::to_string(j) + " k=" + std::to_string(k) + " " +
                           std::string(to_string(spec.kind)),
                       [&](CheckResult& r) {
                         const auto rep = ibp_moment_identity_check(spec, m, n, j, k, r_trunc, replicas, master, threads);
                         r.pass = rep.pass;
                         std::ostringstream os;
                         os << rep.lhs << " vs " << rep.rhs << " (diff " << detail::sci(rep.diff) << ", se "
                            << detail::sci(rep.std_error) << ")";
                         r.detail = os.str();
                       });
}

inline CheckResult check_variance_formula(const ModelSpec& spec, int m, int n, int replicas, std::uint64_t master,
                                          int threads = 0) {
  return detail::timed("exact variance formula " + std::string(to_string(spec.kind)), [&](CheckResult& r) {
    const auto rep = variance_formula_check(spec, m, n, replicas, master, threads);
    r.pass = rep.pass;
    std::ostringstream os;
    os << "Var " << rep.lhs << " vs " << rep.rhs << " (se " << detail::sci(rep.std_error) << ")";
    r.detail = os.str();
  });
}

/// The `verify` suite for one model at desk-check sizes.
inline std::vector<CheckResult> run_verify_suite(const ModelSpec& spec, std::uint64_t seed, int threads = 0) {
  std::vector<CheckResult> out;
  for (const MellinFamily* f : {&spec.f1, &spec.f2}) {
    out.push_back(check_mellin_closed_forms(*f));
    out.push_back(check_psi_fd(*f));
    out.push_back(check_hypothesis_bounds(*f));
  }
  out.push_back(check_pn_identities(spec.f1, spec.a1));
  out.push_back(check_ibp_log_square(spec.f1, spec.a1));
  out.push_back(check_dp_exact(spec, 100, seed));
  out.push_back(check_nsew(spec, 16, 16, 200, seed));
  out.push_back(check_exit_oracle(spec, 30, seed));
  out.push_back(check_burke(spec, 12, 12, 1000, seed, threads));
  out.push_back(check_sigma_fd(spec, 6, 6, 10, seed));
  out.push_back(check_ibp(spec, 6, 6, 1, 1, 6, 10000, seed, threads));
  out.push_back(check_cumulant_identity(spec, 8, 8, 2, 10000, seed, threads));
  return out;
}

}  // namespace bgpoly
