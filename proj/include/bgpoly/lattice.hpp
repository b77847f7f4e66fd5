#pragma once

// The four stationary beta-gamma models, their characteristic shapes, and
// sampled environments on {0..m} x {0..n}. Everything is stored as log-weights.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bgpoly/coupling.hpp"
#include "bgpoly/errors.hpp"
#include "bgpoly/mellin.hpp"
#include "bgpoly/random.hpp"

namespace bgpoly {

enum class ModelKind { IG, G, B, IB };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::IG: return "IG";
    case ModelKind::G: return "G";
    case ModelKind::B: return "B";
    case ModelKind::IB: return "IB";
  }
  return "?";
}

inline constexpr ModelKind kAllModels[] = {ModelKind::IG, ModelKind::G, ModelKind::B, ModelKind::IB};

/// Case-insensitive: ig, g, b, ib.
inline ModelKind parse_model(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "ig") return ModelKind::IG;
  if (t == "g") return ModelKind::G;
  if (t == "b") return ModelKind::B;
  if (t == "ib") return ModelKind::IB;
  throw ValidationError("unknown model '" + std::string(s) + "' (expected ig, g, b or ib)");
}

struct ModelSpec {
  ModelKind kind = ModelKind::IG;
  double mu = 0.0, theta = 0.0, beta = 0.0;
  MellinFamily f1{KernelKind::ExpDecay, 1.0}, f2{KernelKind::ExpDecay, 1.0};
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
};

/// Resolves (f1, f2, a1, a2, a3) for a model:
///   IG: f1 = f2 = ExpDecayInv(beta),           (theta - mu, -theta, -mu)
///   G:  f1 = ExpDecay(beta), f2 = BetaInv(mu),  (mu + theta, -theta, mu)
///   B:  f1 = Beta(beta),     f2 = BetaInv(mu),  (mu + theta, -theta, mu)
///   IB: f1 = BetaInv(beta),  f2 = BetaPrime(beta + mu), (theta - mu, -theta, -mu)
inline ModelSpec make_model(ModelKind kind, double mu, double theta, double beta = 1.0) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(mu)) throw ValidationError("model parameter mu must be positive and finite");
  if (!positive(theta)) throw ValidationError("model parameter theta must be positive and finite");
  if (!positive(beta)) throw ValidationError("model parameter beta must be positive and finite");
  if ((kind == ModelKind::IG || kind == ModelKind::IB) && !(mu > theta))
    throw ValidationError(std::string(to_string(kind)) + " model requires mu > theta > 0 (got mu=" +
                          std::to_string(mu) + ", theta=" + std::to_string(theta) + ")");
  using K = KernelKind;
  switch (kind) {
    case ModelKind::IG:
      return {kind, mu, theta, beta, MellinFamily(K::ExpDecayInv, beta), MellinFamily(K::ExpDecayInv, beta),
              theta - mu, -theta, -mu};
    case ModelKind::G:
      return {kind, mu, theta, beta, MellinFamily(K::ExpDecay, beta), MellinFamily(K::BetaInvKernel, mu),
              mu + theta, -theta, mu};
    case ModelKind::B:
      return {kind, mu, theta, beta, MellinFamily(K::BetaKernel, beta), MellinFamily(K::BetaInvKernel, mu),
              mu + theta, -theta, mu};
    case ModelKind::IB:
      return {kind, mu, theta, beta, MellinFamily(K::BetaInvKernel, beta),
              MellinFamily(K::BetaPrimeKernel, beta + mu), theta - mu, -theta, -mu};
  }
  throw ValidationError("unknown model kind");
}

/// Mid-domain defaults: IG/IB mu=2, theta=1; G/B mu=1, theta=0.5; beta=1.
inline ModelSpec default_model(ModelKind kind) {
  return (kind == ModelKind::IG || kind == ModelKind::IB) ? make_model(kind, 2.0, 1.0, 1.0)
                                                          : make_model(kind, 1.0, 0.5, 1.0);
}

struct Shape {
  int m, n;
};

/// m = round(m_factor N psi_1^{f2}(a2) + gamma N^{2/3}), n = round(N psi_1^{f1}(a1) + gamma N^{2/3}),
/// both clamped to >= 1. m_factor != 1 moves the shape off the characteristic line.
inline Shape characteristic_shape(const ModelSpec& spec, int N, double gamma_offset, double m_factor = 1.0) {
  if (N < 1) throw RangeError("characteristic_shape: N must be >= 1");
  const double shift = gamma_offset * std::cbrt(static_cast<double>(N) * N);
  const double m = std::round(m_factor * N * spec.f2.psi(1, spec.a2) + shift);
  const double n = std::round(N * spec.f1.psi(1, spec.a1) + shift);
  return {static_cast<int>(std::max(1.0, m)), static_cast<int>(std::max(1.0, n))};
}

/// Log-weights on the box. Edges into (i, j):
///   horizontal (i-1, j) -> (i, j): south[i-1] if j = 0, else y1(i, j);
///   vertical   (i, j-1) -> (i, j): west[j-1]  if i = 0, else y2(i, j).
struct Environment {
  int m = 0, n = 0;
  std::uint64_t seed = 0, replica = 0;
  ModelSpec spec;
  std::vector<double> south;           // log R1_{i,0}, i = 1..m
  std::vector<double> west;            // log R2_{0,j}, j = 1..n
  std::vector<double> bulk1, bulk2;    // log Y1, log Y2 at (i, j), row-major (i-1)*n + (j-1)
  std::vector<double> south_uniforms;  // eta_i, i = 1..r_max

  double y1(int i, int j) const { return bulk1[static_cast<std::size_t>(i - 1) * n + (j - 1)]; }
  double y2(int i, int j) const { return bulk2[static_cast<std::size_t>(i - 1) * n + (j - 1)]; }
  int r_max() const { return static_cast<int>(south_uniforms.size()); }

  /// Log-weight of the edge entering (i, j) horizontally / vertically.
  double horizontal(int i, int j) const { return j == 0 ? south[i - 1] : y1(i, j); }
  double vertical(int i, int j) const { return i == 0 ? west[j - 1] : y2(i, j); }
};

namespace detail {

inline void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string("sample_environment: non-finite ") + what + " weight");
}

}  // namespace detail

/// Boundary weights through the inverse-CDF coupling (south: f1 at a1, west: f2 at a2),
/// bulk from gamma variates mapped to the model's (Y1, Y2) pair. r_max < 0 keeps all m
/// south uniforms.
inline Environment sample_environment(const ModelSpec& spec, int m, int n, std::uint64_t master,
                                      std::uint64_t replica = 0, int r_max = -1) {
  if (m < 0 || n < 0 || m + n < 1) throw RangeError("sample_environment: need m, n >= 0 and m + n >= 1");
  Environment env;
  env.m = m;
  env.n = n;
  env.seed = master;
  env.replica = replica;
  env.spec = spec;
  if (r_max < 0 || r_max > m) r_max = m;

  Rng south_rng(master, replica, StreamRole::South);
  const CoupledSampler s1(spec.f1, spec.a1);
  env.south.resize(m);
  env.south_uniforms.resize(r_max);
  for (int i = 0; i < m; ++i) {
    const double eta = south_rng.uniform();
    if (i < r_max) env.south_uniforms[i] = eta;
    env.south[i] = s1.log_inverse(eta);
  }

  Rng west_rng(master, replica, StreamRole::West);
  const CoupledSampler s2(spec.f2, spec.a2);
  env.west.resize(n);
  for (int j = 0; j < n; ++j) env.west[j] = s2.log_inverse(west_rng.uniform());

  // X ~ m_{f1}(a3); G1 ~ Gamma(mu), G2 ~ Gamma(beta), unit rate.
  Rng bulk_rng(master, replica, StreamRole::Bulk);
  auto& eng = bulk_rng.engine();
  const std::size_t cells = static_cast<std::size_t>(m) * n;
  env.bulk1.resize(cells);
  env.bulk2.resize(cells);
  const double lb = std::log(spec.beta);
  std::gamma_distribution<double> gmu(spec.mu, 1.0);
  std::gamma_distribution<double> gbeta(spec.beta, 1.0);
  for (std::size_t c = 0; c < cells; ++c) {
    switch (spec.kind) {
      case ModelKind::IG: {  // X = 1 / Gamma(mu, rate beta); (X, X)
        const double lx = lb - std::log(gmu(eng));
        env.bulk1[c] = lx;
        env.bulk2[c] = lx;
        break;
      }
      case ModelKind::G: {  // X = Gamma(mu, rate beta); (X, 1)
        env.bulk1[c] = std::log(gmu(eng)) - lb;
        env.bulk2[c] = 0.0;
        break;
      }
      case ModelKind::B: {  // X = G1 / (G1 + G2); (X, 1 - X)
        const double g1 = gmu(eng), g2 = gbeta(eng);
        const double ls = std::log(g1 + g2);
        env.bulk1[c] = std::log(g1) - ls;
        env.bulk2[c] = std::log(g2) - ls;
        break;
      }
      case ModelKind::IB: {  // X = (G1 + G2) / G1; (X, X - 1)
        const double g1 = gmu(eng), g2 = gbeta(eng);
        const double l1 = std::log(g1);
        env.bulk1[c] = std::log(g1 + g2) - l1;
        env.bulk2[c] = std::log(g2) - l1;
        break;
      }
    }
  }
  detail::require_finite(env.south, "south");
  detail::require_finite(env.west, "west");
  detail::require_finite(env.bulk1, "bulk");
  detail::require_finite(env.bulk2, "bulk");
  return env;
}

/// Copy of env with south[i] = log H^{f1}(a1', eta_i) for i <= r. At a1' = a1 the
/// replaced entries are recomputed by the same call and so agree bit for bit.
inline Environment perturb_boundary(const Environment& env, double a1_prime, int r) {
  if (r < 0) throw RangeError("perturb_boundary: r must be >= 0");
  if (r > env.r_max())
    throw StateError("perturb_boundary: r=" + std::to_string(r) + " exceeds the " + std::to_string(env.r_max()) +
                     " retained south uniforms");
  Environment out = env;
  if (r == 0) return out;
  const CoupledSampler s(env.spec.f1, a1_prime);
  for (int i = 0; i < r; ++i) out.south[i] = s.log_inverse(env.south_uniforms[i]);
  return out;
}

inline nlohmann::json to_json(const Environment& env) {
  nlohmann::json j;
  j["m"] = env.m;
  j["n"] = env.n;
  j["seed"] = env.seed;
  j["replica"] = env.replica;
  j["model"] = {{"kind", std::string(to_string(env.spec.kind))},
                {"mu", env.spec.mu},
                {"theta", env.spec.theta},
                {"beta", env.spec.beta}};
  j["south"] = env.south;
  j["west"] = env.west;
  j["bulk1"] = env.bulk1;
  j["bulk2"] = env.bulk2;
  j["south_uniforms"] = env.south_uniforms;
  return j;
}

inline Environment environment_from_json(const nlohmann::json& j) {
  try {
    Environment env;
    env.m = j.at("m").get<int>();
    env.n = j.at("n").get<int>();
    env.seed = j.at("seed").get<std::uint64_t>();
    env.replica = j.at("replica").get<std::uint64_t>();
    const auto& mj = j.at("model");
    env.spec = make_model(parse_model(mj.at("kind").get<std::string>()), mj.at("mu").get<double>(),
                          mj.at("theta").get<double>(), mj.at("beta").get<double>());
    env.south = j.at("south").get<std::vector<double>>();
    env.west = j.at("west").get<std::vector<double>>();
    env.bulk1 = j.at("bulk1").get<std::vector<double>>();
    env.bulk2 = j.at("bulk2").get<std::vector<double>>();
    env.south_uniforms = j.at("south_uniforms").get<std::vector<double>>();
    const std::size_t cells = static_cast<std::size_t>(env.m) * env.n;
    if (env.m < 0 || env.n < 0 || env.m + env.n < 1 || env.south.size() != static_cast<std::size_t>(env.m) ||
        env.west.size() != static_cast<std::size_t>(env.n) || env.bulk1.size() != cells ||
        env.bulk2.size() != cells || env.south_uniforms.size() > env.south.size())
      throw ValidationError("environment record: array lengths do not match extents");
    return env;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("environment record: ") + e.what());
  }
}

inline void save_environment(const Environment& env, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << to_json(env).dump(1) << '\n';
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline Environment load_environment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("environment record '" + path + "': " + e.what());
  }
  return environment_from_json(j);
}

}  // namespace bgpoly
