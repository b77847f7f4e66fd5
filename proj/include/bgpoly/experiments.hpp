#pragma once

// Fluctuation-exponent experiments: replica sweeps along the characteristic line,
// log-log slope fits and report emission (CSV, JSON, gnuplot).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgpoly/errors.hpp"
#include "bgpoly/lattice.hpp"
#include "bgpoly/parallel.hpp"
#include "bgpoly/quenched.hpp"
#include "bgpoly/random.hpp"

namespace bgpoly {

inline constexpr int kLogZMoments = 4;  // E|logZ - E logZ|^p, p = 1..4
inline constexpr int kExitMoments = 2;  // E[t^p], p = 1..2

struct RunConfig {
  ModelSpec spec = default_model(ModelKind::IG);
  std::vector<int> Ns;
  double gamma_offset = 0.0;
  double m_factor = 1.0;  // != 1 leaves the characteristic line
  int replicas = 1000;
  std::uint64_t seed = 1;
  int threads = 0;
  int bootstrap = 200;
  double max_seconds = 0.0;  // 0: no budget

  void validate() const {
    if (Ns.empty()) throw ValidationError("run config: N-list is empty");
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      if (Ns[i] < 1) throw ValidationError("run config: N values must be positive");
      if (i > 0 && Ns[i] <= Ns[i - 1]) throw ValidationError("run config: N-list must be strictly increasing");
    }
    if (replicas < 100) throw ValidationError("run config: scaling runs need at least 100 replicas");
    if (!(m_factor > 0.0) || !std::isfinite(gamma_offset)) throw ValidationError("run config: bad shape offsets");
    if (bootstrap < 0) throw ValidationError("run config: bootstrap count must be >= 0");
  }
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct ScalingPoint {
  int N = 0, m = 0, n = 0, replicas = 0;
  std::uint64_t seed = 0;  // master seed of this N
  std::vector<Estimate> logz;             // index p-1
  std::vector<Estimate> exit_t1, exit_t2;  // index p-1
  double mean_log_z = 0.0;
};

struct ExponentFit {
  double slope = 0.0, intercept = 0.0, slope_se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
};

/// One fitted series: quantity is "logz", "t1" or "t2"; ci is the replica-bootstrap
/// 95% percentile interval (equal to the least-squares interval when bootstrap = 0).
struct SlopeFit {
  std::string quantity;
  int p = 0;
  ExponentFit fit;
  double ci_lo = 0.0, ci_hi = 0.0;
};

struct ScalingResult {
  RunConfig config;
  std::vector<ScalingPoint> points;
  std::vector<SlopeFit> fits;

  const SlopeFit& fit(const std::string& quantity, int p) const {
    for (const auto& f : fits)
      if (f.quantity == quantity && f.p == p) return f;
    throw RangeError("no fit for " + quantity + " p=" + std::to_string(p));
  }
};

/// Thrown when the time budget runs out; carries the Ns already finished.
class PartialResultError : public std::runtime_error {
 public:
  PartialResultError(const std::string& what, ScalingResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const ScalingResult& partial() const { return partial_; }

 private:
  ScalingResult partial_;
};

struct FitPoint {
  double N, value, std_error;
};

/// Weighted least squares of log value on log N, weights (value / stderr)^2; unweighted
/// when any stderr is zero. ci is slope +- 1.96 slope_se.
inline ExponentFit fit_exponent(const std::vector<FitPoint>& pts) {
  if (pts.size() < 3) throw ValidationError("fit_exponent: needs at least 3 points");
  bool weighted = true;
  for (const auto& p : pts) {
    if (!(p.value > 0.0) || !std::isfinite(p.value) || !(p.N > 0.0))
      throw NumericError("fit_exponent: values and N must be positive and finite");
    if (!(p.std_error > 0.0) || !std::isfinite(p.std_error)) weighted = false;
  }
  const std::size_t k = pts.size();
  std::vector<double> x(k), y(k), w(k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::log(pts[i].N);
    y[i] = std::log(pts[i].value);
    if (weighted) {
      const double s = pts[i].std_error / pts[i].value;
      w[i] = 1.0 / (s * s);
    }
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < k; ++i) sw += w[i], sx += w[i] * x[i], sy += w[i] * y[i];
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw NumericError("fit_exponent: N values must not all coincide");
  ExponentFit f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  if (weighted) {
    f.slope_se = std::sqrt(1.0 / sxx);
  } else {
    double rss = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (k - 2) / sxx);
  }
  f.ci_lo = f.slope - 1.96 * f.slope_se;
  f.ci_hi = f.slope + 1.96 * f.slope_se;
  return f;
}

namespace detail {

struct ReplicaOutcome {
  double log_z = 0.0;
  double t1[kExitMoments]{}, t2[kExitMoments]{};
};

inline std::uint64_t seed_for_N(std::uint64_t master, int N) { return splitmix64(master ^ (0xA5A5ULL * N)); }

inline Estimate mean_and_se(const std::vector<double>& v) {
  stats::RunningMoments rm;
  for (double x : v) rm.add(x);
  return {rm.mean(), rm.std_error()};
}

/// Moments of one N from per-replica outcomes, optionally through a resample index list.
inline void summarize(const std::vector<ReplicaOutcome>& out, const std::vector<std::size_t>* idx, ScalingPoint& pt) {
  const std::size_t R = idx ? idx->size() : out.size();
  auto at = [&](std::size_t i) -> const ReplicaOutcome& { return out[idx ? (*idx)[i] : i]; };
  long double s = 0.0L;
  for (std::size_t i = 0; i < R; ++i) s += at(i).log_z;
  pt.mean_log_z = static_cast<double>(s / R);
  std::vector<double> col(R);
  pt.logz.assign(kLogZMoments, {});
  for (int p = 1; p <= kLogZMoments; ++p) {
    for (std::size_t i = 0; i < R; ++i) col[i] = std::pow(std::abs(at(i).log_z - pt.mean_log_z), p);
    pt.logz[p - 1] = mean_and_se(col);
  }
  pt.exit_t1.assign(kExitMoments, {});
  pt.exit_t2.assign(kExitMoments, {});
  for (int p = 1; p <= kExitMoments; ++p) {
    for (std::size_t i = 0; i < R; ++i) col[i] = at(i).t1[p - 1];
    pt.exit_t1[p - 1] = mean_and_se(col);
    for (std::size_t i = 0; i < R; ++i) col[i] = at(i).t2[p - 1];
    pt.exit_t2[p - 1] = mean_and_se(col);
  }
}

template <class Pick>
std::vector<FitPoint> series(const std::vector<ScalingPoint>& pts, Pick&& pick) {
  std::vector<FitPoint> out;
  for (const auto& p : pts) {
    const Estimate e = pick(p);
    out.push_back({static_cast<double>(p.N), e.value, e.std_error});
  }
  return out;
}

inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

struct SeriesKey {
  const char* quantity;
  int p;
};

inline std::vector<SeriesKey> series_keys() {
  std::vector<SeriesKey> k;
  for (int p = 1; p <= kLogZMoments; ++p) k.push_back({"logz", p});
  for (int p = 1; p <= kExitMoments; ++p) k.push_back({"t1", p});
  for (int p = 1; p <= kExitMoments; ++p) k.push_back({"t2", p});
  return k;
}

inline Estimate pick(const ScalingPoint& pt, const SeriesKey& key) {
  const std::string q = key.quantity;
  if (q == "logz") return pt.logz[key.p - 1];
  if (q == "t1") return pt.exit_t1[key.p - 1];
  return pt.exit_t2[key.p - 1];
}

inline void fit_all(ScalingResult& res, const std::vector<std::vector<ReplicaOutcome>>& outcomes) {
  res.fits.clear();
  if (res.points.size() < 3) return;
  const auto keys = series_keys();
  std::vector<std::vector<double>> boot(keys.size());
  const int B = res.config.bootstrap;
  for (int b = 0; b < B; ++b) {
    Rng rng(res.config.seed, static_cast<std::uint64_t>(b), StreamRole::Aux);
    std::vector<ScalingPoint> pts(res.points.size());
    for (std::size_t i = 0; i < res.points.size(); ++i) {
      const std::size_t R = outcomes[i].size();
      std::vector<std::size_t> idx(R);
      for (auto& v : idx) v = std::min<std::size_t>(R - 1, static_cast<std::size_t>(rng.uniform() * R));
      pts[i] = res.points[i];
      summarize(outcomes[i], &idx, pts[i]);
    }
    for (std::size_t s = 0; s < keys.size(); ++s) {
      try {
        boot[s].push_back(fit_exponent(series(pts, [&](const ScalingPoint& p) { return pick(p, keys[s]); })).slope);
      } catch (const NumericError&) {
        // a resample with a zero moment (t2 pinned at 0) has no slope
      }
    }
  }
  for (std::size_t s = 0; s < keys.size(); ++s) {
    SlopeFit f;
    f.quantity = keys[s].quantity;
    f.p = keys[s].p;
    try {
      f.fit = fit_exponent(series(res.points, [&](const ScalingPoint& p) { return pick(p, keys[s]); }));
    } catch (const NumericError&) {
      continue;
    }
    if (boot[s].size() >= 20) {
      f.ci_lo = percentile(boot[s], 0.025);
      f.ci_hi = percentile(boot[s], 0.975);
    } else {
      f.ci_lo = f.fit.ci_lo;
      f.ci_hi = f.fit.ci_hi;
    }
    res.fits.push_back(f);
  }
}

}  // namespace detail

/// For each N: shape from characteristic_shape, `replicas` environments with seeds derived
/// from (master seed, N, replica), log Z and the quenched exit laws by one reverse sweep.
/// Results depend only on the config, not on the worker count.
inline ScalingResult run_scaling(const RunConfig& cfg) {
  cfg.validate();
  ScalingResult res;
  res.config = cfg;
  std::vector<std::vector<detail::ReplicaOutcome>> outcomes;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    const int N = cfg.Ns[ni];
    const Shape sh = characteristic_shape(cfg.spec, N, cfg.gamma_offset, cfg.m_factor);
    ScalingPoint pt;
    pt.N = N;
    pt.m = sh.m;
    pt.n = sh.n;
    pt.replicas = cfg.replicas;
    pt.seed = detail::seed_for_N(cfg.seed, N);
    std::vector<detail::ReplicaOutcome> out(cfg.replicas);
    try {
      parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
        const Environment env = sample_environment(cfg.spec, sh.m, sh.n, pt.seed, r);
        const QuenchedExit qe = quenched_exit(env);
        auto& o = out[r];
        o.log_z = qe.log_z;
        for (int p = 1; p <= kExitMoments; ++p) {
          o.t1[p - 1] = exit_moment(qe.south, p);
          o.t2[p - 1] = exit_moment(qe.west, p);
        }
      });
    } catch (const std::bad_alloc&) {
      detail::fit_all(res, outcomes);
      throw PartialResultError("run_scaling: out of memory at N=" + std::to_string(N), res);
    }
    detail::summarize(out, nullptr, pt);
    res.points.push_back(pt);
    outcomes.push_back(std::move(out));
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.max_seconds > 0.0 && elapsed > cfg.max_seconds && ni + 1 < cfg.Ns.size()) {
      detail::fit_all(res, outcomes);
      throw PartialResultError("run_scaling: time budget of " + std::to_string(cfg.max_seconds) +
                                   " s exhausted after N=" + std::to_string(N),
                               res);
    }
  }
  detail::fit_all(res, outcomes);
  return res;
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { CSV, JSON, PlotScript };

inline ReportFormat parse_format(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "csv") return ReportFormat::CSV;
  if (s == "json") return ReportFormat::JSON;
  if (s == "plot" || s == "plotscript" || s == "gnuplot") return ReportFormat::PlotScript;
  throw ValidationError("unknown report format '" + s + "' (csv, json, plot)");
}

inline std::string model_label(const ModelSpec& s) {
  std::string k(to_string(s.kind));
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
  return k;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* kCsvHeader = "model,N,m,n,p,moment,stderr,replicas,seed";
inline const char* kExitCsvHeader = "model,N,m,n,axis,p,moment,stderr,replicas,seed";

/// Central absolute moments of log Z, one row per (N, p).
inline std::string scaling_csv(const ScalingResult& r) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  const std::string model = model_label(r.config.spec);
  for (const auto& pt : r.points)
    for (int p = 1; p <= static_cast<int>(pt.logz.size()); ++p)
      os << model << ',' << pt.N << ',' << pt.m << ',' << pt.n << ',' << p << ',' << fmt(pt.logz[p - 1].value) << ','
         << fmt(pt.logz[p - 1].std_error) << ',' << pt.replicas << ',' << r.config.seed << '\n';
  return os.str();
}

/// Annealed exit moments E[t_axis^p].
inline std::string exit_csv(const ScalingResult& r) {
  std::ostringstream os;
  os << kExitCsvHeader << '\n';
  const std::string model = model_label(r.config.spec);
  for (const auto& pt : r.points)
    for (int axis = 1; axis <= 2; ++axis) {
      const auto& v = axis == 1 ? pt.exit_t1 : pt.exit_t2;
      for (int p = 1; p <= static_cast<int>(v.size()); ++p)
        os << model << ',' << pt.N << ',' << pt.m << ',' << pt.n << ",t" << axis << ',' << p << ','
           << fmt(v[p - 1].value) << ',' << fmt(v[p - 1].std_error) << ',' << pt.replicas << ',' << r.config.seed
           << '\n';
    }
  return os.str();
}

struct CsvRow {
  std::string model;
  int N = 0, m = 0, n = 0, p = 0;
  double moment = 0.0, std_error = 0.0;
  int replicas = 0;
  std::uint64_t seed = 0;
};

inline std::vector<CsvRow> parse_scaling_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ValidationError("scaling CSV: unexpected header");
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw ValidationError("scaling CSV: line " + std::to_string(lineno) + " has " +
                                             std::to_string(f.size()) + " fields");
    try {
      rows.push_back({f[0], std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4]), std::stod(f[5]),
                      std::stod(f[6]), std::stoi(f[7]), std::stoull(f[8])});
    } catch (const std::logic_error&) {
      throw ValidationError("scaling CSV: bad number on line " + std::to_string(lineno));
    }
  }
  return rows;
}

inline nlohmann::json to_json(const ScalingResult& r) {
  using nlohmann::json;
  const auto& c = r.config;
  json j;
  j["model"] = {{"kind", model_label(c.spec)}, {"mu", c.spec.mu}, {"theta", c.spec.theta}, {"beta", c.spec.beta},
                {"a1", c.spec.a1},           {"a2", c.spec.a2}, {"a3", c.spec.a3}};
  j["seed"] = c.seed;
  j["replicas"] = c.replicas;
  j["gamma_offset"] = c.gamma_offset;
  j["m_factor"] = c.m_factor;
  j["bootstrap"] = c.bootstrap;
  j["points"] = json::array();
  auto est = [](const std::vector<Estimate>& v) {
    json a = json::array();
    for (std::size_t p = 0; p < v.size(); ++p) a.push_back({{"p", p + 1}, {"moment", v[p].value}, {"stderr", v[p].std_error}});
    return a;
  };
  for (const auto& pt : r.points)
    j["points"].push_back({{"N", pt.N},
                           {"m", pt.m},
                           {"n", pt.n},
                           {"replicas", pt.replicas},
                           {"mean_log_z", pt.mean_log_z},
                           {"logz", est(pt.logz)},
                           {"t1", est(pt.exit_t1)},
                           {"t2", est(pt.exit_t2)}});
  j["fits"] = json::array();
  for (const auto& f : r.fits)
    j["fits"].push_back({{"quantity", f.quantity},
                         {"p", f.p},
                         {"slope", f.fit.slope},
                         {"intercept", f.fit.intercept},
                         {"slope_se", f.fit.slope_se},
                         {"ci_lo", f.ci_lo},
                         {"ci_hi", f.ci_hi}});
  return j;
}

/// Empty string when `j` has the documented report layout, else the first problem found.
inline std::string validate_report_json(const nlohmann::json& j) {
  auto need = [](const nlohmann::json& o, const char* key, auto pred, const std::string& where) -> std::string {
    if (!o.is_object() || !o.contains(key)) return where + ": missing '" + key + "'";
    if (!pred(o.at(key))) return where + ": '" + key + "' has the wrong type";
    return {};
  };
  auto num = [](const nlohmann::json& v) { return v.is_number(); };
  auto uint = [](const nlohmann::json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); };
  auto arr = [](const nlohmann::json& v) { return v.is_array(); };
  auto str = [](const nlohmann::json& v) { return v.is_string(); };
  std::string e;
  if (!(e = need(j, "model", [](const nlohmann::json& v) { return v.is_object(); }, "report")).empty()) return e;
  if (!(e = need(j["model"], "kind", str, "model")).empty()) return e;
  for (const char* k : {"mu", "theta", "beta", "a1", "a2", "a3"})
    if (!(e = need(j["model"], k, num, "model")).empty()) return e;
  for (const char* k : {"seed", "replicas", "bootstrap"})
    if (!(e = need(j, k, uint, "report")).empty()) return e;
  for (const char* k : {"gamma_offset", "m_factor"})
    if (!(e = need(j, k, num, "report")).empty()) return e;
  if (!(e = need(j, "points", arr, "report")).empty()) return e;
  if (!(e = need(j, "fits", arr, "report")).empty()) return e;
  for (const auto& pt : j["points"]) {
    for (const char* k : {"N", "m", "n", "replicas"})
      if (!(e = need(pt, k, uint, "point")).empty()) return e;
    if (!(e = need(pt, "mean_log_z", num, "point")).empty()) return e;
    for (const char* k : {"logz", "t1", "t2"}) {
      if (!(e = need(pt, k, arr, "point")).empty()) return e;
      for (const auto& m : pt[k]) {
        if (!(e = need(m, "p", uint, k)).empty()) return e;
        if (!(e = need(m, "moment", num, k)).empty()) return e;
        if (!(e = need(m, "stderr", num, k)).empty()) return e;
      }
    }
  }
  for (const auto& f : j["fits"]) {
    if (!(e = need(f, "quantity", str, "fit")).empty()) return e;
    if (!(e = need(f, "p", uint, "fit")).empty()) return e;
    for (const char* k : {"slope", "intercept", "slope_se", "ci_lo", "ci_hi"})
      if (!(e = need(f, k, num, "fit")).empty()) return e;
  }
  return {};
}

/// gnuplot script with inline data: log-log moments of log Z and E[t1], with fitted power laws.
inline std::string plot_script(const ScalingResult& r) {
  std::ostringstream os;
  const std::string model = model_label(r.config.spec);
  os << "# " << model << " scaling, seed " << r.config.seed << ", " << r.config.replicas << " replicas per N\n";
  os << "$logz << EOD\n# N p1 se1 p2 se2 p3 se3 p4 se4\n";
  for (const auto& pt : r.points) {
    os << pt.N;
    for (const auto& e : pt.logz) os << ' ' << fmt(e.value) << ' ' << fmt(e.std_error);
    os << '\n';
  }
  os << "EOD\n$exit << EOD\n# N t1 se t2 se\n";
  for (const auto& pt : r.points)
    os << pt.N << ' ' << fmt(pt.exit_t1[0].value) << ' ' << fmt(pt.exit_t1[0].std_error) << ' '
       << fmt(pt.exit_t2[0].value) << ' ' << fmt(pt.exit_t2[0].std_error) << '\n';
  os << "EOD\n";
  os << "set logscale xy\nset key left top\nset xlabel 'N'\nset ylabel 'moment'\n";
  os << "set title '" << model << ": central moments of log Z and mean exit point'\n";
  std::vector<std::string> plots;
  for (const auto& f : r.fits) {
    if (f.quantity == "logz") {
      os << "f" << f.p << "(x) = exp(" << fmt(f.fit.intercept) << ") * x**" << fmt(f.fit.slope) << '\n';
      plots.push_back("$logz using 1:" + std::to_string(2 * f.p) + ":" + std::to_string(2 * f.p + 1) +
                      " with yerrorbars title 'E|logZ|^" + std::to_string(f.p) + "'");
      plots.push_back("f" + std::to_string(f.p) + "(x) title sprintf('slope %.3f', " + fmt(f.fit.slope) + ")");
    } else if (f.quantity == "t1" && f.p == 1) {
      os << "g(x) = exp(" << fmt(f.fit.intercept) << ") * x**" << fmt(f.fit.slope) << '\n';
      plots.push_back("$exit using 1:2:3 with yerrorbars title 'E[t1]'");
      plots.push_back("g(x) title sprintf('t1 slope %.3f', " + fmt(f.fit.slope) + ")");
    }
  }
  if (plots.empty()) plots.push_back("$logz using 1:2 with points title 'E|logZ|'");
  os << "plot ";
  for (std::size_t i = 0; i < plots.size(); ++i) os << (i ? ", \\\n     " : "") << plots[i];
  os << '\n';
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

/// Writes `stem`.csv (+ `stem`_exit.csv), `stem`.json or `stem`.gp; returns the paths written.
inline std::vector<std::string> emit_report(const ScalingResult& r, ReportFormat format, const std::string& stem) {
  std::vector<std::string> paths;
  switch (format) {
    case ReportFormat::CSV:
      write_text(stem + ".csv", scaling_csv(r));
      write_text(stem + "_exit.csv", exit_csv(r));
      paths = {stem + ".csv", stem + "_exit.csv"};
      break;
    case ReportFormat::JSON:
      write_text(stem + ".json", to_json(r).dump(2) + "\n");
      paths = {stem + ".json"};
      break;
    case ReportFormat::PlotScript:
      write_text(stem + ".gp", plot_script(r));
      paths = {stem + ".gp"};
      break;
  }
  return paths;
}

}  // namespace bgpoly
