// bgpoly: verify identities, run scaling experiments, inspect exit laws and environments.
//
// Exit codes: 0 success, 1 a check failed (or a run stopped early), 2 usage error.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "bgpoly/bgpoly.hpp"

using namespace bgpoly;

namespace {

struct Options {
  std::string model;
  std::optional<double> mu, theta, beta;
  std::vector<int> Ns;
  std::optional<int> replicas;
  std::uint64_t seed = 1;
  double gamma_offset = 0.0;
  double m_factor = 1.0;
  int threads = 0;
  std::string out;
  std::vector<std::string> formats;
  int bootstrap = 200;
  double max_seconds = 0.0;
  std::optional<int> m, n;
  std::uint64_t replica = 0;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ModelSpec resolve_model(const Options& o) {
  try {
    const ModelKind kind = parse_model(o.model);
    const ModelSpec d = default_model(kind);
    return make_model(kind, o.mu.value_or(d.mu), o.theta.value_or(d.theta), o.beta.value_or(d.beta));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
}

void add_model_flags(CLI::App* sub, Options& o) {
  sub->add_option("--config", "JSON file whose keys are flag names (command-line flags win)");
  sub->add_option("--model", o.model, "ig | g | b | ib")->required();
  sub->add_option("--mu", o.mu, "mu > 0 (default per model)");
  sub->add_option("--theta", o.theta, "theta > 0 (default per model)");
  sub->add_option("--beta", o.beta, "beta > 0 (default 1)");
  sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "workers (0: BGPOLY_THREADS or all cores)")->capture_default_str();
}

void add_shape_flags(CLI::App* sub, Options& o) {
  sub->add_option("--N", o.Ns, "N values, comma separated")->delimiter(',');
  sub->add_option("--gamma-offset", o.gamma_offset, "shift gamma N^{2/3} added to m and n")->capture_default_str();
  sub->add_option("--m-factor", o.m_factor, "m = m_factor N psi_1 + ... (1: characteristic)")->capture_default_str();
}

Shape shape_of(const Options& o, const ModelSpec& spec) {
  if (o.m || o.n) {
    if (!o.m || !o.n) throw UsageError("--m and --n go together");
    if (*o.m < 0 || *o.n < 0 || *o.m + *o.n < 1) throw UsageError("--m/--n must give a non-empty box");
    return {*o.m, *o.n};
  }
  if (o.Ns.size() != 1) throw UsageError("give one --N value, or --m and --n");
  if (o.Ns[0] < 1) throw UsageError("--N must be positive");
  return characteristic_shape(spec, o.Ns[0], o.gamma_offset, o.m_factor);
}

std::ostream& sink(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  return file;
}

int cmd_verify(const Options& o) {
  const ModelSpec spec = resolve_model(o);
  const auto results = run_verify_suite(spec, o.seed, o.threads);
  bool ok = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& r : results) {
    std::printf("%s  %-48s %s (%.2fs)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
    ok = ok && r.pass;
    report.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  if (!o.out.empty()) write_text(o.out, report.dump(2) + "\n");
  std::printf("%s: %zu checks, %s\n", std::string(to_string(spec.kind)).c_str(), results.size(),
              ok ? "all passed" : "FAILURES");
  return ok ? 0 : 1;
}

void print_slopes(const ScalingResult& r) {
  for (const auto& f : r.fits)
    std::printf("slope %-4s p=%d  %.4f  (bootstrap 95%% CI [%.4f, %.4f], LS se %.4f)\n", f.quantity.c_str(), f.p,
                f.fit.slope, f.ci_lo, f.ci_hi, f.fit.slope_se);
}

int cmd_scaling(const Options& o) {
  RunConfig cfg;
  cfg.spec = resolve_model(o);
  cfg.Ns = o.Ns.empty() ? std::vector<int>{64, 128, 256} : o.Ns;
  cfg.gamma_offset = o.gamma_offset;
  cfg.m_factor = o.m_factor;
  cfg.replicas = o.replicas.value_or(500);
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.bootstrap = o.bootstrap;
  cfg.max_seconds = o.max_seconds;
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  std::vector<ReportFormat> formats;
  try {
    for (const auto& f : o.formats.empty() ? std::vector<std::string>{"csv"} : o.formats) formats.push_back(parse_format(f));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const std::string stem = o.out.empty() ? "scaling" : o.out;
  ScalingResult res;
  int code = 0;
  try {
    res = run_scaling(cfg);
  } catch (const PartialResultError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    res = e.partial();
    code = 1;
  }
  for (const auto& p : res.points)
    std::printf("N=%d (m=%d, n=%d): Var(log Z) %.4f +- %.4f, E[t1] %.3f +- %.3f\n", p.N, p.m, p.n, p.logz[1].value,
                p.logz[1].std_error, p.exit_t1[0].value, p.exit_t1[0].std_error);
  print_slopes(res);
  for (ReportFormat f : formats)
    for (const auto& path : emit_report(res, f, stem)) std::printf("wrote %s\n", path.c_str());
  return code;
}

int cmd_exit_times(const Options& o) {
  const ModelSpec spec = resolve_model(o);
  const Shape sh = shape_of(o, spec);
  const int R = o.replicas.value_or(100);
  if (R < 1) throw UsageError("--replicas must be positive");
  std::vector<QuenchedExit> per(R);
  parallel_for(R, o.threads, [&](std::size_t r) { per[r] = quenched_exit(sample_environment(spec, sh.m, sh.n, o.seed, r)); });
  // annealed law: replica average of the quenched laws, summed in replica order
  std::vector<double> q1(sh.m + 1, 0.0), q2(sh.n + 1, 0.0);
  for (const auto& qe : per) {
    for (int l = 0; l <= sh.m; ++l) q1[l] += qe.south.q[l] / R;
    for (int l = 0; l <= sh.n; ++l) q2[l] += qe.west.q[l] / R;
  }
  std::ofstream file;
  std::ostream& os = sink(o.out, file);
  os << "axis,l,probability\n";
  for (int l = 0; l <= sh.m; ++l) os << "t1," << l << ',' << fmt(q1[l]) << '\n';
  for (int l = 0; l <= sh.n; ++l) os << "t2," << l << ',' << fmt(q2[l]) << '\n';
  double e1 = 0.0, e2 = 0.0;
  for (int l = 0; l <= sh.m; ++l) e1 += l * q1[l];
  for (int l = 0; l <= sh.n; ++l) e2 += l * q2[l];
  std::fprintf(stderr, "m=%d n=%d replicas=%d  E[t1]=%.4f  E[t2]=%.4f\n", sh.m, sh.n, R, e1, e2);
  return 0;
}

int cmd_dump_env(const Options& o) {
  const ModelSpec spec = resolve_model(o);
  const Shape sh = shape_of(o, spec);
  const Environment env = sample_environment(spec, sh.m, sh.n, o.seed, o.replica);
  if (o.out.empty() || o.out == "-") {
    std::cout << to_json(env).dump(2) << '\n';
  } else {
    save_environment(env, o.out);
  }
  return 0;
}

/// Replaces "--config FILE" by the file's settings, placed right after the subcommand
/// so explicit flags still apply; keys already given on the command line are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  auto given = [&](const std::string& flag) {
    for (const auto& a : rest)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto scalar = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned() || v.is_boolean()) return v.dump();
    if (v.is_number_float()) return fmt(v.get<double>());
    throw UsageError("config values must be strings, numbers or arrays of those");
  };
  std::vector<std::string> injected;
  for (const auto& [key, v] : j.items()) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    std::string value;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) value += (i ? "," : "") + scalar(v[i]);
    } else {
      value = scalar(v);
    }
    injected.push_back(flag);
    injected.push_back(value);
  }
  // the subcommand is the first non-flag token
  auto pos = rest.begin();
  while (pos != rest.end() && pos->rfind("-", 0) == 0) ++pos;
  if (pos != rest.end()) ++pos;
  rest.insert(pos, injected.begin(), injected.end());
  return rest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bgpoly: stationary lattice polymers: identity checks and fluctuation-exponent experiments"};
  app.require_subcommand(1);
  Options o;

  auto* verify = app.add_subcommand("verify", "run the identity checks for one model");
  add_model_flags(verify, o);
  verify->add_option("--out", o.out, "also write a JSON report here");

  auto* scaling = app.add_subcommand("scaling", "moments of log Z and exit points along the characteristic line");
  add_model_flags(scaling, o);
  add_shape_flags(scaling, o);
  scaling->add_option("--replicas", o.replicas, "replicas per N (>= 100, default 500)");
  scaling->add_option("--out", o.out, "output stem (default 'scaling')");
  scaling->add_option("--format", o.formats, "csv, json, plot (comma separated; default csv)")->delimiter(',');
  scaling->add_option("--bootstrap", o.bootstrap, "bootstrap resamples for slope CIs")->capture_default_str();
  scaling->add_option("--max-seconds", o.max_seconds, "stop after the N in progress once exceeded (0: none)");

  auto* exits = app.add_subcommand("exit-times", "annealed exit-point laws on one box, as CSV");
  add_model_flags(exits, o);
  add_shape_flags(exits, o);
  exits->add_option("--m", o.m, "box width (with --n, instead of --N)");
  exits->add_option("--n", o.n, "box height");
  exits->add_option("--replicas", o.replicas, "environments averaged (default 100)");
  exits->add_option("--out", o.out, "CSV path (default stdout)");

  auto* dump = app.add_subcommand("dump-env", "sample one environment and write it as JSON");
  add_model_flags(dump, o);
  add_shape_flags(dump, o);
  dump->add_option("--m", o.m, "box width (with --n, instead of --N)");
  dump->add_option("--n", o.n, "box height");
  dump->add_option("--replica", o.replica, "replica index")->capture_default_str();
  dump->add_option("--out", o.out, "JSON path (default stdout)");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << '\n' << app.help();
    return 2;
  }

  try {
    if (*verify) return cmd_verify(o);
    if (*scaling) return cmd_scaling(o);
    if (*exits) return cmd_exit_times(o);
    if (*dump) return cmd_dump_env(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
