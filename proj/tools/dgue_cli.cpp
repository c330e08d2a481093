#include <zlib.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dgue/config.hpp"
#include "dgue/contour.hpp"
#include "dgue/edge.hpp"
#include "dgue/ensemble.hpp"
#include "dgue/fredholm.hpp"
#include "dgue/kernel.hpp"
#include "dgue/source_io.hpp"
#include "dgue/subordination.hpp"
#include "dgue/verify.hpp"

using namespace dgue;
using nlohmann::json;

namespace {

double parse_number(const std::string& s) {
  if (s == "inf" || s == "+inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + s + "'");
  }
  if (pos != s.size() || std::isnan(v)) throw ValidationError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

/// "a:b:step" -> a, a + step, ..., up to b
std::vector<double> parse_grid(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 3) throw ValidationError("grid must be a:b:step, got '" + s + "'");
  const double a = parse_number(p[0]), b = parse_number(p[1]), h = parse_number(p[2]);
  if (!std::isfinite(a) || !std::isfinite(b) || !(h > 0.0) || b < a) throw ValidationError("bad grid '" + s + "'");
  const double count = std::floor((b - a) / h + 1e-9) + 1.0;
  if (count > 1e6) throw ValidationError("grid has too many points");
  std::vector<double> g;
  for (int k = 0; k < static_cast<int>(count); ++k) {
    // 12 significant digits, so 2.8 + 0.05 prints as 2.85
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", a + k * h);
    g.push_back(std::strtod(buf, nullptr));
  }
  return g;
}

/// "a:b" with b possibly "inf"
GapInterval parse_interval(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 2) throw ValidationError("interval must be a:b, got '" + s + "'");
  return {parse_number(p[0]), parse_number(p[1])};
}

// shortest representation that round-trips
std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct Run {
  RunConfig cfg;
  bool timestamp = true;

  unsigned threads() const { return cfg.global.threads ? cfg.global.threads : default_threads(); }
  std::string str(const char* key, const std::string& fallback = "") const {
    return cfg.params.contains(key) ? cfg.params.at(key).get<std::string>() : fallback;
  }
  std::string need_str(const char* key) const {
    if (!cfg.params.contains(key)) throw ValidationError(cfg.command + ": missing --" + std::string(key));
    return cfg.params.at(key).get<std::string>();
  }
  std::size_t need_n() const {
    if (!cfg.params.contains("n")) throw ValidationError(cfg.command + ": missing --n");
    return cfg.params.at("n").get<std::size_t>();
  }

  /// Writes to out_dir/<name> when an output directory is set, else stdout.
  void emit(const std::string& name, const std::string& body) const {
    if (cfg.global.out_dir.empty()) {
      std::cout << body;
      return;
    }
    std::filesystem::create_directories(cfg.global.out_dir);
    const auto path = std::filesystem::path(cfg.global.out_dir) / name;
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write " + path.string());
    f << body;
  }
  void emit_json(json j) const {
    j["meta"] = meta_json(cfg, timestamp);
    emit(cfg.command + ".json", j.dump(2) + "\n");
  }
  std::string csv_head() const { return csv_header(cfg, timestamp); }
};

int cmd_density(const Run& r) {
  const auto src = load_source(r.need_str("source"));
  const auto meas = src.limit();
  const auto grid = parse_grid(r.str("grid", "-3:3:0.1"));
  std::vector<double> rho(grid.size());
  parallel_for(grid.size(), r.threads(), [&](std::size_t i) {
    rho[i] = density(*meas, grid[i], default_eps_ladder(), r.cfg.global.tol.subordination_tol);
  });
  std::string out = r.csv_head() + "lambda,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out += fmt(grid[i]) + "," + fmt(rho[i]) + "\n";
  r.emit("density.csv", out);
  return 0;
}

int cmd_edge(const Run& r) {
  const auto src = load_source(r.need_str("source"));
  const std::string side_s = r.str("side", "right");
  if (side_s != "right" && side_s != "left") throw ValidationError("--side must be right or left");
  const Side side = side_s == "right" ? Side::Right : Side::Left;
  std::optional<Interval> bracket;
  if (r.cfg.params.contains("bracket")) {
    const auto iv = parse_interval(r.cfg.params.at("bracket").get<std::string>());
    bracket = Interval{iv.a, iv.b};
  }
  const auto e = find_limiting_edge(src.limit(), bracket, side);
  json j{{"lambda0", e.lambda0}, {"z0", e.z0},         {"gamma", e.gamma},        {"side", to_string(e.side)},
         {"residual", e.residual_eq}, {"clearance", e.clearance}, {"ambiguous", e.ambiguous}};
  if (r.cfg.params.contains("n")) {
    const auto spec = src.atoms_for(r.need_n());
    const auto f = side == Side::Right ? right_critical_point(spec) : left_critical_point(spec);
    j["finite"] = {{"n", spec.size()}, {"z_star", f.z_star.real()}, {"lambda0n", f.lambda0n},
                   {"gamma_n", f.gamma_n}, {"residual", f.residual}};
  }
  r.emit_json(j);
  return 0;
}

int cmd_contour(const Run& r) {
  const auto spec = load_source(r.need_str("source")).atoms_for(r.need_n());
  const auto e = right_critical_point(spec);
  const auto cp = build_contours(spec, e);
  const auto d = check_contours(cp);
  json loops = json::array();
  for (const auto& loop : cp.loops) {
    json v = json::array();
    for (const auto& z : loop.vertices) v.push_back({z.real(), z.imag()});
    loops.push_back(v);
  }
  json j{{"z_star", e.z_star.real()},
         {"lambda0n", e.lambda0n},
         {"gamma_n", e.gamma_n},
         {"loops", loops},
         {"l_anchor", cp.l_anchor},
         {"l_halfheight", cp.l_halfheight},
         {"eps_sep", cp.eps_sep},
         {"separation", cp.separation},
         {"y_check", cp.y_check},
         {"diagnostics",
          {{"winding_ok", d.winding_ok},
           {"max_chord_ratio", d.max_chord_ratio},
           {"total_length", d.total_length},
           {"monotone_L", d.monotone_L},
           {"monotone_l", d.monotone_l},
           {"tail_ok", d.tail_ok},
           {"velocity_ok", d.velocity_ok}}}};
  r.emit_json(j);
  return d.all_ok() ? 0 : 1;
}

int cmd_kernel(const Run& r) {
  const auto spec = load_source(r.need_str("source")).atoms_for(r.need_n());
  const auto xi = parse_grid(r.str("xi_grid", "-2:2:0.5"));
  const auto eta = parse_grid(r.str("eta_grid", r.str("xi_grid", "-2:2:0.5")));
  const std::string output = r.str("output", "csv");
  if (output != "csv" && output != "json") throw ValidationError("--output must be csv or json");
  KernelOptions opt;
  opt.rtol = r.cfg.global.tol.kernel_rtol;
  if (r.cfg.params.contains("window")) opt.window = r.cfg.params.at("window").get<double>();
  const auto e = right_critical_point(spec);
  const auto cp = build_contours(spec, e);
  const auto g = kernel_grid(cp, e, xi, eta, opt, r.threads());
  if (output == "json") {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
      json a = json::array(), b = json::array();
      for (Eigen::Index k = 0; k < g.values.cols(); ++k) {
        a.push_back(g.values(i, k).real());
        b.push_back(g.values(i, k).imag());
      }
      re.push_back(a);
      im.push_back(b);
    }
    r.emit_json({{"xi", xi}, {"eta", eta}, {"re", re}, {"im", im}, {"n", g.meta.n}, {"lambda0n", g.meta.lambda0},
                 {"gamma_n", g.meta.gamma_n}, {"eps_sep", g.meta.eps_sep}});
    return 0;
  }
  std::string out = r.csv_head() + "xi,eta,re,im\n";
  for (std::size_t i = 0; i < xi.size(); ++i)
    for (std::size_t k = 0; k < eta.size(); ++k)
      out += fmt(xi[i]) + "," + fmt(eta[k]) + "," + fmt(g.values(i, k).real()) + "," + fmt(g.values(i, k).imag()) + "\n";
  r.emit("kernel.csv", out);
  return 0;
}

int cmd_fredholm(const Run& r) {
  const auto iv = parse_interval(r.need_str("interval"));
  const double c = r.cfg.params.contains("phi_scale") ? r.cfg.params.at("phi_scale").get<double>() : 1.0;
  if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("--phi-scale must lie in [0, 1]");
  FredholmResult f;
  if (c == 1.0) {
    f = fredholm_gap(iv, r.cfg.global.tol.fredholm_tol);
  } else {
    if (!std::isfinite(iv.b)) throw ValidationError("--phi-scale needs a bounded interval");
    f = generating_functional(scaled_indicator(c, iv.a, iv.b), r.cfg.global.tol.fredholm_tol);
  }
  json j{{"a", iv.a}, {"value", f.value}, {"quad_order", f.quad_order}, {"truncation", f.truncation},
         {"err_estimate", f.err_estimate}, {"phi_scale", c}};
  j["b"] = std::isfinite(iv.b) ? json(iv.b) : json("inf");
  r.emit_json(j);
  return 0;
}

int cmd_tw_table(const Run& r) {
  const auto s = parse_grid(r.str("s_grid", "-5:3:0.5"));
  const auto f = tw_table(s, r.cfg.global.tol.fredholm_tol, r.threads());
  std::string out = r.csv_head() + "s,F2,err_estimate,quad_order\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out += fmt(s[i]) + "," + fmt(f[i].value) + "," + fmt(f[i].err_estimate) + "," + std::to_string(f[i].quad_order) + "\n";
  r.emit("tw_table.csv", out);
  return 0;
}

int cmd_simulate(const Run& r) {
  if (r.cfg.global.out_dir.empty()) throw ValidationError("simulate: --out <dir> is required");
  const std::size_t n = r.need_n();
  const std::size_t count = r.cfg.params.contains("samples") ? r.cfg.params.at("samples").get<std::size_t>() : 1000;
  const std::string source = r.need_str("source");
  std::vector<GapInterval> intervals;
  for (const auto& item : split(r.str("intervals", "0:inf"), ',')) intervals.push_back(parse_interval(item));

  EnsembleSource src = EnsembleSource::wigner();
  EdgeData edge;
  if (source == "wigner") {
    edge = find_limiting_edge(semicircle(1.0));
  } else {
    const auto spec = load_source(source);
    src = EnsembleSource::fixed(spec.atoms_for(n));
    edge = find_limiting_edge(spec.limit());
  }
  const auto scaling = EdgeScaling::from(edge);
  const auto batch = sample_batch(src, n, count, r.cfg.global.seed, r.threads());
  const auto st = empirical_gap(batch, scaling, intervals);

  std::filesystem::create_directories(r.cfg.global.out_dir);
  const auto csv = (std::filesystem::path(r.cfg.global.out_dir) / "rescaled.csv.gz").string();
  gzFile gz = gzopen(csv.c_str(), "wb");
  if (!gz) throw ValidationError("cannot write " + csv);
  std::string body = r.csv_head() + "sample,xi\n";
  for (const auto& s : batch) {
    for (double l : s.eigenvalues) {
      const double xi = scaling.rescale(l, n);
      if (xi > -10.0) body += std::to_string(s.index) + "," + fmt(xi) + "\n";
    }
    if (body.size() > (1u << 20)) {
      gzwrite(gz, body.data(), static_cast<unsigned>(body.size()));
      body.clear();
    }
  }
  gzwrite(gz, body.data(), static_cast<unsigned>(body.size()));
  gzclose(gz);

  json gaps = json::array();
  for (const auto& iv : intervals) {
    const auto g = st.gap_estimates.at({iv.a, iv.b});
    json item{{"a", iv.a}, {"frequency", g.frequency}, {"standard_error", g.standard_error}, {"samples", g.samples}};
    item["b"] = std::isfinite(iv.b) ? json(iv.b) : json("inf");
    if (iv.b >= iv.a) item["airy_limit"] = fredholm_gap(iv, r.cfg.global.tol.fredholm_tol).value;
    gaps.push_back(item);
  }
  json j{{"meta", meta_json(r.cfg, r.timestamp)},
         {"n", n},
         {"samples", count},
         {"source", source == "wigner" ? json("wigner") : source_to_json(load_source(source))},
         {"edge", {{"lambda0", edge.lambda0}, {"gamma", edge.gamma}, {"side", to_string(edge.side)}}},
         {"gaps", gaps}};
  std::ofstream f(std::filesystem::path(r.cfg.global.out_dir) / "summary.json");
  f << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(const Run& r, bool seed_given) {
  const std::string suite = r.str("suite", "quick");
  std::vector<Check> checks;
  if (suite == "quick") {
    SuiteOptions o;
    o.seed = r.cfg.global.seed;
    o.threads = r.threads();
    checks = quick_suite(o);
  } else if (suite == "full") {
    if (!seed_given) throw ValidationError("verify --suite full requires --seed");
    SuiteOptions o;
    o.seed = r.cfg.global.seed;
    o.threads = r.threads();
    checks = full_suite(o);
  } else {
    throw ValidationError("--suite must be quick or full");
  }
  bool ok = true;
  std::string out = "# dgue version=" + std::string(kVersion) + " command=verify seed=" + std::to_string(r.cfg.global.seed) +
                    " config_hash=" + config_hash(r.cfg) + "\n";
  for (const auto& c : checks) {
    const auto res = run_check(c);
    ok = ok && res.pass;
    const std::string line = format_result(res, false) + "\n";
    out += line;
    if (r.cfg.global.out_dir.empty()) std::cout << line << std::flush;
  }
  if (!r.cfg.global.out_dir.empty()) r.emit("verify.txt", out);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dgue: edge statistics of the deformed GUE"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_dir, config_path;
  double kernel_rtol = 0, fredholm_tol = 0, subordination_tol = 0;
  bool no_timestamp = false, dump_config = false;
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: DGUE_THREADS or all cores)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default: stdout)");
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* krt = app.add_option("--kernel-rtol", kernel_rtol);
  auto* ftol = app.add_option("--fredholm-tol", fredholm_tol);
  auto* stol = app.add_option("--subordination-tol", subordination_tol);
  app.add_flag("--no-timestamp", no_timestamp, "omit timestamps from output headers");
  app.add_flag("--dump-config", dump_config, "print the canonical configuration and exit");

  json params = json::object();
  auto str_opt = [&params](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(flag, [&params, key](const std::string& v) { params[key] = v; }, help);
  };
  auto int_opt = [&params](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::int64_t>(flag, [&params, key](const std::int64_t& v) { params[key] = v; }, help);
  };
  auto num_opt = [&params](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<double>(flag, [&params, key](const double& v) { params[key] = v; }, help);
  };

  auto* density = app.add_subcommand("density", "limiting density on a grid");
  str_opt(density, "--source", "source", "source JSON file");
  str_opt(density, "--grid", "grid", "a:b:step");

  auto* edge = app.add_subcommand("edge", "limiting edge constants");
  str_opt(edge, "--source", "source", "source JSON file");
  str_opt(edge, "--side", "side", "right or left");
  str_opt(edge, "--bracket", "bracket", "a:b search bracket for z0");
  int_opt(edge, "--n", "n", "also report the finite-n critical point");

  auto* contour = app.add_subcommand("contour", "integration contours and their diagnostics");
  str_opt(contour, "--source", "source", "source JSON file");
  int_opt(contour, "--n", "n", "matrix size");

  auto* kernel = app.add_subcommand("kernel", "rescaled finite-n kernel on a grid");
  str_opt(kernel, "--source", "source", "source JSON file");
  int_opt(kernel, "--n", "n", "matrix size");
  str_opt(kernel, "--xi-grid", "xi_grid", "a:b:step in units of n^{-2/3}");
  str_opt(kernel, "--eta-grid", "eta_grid", "a:b:step (default: xi grid)");
  num_opt(kernel, "--window", "window", "admissible |xi| in units of n^{2/3}");
  str_opt(kernel, "--output", "output", "csv or json");

  auto* fred = app.add_subcommand("fredholm", "Airy gap probability det(1 - A)");
  str_opt(fred, "--interval", "interval", "a:b or a:inf");
  num_opt(fred, "--phi-scale", "phi_scale", "c in phi = c * indicator");
  double fred_tol = 0;
  auto* fred_tol_opt = fred->add_option("--tol", fred_tol, "same as --fredholm-tol");

  auto* tw = app.add_subcommand("tw-table", "F2(s) on a grid");
  str_opt(tw, "--s-grid", "s_grid", "a:b:step");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo edge statistics");
  int_opt(sim, "--n", "n", "matrix size");
  int_opt(sim, "--samples", "samples", "number of matrices");
  str_opt(sim, "--source", "source", "source JSON file or 'wigner'");
  str_opt(sim, "--intervals", "intervals", "comma-separated a:b list in rescaled units");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  str_opt(ver, "--suite", "suite", "quick or full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    RunConfig cfg;
    bool seed_given = seed_opt->count() > 0;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      std::stringstream ss;
      ss << f.rdbuf();
      cfg = parse_config(ss.str());
      if (cfg.command != command) throw ValidationError("config is for '" + cfg.command + "', not '" + command + "'");
      seed_given = seed_given || json::parse(ss.str()).value("global", json::object()).contains("seed");
    }
    cfg.command = command;
    for (const auto& [k, v] : params.items()) cfg.params[k] = v;
    if (seed_opt->count()) cfg.global.seed = seed;
    if (threads_opt->count()) cfg.global.threads = threads;
    if (out_opt->count()) cfg.global.out_dir = out_dir;
    auto tol = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
      return v;
    };
    if (krt->count()) cfg.global.tol.kernel_rtol = tol(kernel_rtol, "--kernel-rtol");
    if (ftol->count()) cfg.global.tol.fredholm_tol = tol(fredholm_tol, "--fredholm-tol");
    if (fred_tol_opt->count()) cfg.global.tol.fredholm_tol = tol(fred_tol, "--tol");
    if (stol->count()) cfg.global.tol.subordination_tol = tol(subordination_tol, "--subordination-tol");
    validate_params(cfg.command, cfg.params);

    if (dump_config) {
      std::cout << canonical_dump(cfg) << "\n";
      return 0;
    }
    Run r{cfg, !no_timestamp && command != "verify"};
    if (command == "density") return cmd_density(r);
    if (command == "edge") return cmd_edge(r);
    if (command == "contour") return cmd_contour(r);
    if (command == "kernel") return cmd_kernel(r);
    if (command == "fredholm") return cmd_fredholm(r);
    if (command == "tw-table") return cmd_tw_table(r);
    if (command == "simulate") return cmd_simulate(r);
    return cmd_verify(r, seed_given);
  } catch (const ConvergenceError& e) {
    std::cerr << "dgue: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "dgue: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "dgue: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "dgue: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dgue: " << e.what() << "\n";
    return 1;
  }
}
