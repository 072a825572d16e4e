// fibolab: command line driver.
//
//   fibolab find-parameter | renorm | thurston | figure1 | conjugacy [options]
//
// Exit codes: 0 success, 1 dynamics or invariant failure, 2 usage, 3 I/O.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <fibolab/complexext.hpp>
#include <fibolab/conjugacy.hpp>
#include <fibolab/io.hpp>
#include <fibolab/numerics.hpp>
#include <fibolab/renorm.hpp>
#include <fibolab/thurston.hpp>
#include <fibolab/unimodal.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fibolab;

namespace {

struct RunConfig {
  std::string family = "quadratic";
  double epsilon = 0.01;
  int depth = 0;          // 0: command default
  unsigned precision = 0; // 0: chosen from depth
  int start_level = 5;
  std::size_t budget = 100000;
  std::string out;
  std::uint64_t seed = 1;
  // thurston
  double start = -0.5;
  double tol = 1e-30;
  // figure1
  double alpha = 0.5;
  std::size_t truncation = 8;
  // conjugacy, second map
  std::string family_b;
  double epsilon_b = 0.01;
  double affine_scale = 0.0;  // > 0: second map is the affine conjugate of the first
  double affine_shift = 0.0;

  void validate(const std::string& verb) const {
    auto bad = [](const std::string& m) { throw Error(ErrorKind::usage, m); };
    if (family != "quadratic" && family != "perturbed") bad("unknown family '" + family + "'");
    if (!family_b.empty() && family_b != "quadratic" && family_b != "perturbed")
      bad("unknown family '" + family_b + "'");
    if (depth < 0) bad("depth must be positive");
    if (precision != 0 && precision < 32) bad("precision must be at least 32 bits");
    if (start_level < 1) bad("start level must be positive");
    if (budget < 2) bad("budget must be at least 2");
    if (!(tol > 0)) bad("tolerance must be positive");
    if (!(alpha >= 0 && alpha < 1)) bad("alpha must lie in [0, 1)");
    if (truncation < 1) bad("truncation must be positive");
    if (affine_scale < 0) bad("affine scale must be positive");
    if (epsilon < 0 || epsilon_b < 0) bad("epsilon must be non-negative");
    if (verb == "find-parameter" && depth != 0 && depth < 3) bad("depth must be at least 3");
    if (verb == "figure1" && depth != 0 && depth < start_level + 2) bad("depth must be at least start level + 2");
  }

  json to_json() const {
    return json{{"family", family},         {"epsilon", epsilon},       {"depth", depth},
                {"precision", precision},   {"start_level", start_level}, {"budget", budget},
                {"seed", seed},             {"start", start},           {"tol", tol},
                {"alpha", alpha},           {"truncation", truncation}, {"family_b", family_b},
                {"epsilon_b", epsilon_b},   {"affine_scale", affine_scale}, {"affine_shift", affine_shift}};
  }
};

void load_config(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::usage, std::string("bad config: ") + e.what());
  }
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      if (k == "family") c.family = v.get<std::string>();
      else if (k == "epsilon") c.epsilon = v.get<double>();
      else if (k == "depth") c.depth = v.get<int>();
      else if (k == "precision") c.precision = v.get<unsigned>();
      else if (k == "start_level") c.start_level = v.get<int>();
      else if (k == "budget") c.budget = v.get<std::size_t>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "start") c.start = v.get<double>();
      else if (k == "tol") c.tol = v.get<double>();
      else if (k == "alpha") c.alpha = v.get<double>();
      else if (k == "truncation") c.truncation = v.get<std::size_t>();
      else if (k == "family_b") c.family_b = v.get<std::string>();
      else if (k == "epsilon_b") c.epsilon_b = v.get<double>();
      else if (k == "affine_scale") c.affine_scale = v.get<double>();
      else if (k == "affine_shift") c.affine_shift = v.get<double>();
      else throw Error(ErrorKind::usage, "unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::usage, std::string("bad config value: ") + e.what());
  }
}

/// 128 bits carry the hierarchy to level 10; about 16 more bits per level after that.
unsigned auto_precision(int levels) {
  if (levels <= 10) return 128;
  const unsigned bits = 16u * static_cast<unsigned>(levels + 1);
  return (bits + 63) / 64 * 64;
}

class Run {
 public:
  Run(std::string verb, const RunConfig& cfg) : verb_(std::move(verb)), cfg_(cfg) {
    dir_ = cfg.out.empty() ? fs::path("out") / verb_ : fs::path(cfg.out);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + dir_.string() + ": " + ec.message());
    t0_ = clock::now();
  }

  void write(const std::string& name, const std::string& content) {
    atomic_write(dir_ / name, content);
    outputs_.push_back(name);
  }

  void lap(const std::string& stage) {
    const auto now = clock::now();
    timings_.emplace_back(stage, std::chrono::duration<double>(now - t0_).count());
    t0_ = now;
  }

  void finish(const json& extra = json::object()) {
    json m{{"command", verb_}, {"config", cfg_.to_json()}, {"versions", library_versions()}, {"outputs", outputs_}};
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    atomic_write(dir_ / "manifest.json", m.dump(2) + "\n");
    std::ostringstream t;
    for (const auto& [stage, s] : timings_) t << stage << ' ' << fmt(s) << '\n';
    atomic_write(dir_ / "timings.txt", t.str());
    std::cout << "outputs in " << dir_.string() << '\n';
  }

 private:
  using clock = std::chrono::steady_clock;
  std::string verb_;
  RunConfig cfg_;
  fs::path dir_;
  clock::time_point t0_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

Family<Real> family_of(const std::string& name, double eps) { return Family<Real>::parse(name, Real(eps)); }

UnimodalMap<Real> fibonacci_map(const Family<Real>& fam, int levels, unsigned bits, Run& run) {
  PrecisionContext ctx;
  ctx.bits = bits;
  const auto p = locate_fibonacci_parameter(fam, static_cast<std::size_t>(levels) + 3, ctx);
  run.lap("locate");
  return fam.at(p.t);
}

// ---------------------------------------------------------------------------

int cmd_find_parameter(const RunConfig& cfg) {
  const int depth = cfg.depth ? cfg.depth : 12;
  const unsigned bits = cfg.precision ? cfg.precision : auto_precision(depth);
  PrecisionScope scope(bits);
  Run run("find-parameter", cfg);
  const auto fam = family_of(cfg.family, cfg.epsilon);
  PrecisionContext ctx;
  ctx.bits = bits;
  const auto p = locate_fibonacci_parameter(fam, static_cast<std::size_t>(depth), ctx);
  run.lap("locate");
  json cert = json::array();
  for (const auto& s : p.certificate)
    cert.push_back({{"edge", s.edge == 0 ? "lower" : "upper"}, {"step", s.step}, {"lo", fmt(s.lo)}, {"hi", fmt(s.hi)},
                    {"sign", s.sign}});
  json j{{"family", fam.name()},
         {"epsilon", cfg.epsilon},
         {"depth", depth},
         {"precision", bits},
         {"t", fmt(p.t)},
         {"lower_edge", fmt(p.lower_edge)},
         {"upper_edge", fmt(p.upper_edge)},
         {"width", to_double(p.width)},
         {"prefix", p.prefix},
         {"closest_return_times", p.closest_return_times},
         {"certificate", cert}};
  run.write("parameter.json", j.dump(2) + "\n");
  std::cout << "t = " << fmt(p.t) << '\n' << "bracket width = " << fmt(to_double(p.width)) << '\n';
  if (depth < 6)
    std::cerr << "warning: depth " << depth << " only pins the first " << p.prefix
              << " kneading symbols; the bracket is wide\n";
  run.finish();
  return 0;
}

int cmd_renorm(const RunConfig& cfg) {
  const int N = cfg.depth ? cfg.depth : 15;
  const unsigned bits = cfg.precision ? cfg.precision : auto_precision(N);
  PrecisionScope scope(bits);
  Run run("renorm", cfg);
  const auto fam = family_of(cfg.family, cfg.epsilon);
  const auto f = fibonacci_map(fam, N, bits, run);
  const auto h = build_hierarchy(f, N);
  run.lap("hierarchy");
  auto tab = scaling_table(h, std::min(8, std::max(1, N - 2)));
  attach_multipliers(tab, h);
  CsvWriter sc({"n", "mu", "ratio1", "ratio3", "time_central", "time_side", "sigma_side"});
  for (const auto& r : tab.rows)
    sc.row({std::to_string(r.n), fmt(r.mu), fmt_opt(r.ratio1), fmt_opt(r.ratio3), std::to_string(r.time_central),
            std::to_string(r.time_side), fmt_opt(r.sigma_side)});
  run.write("scaling.csv", sc.str());

  CsvWriter ch({"n", "side_onto", "boundary_to_boundary", "high_return", "gc_in_side", "g2c_in_central",
                "boundary_residual"});
  int failures = 0;
  for (const auto& L : h.levels()) {
    const auto& c = L.checks;
    failures += c.all() ? 0 : 1;
    auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    ch.row({std::to_string(L.n), b(c.side_onto), b(c.boundary_to_boundary), b(c.high_return), b(c.gc_in_side),
            b(c.g2c_in_central), fmt(c.boundary_residual)});
  }
  run.write("checks.csv", ch.str());

  CsvWriter lim({"n", "g0", "sup_dev"});
  for (int n = 1; n <= N; ++n) {
    const auto d = distance_to_limit(h, n);
    lim.row({std::to_string(n), fmt(d.g0), fmt(d.sup_dev)});
  }
  run.write("limit.csv", lim.str());
  run.lap("tables");

  std::cout << "levels " << N << ", log2 mu slope over n = " << tab.fit_from << ".." << tab.fit_to << ": "
            << fmt(tab.log2_fit.slope) << " (intercept " << fmt(tab.log2_fit.intercept) << ")\n"
            << "property checks failed at " << failures << " levels\n";
  run.finish({{"log2_slope", tab.log2_fit.slope}, {"log2_intercept", tab.log2_fit.intercept}});
  return failures ? 1 : 0;
}

int cmd_thurston(const RunConfig& cfg) {
  const unsigned bits = cfg.precision ? cfg.precision : 128;
  PrecisionScope scope(bits);
  Run run("thurston", cfg);
  const auto r = iterate_to_fixed_point(MarkedTriple<Real>{Real(cfg.start)}, Real(cfg.tol));
  run.lap("iterate");
  CsvWriter csv({"k", "gamma", "contraction_ratio"});
  for (std::size_t k = 1; k < r.gammas.size(); ++k) csv.row({std::to_string(k), fmt(r.gammas[k]), fmt(r.rates[k - 1])});
  run.write("thurston.csv", csv.str());
  std::cout << "converged to " << fmt(r.limit.gamma) << " in " << r.steps << " steps\n";
  run.finish();
  return 0;
}

int cmd_figure1(const RunConfig& cfg) {
  const int N = cfg.depth ? cfg.depth : 12;
  const int m = cfg.start_level;
  if (N < m + 2) throw Error(ErrorKind::usage, "depth must be at least start level + 2");
  const unsigned bits = cfg.precision ? cfg.precision : auto_precision(N);
  PrecisionScope scope(bits);
  Run run("figure1", cfg);
  const auto fam = family_of(cfg.family, cfg.epsilon);
  const auto f = fibonacci_map(fam, N, bits, run);
  const auto h = build_hierarchy(f, N);
  run.lap("hierarchy");
  const ComplexExtension<Real> F{f, ExtensionMode::exact};
  const auto pieces = puzzle_hierarchy(F, h, m, N);
  std::vector<PuzzlePiece> resc;
  for (const auto& p : pieces) resc.push_back(rescale_piece(p, h));
  run.lap("pieces");
  const auto julia = julia_inverse_iteration({-1.0, 0.0}, cfg.budget, cfg.seed);
  const auto rep = figure1_report(resc, julia, cfg.budget);
  run.lap("hausdorff");

  CsvWriter hd({"level", "distance", "diameter"});
  for (const auto& r : rep.rows) hd.row({std::to_string(r.level), fmt(r.distance), fmt(r.diameter)});
  run.write("hausdorff.csv", hd.str());
  CsvWriter pc({"re", "im", "level"});
  for (const auto& p : resc)
    for (const auto& z : p.boundary.points) pc.row({fmt(z.real()), fmt(z.imag()), std::to_string(p.level)});
  run.write("pieces.csv", pc.str());
  CsvWriter jc({"re", "im", "level"});
  for (const auto& z : julia) jc.row({fmt(z.real()), fmt(z.imag()), "0"});
  run.write("julia.csv", jc.str());

  const double a = golden<double>();
  SvgCanvas svg(-a - 0.2, a + 0.2, -a - 0.2, a + 0.2);
  svg.points(julia, "#1f4e9c", 0.006);
  svg.polygon(resc.back().boundary.points, "#c0392b", 0.012);
  svg.text({-a - 0.15, a + 0.05}, "P_" + std::to_string(N) + " and the Julia set of z^2-1");
  run.write("figure1.svg", svg.str());

  // disk pull-backs along the real line
  CsvWriter l1({"n", "alpha", "beta", "increment", "covering", "diameter_ratio"});
  for (int n = 1; n < N; ++n) {
    const auto r = disk_pullback_increment(F, h, n, cfg.alpha);
    l1.row({std::to_string(n), fmt(r.alpha), fmt(r.beta), fmt(r.beta - r.alpha), fmt(r.covering),
            fmt(r.diameter_ratio)});
  }
  run.write("disk_increments.csv", l1.str());
  run.lap("increments");

  const int ca_level = std::min(m, N - 1);
  CsvWriter ca({"level", "truncation", "domains", "constant"});
  for (std::size_t K : {cfg.truncation, 2 * cfg.truncation}) {
    const auto r = chord_arc_diagnostic(F, h, ca_level, K);
    ca.row({std::to_string(ca_level), std::to_string(K), std::to_string(r.domains), fmt(r.constant)});
  }
  run.write("chord_arc.csv", ca.str());
  run.lap("chord_arc");

  std::cout << "Hausdorff distance to the Julia set by level:\n";
  for (const auto& r : rep.rows) std::cout << "  " << r.level << "  " << fmt(r.distance) << '\n';
  std::cout << "longest strictly decreasing run: " << rep.longest_decreasing_run << " levels\n";
  run.finish({{"longest_decreasing_run", rep.longest_decreasing_run}});
  return 0;
}

int cmd_conjugacy(const RunConfig& cfg) {
  const int N = cfg.depth ? cfg.depth : 10;
  const unsigned bits = cfg.precision ? cfg.precision : auto_precision(N);
  PrecisionScope scope(bits);
  Run run("conjugacy", cfg);
  const auto famA = family_of(cfg.family, cfg.epsilon);
  const auto fA = fibonacci_map(famA, N, bits, run);
  UnimodalMap<Real> fB;
  if (cfg.affine_scale > 0) {
    fB = fA.affine_conjugate(Real(cfg.affine_scale), Real(cfg.affine_shift));
  } else {
    const auto famB = cfg.family_b.empty() ? famA : family_of(cfg.family_b, cfg.epsilon_b);
    fB = fibonacci_map(famB, N, bits, run);
  }
  auto hA = build_hierarchy(fA, N);
  auto hB = build_hierarchy(fB, N);
  run.lap("hierarchies");
  const auto rep = match_critical_sets(hA, hB, N);
  const auto qs = qs_ratio_scan(rep, hierarchy_scales(hA, N));
  const auto mult = multiplier_comparison(hA, hB, N);
  const auto sm = smoothness_diagnostic(rep, hA, hB);
  run.lap("diagnostics");

  json pairs = json::array();
  for (const auto& p : rep.pairs) pairs.push_back({{"code", p.code}, {"x", to_double(p.x)}, {"xt", to_double(p.xt)}});
  json qj = json::array();
  for (const auto& r : qs) qj.push_back({{"scale", r.scale}, {"max_ratio", r.max_ratio}, {"triples", r.triples}});
  json mj = json::array();
  for (const auto& r : mult.rows)
    mj.push_back({{"code", r.code}, {"sigma", r.sigma}, {"sigma_t", r.sigma_t}, {"log_ratio", r.log_ratio},
                  {"equal", r.equal}});
  auto rows = [](const std::vector<SmoothnessRow>& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back({{"n", r.n}, {"scale", r.scale}, {"value", r.value}});
    return a;
  };
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j{{"pairs", pairs},
         {"qs", qj},
         {"multipliers", mj},
         {"tau", mult.tau},
         {"equivariance_residual", rep.equivariance_residual},
         {"smoothness",
          {{"ratio_distortion", rows(sm.ratio_distortion)},
           {"multiplier_defect", rows(sm.multiplier_defect)},
           {"multiplier_defect_t", rows(sm.multiplier_defect_t)},
           {"rho", rows(sm.rho)},
           {"rho_steps", rows(sm.rho_steps)},
           {"slope_ratio_distortion", opt(sm.slope_ratio_distortion)},
           {"slope_multiplier_defect", opt(sm.slope_multiplier_defect)},
           {"slope_multiplier_defect_t", opt(sm.slope_multiplier_defect_t)},
           {"slope_rho_steps", opt(sm.slope_rho_steps)}}}};
  run.write("conjugacy.json", j.dump(2) + "\n");
  double worst = 1.0;
  for (const auto& r : qs) worst = std::max(worst, r.max_ratio);
  std::cout << rep.pairs.size() << " matched pairs, max qs ratio " << fmt(worst) << ", tau " << fmt(mult.tau) << '\n';
  run.finish();
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return 2;
    case ErrorKind::io: return 3;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for Fibonacci unimodal maps"};
  app.require_subcommand(1);
  RunConfig cli;
  std::string config_path;

  const std::vector<std::string> verbs{"find-parameter", "renorm", "thurston", "figure1", "conjugacy"};
  const std::map<std::string, std::string> help{
      {"find-parameter", "locate the Fibonacci parameter of a family"},
      {"renorm", "renormalization levels, scaling table and property checks"},
      {"thurston", "iterate the pull-back transformation on real triples"},
      {"figure1", "puzzle pieces against the Julia set of z^2-1"},
      {"conjugacy", "match two Fibonacci maps on their critical sets"}};
  std::vector<CLI::App*> subs;
  for (const auto& v : verbs) {
    auto* s = app.add_subcommand(v, help.at(v));
    subs.push_back(s);
    s->add_option("--config", config_path, "JSON config file; flags override it");
    s->add_option("--family", cli.family, "quadratic | perturbed");
    s->add_option("--epsilon", cli.epsilon, "perturbation size");
    s->add_option("--depth", cli.depth, "number of levels");
    s->add_option("--precision", cli.precision, "working precision in bits");
    s->add_option("--start-level", cli.start_level, "first puzzle level");
    s->add_option("--budget", cli.budget, "sample budget");
    s->add_option("--out", cli.out, "output directory");
    s->add_option("--seed", cli.seed, "random seed");
    s->add_option("--start", cli.start, "initial gamma");
    s->add_option("--tol", cli.tol, "convergence tolerance");
    s->add_option("--alpha", cli.alpha, "disk scaling for the pull-back increments");
    s->add_option("--truncation", cli.truncation, "extra return domains removed");
    s->add_option("--family-b", cli.family_b, "family of the second map");
    s->add_option("--epsilon-b", cli.epsilon_b, "perturbation of the second map");
    s->add_option("--affine-scale", cli.affine_scale, "second map = affine conjugate");
    s->add_option("--affine-shift", cli.affine_shift, "shift of the affine conjugacy");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  CLI::App* sub = nullptr;
  for (auto* s : subs)
    if (s->parsed()) sub = s;
  const std::string verb = sub->get_name();

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config(config_path, cfg);
    auto set = [&](const char* flag) { return sub->get_option(flag)->count() > 0; };
    if (set("--family")) cfg.family = cli.family;
    if (set("--epsilon")) cfg.epsilon = cli.epsilon;
    if (set("--depth")) cfg.depth = cli.depth;
    if (set("--precision")) cfg.precision = cli.precision;
    if (set("--start-level")) cfg.start_level = cli.start_level;
    if (set("--budget")) cfg.budget = cli.budget;
    if (set("--out")) cfg.out = cli.out;
    if (set("--seed")) cfg.seed = cli.seed;
    if (set("--start")) cfg.start = cli.start;
    if (set("--tol")) cfg.tol = cli.tol;
    if (set("--alpha")) cfg.alpha = cli.alpha;
    if (set("--truncation")) cfg.truncation = cli.truncation;
    if (set("--family-b")) cfg.family_b = cli.family_b;
    if (set("--epsilon-b")) cfg.epsilon_b = cli.epsilon_b;
    if (set("--affine-scale")) cfg.affine_scale = cli.affine_scale;
    if (set("--affine-shift")) cfg.affine_shift = cli.affine_shift;
    cfg.validate(verb);

    if (verb == "find-parameter") return cmd_find_parameter(cfg);
    if (verb == "renorm") return cmd_renorm(cfg);
    if (verb == "thurston") return cmd_thurston(cfg);
    if (verb == "figure1") return cmd_figure1(cfg);
    return cmd_conjugacy(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::usage) std::cerr << sub->help();
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
