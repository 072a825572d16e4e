// Acceptance run: one PASS/FAIL line per criterion.
// usage: acceptance <fibolab executable> <scratch directory>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fibolab/complexext.hpp"
#include "fibolab/conjugacy.hpp"
#include "fibolab/io.hpp"
#include "fibolab/renorm.hpp"
#include "fibolab/thurston.hpp"
#include "fibolab/unimodal.hpp"

using namespace fibolab;
namespace fs = std::filesystem;

namespace tol {
constexpr double slope_lo = -0.36, slope_hi = -0.31;
constexpr double ratio3_lo = 0.42, ratio3_hi = 0.58;
constexpr double g0 = 0.05;
constexpr double thurston_gap = 1e-20;
constexpr std::size_t thurston_steps = 60;
constexpr double contraction = 1e-3;
constexpr int figure1_run = 3;
constexpr double ab_slope_lo = 0.8, ab_slope_hi = 1.2;
constexpr double oracle = 1e-10;
}  // namespace tol

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

// Shared deep hierarchy for criteria 2, 3 and 6.
struct Deep {
  Hierarchy<Real> h;
  static Hierarchy<Real> make() {
    PrecisionContext ctx;
    ctx.bits = 256;
    const auto par = locate_fibonacci_parameter(Family<Real>::quadratic(), 18, ctx);
    Hierarchy<Real> h(Family<Real>::quadratic().at(par.t));
    h.build(15);
    return h;
  }
  Deep() : h(make()) {}
};

Outcome combinatorics() {
  PrecisionScope p(256);
  PrecisionContext ctx;
  ctx.bits = 256;
  const std::size_t depth = 16;
  const auto par = locate_fibonacci_parameter(Family<Real>::quadratic(), depth, ctx);
  const auto f = Family<Real>::quadratic().at(par.t);
  // plain iteration; the certified part of the orbit is the kneading prefix
  Real x = f.c, best(10);
  std::vector<std::size_t> times;
  std::size_t escaped = 0;
  for (std::size_t k = 1; k <= 10000; ++k) {
    x = f(x);
    if (abs(x) > 4) {
      escaped = k;
      break;
    }
    if (abs(x - f.c) < best) {
      best = abs(x - f.c);
      times.push_back(k);
    }
  }
  const auto S = fibonacci_times(depth + 2);
  std::vector<std::size_t> resolved;
  for (auto t : times)
    if (t <= par.prefix) resolved.push_back(t);
  const std::vector<std::size_t> want(S.begin(), S.begin() + static_cast<long>(resolved.size()));
  const bool ok = resolved == want && resolved.size() >= depth;
  std::string d = std::to_string(resolved.size()) + " closest returns up to " + std::to_string(resolved.back()) +
                  " are Fibonacci";
  if (escaped) d += "; orbit leaves the interval at iterate " + std::to_string(escaped);
  return {ok, d};
}

Outcome scaling(const Hierarchy<Real>& h) {
  const auto tab = scaling_table(h, 8);
  std::optional<double> deepest;
  int at = 0;
  for (const auto& r : tab.rows)
    if (r.ratio3) {
      deepest = r.ratio3;
      at = r.n;
    }
  const double slope = tab.log2_fit.slope;
  const bool ok = tab.fit_from == 8 && tab.fit_to == 15 && slope >= tol::slope_lo && slope <= tol::slope_hi &&
                  deepest && *deepest >= tol::ratio3_lo && *deepest <= tol::ratio3_hi;
  return {ok, "slope " + num(slope) + " over n=8..15; mu_{n+3}/mu_n at n=" + std::to_string(at) + " is " +
                  (deepest ? num(*deepest) : "missing")};
}

Outcome limit(const Hierarchy<Real>& h) {
  const auto d8 = distance_to_limit(h, 8), d14 = distance_to_limit(h, 14);
  const bool ok = d14.sup_dev < d8.sup_dev && std::abs(d14.g0 + 1) < tol::g0;
  return {ok, "sup dev " + num(d8.sup_dev) + " (n=8) -> " + num(d14.sup_dev) + " (n=14); G_14(0) = " + num(d14.g0)};
}

Outcome thurston() {
  PrecisionScope p(128);
  const auto run = iterate_to_fixed_point(MarkedTriple<Real>{Real("-0.5")}, Real("1e-36"), 200);
  std::size_t hit = 0;
  for (std::size_t k = 0; k < run.gammas.size(); ++k)
    if (abs(run.gammas[k] + 1) < Real(tol::thurston_gap)) {
      hit = k;
      break;
    }
  const double rate = hit > 0 ? to_double(run.rates[hit - 1]) : NAN;
  const double target = 1 / (2 * golden<double>());
  const bool ok = hit > 0 && hit <= tol::thurston_steps && std::abs(rate - target) < tol::contraction;
  return {ok, "|gamma_k + 1| < 1e-20 at k=" + std::to_string(hit) + "; contraction " + num(rate) + " vs " + num(target)};
}

Outcome figure1(const fs::path& dir) {
  PrecisionScope p(256);
  PrecisionContext ctx;
  ctx.bits = 256;
  const int m = 5, N = 12;
  const auto par = locate_fibonacci_parameter(Family<Real>::quadratic(), N + 3, ctx);
  Hierarchy<Real> h(Family<Real>::quadratic().at(par.t));
  h.build(N);
  ComplexExtension<Real> F{h.map(), ExtensionMode::exact};
  const auto pieces = puzzle_hierarchy(F, h, m, N);
  std::vector<PuzzlePiece> resc;
  for (const auto& pc : pieces) resc.push_back(rescale_piece(pc, h));
  const std::size_t budget = 100000;
  const auto julia = julia_inverse_iteration({-1.0, 0.0}, budget, 1);
  const auto rep = figure1_report(resc, julia, budget);
  std::string d = "distances";
  for (const auto& r : rep.rows) d += " " + num(r.distance);
  d += "; longest decreasing run " + std::to_string(rep.longest_decreasing_run);
  SvgCanvas svg(-2.0, 2.0, -2.0, 2.0);
  svg.points(julia, "#888888", 0.004);
  svg.polygon(resc.back().boundary.points, "#c00000", 0.01);
  atomic_write(dir / "figure1_deepest.svg", svg.str());
  return {rep.longest_decreasing_run >= tol::figure1_run, d};
}

Outcome properties(const Hierarchy<Real>& h) {
  const auto& f = h.map();
  int failures = 0;
  for (const auto& L : h.levels()) {
    const auto& P = h.central(L.n - 1);
    const Real tolr = sqrt(working_epsilon<Real>()) * P.length();
    // (i) side branch onto the previous interval, central boundary to boundary
    const Real a = iterate(f, L.I_side.lo, L.time_side), b = iterate(f, L.I_side.hi, L.time_side);
    const Real lo = a < b ? a : b, hi = a < b ? b : a;
    const bool onto = abs(lo - P.lo) <= tolr && abs(hi - P.hi) <= tolr;
    const Real e = iterate(f, L.I_central.hi, L.time_central);
    const bool bdry = std::min(abs(e - P.lo), abs(e - P.hi)) <= tolr &&
                      abs(iterate(f, L.I_central.lo, L.time_central) - e) <= tolr;
    // (ii) high return
    const Real gc = h.orbit()[L.time_central];
    const Real ilo = gc < e ? gc : e, ihi = gc < e ? e : gc;
    const bool high = ilo <= L.I_central.lo && L.I_central.hi <= ihi;
    // (iii) g c in the side interval, g^2 c in the central one
    const bool c1 = L.I_side.contains(gc);
    const bool c2 = L.I_central.contains(iterate(f, gc, L.time_side));
    failures += !(onto && bdry && high && c1 && c2 && L.checks.all());
  }
  return {failures == 0 && h.depth() == 15,
          std::to_string(h.depth()) + " levels, " + std::to_string(failures) + " failures"};
}

Outcome conformality() {
  Polynomial<double> hp{{0.0, 1.0, 0.1}};
  auto hq = [](double t) { return t + 0.1 * t * t; };
  auto F = [&](Point z) { return ab_extend(hq, z); };
  std::vector<double> ly, lm;
  std::string d = "mean |mu|:";
  double agree = 0;
  for (double y : {1e-1, 1e-2, 1e-3}) {
    double sum = 0;
    for (int i = 0; i <= 20; ++i) {
      const Point z{-1.0 + 0.1 * i, y};
      sum += std::abs(beltrami_ratio(F, z, y / 20));
      agree = std::max(agree, std::abs(F(z) - ab_extend_polynomial(hp, z)));
    }
    ly.push_back(std::log(y));
    lm.push_back(std::log(sum / 21));
    d += " " + num(sum / 21);
  }
  const double slope = least_squares(ly, lm).slope;
  d += "; log-log slope " + num(slope) + "; quadrature vs series " + num(agree);
  return {slope >= tol::ab_slope_lo && slope <= tol::ab_slope_hi, d};
}

Outcome oracles() {
  PrecisionScope p(128);
  PrecisionContext ctx;
  const auto f = Family<Real>::quadratic().at(locate_fibonacci_parameter(Family<Real>::quadratic(), 13, ctx).t);
  double worst_qs = 0, worst_eq = 0;
  bool equal = true;
  std::size_t rows = 0;
  for (int kind = 0; kind < 2; ++kind) {
    Hierarchy<Real> a(f), b(kind == 0 ? f : f.affine_conjugate(Real(2), Real(0)));
    const auto rep = match_critical_sets(a, b, 10);
    for (const auto& r : qs_ratio_scan(rep, hierarchy_scales(a, 10))) {
      worst_qs = std::max(worst_qs, std::abs(r.max_ratio - 1));
      ++rows;
    }
    for (const auto& r : smoothness_diagnostic(rep, a, b, 8).ratio_distortion) worst_eq = std::max(worst_eq, r.value);
    for (const auto& r : multiplier_comparison(a, b, 10).rows) equal = equal && r.equal;
  }
  const bool ok = rows > 0 && worst_qs <= tol::oracle && worst_eq <= tol::oracle && equal;
  return {ok, "identity and affine pairs: max |qs - 1| " + num(worst_qs) + " over " + std::to_string(rows) +
                  " scales; ratio distortion " + num(worst_eq) + "; multipliers " + (equal ? "equal" : "differ")};
}

std::map<std::string, std::string> read_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".json" && ext != ".svg") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

Outcome determinism(const std::string& cli, const fs::path& dir) {
  atomic_write(dir / "conjugacy.json", R"({"family": "quadratic", "family_b": "perturbed", "epsilon_b": 0.01, "depth": 10})");
  const std::vector<std::pair<std::string, std::string>> runs{
      {"find-parameter", "--depth 12"},
      {"renorm", "--depth 15"},
      {"thurston", "--start -0.5"},
      {"figure1", "--depth 12 --start-level 5 --budget 100000 --seed 1"},
      {"conjugacy", "--config " + (dir / "conjugacy.json").string()},
  };
  std::string d;
  bool ok = true;
  for (const auto& [verb, args] : runs) {
    std::map<std::string, std::string> seen[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / (verb + "_" + std::to_string(k));
      fs::remove_all(out);
      const std::string cmd = "\"" + cli + "\" " + verb + " " + args + " --out \"" + out.string() + "\" > \"" +
                              (dir / (verb + ".log")).string() + "\" 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) {
        ok = false;
        d += verb + " exited " + std::to_string(rc) + "; ";
      }
      seen[k] = read_outputs(out);
    }
    const bool same = !seen[0].empty() && seen[0] == seen[1];
    ok = ok && same;
    d += verb + " " + std::to_string(seen[0].size()) + (same ? " files identical; " : " files DIFFER; ");
  }
  return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <fibolab executable> <scratch directory>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path dir = argv[2];
  fs::create_directories(dir);

  std::unique_ptr<Deep> deep;
  auto with_deep = [&](std::function<Outcome(const Hierarchy<Real>&)> fn) {
    return [&, fn] {
      PrecisionScope p(256);
      if (!deep) deep = std::make_unique<Deep>();
      return fn(deep->h);
    };
  };
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Fibonacci closest returns", combinatorics},
      {"scaling law of central intervals", with_deep(scaling)},
      {"rescaled returns approach z^2 - 1", with_deep(limit)},
      {"Thurston pull-back fixed point", thurston},
      {"puzzle pieces approach the Julia set", [&] { return figure1(dir); }},
      {"real return properties at every level", with_deep(properties)},
      {"asymptotic conformality of the extension", conformality},
      {"conjugacy oracles", oracles},
      {"deterministic CLI outputs", [&] { return determinism(cli, dir); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
