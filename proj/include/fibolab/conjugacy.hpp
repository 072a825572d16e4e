#pragma once

// Conjugacy between two Fibonacci maps on finite pieces of their critical
// sets, with quasi-symmetry, multiplier and smoothness diagnostics.
//
// A point x_k = f^k(c) of the critical orbit is addressed by the Zeckendorf
// digits of k over the closest return times 1, 2, 3, 5, ... . Two maps with
// the same combinatorics realize the same codes, which gives the pairing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "renorm.hpp"
#include "unimodal.hpp"

namespace fibolab {

/// Zeckendorf digits of k over S_0 = 1, S_1 = 2, S_2 = 3, ...; least
/// significant first, padded to `width`.
inline std::string zeckendorf_code(std::size_t k, std::size_t width) {
  const auto S = fibonacci_times(width + 2);
  std::string code(width, '0');
  for (std::size_t j = width; j-- > 0;) {
    if (S[j] <= k) {
      code[j] = '1';
      k -= S[j];
    }
  }
  if (k != 0) throw Error(ErrorKind::usage, "code width too small");
  return code;
}

inline std::size_t zeckendorf_value(const std::string& code) {
  const auto S = fibonacci_times(code.size() + 2);
  std::size_t k = 0;
  for (std::size_t j = 0; j < code.size(); ++j)
    if (code[j] == '1') k += S[j];
  return k;
}

template <class T = Real>
struct CodedPoint {
  T point;
  std::string code;
  std::size_t time = 0;  // the orbit index k
};

/// Orbit points x_k, 0 <= k <= S_{n+2}, with codes of width n + 3.
template <class T>
std::vector<CodedPoint<T>> coded_critical_set(Hierarchy<T>& h, int n) {
  if (n < 1 || n > h.depth()) throw Error(ErrorKind::usage, "depth out of range");
  const auto S = fibonacci_times(static_cast<std::size_t>(n) + 3);
  const std::size_t K = S[static_cast<std::size_t>(n) + 2];
  h.ensure_orbit(K, n);
  std::vector<CodedPoint<T>> out;
  for (std::size_t k = 0; k <= K; ++k)
    out.push_back({h.orbit()[k], zeckendorf_code(k, static_cast<std::size_t>(n) + 3), k});
  return out;
}

/// Forward dynamics along the code: f^{S_j} for the digits j in descending order.
template <class T>
T decode(const UnimodalMap<T>& f, const std::string& code) {
  const auto S = fibonacci_times(code.size() + 2);
  T x = f.c;
  for (std::size_t j = code.size(); j-- > 0;)
    if (code[j] == '1') x = iterate(f, x, S[j]);
  return x;
}

/// Branch of the first return map to I^{j-1} containing x: 0 central, 1 side,
/// -1 neither.
template <class T>
int branch_of(const Hierarchy<T>& h, int j, const T& x) {
  const auto& L = h.level(j);
  if (L.I_central.contains_closed(x)) return 0;
  if (L.I_side.contains_closed(x)) return 1;
  return -1;
}

/// Orbit points carry their Zeckendorf code and time; endpoints of the
/// hierarchy intervals carry a label "I<j>/<branch>/<lo|hi>" and time 0.
template <class T = Real>
struct MatchedPair {
  std::string code;
  std::size_t time = 0;
  T x;
  T xt;
};

template <class T = Real>
struct ConjugacyReport {
  std::vector<MatchedPair<T>> pairs;  // sorted by x
  int depth = 0;
  int direction = 1;  // +1 order preserving, -1 order reversing
  double equivariance_residual = 0.0;  // relative to the level-n interval of each map
};

template <class T>
ConjugacyReport<T> match_critical_sets(Hierarchy<T>& a, Hierarchy<T>& b, int n) {
  using std::abs;
  // a map that is not Fibonacci to this depth fails to produce the level
  for (auto* h : {&a, &b}) {
    try {
      h->build(n);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::dynamics) throw;
      throw Error(ErrorKind::dynamics, "code mismatch at level " + std::to_string(h->depth() + 1));
    }
  }
  const auto A = coded_critical_set(a, n);
  const auto B = coded_critical_set(b, n);
  for (int j = 1; j <= n; ++j) {
    for (std::size_t k = 0; k < A.size(); ++k) {
      if (branch_of(a, j, A[k].point) != branch_of(b, j, B[k].point))
        throw Error(ErrorKind::dynamics, "code mismatch at level " + std::to_string(j));
    }
  }
  ConjugacyReport<T> rep;
  rep.depth = n;
  for (std::size_t k = 0; k < A.size(); ++k) rep.pairs.push_back({A[k].code, k, A[k].point, B[k].point});

  // return maps carry matched pairs to matched pairs
  const T resA = a.central(n).length(), resB = b.central(n).length();
  for (int j = 1; j <= n; ++j) {
    const auto& L = a.level(j);
    for (std::size_t k = 0; k < A.size(); ++k) {
      const int br = branch_of(a, j, A[k].point);
      if (br < 0) continue;
      const std::size_t p = br == 0 ? L.time_central : L.time_side;
      if (k + p >= A.size()) continue;
      const T ga = iterate(a.map(), A[k].point, p);
      const T gb = iterate(b.map(), B[k].point, p);
      const double r = std::max(to_double(abs(ga - A[k + p].point) / resA), to_double(abs(gb - B[k + p].point) / resB));
      rep.equivariance_residual = std::max(rep.equivariance_residual, r);
    }
  }

  // endpoints of the hierarchy intervals correspond as well; they carry the
  // small scales near c
  for (int j = 1; j <= n; ++j) {
    const auto& La = a.level(j);
    const auto& Lb = b.level(j);
    const std::string tag = "I" + std::to_string(j);
    rep.pairs.push_back({tag + "/0/lo", 0, La.I_central.lo, Lb.I_central.lo});
    rep.pairs.push_back({tag + "/0/hi", 0, La.I_central.hi, Lb.I_central.hi});
    rep.pairs.push_back({tag + "/1/lo", 0, La.I_side.lo, Lb.I_side.lo});
    rep.pairs.push_back({tag + "/1/hi", 0, La.I_side.hi, Lb.I_side.hi});
  }
  std::sort(rep.pairs.begin(), rep.pairs.end(), [](const auto& p, const auto& q) { return p.x < q.x; });
  rep.direction = rep.pairs.back().xt > rep.pairs.front().xt ? 1 : -1;
  for (std::size_t i = 1; i < rep.pairs.size(); ++i) {
    const bool up = rep.pairs[i].xt > rep.pairs[i - 1].xt;
    if (rep.pairs[i].x == rep.pairs[i - 1].x) continue;
    if (up != (rep.direction > 0)) throw Error(ErrorKind::dynamics, "pairing not monotone");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Quasi-symmetry scan

struct QsRow {
  double scale = 0.0;
  double max_ratio = 1.0;
  std::size_t triples = 0;
};

/// For matched triples l < x < r with r - x and x - l within a factor 4 of t, the
/// distortion (|h r - h x| / |h x - h l|) / (|r - x| / |x - l|), folded to be >= 1.
template <class T>
std::vector<QsRow> qs_ratio_scan(const ConjugacyReport<T>& rep, const std::vector<T>& scales) {
  using std::abs;
  if (rep.pairs.size() < 3) throw Error(ErrorKind::usage, "qs scan needs at least 3 matched pairs");
  std::vector<QsRow> out;
  const auto& P = rep.pairs;
  auto nearest = [&](const T& target) {
    auto it = std::lower_bound(P.begin(), P.end(), target, [](const auto& p, const T& v) { return p.x < v; });
    std::size_t i = static_cast<std::size_t>(it - P.begin());
    if (i == P.size()) return P.size() - 1;
    if (i > 0 && abs(P[i - 1].x - target) < abs(P[i].x - target)) return i - 1;
    return i;
  };
  for (const T& t : scales) {
    QsRow row;
    row.scale = to_double(t);
    for (std::size_t i = 0; i < P.size(); ++i) {
      const std::size_t l = nearest(P[i].x - t), r = nearest(P[i].x + t);
      if (!(l < i && i < r)) continue;
      const T dl = P[i].x - P[l].x, dr = P[r].x - P[i].x;
      if (dl < t / 4 || dl > 4 * t || dr < t / 4 || dr > 4 * t) continue;
      const T M = (abs(P[r].xt - P[i].xt) / abs(P[i].xt - P[l].xt)) / (dr / dl);
      const double m = to_double(M);
      row.max_ratio = std::max(row.max_ratio, std::max(m, 1.0 / m));
      ++row.triples;
    }
    if (row.triples > 0) out.push_back(row);
  }
  return out;
}

/// Scales |I^j| of the first map, j = 1..depth.
template <class T>
std::vector<T> hierarchy_scales(const Hierarchy<T>& h, int depth) {
  std::vector<T> s;
  for (int j = 1; j <= depth; ++j) s.push_back(h.central(j).length());
  return s;
}

// ---------------------------------------------------------------------------
// Multipliers

struct MultiplierRow {
  std::string code;
  double sigma = 0.0;
  double sigma_t = 0.0;
  double log_ratio = 0.0;  // log|sigma_t| / log|sigma|
  bool equal = false;      // bitwise equal at working precision
};

struct MultiplierTable {
  std::vector<MultiplierRow> rows;
  double tau = 0.0;
};

template <class T>
MultiplierTable multiplier_comparison(const Hierarchy<T>& a, const Hierarchy<T>& b, int n) {
  using std::abs;
  using std::log;
  MultiplierTable tab;
  auto push = [&](std::string code, const T& s, const T& st) {
    MultiplierRow r;
    r.code = std::move(code);
    r.sigma = to_double(s);
    r.sigma_t = to_double(st);
    r.log_ratio = to_double(log(abs(st)) / log(abs(s)));
    r.equal = s == st;
    tab.rows.push_back(r);
  };
  const T sa = a.map().derivative(a.map().alpha());
  const T sb = b.map().derivative(b.map().alpha());
  push("alpha", sa, sb);
  tab.tau = tab.rows.back().log_ratio;
  for (int j = 1; j <= n; ++j) {
    const auto ma = branch_multipliers(a, j);
    const auto mb = branch_multipliers(b, j);
    if (ma.sigma_side && mb.sigma_side) push("n=" + std::to_string(j) + "/side", *ma.sigma_side, *mb.sigma_side);
    if (ma.sigma_central && mb.sigma_central)
      push("n=" + std::to_string(j) + "/central", *ma.sigma_central, *mb.sigma_central);
  }
  return tab;
}

// ---------------------------------------------------------------------------
// Smoothness diagnostics

struct SmoothnessRow {
  int n = 0;
  double scale = 0.0;
  double value = 0.0;
};

struct SmoothnessReport {
  std::vector<SmoothnessRow> ratio_distortion;   // ||hJ|/|J| : |hI|/|I| - 1| against |I|
  std::vector<SmoothnessRow> multiplier_defect;  // ||I|/|L_k| : sigma_k - 1| against |I|, first map
  std::vector<SmoothnessRow> multiplier_defect_t;
  std::vector<SmoothnessRow> rho;                // max rho_n over matched points at eps_n
  std::vector<SmoothnessRow> rho_steps;          // max |rho_n - rho_{n+1}| at eps_n
  std::optional<double> slope_ratio_distortion;
  std::optional<double> slope_multiplier_defect;
  std::optional<double> slope_multiplier_defect_t;
  std::optional<double> slope_rho_steps;
};

namespace detail {

inline std::optional<double> loglog_slope(const std::vector<SmoothnessRow>& rows) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.value > 0 && r.scale > 0) {
      xs.push_back(std::log(r.scale));
      ys.push_back(std::log(r.value));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  return least_squares(xs, ys).slope;
}

}  // namespace detail

/// Midpoint of the longest gap of I^0 outside the two level-1 domains; it
/// lies off the critical set.
template <class T>
T off_critical_point(const Hierarchy<T>& h) {
  std::vector<RealInterval<T>> parts{h.level(1).I_central, h.level(1).I_side};
  std::sort(parts.begin(), parts.end(), [](const auto& p, const auto& q) { return p.lo < q.lo; });
  T best_len(-1), mid;
  T left = h.I0().lo;
  for (const auto& p : parts) {
    if (p.lo - left > best_len) {
      best_len = p.lo - left;
      mid = (p.lo + left) / 2;
    }
    left = p.hi;
  }
  if (h.I0().hi - left > best_len) mid = (h.I0().hi + left) / 2;
  return mid;
}

/// Worst |(|I| / |L_k|) / |sigma_k| - 1| over the longest first return domains
/// L_k of I = [a - e, a + e] around a point a off the critical set, with
/// sigma_k the multiplier of the return fixed point in L_k; e halves per row.
template <class T>
std::vector<SmoothnessRow> multiplier_defect_table(const Hierarchy<T>& h, int rows = 8, std::size_t domains = 6,
                                                   std::size_t samples = 200) {
  using std::abs;
  using std::ldexp;
  const auto& f = h.map();
  const T a = off_critical_point(h);
  T e = abs(a - h.level(1).I_central.lo);
  for (const auto& p : {h.level(1).I_central, h.level(1).I_side, h.I0()})
    e = std::min({e, abs(a - p.lo), abs(a - p.hi)});
  std::vector<SmoothnessRow> out;
  for (int k = 1; k <= rows; ++k) {
    const T eps = ldexp(e, -k);
    const RealInterval<T> I(a - eps, a + eps);
    const std::size_t cap = static_cast<std::size_t>(std::ldexp(200.0, k));
    auto doms = first_return_domains(f, I, samples, cap);
    if (doms.size() > domains) doms.resize(domains);
    SmoothnessRow row{k, to_double(I.length()), 0.0};
    bool any = false;
    for (const auto& d : doms) {
      const auto x = branch_fixed_point(f, d.time, d.interval.lo, d.interval.hi);
      if (!x) continue;
      const T sigma = iterate_derivative(f, *x, d.time);
      const T q = (I.length() / d.interval.length()) / abs(sigma) - 1;
      row.value = std::max(row.value, to_double(abs(q)));
      any = true;
    }
    if (any) out.push_back(row);
  }
  return out;
}

template <class T>
SmoothnessReport smoothness_diagnostic(const ConjugacyReport<T>& rep, const Hierarchy<T>& a,
                                       const Hierarchy<T>& b, std::size_t rho_levels = 0) {
  using std::abs;
  using std::ldexp;
  SmoothnessReport out;
  const int n = rep.depth;
  for (int j = 1; j < n; ++j) {
    const auto& I = a.central(j);
    const auto& hI = b.central(j);
    for (int side = 0; side < 2; ++side) {
      const auto& J = side == 0 ? a.central(j + 1) : a.level(j + 1).I_side;
      const auto& hJ = side == 0 ? b.central(j + 1) : b.level(j + 1).I_side;
      const T q = (hJ.length() / J.length()) / (hI.length() / I.length()) - 1;
      out.ratio_distortion.push_back({j, to_double(I.length()), to_double(abs(q))});
    }
  }
  out.multiplier_defect = multiplier_defect_table(a);
  out.multiplier_defect_t = multiplier_defect_table(b);
  // difference quotients of the pairing at eps_n = 2^-n |I^0|
  const auto& P = rep.pairs;
  const T base = a.I0().length();
  if (rho_levels == 0) rho_levels = static_cast<std::size_t>(std::max(2, 2 * n));
  std::vector<std::vector<std::optional<double>>> rho(rho_levels + 1, std::vector<std::optional<double>>(P.size()));
  for (std::size_t lvl = 1; lvl <= rho_levels; ++lvl) {
    const T eps = ldexp(base, -static_cast<int>(lvl));
    SmoothnessRow row{static_cast<int>(lvl), to_double(eps), 0.0};
    bool any = false;
    for (std::size_t i = 0; i < P.size(); ++i) {
      auto it = std::lower_bound(P.begin(), P.end(), P[i].x + eps, [](const auto& p, const T& v) { return p.x < v; });
      if (it == P.end()) continue;
      const T dx = it->x - P[i].x;
      if (dx > 2 * eps) continue;
      const double r = to_double((it->xt - P[i].xt) / dx);
      rho[lvl][i] = r;
      row.value = std::max(row.value, std::abs(r));
      any = true;
    }
    if (any) out.rho.push_back(row);
  }
  for (std::size_t lvl = 1; lvl < rho_levels; ++lvl) {
    SmoothnessRow row{static_cast<int>(lvl), to_double(ldexp(base, -static_cast<int>(lvl))), 0.0};
    bool any = false;
    for (std::size_t i = 0; i < P.size(); ++i) {
      if (rho[lvl][i] && rho[lvl + 1][i]) {
        row.value = std::max(row.value, std::abs(*rho[lvl][i] - *rho[lvl + 1][i]));
        any = true;
      }
    }
    if (any) out.rho_steps.push_back(row);
  }
  out.slope_ratio_distortion = detail::loglog_slope(out.ratio_distortion);
  out.slope_multiplier_defect = detail::loglog_slope(out.multiplier_defect);
  out.slope_multiplier_defect_t = detail::loglog_slope(out.multiplier_defect_t);
  out.slope_rho_steps = detail::loglog_slope(out.rho_steps);
  return out;
}

}  // namespace fibolab
