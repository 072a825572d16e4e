#pragma once

// Generalized renormalization of a Fibonacci map: the nested central
// intervals I^n, the side intervals I^n_1, return times, scaling factors and
// the rescaled return maps G_n : T -> T.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "unimodal.hpp"

namespace fibolab {

/// Diagnostics of the three real properties at one level.
struct LevelChecks {
  bool side_onto = false;             // g_n maps I^n_1 onto I^{n-1}
  bool boundary_to_boundary = false;  // g_n(dI^n_0) lies in dI^{n-1}_0
  bool high_return = false;           // g_n(I^n_0) contains I^n_0
  bool gc_in_side = false;            // g_n(c) in I^n_1
  bool g2c_in_central = false;        // g_n^2(c) in I^n_0
  double boundary_residual = 0.0;     // relative to |I^{n-1}|

  bool all() const { return side_onto && boundary_to_boundary && high_return && gc_in_side && g2c_in_central; }
};

template <class T = Real>
struct RenormLevel {
  int n = 0;
  RealInterval<T> I_central;
  RealInterval<T> I_side;
  std::size_t time_central = 0;
  std::size_t time_side = 0;
  T mu;
  int orientation = 1;  // sign making 0 the minimum point of G_n
  LevelChecks checks;
};

inline std::string broken_at(int n) { return "combinatorics broken at level " + std::to_string(n); }

/// Inverse of y -> H(y) on y >= 0.
template <class T>
T invert_H(const Polynomial<T>& H, const T& w) {
  using std::abs;
  if (w < 0) throw Error(ErrorKind::numerical, "inverse branch outside the image");
  if (H.coef.size() == 2) return (w - H.coef[0]) / H.coef[1];
  T y = w / H.coef[1];
  const T eps = working_epsilon<T>();
  for (int it = 0; it < 200; ++it) {
    T step = (H(y) - w) / H.derivative(y);
    y -= step;
    if (abs(step) <= 4 * eps * abs(y)) return y;
  }
  throw Error(ErrorKind::numerical, "inverse branch did not converge");
}

/// Preimage of v under f on the side s of c (s = +1 right, -1 left).
template <class T>
T inverse_branch(const UnimodalMap<T>& f, const T& v, int s) {
  using std::sqrt;
  T r = sqrt(invert_H(f.H, v - f.t));
  return s > 0 ? f.c + r : f.c - r;
}

/// Component around orbit[k0] of the preimage of J under f^steps, where
/// orbit[k0 + steps] lies in J. Endpoints are propagated through the inverse
/// branches selected by the orbit; a step from c is the fold.
template <class T>
RealInterval<T> pull_back_interval(const UnimodalMap<T>& f, const std::vector<T>& orbit, RealInterval<T> J,
                                   std::size_t k0, std::size_t steps, int level) {
  T lo = J.lo, hi = J.hi;
  for (std::size_t k = k0 + steps; k-- > k0;) {
    const T& x = orbit[k];
    if (x == f.c) {
      if (!(lo < f.t && f.t < hi)) throw Error(ErrorKind::dynamics, broken_at(level));
      T w = inverse_branch(f, hi, 1) - f.c;
      lo = f.c - w;
      hi = f.c + w;
      continue;
    }
    if (!(lo > f.t)) throw Error(ErrorKind::dynamics, broken_at(level));
    const int s = x > f.c ? 1 : -1;
    T a = inverse_branch(f, lo, s);
    T b = inverse_branch(f, hi, s);
    if (s > 0) {
      lo = std::move(a);
      hi = std::move(b);
    } else {
      lo = std::move(b);
      hi = std::move(a);
    }
    if (!(lo < x && x < hi)) throw Error(ErrorKind::dynamics, broken_at(level));
  }
  return {lo, hi};
}

template <class T>
T iterate(const UnimodalMap<T>& f, T x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x = f(x);
  return x;
}

/// (f^n)'(x) by the chain rule.
template <class T>
T iterate_derivative(const UnimodalMap<T>& f, T x, std::size_t n) {
  T d(1);
  for (std::size_t i = 0; i < n; ++i) {
    d *= f.derivative(x);
    x = f(x);
  }
  return d;
}

/// The c-symmetric interval (alpha, 2c - alpha) bounded by the orientation
/// reversing fixed point.
template <class T>
RealInterval<T> build_I0(const UnimodalMap<T>& f) {
  using std::abs;
  T alpha;
  try {
    alpha = f.alpha();
  } catch (const Error&) {
    throw Error(ErrorKind::dynamics, "not in Fibonacci regime");
  }
  if (!(f.derivative(alpha) < -1)) throw Error(ErrorKind::dynamics, "not in Fibonacci regime");
  T mirror = 2 * f.c - alpha;
  // The boundary orbit is {alpha}: both endpoints land on the fixed point.
  const T tol = 64 * working_epsilon<T>() * (abs(alpha) + abs(f.c) + 1);
  if (abs(f(alpha) - alpha) > tol || abs(f(mirror) - alpha) > tol)
    throw Error(ErrorKind::dynamics, "not in Fibonacci regime");
  return {alpha, mirror};
}

/// The renormalization hierarchy of a map, built level by level along its
/// critical orbit.
template <class T = Real>
class Hierarchy {
 public:
  explicit Hierarchy(UnimodalMap<T> f) : f_(std::move(f)), I0_(build_I0(f_)) {
    using std::abs;
    orbit_.push_back(f_.c);
    radius_ = T(f_.escape_radius) * abs(f_.beta() - f_.c);
  }

  const UnimodalMap<T>& map() const { return f_; }
  const std::vector<T>& orbit() const { return orbit_; }
  const RealInterval<T>& I0() const { return I0_; }
  int depth() const { return static_cast<int>(levels_.size()); }
  const RenormLevel<T>& level(int n) const { return levels_.at(static_cast<std::size_t>(n - 1)); }
  const std::vector<RenormLevel<T>>& levels() const { return levels_; }

  /// Central interval of level n; level 0 is I^0.
  const RealInterval<T>& central(int n) const { return n == 0 ? I0_ : level(n).I_central; }

  void ensure_orbit(std::size_t N, int level) {
    using std::abs;
    while (orbit_.size() <= N) {
      T x = f_(orbit_.back());
      if (abs(x - f_.c) > radius_)
        throw Error(ErrorKind::precision, "insufficient precision at level " + std::to_string(level));
      orbit_.push_back(std::move(x));
    }
  }

  /// Builds the next level from the current deepest one.
  const RenormLevel<T>& add_level() {
    const int n = depth() + 1;
    const RealInterval<T> P = central(n - 1);
    const auto S = fibonacci_times(static_cast<std::size_t>(n) + 2);
    const std::size_t r = first_entry(P, 0, n);
    const std::size_t s = first_entry(P, r, n) - r;
    if (r != S[static_cast<std::size_t>(n) + 1] || s != S[static_cast<std::size_t>(n)])
      throw Error(ErrorKind::dynamics, broken_at(n));

    RenormLevel<T> L;
    L.n = n;
    L.time_central = r;
    L.time_side = s;
    L.I_central = pull_back_interval(f_, orbit_, P, 0, r, n);
    L.I_side = pull_back_interval(f_, orbit_, P, r, s, n);
    L.mu = L.I_central.length() / P.length();

    const T pe = iterate(f_, L.I_central.hi, r);
    const T& gc = orbit_[r];
    L.orientation = pe > gc ? 1 : -1;
    L.checks = check_level(L, P, pe);
    // at level 1 the two domains share an endpoint, so only an overlap beyond
    // rounding counts
    const T overlap = std::min(L.I_central.hi, L.I_side.hi) - std::max(L.I_central.lo, L.I_side.lo);
    using std::sqrt;
    const T slack = sqrt(working_epsilon<T>()) * P.length();
    const RealInterval<T> Pw(P.lo - slack, P.hi + slack);
    if (!L.checks.all() || !Pw.contains(L.I_central) || !Pw.contains(L.I_side) || overlap > slack ||
        !L.I_central.contains(f_.c) || !(L.mu > 0 && L.mu < 1))
      throw Error(ErrorKind::dynamics, broken_at(n));
    levels_.push_back(std::move(L));
    return levels_.back();
  }

  void build(int N) {
    while (depth() < N) add_level();
  }

  /// g_n on the central interval (f^{time_central}).
  T g_central(int n, const T& x) const { return iterate(f_, x, level(n).time_central); }
  /// g_n on the side interval (f^{time_side}).
  T g_side(int n, const T& x) const { return iterate(f_, x, level(n).time_side); }

 private:
  std::size_t first_entry(const RealInterval<T>& P, std::size_t from, int n) {
    const std::size_t cap = fibonacci_times(static_cast<std::size_t>(n) + 4).back() + from;
    for (std::size_t k = from + 1; k <= cap; ++k) {
      ensure_orbit(k, n);
      if (P.contains(orbit_[k])) return k;
    }
    throw Error(ErrorKind::dynamics, broken_at(n));
  }

  LevelChecks check_level(const RenormLevel<T>& L, const RealInterval<T>& P, const T& pe) const {
    using std::abs;
    using std::sqrt;
    LevelChecks ck;
    const T tol = sqrt(working_epsilon<T>()) * P.length();
    const T pe_lo = iterate(f_, L.I_central.lo, L.time_central);
    T res_c = std::min(abs(pe - P.lo), abs(pe - P.hi));
    res_c = std::max(res_c, abs(pe_lo - pe));
    const T a = iterate(f_, L.I_side.lo, L.time_side);
    const T b = iterate(f_, L.I_side.hi, L.time_side);
    T res_s = std::min(std::max(abs(a - P.lo), abs(b - P.hi)), std::max(abs(a - P.hi), abs(b - P.lo)));
    ck.boundary_to_boundary = res_c <= tol;
    ck.side_onto = res_s <= tol;
    ck.boundary_residual = to_double(std::max(res_c, res_s) / P.length());
    const T& gc = orbit_[L.time_central];
    const T img_lo = gc < pe ? gc : pe;
    const T img_hi = gc < pe ? pe : gc;
    ck.high_return = img_lo <= L.I_central.lo && L.I_central.hi <= img_hi;
    ck.gc_in_side = L.I_side.contains(gc);
    ck.g2c_in_central = L.I_central.contains(orbit_[L.time_central + L.time_side]);
    return ck;
  }

  UnimodalMap<T> f_;
  RealInterval<T> I0_;
  std::vector<T> orbit_;
  std::vector<RenormLevel<T>> levels_;
  T radius_;
};

/// Builds levels 1..N. The first level that fails raises an error naming it.
template <class T>
Hierarchy<T> build_hierarchy(const UnimodalMap<T>& f, int N) {
  Hierarchy<T> h(f);
  h.build(N);
  return h;
}

template <class T>
RenormLevel<T> first_return_level(Hierarchy<T>& h) {
  return h.add_level();
}

// ---------------------------------------------------------------------------
// Scaling factors

struct ScalingRow {
  int n = 0;
  double mu = 0.0;
  std::optional<double> ratio1;  // mu_n / mu_{n-1}
  std::optional<double> ratio3;  // mu_{n+3} / mu_n
  std::size_t time_central = 0;
  std::size_t time_side = 0;
  std::optional<double> sigma_side;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  int fit_from = 1;
  int fit_to = 1;
  LinearFit log2_fit;  // log2 mu_n against n; the intercept gives log2 of the constant
};

template <class T>
ScalingTable scaling_table(const Hierarchy<T>& h, int fit_from = 8) {
  ScalingTable tab;
  const int N = h.depth();
  for (int n = 1; n <= N; ++n) {
    ScalingRow row;
    row.n = n;
    row.mu = to_double(h.level(n).mu);
    if (n > 1) row.ratio1 = to_double(h.level(n).mu / h.level(n - 1).mu);
    if (n + 3 <= N) row.ratio3 = to_double(h.level(n + 3).mu / h.level(n).mu);
    row.time_central = h.level(n).time_central;
    row.time_side = h.level(n).time_side;
    tab.rows.push_back(row);
  }
  tab.fit_from = std::min(fit_from, std::max(1, N - 1));
  tab.fit_to = N;
  std::vector<double> xs, ys;
  for (int n = tab.fit_from; n <= N; ++n) {
    xs.push_back(n);
    ys.push_back(std::log2(tab.rows[static_cast<std::size_t>(n - 1)].mu));
  }
  if (xs.size() >= 2) tab.log2_fit = least_squares(xs, ys);
  return tab;
}

// ---------------------------------------------------------------------------
// Rescaled return maps

/// Affine map of a c-symmetric interval onto T = [-a, a].
template <class T>
struct Rescaling {
  T center;
  T half;
  int orientation = 1;

  T to_T(const T& x) const { return orientation * golden<T>() * (x - center) / half; }
  T from_T(const T& x) const { return center + orientation * x * half / golden<T>(); }
};

template <class T>
Rescaling<T> rescaling_of(const RealInterval<T>& I, int orientation = 1) {
  return {I.midpoint(), I.length() / 2, orientation};
}

/// G_n(x) = A_{n-1}(g_n(A_n^{-1}(x))) with the orientation of A_{n-1} chosen
/// so that 0 is the minimum point of G_n.
template <class T>
std::vector<T> rescaled_map_values(const Hierarchy<T>& h, int n, const std::vector<T>& samples) {
  using std::abs;
  const T a = golden<T>();
  const auto& L = h.level(n);
  const auto An = rescaling_of(L.I_central);
  const auto Aprev = rescaling_of(h.central(n - 1), L.orientation);
  std::vector<T> out;
  out.reserve(samples.size());
  for (const auto& x : samples) {
    if (abs(x) > a * (1 + 1e-12)) throw Error(ErrorKind::usage, "sample outside T");
    out.push_back(Aprev.to_T(h.g_central(n, An.from_T(x))));
  }
  return out;
}

struct PolynomialDistance {
  int n = 0;
  double g0 = 0.0;       // G_n(0)
  double sup_dev = 0.0;  // sup over the samples of |G_n(x) - (x^2 - 1)|
};

/// Distance of G_n from z^2 - 1 on `samples` equispaced points of T.
template <class T>
PolynomialDistance distance_to_limit(const Hierarchy<T>& h, int n, std::size_t samples = 101) {
  using std::abs;
  if (samples < 2) throw Error(ErrorKind::usage, "need at least 2 samples");
  const T a = golden<T>();
  std::vector<T> xs;
  for (std::size_t i = 0; i < samples; ++i)
    xs.push_back(-a + 2 * a * T(static_cast<long>(i)) / T(static_cast<long>(samples - 1)));
  const auto ys = rescaled_map_values(h, n, xs);
  PolynomialDistance d;
  d.n = n;
  d.g0 = to_double(rescaled_map_values(h, n, std::vector<T>{T(0)})[0]);
  for (std::size_t i = 0; i < xs.size(); ++i)
    d.sup_dev = std::max(d.sup_dev, to_double(abs(ys[i] - (xs[i] * xs[i] - 1))));
  return d;
}

// ---------------------------------------------------------------------------
// Multipliers of the fixed points of the branches of g_n

template <class T = Real>
struct BranchMultipliers {
  std::optional<T> sigma_central;
  std::optional<T> sigma_side;
  std::optional<T> x_central;
  std::optional<T> x_side;
};

/// Fixed point of f^p in (lo, hi) by Newton's method safeguarded with
/// bisection; returns nothing when F(x) = f^p(x) - x has no sign change.
template <class T>
std::optional<T> branch_fixed_point(const UnimodalMap<T>& f, std::size_t p, T lo, T hi) {
  using std::abs;
  using std::sqrt;
  T Flo = iterate(f, lo, p) - lo;
  T Fhi = iterate(f, hi, p) - hi;
  if (Flo == 0) return lo;
  if (Fhi == 0) return hi;
  if ((Flo < 0) == (Fhi < 0)) return std::nullopt;
  const T tol = sqrt(working_epsilon<T>()) * (hi - lo);
  T x = (lo + hi) / 2;
  for (int it = 0; it < 100; ++it) {
    T y = x, d(1);
    for (std::size_t i = 0; i < p; ++i) {
      d *= f.derivative(y);
      y = f(y);
    }
    T F = y - x;
    if (F == 0) return x;
    if ((F < 0) == (Flo < 0)) lo = x;
    else hi = x;
    T dF = d - 1;
    T next = dF != 0 ? x - F / dF : (lo + hi) / 2;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (abs(next - x) <= tol || hi - lo <= tol) return next;
    x = std::move(next);
  }
  throw Error(ErrorKind::numerical, "multiplier not found");
}

template <class T>
BranchMultipliers<T> branch_multipliers(const Hierarchy<T>& h, int n) {
  const auto& f = h.map();
  const auto& L = h.level(n);
  BranchMultipliers<T> out;
  if (auto xs = branch_fixed_point(f, L.time_side, L.I_side.lo, L.I_side.hi)) {
    out.x_side = *xs;
    out.sigma_side = iterate_derivative(f, *xs, L.time_side);
  }
  // The central branch has one fixed point on each side of c; the reported
  // one is where g_n reverses orientation.
  for (int side : {-1, 1}) {
    T lo = side < 0 ? L.I_central.lo : f.c;
    T hi = side < 0 ? f.c : L.I_central.hi;
    auto xc = branch_fixed_point(f, L.time_central, lo, hi);
    if (!xc) continue;
    T sigma = iterate_derivative(f, *xc, L.time_central);
    if (sigma < 0) {
      out.x_central = *xc;
      out.sigma_central = sigma;
    }
  }
  return out;
}

/// Fills the sigma_side column of a scaling table.
template <class T>
ScalingTable& attach_multipliers(ScalingTable& tab, const Hierarchy<T>& h) {
  for (auto& row : tab.rows)
    if (auto m = branch_multipliers(h, row.n).sigma_side) row.sigma_side = to_double(*m);
  return tab;
}

// ---------------------------------------------------------------------------
// First return domains

template <class T = Real>
struct ReturnDomain {
  RealInterval<T> interval;
  std::size_t time = 0;
  bool critical = false;  // meets the critical set
  T seed;                 // orbit start inside the interval
};

/// Components of the first return map to J found from a grid of `samples`
/// points; each is the pull-back of J along the orbit of a grid point.
/// Samples inside `known` domains are skipped. Longest first.
template <class T>
std::vector<ReturnDomain<T>> first_return_domains(const UnimodalMap<T>& f, const RealInterval<T>& J,
                                                  std::size_t samples, std::size_t max_time,
                                                  const std::vector<ReturnDomain<T>>& known = {}) {
  std::vector<ReturnDomain<T>> found;
  auto covered = [&](const T& x) {
    for (const auto& d : known)
      if (d.interval.contains_closed(x)) return true;
    for (const auto& d : found)
      if (d.interval.contains_closed(x)) return true;
    return false;
  };
  for (std::size_t i = 1; i < samples; ++i) {
    const T x = J.lo + J.length() * T(static_cast<long>(i)) / T(static_cast<long>(samples));
    if (covered(x)) continue;
    std::vector<T> orb{x};
    std::size_t k = 0;
    for (k = 1; k <= max_time; ++k) {
      orb.push_back(f(orb.back()));
      if (J.contains(orb.back())) break;
    }
    if (k > max_time) continue;
    try {
      // an orbit through c pulls back through the fold
      const bool crit = std::find(orb.begin(), orb.begin() + static_cast<long>(k), f.c) != orb.begin() + static_cast<long>(k);
      found.push_back({pull_back_interval(f, orb, J, 0, k, 0), k, crit, x});
    } catch (const Error&) {
      continue;
    }
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.interval.length() > b.interval.length(); });
  return found;
}

}  // namespace fibolab
