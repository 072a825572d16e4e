#pragma once

// Complex extensions of quasi-quadratic maps and the puzzle pieces obtained
// by pulling disks back along the real dynamics.
//
// Pieces are carried in relative coordinates: a point near the orbit point
// z_k is stored as the offset d = z - z_k in double precision while z_k itself
// is known to working precision. Inverse branches are written so that no
// step subtracts nearly equal numbers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "numerics.hpp"
#include "renorm.hpp"
#include "unimodal.hpp"

namespace fibolab {

// ---------------------------------------------------------------------------
// Ahlfors-Beurling extension

/// h^(x + iy) = (1/2y) int_{x-y}^{x+y} h + (i/y) (int_x^{x+y} h - int_{x-y}^x h)
template <class F>
Point ab_extend(F&& h, Point z, double tol = 1e-12) {
  using boost::math::quadrature::gauss_kronrod;
  const double x = z.real();
  const double y = std::abs(z.imag());
  if (y == 0.0) return {h(x), 0.0};
  auto integral = [&](double a, double b) {
    double err = 0.0;
    double L1 = 0.0;
    const double v = gauss_kronrod<double, 31>::integrate(h, a, b, 15, tol, &err, &L1);
    if (err > tol * std::max(1.0, std::abs(v)) * 10)
      throw Error(ErrorKind::numerical, "quadrature did not converge (achieved " + std::to_string(err) + ")");
    return v;
  };
  const double right = integral(x, x + y);
  const double left = integral(x - y, x);
  Point w{(right + left) / (2 * y), (right - left) / y};
  return z.imag() < 0 ? std::conj(w) : w;
}

/// Exact form of the extension for a polynomial h:
/// h^(x + iy) = sum_j h^(j)(x) y^j / (j+1)! * (1 if j even, 2i if j odd).
inline Point ab_extend_polynomial(const Polynomial<double>& h, Point z) {
  const double x = z.real();
  const double y = std::abs(z.imag());
  const auto b = h.taylor_shift(x);  // b_j = h^(j)(x)/j!
  Point acc{};
  double ypow = 1.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double coef = b[j] * ypow / static_cast<double>(j + 1);
    acc += (j % 2 == 0) ? Point{coef, 0.0} : Point{0.0, 2.0 * coef};
    ypow *= y;
  }
  return z.imag() < 0 ? std::conj(acc) : acc;
}

/// Wirtinger ratio dbar F / d F by central differences with step delta.
template <class F>
Point beltrami_ratio(F&& fn, Point z, double delta) {
  const Point fx = (fn(z + Point{delta, 0}) - fn(z - Point{delta, 0})) / (2 * delta);
  const Point fy = (fn(z + Point{0, delta}) - fn(z - Point{0, delta})) / (2 * delta);
  const Point I{0, 1};
  const Point dz = 0.5 * (fx - I * fy);
  const Point dzbar = 0.5 * (fx + I * fy);
  return dzbar / dz;
}

// ---------------------------------------------------------------------------
// Theta domains

struct ThetaDomain {
  RealInterval<double> base;
  double theta = std::numbers::pi / 2;
};

/// Upper boundary arc of D_theta(I) from the right end of I to the left end.
inline std::vector<Point> theta_upper_arc(const ThetaDomain& d, std::size_t npts) {
  if (npts < 2) throw Error(ErrorKind::usage, "arc needs at least 2 points");
  if (!(d.theta > 0 && d.theta <= std::numbers::pi / 2 + 1e-15))
    throw Error(ErrorKind::usage, "theta must lie in (0, pi/2]");
  const double m = d.base.midpoint();
  const double r = d.base.length() / 2;
  const double k = r * std::cos(d.theta) / std::sin(d.theta);
  const double R = r / std::sin(d.theta);
  std::vector<Point> out;
  const double phi0 = std::numbers::pi / 2 - d.theta;
  for (std::size_t i = 0; i < npts; ++i) {
    const double phi = phi0 + 2 * d.theta * static_cast<double>(i) / static_cast<double>(npts - 1);
    out.push_back({m + R * std::cos(phi), -k + R * std::sin(phi)});
  }
  out.front() = {d.base.hi, 0.0};
  out.back() = {d.base.lo, 0.0};
  return out;
}

/// Closed polyline from an upper arc (right to left, real endpoints): the arc
/// followed by its mirror image below the axis.
inline Polyline close_symmetric(const std::vector<Point>& arc) {
  std::vector<Point> pts = arc;
  for (std::size_t i = arc.size() - 1; i-- > 1;) pts.push_back(std::conj(arc[i]));
  return Polyline::from_points(std::move(pts), true);
}

inline Polyline theta_boundary(const ThetaDomain& d, std::size_t npts) {
  if (npts < 8) throw Error(ErrorKind::usage, "theta_boundary needs npts >= 8");
  return close_symmetric(theta_upper_arc(d, npts / 2 + 1));
}

// ---------------------------------------------------------------------------
// Complex extension and pull-back paths

enum class ExtensionMode { exact, ahlfors_beurling };

/// sum_{j>=1} b_j eta^j
inline Point series_rel(const std::vector<double>& b, Point eta) {
  Point acc{};
  for (std::size_t j = b.size(); j-- > 1;) acc = (acc + b[j]) * eta;
  return acc;
}

inline Point series_rel_derivative(const std::vector<double>& b, Point eta) {
  Point acc{};
  for (std::size_t j = b.size(); j-- > 1;) acc = acc * eta + b[j] * static_cast<double>(j);
  return acc;
}

/// Ahlfors-Beurling extension of H in coordinates relative to Y:
/// H^(Y + eta) - H(Y), given the Taylor coefficients b of H at Y.
inline Point ab_series_rel(const std::vector<double>& b, Point eta) {
  const double xi = eta.real();
  const double y = std::abs(eta.imag());
  // derivatives D_j = H^(j)(Y + xi) / j!
  std::vector<double> D(b.size(), 0.0);
  for (std::size_t j = 0; j < b.size(); ++j) {
    double binom = 1.0, xp = 1.0, acc = 0.0;
    for (std::size_t i = j; i < b.size(); ++i) {
      if (i > j) {
        binom = binom * static_cast<double>(i) / static_cast<double>(i - j);
        xp *= xi;
      }
      acc += b[i] * binom * xp;
    }
    D[j] = acc;
  }
  Point out{series_rel(b, Point{xi, 0.0}).real(), 0.0};
  double ypow = y;
  for (std::size_t j = 1; j < D.size(); ++j) {
    const double coef = D[j] * ypow / static_cast<double>(j + 1);
    out += (j % 2 == 0) ? Point{coef, 0.0} : Point{0.0, 2.0 * coef};
    ypow *= y;
  }
  return eta.imag() < 0 ? std::conj(out) : out;
}

/// One inverse step of f near the orbit point z_k.
struct PullbackStep {
  double Y = 0.0;      // (z_k - c)^2
  double absu = 0.0;   // |z_k - c|
  int sign = 1;        // side of c
  bool fold = false;   // z_k = c
  std::vector<double> b;  // Taylor coefficients of H at Y
};

class CriticalCollision : public Error {
 public:
  CriticalCollision() : Error(ErrorKind::numerical, "critical collision") {}
};

struct PullbackPath {
  std::vector<PullbackStep> steps;  // steps[k] maps offsets at z_{k+1} to offsets at z_k
  ExtensionMode mode = ExtensionMode::exact;

  std::size_t size() const { return steps.size(); }

  Point h_rel(const PullbackStep& s, Point eta) const {
    return mode == ExtensionMode::exact ? series_rel(s.b, eta) : ab_series_rel(s.b, eta);
  }

  /// Solves h_rel(eta) = d.
  Point h_rel_inverse(const PullbackStep& s, Point d) const {
    Point eta = d / s.b[1];
    if (s.b.size() == 2) return eta;
    for (int it = 0; it < 60; ++it) {
      Point step;
      if (mode == ExtensionMode::exact) {
        step = (series_rel(s.b, eta) - d) / series_rel_derivative(s.b, eta);
      } else {
        // Newton on R^2 with a finite-difference Jacobian
        const double hstep = 1e-7 * (std::abs(eta) + 1e-300);
        const Point F = ab_series_rel(s.b, eta) - d;
        const Point Fx = (ab_series_rel(s.b, eta + Point{hstep, 0}) - ab_series_rel(s.b, eta - Point{hstep, 0})) / (2 * hstep);
        const Point Fy = (ab_series_rel(s.b, eta + Point{0, hstep}) - ab_series_rel(s.b, eta - Point{0, hstep})) / (2 * hstep);
        const double det = Fx.real() * Fy.imag() - Fy.real() * Fx.imag();
        step = {(F.real() * Fy.imag() - Fy.real() * F.imag()) / det, (Fx.real() * F.imag() - F.real() * Fx.imag()) / det};
      }
      eta -= step;
      if (std::abs(step) <= 1e-15 * std::abs(eta)) break;
    }
    return eta;
  }

  /// Offset at z_k of the preimage of the point with offset d at z_{k+1}.
  /// For a fold step the principal square root is returned.
  Point inverse(std::size_t k, Point d) const {
    const auto& s = steps[k];
    Point eta = h_rel_inverse(s, d);
    if (s.fold) {
      if (eta.imag() <= 0 && eta.real() < 0) eta = {eta.real(), 0.0};
      if (std::abs(eta) == 0.0 && std::abs(d) != 0.0) throw CriticalCollision();
      return std::sqrt(eta);
    }
    Point w = Point{s.Y, 0.0} + eta;
    if (std::abs(w) <= 1e-14 * s.Y) throw CriticalCollision();
    if (w.imag() == 0.0 && w.real() < 0) throw CriticalCollision();
    const Point r = eta / (std::sqrt(w) + s.absu);
    return s.sign > 0 ? r : -r;
  }

  /// Offset at z_{k+1} of the image of the point with offset d at z_k.
  Point forward(std::size_t k, Point d) const {
    const auto& s = steps[k];
    const Point eta = s.fold ? d * d : 2.0 * (s.sign * s.absu) * d + d * d;
    return h_rel(s, eta);
  }
};

template <class T = Real>
struct ComplexExtension {
  UnimodalMap<T> f;
  ExtensionMode mode = ExtensionMode::exact;

  /// f^(z) = t + H^((z - c)^2) in absolute double coordinates.
  Point evaluate(Point z) const {
    const Point u = z - to_double(f.c);
    const Point y = u * u;
    Polynomial<double> Hd;
    for (const auto& v : f.H.coef) Hd.coef.push_back(to_double(v));
    Point hv;
    if (mode == ExtensionMode::exact) {
      hv = Hd.eval(y);
    } else {
      hv = ab_extend_polynomial(Hd, y);
    }
    return to_double(f.t) + hv;
  }

  /// Inverse steps along orbit[k0], ..., orbit[k0 + steps].
  PullbackPath path(const std::vector<T>& orbit, std::size_t k0, std::size_t steps) const {
    PullbackPath p;
    p.mode = mode;
    for (std::size_t k = k0; k < k0 + steps; ++k) {
      PullbackStep s;
      const T u = orbit[k] - f.c;
      const T Y = u * u;
      s.Y = to_double(Y);
      s.absu = to_double(u < 0 ? T(-u) : u);
      s.sign = u > 0 ? 1 : -1;
      s.fold = u == 0;
      for (const auto& v : f.H.taylor_shift(Y)) s.b.push_back(to_double(v));
      p.steps.push_back(std::move(s));
    }
    return p;
  }
};

// ---------------------------------------------------------------------------
// Puzzle pieces

struct PuzzlePiece {
  Polyline boundary;               // closed, conjugation symmetric, offsets from anchor
  RealInterval<double> base;       // real trace, offsets from anchor
  int level = 0;
  double anchor = 0.0;
  std::vector<Point> upper_arc;    // right end of base to left end through Im > 0

  static PuzzlePiece from_arc(std::vector<Point> arc, int level, double anchor) {
    PuzzlePiece p;
    p.base = {arc.back().real(), arc.front().real()};
    p.level = level;
    p.anchor = anchor;
    p.boundary = close_symmetric(arc);
    p.upper_arc = std::move(arc);
    return p;
  }

  double diameter() const {
    double d = 0.0;
    for (const auto& a : boundary.points)
      for (const auto& b : upper_arc) d = std::max(d, std::abs(a - b));
    return d;
  }

  double asymmetry() const {
    double worst = 0.0;
    for (const auto& z : boundary.points) worst = std::max(worst, distance_to_polyline(boundary, std::conj(z)));
    return worst;
  }
};

struct PullbackOptions {
  double max_edge_rel = 0.02;     // edge bound relative to the base length at each step
  std::size_t arc_points = 400;   // arc resolution after each level
  std::size_t max_points = 200000;
};

inline std::vector<Point> resample_arc(const std::vector<Point>& arc, std::size_t count) {
  Polyline open = Polyline::from_points(arc, false);
  auto pts = resample_by_arclength(open, count);
  pts.front() = arc.front();
  pts.back() = arc.back();
  return pts;
}

namespace detail {

inline Point clamp_upper(Point z) { return z.imag() < 0 ? Point{z.real(), 0.0} : z; }

/// Applies one inverse step to an upper arc, refining the source arc where
/// the image edges exceed the bound.
inline std::vector<Point> pull_arc_step(const PullbackPath& path, std::size_t k, std::vector<Point> src,
                                        const PullbackOptions& opt) {
  const auto& s = path.steps[k];
  auto image_of = [&](Point d) {
    Point z;
    int tries = 0;
    for (;;) {
      try {
        z = path.inverse(k, d);
        break;
      } catch (const CriticalCollision&) {
        if (++tries > 5) throw;
        d *= Point{1.0, 1e-9 * tries};
      }
    }
    return z;
  };
  for (;;) {
    std::vector<Point> img(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) img[i] = image_of(src[i]);
    if (s.fold) {
      for (auto& z : img) z = clamp_upper(z);
    } else if (s.sign < 0) {
      for (auto& z : img) z = std::conj(z);
    } else {
      for (auto& z : img) z = clamp_upper(z);
    }
    img.front() = {img.front().real(), 0.0};
    if (!s.fold) img.back() = {img.back().real(), 0.0};
    const double width = s.fold ? 2 * std::abs(img.front()) : std::abs(img.front() - img.back());
    const double bound = opt.max_edge_rel * width;
    std::vector<Point> refined;
    bool changed = false;
    for (std::size_t i = 0; i + 1 < src.size(); ++i) {
      refined.push_back(src[i]);
      if (std::abs(img[i + 1] - img[i]) > bound && std::abs(src[i + 1] - src[i]) > 1e-15 * std::abs(src[i])) {
        refined.push_back(0.5 * (src[i] + src[i + 1]));
        changed = true;
      }
    }
    refined.push_back(src.back());
    if (!changed || refined.size() > opt.max_points) {
      if (s.fold) {
        std::vector<Point> arc = img;  // right end to the top of the piece
        for (std::size_t i = img.size() - 1; i-- > 0;) arc.push_back(-std::conj(img[i]));
        arc.back() = {arc.back().real(), 0.0};
        return arc;
      }
      if (s.sign < 0) std::reverse(img.begin(), img.end());
      return img;
    }
    src = std::move(refined);
  }
}

}  // namespace detail

/// Pulls an upper arc given as offsets from z_p back along the path to offsets
/// from z_0. The arc must run from the right end of its real trace to the
/// left end through the upper half plane.
inline std::vector<Point> pull_back_arc(const PullbackPath& path, std::vector<Point> arc, const PullbackOptions& opt) {
  for (std::size_t k = path.size(); k-- > 0;) arc = detail::pull_arc_step(path, k, std::move(arc), opt);
  return arc;
}

/// Images of the points (offsets from z_0) at z_p.
inline std::vector<Point> push_forward(const PullbackPath& path, std::vector<Point> pts) {
  for (std::size_t k = 0; k < path.size(); ++k)
    for (auto& z : pts) z = path.forward(k, z);
  return pts;
}

/// Pulls a piece based at an interval around orbit[k0 + steps] back to the
/// component around orbit[k0]; shift = (anchor of piece) - orbit[k0 + steps].
template <class T>
PuzzlePiece pull_back_piece(const ComplexExtension<T>& F, const PuzzlePiece& piece, const std::vector<T>& orbit,
                            std::size_t k0, std::size_t steps, const T& piece_anchor, int level,
                            const PullbackOptions& opt = {}) {
  const auto path = F.path(orbit, k0, steps);
  const double shift = to_double(piece_anchor - orbit[k0 + steps]);
  std::vector<Point> arc = piece.upper_arc;
  for (auto& z : arc) z += shift;
  arc = pull_back_arc(path, std::move(arc), opt);
  arc = resample_arc(arc, opt.arc_points);
  return PuzzlePiece::from_arc(std::move(arc), level, to_double(orbit[k0]));
}

/// Upper arc of the disk with diameter [lo, hi] (offsets).
inline std::vector<Point> disk_arc(double lo, double hi, std::size_t npts) {
  return theta_upper_arc({RealInterval<double>(lo, hi), std::numbers::pi / 2}, npts);
}

/// Delta^m = D(I^m) and Delta^n = the g_n pull-back of Delta^{n-1}; all pieces
/// are offsets from c.
template <class T>
std::vector<PuzzlePiece> puzzle_hierarchy(const ComplexExtension<T>& F, const Hierarchy<T>& h, int m, int N,
                                          const PullbackOptions& opt = {}) {
  if (m < 1 || N < m || N > h.depth()) throw Error(ErrorKind::usage, "invalid puzzle level range");
  const T& c = h.map().c;
  const auto& Im = h.central(m);
  std::vector<PuzzlePiece> out;
  out.push_back(PuzzlePiece::from_arc(disk_arc(to_double(Im.lo - c), to_double(Im.hi - c), opt.arc_points), m,
                                      to_double(c)));
  for (int n = m + 1; n <= N; ++n) {
    const auto& L = h.level(n);
    out.push_back(pull_back_piece(F, out.back(), h.orbit(), 0, L.time_central, c, n, opt));
  }
  return out;
}

/// Affine image of a piece based on I^n with base T = [-a, a].
inline PuzzlePiece rescale_piece(const PuzzlePiece& piece, double half_length, int orientation = 1) {
  const double a = golden<double>();
  const double s = orientation * a / half_length;
  std::vector<Point> arc;
  for (const auto& z : piece.upper_arc) arc.push_back(s * z);
  if (orientation < 0) {
    for (auto& z : arc) z = std::conj(z);
    std::reverse(arc.begin(), arc.end());
  }
  arc.front() = {a, 0.0};
  arc.back() = {-a, 0.0};
  return PuzzlePiece::from_arc(std::move(arc), piece.level, 0.0);
}

template <class T>
PuzzlePiece rescale_piece(const PuzzlePiece& piece, const Hierarchy<T>& h) {
  const auto& I = h.central(piece.level);
  return rescale_piece(piece, to_double(I.length() / 2), h.level(piece.level).orientation);
}

// ---------------------------------------------------------------------------
// Julia sets of z^2 + c

/// Boundary points by random inverse iteration from the repelling fixed point.
inline std::vector<Point> julia_inverse_iteration(Point c, std::size_t budget, std::uint64_t seed = 1) {
  if (std::abs(c) > 2.0) throw Error(ErrorKind::usage, "|c| must be at most 2");
  std::mt19937_64 rng(seed);
  Point z = 0.5 + std::sqrt(0.25 - c);
  std::vector<Point> out;
  out.reserve(budget);
  out.push_back(z);
  while (out.size() < budget) {
    z = std::sqrt(z - c);
    if (rng() & 1) z = -z;
    out.push_back(z);
  }
  return out;
}

inline Point repelling_fixed_point(Point c) { return 0.5 + std::sqrt(0.25 - c); }

struct EscapeTime {
  Point c;
  std::size_t budget = 1000;
  double radius = 2.0;

  bool contains(Point z) const {
    for (std::size_t i = 0; i < budget; ++i) {
      if (std::norm(z) > radius * radius) return false;
      z = z * z + c;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Figure 1: rescaled pieces against the Julia set of z^2 - 1

struct Figure1Row {
  int level = 0;
  double distance = 0.0;
  double diameter = 0.0;
};

struct Figure1Report {
  std::vector<Figure1Row> rows;
  bool strictly_decreasing = false;  // over all rows
  int longest_decreasing_run = 0;    // number of consecutive levels
};

inline Figure1Report figure1_report(const std::vector<PuzzlePiece>& rescaled, const std::vector<Point>& julia,
                                    std::size_t samples) {
  if (rescaled.size() < 2) throw Error(ErrorKind::usage, "figure1 needs at least 2 levels");
  Figure1Report rep;
  for (const auto& p : rescaled) {
    const auto pts = resample_by_arclength(p.boundary, samples);
    rep.rows.push_back({p.level, hausdorff_distance(pts, julia), p.diameter()});
  }
  int run = 1, best = 1;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    run = rep.rows[i].distance < rep.rows[i - 1].distance ? run + 1 : 1;
    best = std::max(best, run);
  }
  rep.longest_decreasing_run = best;
  rep.strictly_decreasing = best == static_cast<int>(rep.rows.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Disk pull-back control along the real line

struct IncrementRow {
  int n = 0;
  double alpha = 0.0;
  double beta = 0.0;           // Delta' lies in D of the beta-scaled I^{n+1}
  bool contained = false;      // vertex test against D(beta-scaled I^{n+1}) with beta = alpha + increment
  double covering = 0.0;       // |f I^{n+1}| / |L|, L the pull-back of the scaled I^n
  double diameter_ratio = 0.0; // diam Delta' / |I^{n+1}|
};

/// Pulls D(alpha-scaled I^n) back by the central branch of g_{n+1} and
/// measures the scaling of the smallest disk D(beta-scaled I^{n+1}) containing it.
template <class T>
IncrementRow disk_pullback_increment(const ComplexExtension<T>& F, const Hierarchy<T>& h, int n, double alpha,
                                     const PullbackOptions& opt = {}) {
  if (n < 1 || n + 1 > h.depth()) throw Error(ErrorKind::usage, "level out of range");
  const T& c = h.map().c;
  const auto& I = h.central(n);
  const auto& Inext = h.central(n + 1);
  const double half = to_double(I.length() / 2) * (1 + alpha);
  PuzzlePiece disk = PuzzlePiece::from_arc(disk_arc(-half, half, opt.arc_points), n, to_double(c));
  const std::size_t r = h.level(n + 1).time_central;
  const PuzzlePiece pulled = pull_back_piece(F, disk, h.orbit(), 0, r, c, n + 1, opt);
  IncrementRow row;
  row.n = n;
  row.alpha = alpha;
  const double len = to_double(Inext.length());
  double rmax = 0.0;
  for (const auto& z : pulled.boundary.points) rmax = std::max(rmax, std::abs(z));
  row.beta = 2 * rmax / len - 1;
  row.contained = row.beta <= alpha + 1.0;
  row.diameter_ratio = pulled.diameter() / len;
  // covering fraction at the folding step: phi I' against the real pull-back
  // of the scaled interval to the critical value
  const T grow = (I.length() * T(alpha)) / 2;
  const RealInterval<T> scaled(I.lo - grow, I.hi + grow);
  const auto L = pull_back_interval(h.map(), h.orbit(), scaled, 1, r - 1, n + 1);
  const T image_end = h.map()(Inext.hi);
  row.covering = to_double(abs(image_end - h.map().t) / L.length());
  return row;
}

// ---------------------------------------------------------------------------
// Return domains and the chord-arc constant of W = (D(J) \ U Delta^1_j)^+

/// Components of the first return map to J = I^n. The two branches meeting
/// the critical set come first, followed by the `extra` longest others found
/// by sampling J on a grid of `samples` points.
template <class T>
std::vector<ReturnDomain<T>> return_domains(const Hierarchy<T>& h, int n, std::size_t extra,
                                            std::size_t samples = 4000) {
  if (n < 1 || n + 1 > h.depth()) throw Error(ErrorKind::usage, "level out of range");
  const auto& next = h.level(n + 1);
  std::vector<ReturnDomain<T>> crit{{next.I_central, next.time_central, true, h.map().c},
                                    {next.I_side, next.time_side, true, h.orbit()[next.time_central]}};
  auto others = first_return_domains(h.map(), h.central(n), samples, 40 * next.time_central, crit);
  if (others.size() > extra) others.resize(extra);
  crit.insert(crit.end(), others.begin(), others.end());
  return crit;
}

struct ChordArcReport {
  double constant = 0.0;
  std::size_t domains = 0;
  bool disjoint = true;
  Polyline gamma;
};

/// max over sampled pairs of (shorter boundary arc) / chord for a closed curve.
inline double chord_arc_constant(const Polyline& closed, std::size_t samples) {
  const auto pts = resample_by_arclength(closed, samples);
  const double total = closed.length();
  const double ds = total / static_cast<double>(samples);
  double worst = 1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double s = ds * static_cast<double>(j - i);
      const double arc = std::min(s, total - s);
      const double chord = std::abs(pts[i] - pts[j]);
      if (chord <= 1e-12 * total) continue;
      worst = std::max(worst, arc / chord);
    }
  }
  return worst;
}

template <class T>
ChordArcReport chord_arc_diagnostic(const ComplexExtension<T>& F, const Hierarchy<T>& h, int n, std::size_t extra,
                                    std::size_t samples = 600, const PullbackOptions& opt = {}) {
  const T& c = h.map().c;
  const auto& J = h.central(n);
  const auto doms = return_domains(h, n, extra);
  const double jlo = to_double(J.lo - c), jhi = to_double(J.hi - c);
  PuzzlePiece disk = PuzzlePiece::from_arc(disk_arc(jlo, jhi, opt.arc_points), n, to_double(c));

  struct Piece {
    double lo, hi;
    std::vector<Point> arc;  // offsets from c, right to left
    Polyline closed;
  };
  std::vector<Piece> pieces;
  for (const auto& d : doms) {
    std::vector<T> orb{d.seed};
    for (std::size_t k = 0; k < d.time; ++k) orb.push_back(h.map()(orb.back()));
    const PuzzlePiece p = pull_back_piece(F, disk, orb, 0, d.time, c, n + 1, opt);
    const double shift = to_double(d.seed - c);
    Piece q;
    for (auto z : p.upper_arc) q.arc.push_back(z + shift);
    q.lo = q.arc.back().real();
    q.hi = q.arc.front().real();
    q.closed = close_symmetric(q.arc);
    pieces.push_back(std::move(q));
  }
  ChordArcReport rep;
  rep.domains = pieces.size();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const auto& A = pieces[i];
      const auto& B = pieces[j];
      bool overlap = A.lo < B.hi && B.lo < A.hi;
      for (const auto& z : A.arc) overlap = overlap || (z.imag() > 0 && polygon_contains(B.closed, z));
      for (const auto& z : B.arc) overlap = overlap || (z.imag() > 0 && polygon_contains(A.closed, z));
      if (overlap) {
        rep.disjoint = false;
        throw Error(ErrorKind::dynamics, "disjointness violated");
      }
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  // Gamma: along the real line from left to right, over each removed disk,
  // then back along the outer semicircle.
  std::vector<Point> g;
  g.push_back({jlo, 0.0});
  for (const auto& p : pieces) {
    if (p.lo > g.back().real()) g.push_back({p.lo, 0.0});
    for (std::size_t i = p.arc.size(); i-- > 0;) {
      if (i + 1 == p.arc.size() && std::abs(p.arc[i] - g.back()) == 0.0) continue;
      g.push_back(p.arc[i]);
    }
  }
  if (jhi > g.back().real()) g.push_back({jhi, 0.0});
  const auto outer = disk.upper_arc;
  for (std::size_t i = 1; i + 1 < outer.size(); ++i) g.push_back(outer[i]);
  rep.gamma = Polyline::from_points(std::move(g), true);
  rep.constant = chord_arc_constant(rep.gamma, samples);
  return rep;
}

}  // namespace fibolab
