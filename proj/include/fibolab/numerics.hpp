#pragma once

// Shared numerical primitives: precision handling, errors, intervals,
// complex arithmetic over arbitrary real types, polylines and point-set
// distances.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace fibolab {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>, boost::multiprecision::et_off>;
using Point = std::complex<double>;

enum class ErrorKind { dynamics, precision, usage, io, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Precision

struct PrecisionContext {
  unsigned bits = 128;
  double escape_radius = 2.0;
  std::size_t max_iters = 100000;

  void validate() const {
    if (bits < 53) throw Error(ErrorKind::usage, "precision must be at least 53 bits");
    if (escape_radius < 2.0) throw Error(ErrorKind::usage, "escape radius must be at least 2");
    if (max_iters == 0) throw Error(ErrorKind::usage, "max_iters must be positive");
  }
};

/// Sets the working precision of newly created Real values for the lifetime
/// of the scope and restores the previous setting afterwards.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits) : saved_(Real::default_precision()) {
    Real::default_precision(digits10_for(bits));
  }
  explicit PrecisionScope(const PrecisionContext& ctx) : PrecisionScope(ctx.bits) {}
  ~PrecisionScope() { Real::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

  static unsigned digits10_for(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
  }

 private:
  unsigned saved_;
};

template <class T>
double to_double(const T& x) {
  if constexpr (std::is_arithmetic_v<T>) {
    return static_cast<double>(x);
  } else {
    return x.template convert_to<double>();
  }
}

/// Machine epsilon of T at the current working precision.
template <class T>
T working_epsilon() {
  if constexpr (std::is_floating_point_v<T>) {
    return std::numeric_limits<T>::epsilon();
  } else {
    using std::ldexp;
    const auto bits = boost::multiprecision::detail::digits10_2_2(T::default_precision());
    return ldexp(T(1), 1 - static_cast<int>(bits));
  }
}

template <class T>
std::string to_string_full(const T& x) {
  if constexpr (std::is_floating_point_v<T>) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  } else {
    return x.str(0, std::ios_base::scientific);
  }
}

/// Golden mean a = (1 + sqrt 5)/2, the half-length of the reference interval T.
template <class T>
T golden() {
  using std::sqrt;
  return (T(1) + sqrt(T(5))) / 2;
}

// ---------------------------------------------------------------------------
// Intervals

template <class T>
struct RealInterval {
  T lo;
  T hi;

  RealInterval() = default;
  RealInterval(T l, T h) : lo(std::move(l)), hi(std::move(h)) {
    if (!(lo < hi)) throw Error(ErrorKind::numerical, "degenerate interval");
  }

  T length() const { return hi - lo; }
  T midpoint() const { return (lo + hi) / 2; }
  bool contains(const T& x) const { return lo < x && x < hi; }
  bool contains_closed(const T& x) const { return lo <= x && x <= hi; }
  bool contains(const RealInterval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const RealInterval& o) const { return lo < o.hi && o.lo < hi; }

  template <class U>
  RealInterval<U> as() const {
    if constexpr (std::is_same_v<U, double>) {
      return {to_double(lo), to_double(hi)};
    } else {
      return {U(lo), U(hi)};
    }
  }
};

// ---------------------------------------------------------------------------
// Complex numbers over an arbitrary real type. std::complex is only
// specified for the built-in floating types.

template <class T>
struct Complex {
  T re{};
  T im{};

  Complex() = default;
  Complex(T r) : re(std::move(r)), im(0) {}
  Complex(T r, T i) : re(std::move(r)), im(std::move(i)) {}

  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator/(const Complex& a, const Complex& b) {
    T d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  Complex& operator+=(const Complex& o) { return *this = *this + o; }
  Complex& operator*=(const Complex& o) { return *this = *this * o; }

  friend Complex conj(const Complex& a) { return {a.re, -a.im}; }
  friend T norm(const Complex& a) { return a.re * a.re + a.im * a.im; }
  friend T abs(const Complex& a) {
    using std::sqrt;
    return sqrt(norm(a));
  }
  /// Principal branch; the cut is the negative real axis.
  friend Complex sqrt(const Complex& a) {
    using std::sqrt;
    T r = abs(a);
    if (r == 0) return {T(0), T(0)};
    T s = sqrt((r + (a.re < 0 ? -a.re : a.re)) / 2);
    if (a.re >= 0) return {s, a.im / (2 * s)};
    T t = a.im / (2 * s);
    return {t < 0 ? -t : t, a.im < 0 ? -s : s};
  }

  Point to_point() const { return {to_double(re), to_double(im)}; }
};

// ---------------------------------------------------------------------------
// Polylines

struct Polyline {
  std::vector<Point> points;
  bool closed = false;
  std::vector<double> params;

  Polyline() = default;
  Polyline(std::vector<Point> pts, bool is_closed, std::vector<double> ps)
      : points(std::move(pts)), closed(is_closed), params(std::move(ps)) {
    validate();
  }

  /// Builds a polyline whose parameters are proportional to arc length.
  static Polyline from_points(std::vector<Point> pts, bool is_closed) {
    Polyline p;
    p.points = std::move(pts);
    p.closed = is_closed;
    p.params = arclength_params(p.points, is_closed);
    p.validate();
    return p;
  }

  std::size_t size() const { return points.size(); }
  std::size_t edge_count() const {
    if (points.size() < 2) return 0;
    return closed ? points.size() : points.size() - 1;
  }
  std::pair<Point, Point> edge(std::size_t i) const {
    return {points[i], points[(i + 1) % points.size()]};
  }

  double length() const {
    double total = 0.0;
    for (std::size_t i = 0; i < edge_count(); ++i) {
      auto [a, b] = edge(i);
      total += std::abs(b - a);
    }
    return total;
  }

  double max_edge() const {
    double m = 0.0;
    for (std::size_t i = 0; i < edge_count(); ++i) {
      auto [a, b] = edge(i);
      m = std::max(m, std::abs(b - a));
    }
    return m;
  }

  void validate() const {
    if (points.size() != params.size()) throw Error(ErrorKind::numerical, "polyline params size mismatch");
    if (closed && points.size() < 3) throw Error(ErrorKind::numerical, "closed polyline needs at least 3 points");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i] < 0.0 || params[i] >= 1.0) throw Error(ErrorKind::numerical, "polyline param outside [0,1)");
      if (i > 0 && !(params[i] > params[i - 1])) throw Error(ErrorKind::numerical, "polyline params not increasing");
    }
  }

  static std::vector<double> arclength_params(const std::vector<Point>& pts, bool is_closed) {
    std::vector<double> s(pts.size(), 0.0);
    if (pts.empty()) return s;
    double acc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      acc += std::abs(pts[i] - pts[i - 1]);
      s[i] = acc;
    }
    double total = acc + (is_closed ? std::abs(pts.front() - pts.back()) : 0.0);
    if (total <= 0.0) {
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i) / s.size();
      return s;
    }
    for (auto& v : s) v /= total;
    // an open polyline ends exactly at 1; keep params inside [0,1)
    if (!is_closed && s.size() > 1) {
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = s[i] * (1.0 - 1.0 / (4.0 * s.size()));
    }
    return s;
  }
};

/// Inserts linearly interpolated points so that no edge exceeds max_edge.
inline Polyline refine_polyline(const Polyline& p, double max_edge) {
  if (!(max_edge > 0.0)) throw Error(ErrorKind::usage, "max_edge must be positive");
  if (p.points.empty()) return p;
  Polyline out;
  out.closed = p.closed;
  const std::size_t n = p.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.points.push_back(p.points[i]);
    out.params.push_back(p.params[i]);
    if (i + 1 == n && !p.closed) break;
    const Point a = p.points[i];
    const Point b = p.points[(i + 1) % n];
    const double pa = p.params[i];
    const double pb = (i + 1 == n) ? 1.0 : p.params[i + 1];
    const double len = std::abs(b - a);
    if (len <= max_edge) continue;
    const auto pieces = static_cast<std::size_t>(std::ceil(len / max_edge));
    for (std::size_t k = 1; k < pieces; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(pieces);
      out.points.push_back(a + (b - a) * s);
      out.params.push_back(pa + (pb - pa) * s);
    }
  }
  out.validate();
  return out;
}

/// Points spaced uniformly by arc length along the polyline.
inline std::vector<Point> resample_by_arclength(const Polyline& p, std::size_t count) {
  std::vector<Point> out;
  if (p.points.empty() || count == 0) return out;
  const double total = p.length();
  if (total <= 0.0) return std::vector<Point>(count, p.points.front());
  const std::size_t edges = p.edge_count();
  const double step = p.closed ? total / count : total / std::max<std::size_t>(count - 1, 1);
  std::size_t e = 0;
  double edge_start = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = std::min(step * k, total);
    while (e + 1 < edges) {
      auto [a, b] = p.edge(e);
      const double len = std::abs(b - a);
      if (edge_start + len >= s) break;
      edge_start += len;
      ++e;
    }
    auto [a, b] = p.edge(e);
    const double len = std::abs(b - a);
    const double f = len > 0.0 ? std::clamp((s - edge_start) / len, 0.0, 1.0) : 0.0;
    out.push_back(a + (b - a) * f);
  }
  return out;
}

/// Winding number of a closed polyline around z.
inline int winding_number(const Polyline& p, Point z) {
  int wn = 0;
  const std::size_t n = p.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = p.points[i];
    const Point b = p.points[(i + 1) % n];
    const double cross = (b.real() - a.real()) * (z.imag() - a.imag()) -
                         (z.real() - a.real()) * (b.imag() - a.imag());
    if (a.imag() <= z.imag()) {
      if (b.imag() > z.imag() && cross > 0) ++wn;
    } else if (b.imag() <= z.imag() && cross < 0) {
      --wn;
    }
  }
  return wn;
}

inline bool polygon_contains(const Polyline& p, Point z) { return winding_number(p, z) != 0; }

/// Distance from z to the nearest edge of the polyline.
inline double distance_to_polyline(const Polyline& p, Point z) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.edge_count(); ++i) {
    auto [a, b] = p.edge(i);
    const Point ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0.0 ? ((z - a) * std::conj(ab)).real() / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::abs(z - (a + ab * t)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Nearest-neighbour queries and Hausdorff distance

/// Nearest-distance queries against a fixed point cloud (packed R-tree).
class PointGrid {
 public:
  explicit PointGrid(std::span<const Point> pts) {
    if (pts.empty()) throw Error(ErrorKind::usage, "empty set");
    std::vector<GPoint> g;
    g.reserve(pts.size());
    for (const auto& p : pts) g.emplace_back(p.real(), p.imag());
    tree_ = Tree(g.begin(), g.end());
  }

  double nearest_distance(Point z) const {
    const GPoint q(z.real(), z.imag());
    for (auto it = tree_.qbegin(boost::geometry::index::nearest(q, 1)); it != tree_.qend(); ++it)
      return std::hypot(it->get<0>() - z.real(), it->get<1>() - z.imag());
    return std::numeric_limits<double>::infinity();
  }

 private:
  using GPoint = boost::geometry::model::point<double, 2, boost::geometry::cs::cartesian>;
  using Tree = boost::geometry::index::rtree<GPoint, boost::geometry::index::rstar<16>>;
  Tree tree_;
};

/// sup_{x in a} dist(x, b)
inline double directed_hausdorff(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::usage, "empty set");
  PointGrid grid(b);
  double d = 0.0;
  for (const auto& x : a) d = std::max(d, grid.nearest_distance(x));
  return d;
}

inline double hausdorff_distance(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::usage, "empty set");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

// ---------------------------------------------------------------------------
// Small statistics helpers

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw Error(ErrorKind::usage, "least squares needs two or more points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error(ErrorKind::numerical, "degenerate least squares fit");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

/// Fibonacci return times S_0 = 1, S_1 = 2, S_{k+1} = S_k + S_{k-1}.
inline std::vector<std::size_t> fibonacci_times(std::size_t count) {
  std::vector<std::size_t> s;
  for (std::size_t k = 0; k < count; ++k) {
    if (k == 0) s.push_back(1);
    else if (k == 1) s.push_back(2);
    else s.push_back(s[k - 1] + s[k - 2]);
  }
  return s;
}

}  // namespace fibolab
