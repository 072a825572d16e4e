#pragma once

// Quasi-quadratic maps f = h o phi, phi(x) = (x - c)^2, and the search for the
// Fibonacci parameter in one-parameter families.

#include <cstddef>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace fibolab {

/// p(y) = sum_j coef[j] y^j
template <class T = Real>
struct Polynomial {
  std::vector<T> coef;

  std::size_t degree() const { return coef.empty() ? 0 : coef.size() - 1; }

  T operator()(const T& y) const {
    T acc(0);
    for (std::size_t j = coef.size(); j-- > 0;) acc = acc * y + coef[j];
    return acc;
  }

  T derivative(const T& y) const {
    T acc(0);
    for (std::size_t j = coef.size(); j-- > 1;) acc = acc * y + coef[j] * T(static_cast<long>(j));
    return acc;
  }

  /// Evaluation at a complex argument of any arithmetic kind (Complex<T> or
  /// std::complex<double>).
  template <class C>
  C eval(const C& z) const {
    C acc{};
    for (std::size_t j = coef.size(); j-- > 0;) {
      if constexpr (std::is_same_v<C, std::complex<double>>) acc = acc * z + to_double(coef[j]);
      else acc = acc * z + C(coef[j]);
    }
    return acc;
  }

  /// Coefficients b_j of p(y0 + eta) = sum_j b_j eta^j.
  std::vector<T> taylor_shift(const T& y0) const {
    std::vector<T> b = coef;
    const std::size_t n = b.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = n - 1; j > i; --j) b[j - 1] += y0 * b[j];
    }
    return b;
  }

  /// True when p(y) = y exactly.
  bool is_identity() const {
    if (coef.size() < 2 || coef[0] != 0 || coef[1] != 1) return false;
    for (std::size_t j = 2; j < coef.size(); ++j)
      if (coef[j] != 0) return false;
    return true;
  }
};

/// f(x) = t + H((x - c)^2) with H(0) = 0 and H' > 0, so h(y) = t + H(y).
/// The pure quadratic family is H(y) = y, c = 0.
template <class T = Real>
struct UnimodalMap {
  T c{0};
  T t{0};
  Polynomial<T> H{{T(0), T(1)}};
  double escape_radius = 2.0;

  T phi(const T& x) const {
    T u = x - c;
    return u * u;
  }
  T h(const T& y) const { return t + H(y); }

  T operator()(const T& x) const { return h(phi(x)); }

  T derivative(const T& x) const {
    T u = x - c;
    return 2 * u * H.derivative(u * u);
  }

  Complex<T> operator()(const Complex<T>& z) const {
    Complex<T> u = z - Complex<T>(c);
    return Complex<T>(t) + H.eval(u * u);
  }

  std::complex<double> evaluate(std::complex<double> z) const {
    const std::complex<double> u = z - to_double(c);
    return to_double(t) + H.eval(u * u);
  }

  /// Fixed point to the right of c, where f is expanding and orientation
  /// preserving; it bounds the dynamical interval [2c - beta, beta].
  T beta() const {
    T lo = c;
    T step(1);
    T hi = c + step;
    while ((*this)(hi) - hi <= 0) {
      step *= 2;
      hi = c + step;
      if (step > 1e6) throw Error(ErrorKind::dynamics, "no expanding fixed point");
    }
    if ((*this)(lo) - lo >= 0) throw Error(ErrorKind::dynamics, "no expanding fixed point");
    return bisect_root([this](const T& x) { return (*this)(x) - x; }, lo, hi);
  }

  /// Fixed point to the left of c (orientation reversing).
  T alpha() const {
    if (t - c >= 0) throw Error(ErrorKind::dynamics, "not in Fibonacci regime");
    T step(1);
    T lo = c - step;
    while ((*this)(lo) - lo <= 0) {
      step *= 2;
      lo = c - step;
      if (step > 1e6) throw Error(ErrorKind::dynamics, "not in Fibonacci regime");
    }
    return bisect_root([this](const T& x) { return (*this)(x) - x; }, lo, c);
  }

  RealInterval<T> dynamical_interval() const {
    T b = beta();
    return {2 * c - b, b};
  }

  /// The affine conjugate x -> (f(lambda x + delta) - delta)/lambda.
  UnimodalMap affine_conjugate(const T& lambda, const T& delta) const {
    if (lambda == 0) throw Error(ErrorKind::usage, "affine scale must be non-zero");
    if (lambda < 0) throw Error(ErrorKind::usage, "affine scale must be positive");
    UnimodalMap g = *this;
    g.c = (c - delta) / lambda;
    g.t = (t - delta) / lambda;
    T l2 = lambda * lambda;
    T scale = T(1) / lambda;
    for (std::size_t j = 0; j < g.H.coef.size(); ++j) {
      g.H.coef[j] = H.coef[j] * scale;
      scale *= l2;
    }
    return g;
  }

  /// Bisection to full working precision for a continuous function with
  /// F(lo) and F(hi) of opposite signs.
  template <class F>
  static T bisect_root(F&& fn, T lo, T hi) {
    using std::abs;
    T flo = fn(lo);
    const T eps = working_epsilon<T>();
    for (int it = 0; it < 4096; ++it) {
      T mid = (lo + hi) / 2;
      if (mid == lo || mid == hi) break;
      T fm = fn(mid);
      if (fm == 0) return mid;
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
      if (hi - lo <= eps * (abs(lo) + abs(hi))) break;
    }
    return (lo + hi) / 2;
  }
};

class EscapeError : public Error {
 public:
  EscapeError(std::size_t when)
      : Error(ErrorKind::dynamics, "orbit escaped at iteration " + std::to_string(when)), escape_time(when) {}
  std::size_t escape_time;
};

/// points[0] = c, points[k] = f^k(c).
template <class T = Real>
struct CriticalOrbit {
  std::vector<T> points;

  std::size_t length() const { return points.empty() ? 0 : points.size() - 1; }
  const T& operator[](std::size_t k) const { return points[k]; }
};

template <class T>
CriticalOrbit<T> critical_orbit(const UnimodalMap<T>& f, std::size_t N) {
  using std::abs;
  CriticalOrbit<T> orb;
  orb.points.reserve(N + 1);
  orb.points.push_back(f.c);
  const T radius = T(f.escape_radius) * abs(f.beta() - f.c);
  for (std::size_t k = 1; k <= N; ++k) {
    T x = f(orb.points.back());
    if (abs(x - f.c) > radius) throw EscapeError(k);
    orb.points.push_back(std::move(x));
  }
  return orb;
}

template <class T = Real>
struct ClosestReturnRecord {
  std::vector<std::size_t> times;
  std::vector<T> distances;
};

template <class T>
ClosestReturnRecord<T> closest_returns(const UnimodalMap<T>& f, std::size_t N) {
  using std::abs;
  if (N < 2) throw Error(ErrorKind::usage, "closest_returns needs N >= 2");
  const auto orb = critical_orbit(f, N);
  ClosestReturnRecord<T> rec;
  for (std::size_t k = 1; k <= N; ++k) {
    T d = abs(orb[k] - f.c);
    if (rec.distances.empty() || d < rec.distances.back()) {
      rec.times.push_back(k);
      rec.distances.push_back(std::move(d));
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Families

enum class FamilyKind { quadratic, perturbed };

/// f_t(x) = t + y + eps*y^3 with y = x^2; eps = 0 is the quadratic family.
template <class T = Real>
struct Family {
  FamilyKind kind = FamilyKind::quadratic;
  T epsilon{0};

  static Family quadratic() { return Family{FamilyKind::quadratic, T(0)}; }
  static Family perturbed(const T& eps) { return Family{FamilyKind::perturbed, eps}; }

  static Family parse(const std::string& name, const T& eps) {
    if (name == "quadratic") return quadratic();
    if (name == "perturbed") return perturbed(eps);
    throw Error(ErrorKind::usage, "unknown family '" + name + "'");
  }

  std::string name() const { return kind == FamilyKind::quadratic ? "quadratic" : "perturbed"; }

  UnimodalMap<T> at(const T& t) const {
    UnimodalMap<T> f;
    f.c = 0;
    f.t = t;
    if (kind == FamilyKind::quadratic) {
      f.H.coef = {T(0), T(1)};
    } else {
      f.H.coef = {T(0), T(1), T(0), epsilon};
    }
    return f;
  }

  /// Parameter with an attracting fixed point (the top of the family).
  T t_upper() const { return T(1) / 10; }
  /// Parameter beyond the Chebyshev-like end, where the critical orbit escapes.
  T t_lower() const { return T(-5) / 2; }
};

// ---------------------------------------------------------------------------
// Kneading theory for the Fibonacci combinatorics

/// Signs of f^i(c) - c, i = 1..L, for the Fibonacci map (kneading map
/// Q(k) = max(k - 2, 0)).
inline std::vector<int> fibonacci_kneading(std::size_t L) {
  const auto S = fibonacci_times(90);
  std::vector<int> e{1};
  for (std::size_t k = 1; e.size() < L; ++k) {
    const std::size_t q = k >= 2 ? k - 2 : 0;
    const std::size_t len = S[q];
    for (std::size_t i = 0; i < len; ++i) e.push_back(e[i]);
    e.back() = 1 - e.back();
  }
  e.resize(L);
  std::vector<int> out(L);
  for (std::size_t i = 0; i < L; ++i) out[i] = e[i] == 1 ? -1 : 1;
  return out;
}

/// Compares itineraries in the order induced by the parameter: returns
/// -1, 0 or 1. Symbol 0 marks an exact hit of c and ends the comparison.
inline int compare_itineraries(const std::vector<int>& A, const std::vector<int>& B) {
  int theta = 1;
  const std::size_t n = std::min(A.size(), B.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (A[i] != B[i]) return theta * A[i] < theta * B[i] ? -1 : 1;
    if (A[i] == 0) return 0;
    if (A[i] < 0) theta = -theta;
  }
  return 0;
}

/// Itinerary of the critical orbit compared on the fly with K; stops at the
/// first difference. An escaping orbit compares below K.
template <class T>
int compare_with_kneading(const UnimodalMap<T>& f, const std::vector<int>& K, const T& radius) {
  using std::abs;
  T x = f.c;
  int theta = 1;
  for (std::size_t i = 0; i < K.size(); ++i) {
    x = f(x);
    T u = x - f.c;
    if (abs(u) > radius) return -1;
    const int s = u > 0 ? 1 : (u < 0 ? -1 : 0);
    if (s != K[i]) return theta * s < theta * K[i] ? -1 : 1;
    if (s == 0) return 0;
    if (s < 0) theta = -theta;
  }
  return 0;
}

template <class T = Real>
struct BisectionStep {
  int edge;          // 0 lower window edge, 1 upper window edge
  std::size_t step;
  T lo;
  T hi;
  int sign;          // itinerary comparison at the midpoint
};

template <class T = Real>
struct FibonacciParameter {
  T t;
  T lower_edge;
  T upper_edge;
  T width;
  std::size_t depth = 0;
  std::size_t prefix = 0;
  std::vector<BisectionStep<T>> certificate;
  std::vector<std::size_t> closest_return_times;
};

/// Finds the parameter whose critical itinerary agrees with the Fibonacci
/// kneading sequence on the prefix of length S_{depth+1}. Both edges of the
/// parameter window are bisected to working precision and the midpoint is
/// returned.
template <class T>
FibonacciParameter<T> locate_fibonacci_parameter(const Family<T>& family, std::size_t depth,
                                                  const PrecisionContext& ctx) {
  using std::abs;
  using std::ldexp;
  ctx.validate();
  if (depth < 3) throw Error(ErrorKind::usage, "depth must be at least 3");
  if (depth > 80) throw Error(ErrorKind::usage, "depth too large");
  const auto S = fibonacci_times(depth + 2);
  FibonacciParameter<T> out;
  out.depth = depth;
  out.prefix = S[depth + 1];
  const auto K = fibonacci_kneading(out.prefix);

  auto radius_for = [&](const UnimodalMap<T>& f) -> T {
    try {
      return T(ctx.escape_radius) * abs(f.beta() - f.c);
    } catch (const Error&) {
      return T(1e6);
    }
  };
  auto cmp_at = [&](const T& t) {
    const auto f = family.at(t);
    return compare_with_kneading(f, K, radius_for(f));
  };

  const T top = family.t_upper();
  const T bottom = family.t_lower();
  if (!(cmp_at(bottom) < 0 && cmp_at(top) > 0)) throw Error(ErrorKind::dynamics, "combinatorics unreachable");

  const T tol = ldexp(T(1), -static_cast<int>(ctx.bits) + 4) * (top - bottom);
  T edges[2];
  for (int edge = 0; edge < 2; ++edge) {
    T lo = bottom, hi = top;
    for (std::size_t step = 0; hi - lo > tol; ++step) {
      T mid = (lo + hi) / 2;
      if (mid == lo || mid == hi) break;
      const int s = cmp_at(mid);
      out.certificate.push_back({edge, step, lo, hi, s});
      if (s < 0 || (s == 0 && edge == 1)) lo = mid;
      else hi = mid;
    }
    edges[edge] = edge == 0 ? hi : lo;
  }
  out.lower_edge = edges[0];
  out.upper_edge = edges[1];
  out.width = edges[1] - edges[0];
  out.t = (edges[0] + edges[1]) / 2;

  const auto f = family.at(out.t);
  if (out.width < 0 || compare_with_kneading(f, K, radius_for(f)) != 0)
    throw Error(ErrorKind::precision, "insufficient precision for depth " + std::to_string(depth));
  const std::size_t N = std::max<std::size_t>(S[depth - 1], 2);
  ClosestReturnRecord<T> rec;
  try {
    rec = closest_returns(f, N);
  } catch (const EscapeError&) {
    throw Error(ErrorKind::precision, "insufficient precision for depth " + std::to_string(depth));
  }
  const std::vector<std::size_t> want(S.begin(), S.begin() + static_cast<long>(depth));
  if (rec.times != want)
    throw Error(ErrorKind::precision, "insufficient precision for depth " + std::to_string(depth));
  out.closest_return_times = rec.times;
  return out;
}

}  // namespace fibolab
