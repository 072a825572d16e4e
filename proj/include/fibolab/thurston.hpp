#pragma once

// Pull-back of normalized real triples {gamma, 0, a} by the quadratic
// polynomial fixing a and sending 0 to gamma.

#include <cstddef>
#include <vector>

#include "numerics.hpp"

namespace fibolab {

template <class T = Real>
struct MarkedTriple {
  T gamma;

  static T a() { return golden<T>(); }
};

/// p_gamma(z) = ((a - gamma)/a^2) z^2 + gamma, so p_gamma(0) = gamma and
/// p_gamma(a) = a.
template <class T = Real>
struct PullbackPolynomial {
  T gamma;
  T alpha;

  explicit PullbackPolynomial(const T& g) : gamma(g) {
    const T a = golden<T>();
    alpha = (a - g) / (a * a);
  }
  T operator()(const T& z) const { return alpha * z * z + gamma; }
  T derivative(const T& z) const { return 2 * alpha * z; }
};

template <class T>
MarkedTriple<T> thurston_step(const MarkedTriple<T>& m) {
  using std::sqrt;
  if (!(m.gamma < 0)) throw Error(ErrorKind::usage, "triple degenerate");
  const T a = golden<T>();
  return {-a * sqrt(-m.gamma / (a - m.gamma))};
}

/// Negative root of p_gamma by safeguarded Newton iteration on [-a, 0];
/// an independent route to thurston_step.
template <class T>
T pullback_root(const T& gamma) {
  using std::abs;
  if (!(gamma < 0)) throw Error(ErrorKind::usage, "triple degenerate");
  const PullbackPolynomial<T> p(gamma);
  T lo = -golden<T>(), hi = T(0);
  T x = lo;
  const T eps = working_epsilon<T>();
  for (int it = 0; it < 400; ++it) {
    T v = p(x);
    if (v == 0) return x;
    // p is decreasing on [-a, 0]
    if (v > 0) lo = x;
    else hi = x;
    T next = x - v / p.derivative(x);
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (abs(next - x) <= 4 * eps * abs(x)) return next;
    x = next;
  }
  return x;
}

template <class T = Real>
struct ThurstonRun {
  MarkedTriple<T> limit;
  std::size_t steps = 0;
  std::vector<T> gammas;  // gamma_0 .. gamma_steps
  std::vector<T> rates;   // |gamma_{k+1} + 1| / |gamma_k + 1|
};

template <class T>
ThurstonRun<T> iterate_to_fixed_point(const MarkedTriple<T>& start, const T& tol, std::size_t max_steps = 10000) {
  using std::abs;
  if (!(tol > 0)) throw Error(ErrorKind::usage, "tolerance must be positive");
  ThurstonRun<T> run;
  MarkedTriple<T> cur = start;
  run.gammas.push_back(cur.gamma);
  for (std::size_t k = 0; k < max_steps; ++k) {
    MarkedTriple<T> next = thurston_step(cur);
    const T before = abs(cur.gamma + 1);
    const T after = abs(next.gamma + 1);
    run.rates.push_back(before > 0 ? after / before : T(0));
    run.gammas.push_back(next.gamma);
    const bool done = abs(next.gamma - cur.gamma) < tol;
    cur = next;
    if (done) {
      run.limit = cur;
      run.steps = k + 1;
      return run;
    }
  }
  throw Error(ErrorKind::dynamics, "divergence");
}

}  // namespace fibolab
