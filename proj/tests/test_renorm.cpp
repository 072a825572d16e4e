#include <gtest/gtest.h>

#include <cmath>

#include "fibolab/renorm.hpp"

using namespace fibolab;

namespace {

// One deep hierarchy shared by the tests; 256 bits carry 15 levels.
struct Deep {
  PrecisionScope scope{256};
  Hierarchy<Real> h;
  Deep() : h(make()) { h.build(15); }
  static Hierarchy<Real> make() {
    PrecisionContext ctx;
    ctx.bits = 256;
    auto par = locate_fibonacci_parameter(Family<Real>::quadratic(), 18, ctx);
    return Hierarchy<Real>(Family<Real>::quadratic().at(par.t));
  }
};

Deep& deep() {
  static Deep d;
  return d;
}

}  // namespace

TEST(Hierarchy, I0IsBoundedByAlpha) {
  auto& h = deep().h;
  const auto& f = h.map();
  EXPECT_EQ(h.I0().lo, f.alpha());
  EXPECT_LT(to_double(abs(f(h.I0().hi) - f.alpha())), 1e-60);
}

TEST(Hierarchy, ReturnTimesAreFibonacci) {
  auto& h = deep().h;
  const auto S = fibonacci_times(18);
  for (const auto& L : h.levels()) {
    EXPECT_EQ(L.time_central, S[L.n + 1]) << "level " << L.n;
    EXPECT_EQ(L.time_side, S[L.n]) << "level " << L.n;
  }
}

// First entry times recomputed from the orbit by a direct scan.
TEST(Hierarchy, ReturnTimesMatchDirectScan) {
  auto& h = deep().h;
  const auto& orb = h.orbit();
  for (int n = 1; n <= h.depth(); ++n) {
    const auto& P = h.central(n - 1);
    std::size_t r = 0;
    for (std::size_t k = 1; k < orb.size(); ++k)
      if (P.contains(orb[k])) {
        r = k;
        break;
      }
    EXPECT_EQ(r, h.level(n).time_central);
  }
}

TEST(Hierarchy, PropertySuiteAtEveryLevel) {
  auto& h = deep().h;
  const auto& f = h.map();
  for (const auto& L : h.levels()) {
    const auto& P = h.central(L.n - 1);
    SCOPED_TRACE("level " + std::to_string(L.n));
    EXPECT_TRUE(L.checks.all());
    EXPECT_LT(L.checks.boundary_residual, 1e-20);
    // recompute: side branch maps onto the previous interval
    const Real a = iterate(f, L.I_side.lo, L.time_side), b = iterate(f, L.I_side.hi, L.time_side);
    const Real lo = a < b ? a : b, hi = a < b ? b : a;
    EXPECT_LT(to_double(abs(lo - P.lo) / P.length()), 1e-20);
    EXPECT_LT(to_double(abs(hi - P.hi) / P.length()), 1e-20);
    // central branch sends both endpoints to one endpoint of the previous interval
    const Real e0 = iterate(f, L.I_central.lo, L.time_central), e1 = iterate(f, L.I_central.hi, L.time_central);
    EXPECT_LT(to_double(abs(e0 - e1) / P.length()), 1e-20);
    // g(c) in the side interval and g^2(c) in the central interval
    const Real gc = h.orbit()[L.time_central];
    EXPECT_TRUE(L.I_side.contains(gc));
    EXPECT_TRUE(L.I_central.contains(iterate(f, gc, L.time_side)));
    // nesting and disjointness
    EXPECT_TRUE(P.contains(L.I_central));
    EXPECT_TRUE(L.I_central.contains(f.c));
    if (L.n > 1) EXPECT_FALSE(L.I_central.intersects(L.I_side));
    EXPECT_GT(L.mu, 0);
    EXPECT_LT(L.mu, 1);
  }
}

TEST(Hierarchy, InsufficientPrecisionNamesALevel) {
  PrecisionScope p(256);
  PrecisionContext ctx;
  ctx.bits = 256;
  auto par = locate_fibonacci_parameter(Family<Real>::quadratic(), 18, ctx);
  PrecisionScope q(128);
  // rebuild the parameter at 128 bits from its decimal form
  auto f = Family<Real>::quadratic().at(Real(to_string_full(par.t)));
  try {
    build_hierarchy(f, 15);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_TRUE(msg.find("level") != std::string::npos) << msg;
  }
}

TEST(Scaling, GeometricDecayOfIntervalLengths) {
  auto& h = deep().h;
  auto tab = scaling_table(h, 8);
  EXPECT_NEAR(tab.log2_fit.slope, -1.0 / 3.0, 0.03);
  int seen = 0;
  for (const auto& r : tab.rows)
    if (r.ratio3 && r.n >= 8) {
      EXPECT_NEAR(*r.ratio3, 0.5, 0.08) << "n=" << r.n;
      ++seen;
    }
  EXPECT_GE(seen, 3);
}

TEST(Rescaled, ApproachesChebyshevLimit) {
  auto& h = deep().h;
  const auto d8 = distance_to_limit(h, 8);
  const auto d14 = distance_to_limit(h, 14);
  EXPECT_LT(d14.sup_dev, d8.sup_dev);
  EXPECT_NEAR(d14.g0, -1.0, 0.05);
  EXPECT_LT(d14.sup_dev, 0.05);
}

TEST(Rescaled, EvenAboutTheCriticalPoint) {
  auto& h = deep().h;
  std::vector<Real> xs, ms;
  for (double x : {0.1, 0.4, 0.9, 1.5}) {
    xs.push_back(Real(x));
    ms.push_back(Real(-x));
  }
  const auto a = rescaled_map_values(h, 10, xs), b = rescaled_map_values(h, 10, ms);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(to_double(abs(a[i] - b[i])), 1e-40);
  EXPECT_THROW(rescaled_map_values(h, 10, std::vector<Real>{Real(3)}), Error);
}

TEST(Multipliers, ChainRuleAgreesWithDifferences) {
  auto& h = deep().h;
  const auto& f = h.map();
  const Real x("0.3");
  const Real d = iterate_derivative(f, x, 7);
  const Real step("1e-30");
  const Real fd = (iterate(f, x + step, 7) - iterate(f, x - step, 7)) / (2 * step);
  EXPECT_LT(to_double(abs(d - fd) / abs(d)), 1e-20);
}

TEST(Multipliers, SideBranchIsRepelling) {
  auto& h = deep().h;
  for (int n = 2; n <= 10; ++n) {
    const auto m = branch_multipliers(h, n);
    ASSERT_TRUE(m.sigma_side.has_value()) << n;
    EXPECT_GT(to_double(abs(*m.sigma_side)), 1.0);
    const Real x = *m.x_side;
    EXPECT_LT(to_double(abs(h.g_side(n, x) - x) / h.central(n - 1).length()), 1e-30);
  }
}

// Multipliers are invariant under affine conjugacy.
TEST(Multipliers, AffineInvariance) {
  auto& h = deep().h;
  PrecisionScope p(256);
  Hierarchy<Real> g(h.map().affine_conjugate(Real(2), Real(0)));
  g.build(8);
  for (int n = 2; n <= 8; ++n) {
    const auto a = branch_multipliers(h, n), b = branch_multipliers(g, n);
    ASSERT_TRUE(a.sigma_side && b.sigma_side);
    EXPECT_LT(to_double(abs(*a.sigma_side - *b.sigma_side) / abs(*a.sigma_side)), 1e-50);
  }
}

TEST(ReturnDomains, ImagesCoverTheInterval) {
  auto& h = deep().h;
  const auto& J = h.central(4);
  auto doms = first_return_domains(h.map(), J, 2000, 2000);
  ASSERT_GE(doms.size(), 3u);
  for (std::size_t i = 0; i < doms.size(); ++i) {
    const auto& D = doms[i];
    EXPECT_TRUE(J.contains(D.interval));
    const Real a = iterate(h.map(), D.interval.lo, D.time), b = iterate(h.map(), D.interval.hi, D.time);
    // non-critical branches map onto J
    if (!D.critical) {
      const Real lo = a < b ? a : b, hi = a < b ? b : a;
      // rounding grows with the expansion of the branch
      const double tol =
          1e3 * to_double(working_epsilon<Real>() * abs(iterate_derivative(h.map(), D.seed, D.time)) / J.length());
      EXPECT_LE(to_double(abs(lo - J.lo) / J.length()), tol);
      EXPECT_LE(to_double(abs(hi - J.hi) / J.length()), tol);
    }
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(D.interval.intersects(doms[j].interval));
  }
}
