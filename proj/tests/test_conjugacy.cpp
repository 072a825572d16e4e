#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fibolab/conjugacy.hpp"

using namespace fibolab;

namespace {

struct Maps {
  PrecisionScope scope{128};
  UnimodalMap<Real> quad, pert;
  Maps() {
    PrecisionContext ctx;
    quad = Family<Real>::quadratic().at(locate_fibonacci_parameter(Family<Real>::quadratic(), 13, ctx).t);
    const auto P = Family<Real>::perturbed(Real("0.01"));
    pert = P.at(locate_fibonacci_parameter(P, 13, ctx).t);
  }
};

Maps& maps() {
  static Maps m;
  return m;
}

}  // namespace

TEST(Zeckendorf, RoundTripAndNoAdjacentOnes) {
  std::set<std::string> seen;
  for (std::size_t k = 0; k < 233; ++k) {
    const auto code = zeckendorf_code(k, 11);
    EXPECT_EQ(zeckendorf_value(code), k);
    EXPECT_EQ(code.find("11"), std::string::npos) << code;
    EXPECT_TRUE(seen.insert(code).second);
  }
  EXPECT_THROW(zeckendorf_code(1000, 5), Error);
}

// Codes at depth n extend to codes at depth n + 1 by a trailing zero.
TEST(Coding, CodesArePrefixStable) {
  PrecisionScope p(128);
  Hierarchy<Real> h(maps().quad);
  h.build(8);
  const auto A = coded_critical_set(h, 6), B = coded_critical_set(h, 7);
  ASSERT_LT(A.size(), B.size());
  for (std::size_t k = 0; k < A.size(); ++k) {
    EXPECT_EQ(B[k].code, A[k].code + "0");
    EXPECT_EQ(B[k].point, A[k].point);
  }
}

TEST(Coding, DecodeFollowsTheOrbit) {
  PrecisionScope p(128);
  Hierarchy<Real> h(maps().quad);
  h.build(7);
  for (const auto& cp : coded_critical_set(h, 7)) {
    const Real x = decode(h.map(), cp.code);
    EXPECT_LT(to_double(abs(x - cp.point)), 1e-25) << cp.code;
  }
}

TEST(Coding, CriticalValuesOfFirstLevel) {
  PrecisionScope p(128);
  Hierarchy<Real> h(maps().quad);
  h.build(3);
  // x_3 = g_1(c) is in the side domain, x_5 = g_1^2(c) in the central one
  EXPECT_EQ(branch_of(h, 1, h.orbit()[3]), 1);
  EXPECT_EQ(branch_of(h, 1, h.orbit()[5]), 0);
  EXPECT_EQ(branch_of(h, 1, h.map().c), 0);
}

TEST(Matching, IdentityPairing) {
  PrecisionScope p(128);
  Hierarchy<Real> a(maps().quad), b(maps().quad);
  const auto rep = match_critical_sets(a, b, 10);
  EXPECT_EQ(rep.direction, 1);
  EXPECT_EQ(rep.equivariance_residual, 0.0);
  for (const auto& pr : rep.pairs) EXPECT_EQ(pr.x, pr.xt);
  for (const auto& row : qs_ratio_scan(rep, hierarchy_scales(a, 10))) EXPECT_EQ(row.max_ratio, 1.0);
  const auto tab = multiplier_comparison(a, b, 10);
  EXPECT_DOUBLE_EQ(tab.tau, 1.0);
  for (const auto& r : tab.rows) EXPECT_TRUE(r.equal) << r.code;
  const auto sm = smoothness_diagnostic(rep, a, b, 8);
  for (const auto& r : sm.ratio_distortion) EXPECT_EQ(r.value, 0.0);
  for (const auto& r : sm.rho) EXPECT_DOUBLE_EQ(r.value, 1.0);
}

TEST(Matching, AffinePairingIsExactlyLinear) {
  PrecisionScope p(128);
  const Real lambda(2);
  Hierarchy<Real> a(maps().quad), b(maps().quad.affine_conjugate(lambda, Real(0)));
  const auto rep = match_critical_sets(a, b, 10);
  EXPECT_EQ(rep.direction, 1);
  for (const auto& pr : rep.pairs) EXPECT_LT(to_double(abs(pr.xt * lambda - pr.x)), 1e-30) << pr.code;
  for (const auto& row : qs_ratio_scan(rep, hierarchy_scales(a, 10))) EXPECT_NEAR(row.max_ratio, 1.0, 1e-12);
  const auto tab = multiplier_comparison(a, b, 10);
  for (const auto& r : tab.rows) EXPECT_NEAR(r.log_ratio, 1.0, 1e-12) << r.code;
  const auto sm = smoothness_diagnostic(rep, a, b, 8);
  for (const auto& r : sm.ratio_distortion) EXPECT_LT(r.value, 1e-25);
}

// The quasisymmetry ratio is unchanged by composing the pairing with an affine map.
TEST(Matching, QsRatioIsAffineInvariant) {
  PrecisionScope p(128);
  Hierarchy<Real> a(maps().quad), b(maps().pert), c(maps().pert.affine_conjugate(Real(3), Real("0.1")));
  const auto r1 = match_critical_sets(a, b, 9), r2 = match_critical_sets(a, c, 9);
  const auto s1 = qs_ratio_scan(r1, hierarchy_scales(a, 9)), s2 = qs_ratio_scan(r2, hierarchy_scales(a, 9));
  ASSERT_EQ(s1.size(), s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1[i].triples, s2[i].triples);
    EXPECT_NEAR(s1[i].max_ratio, s2[i].max_ratio, 1e-12);
  }
}

TEST(Matching, QuadraticAgainstPerturbed) {
  PrecisionScope p(128);
  Hierarchy<Real> a(maps().quad), b(maps().pert);
  const auto rep = match_critical_sets(a, b, 10);
  EXPECT_EQ(rep.direction, 1);
  EXPECT_LT(rep.equivariance_residual, 1e-10);
  const auto rows = qs_ratio_scan(rep, hierarchy_scales(a, 10));
  ASSERT_GE(rows.size(), 5u);
  EXPECT_GT(rows.front().scale / rows.back().scale, 1e4);
  for (const auto& r : rows) EXPECT_LT(r.max_ratio, 2.0);
  const auto tab = multiplier_comparison(a, b, 10);
  EXPECT_GT(tab.tau, 0.5);
  EXPECT_LT(tab.tau, 1.5);
}

// A map that is Fibonacci only to a shallow depth cannot be matched deeper.
TEST(Matching, CodeMismatchNamesLevel) {
  PrecisionScope p(128);
  PrecisionContext ctx;
  const auto shallow = Family<Real>::quadratic().at(locate_fibonacci_parameter(Family<Real>::quadratic(), 7, ctx).t);
  Hierarchy<Real> a(maps().quad), b(shallow);
  try {
    match_critical_sets(a, b, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dynamics);
    EXPECT_EQ(std::string(e.what()).rfind("code mismatch at level ", 0), 0u) << e.what();
  }
}
