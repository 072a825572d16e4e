#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fibolab/thurston.hpp"

using namespace fibolab;

TEST(Thurston, PolynomialNormalization) {
  PrecisionScope p(128);
  for (double g : {-0.1, -1.0, -3.0}) {
    PullbackPolynomial<Real> P{Real(g)};
    EXPECT_LT(to_double(abs(P(golden<Real>()) - golden<Real>())), 1e-35);
    EXPECT_EQ(P(Real(0)), Real(g));
  }
}

TEST(Thurston, FixedPointIsMinusOne) {
  PrecisionScope p(128);
  auto m = thurston_step(MarkedTriple<Real>{Real(-1)});
  EXPECT_LT(to_double(abs(m.gamma + 1)), 1e-35);
}

// Closed forms: gamma = -a gives -a/sqrt(2); gamma = -1/4 gives -a/sqrt(1 + 4a).
TEST(Thurston, ClosedFormSteps) {
  PrecisionScope p(128);
  const Real a = golden<Real>();
  auto m1 = thurston_step(MarkedTriple<Real>{-a});
  EXPECT_LT(to_double(abs(m1.gamma + a / sqrt(Real(2)))), 1e-35);
  EXPECT_NEAR(to_double(m1.gamma), -1.1441228056353685, 1e-15);
  auto m2 = thurston_step(MarkedTriple<Real>{Real("-0.25")});
  EXPECT_LT(to_double(abs(m2.gamma + a / sqrt(1 + 4 * a))), 1e-35);
  EXPECT_NEAR(to_double(m2.gamma), -0.591923, 1e-6);
}

TEST(Thurston, StepEqualsIndependentRootFinder) {
  PrecisionScope p(128);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-50.0, -1e-3);
  for (int i = 0; i < 100; ++i) {
    const Real g(U(rng));
    const Real s = thurston_step(MarkedTriple<Real>{g}).gamma;
    EXPECT_LT(to_double(abs(s - pullback_root(g))), 1e-30);
    // the new marked point is a preimage of the old one
    EXPECT_LT(to_double(abs(PullbackPolynomial<Real>(g)(s))), 1e-30);
    EXPECT_GT(s, -golden<Real>());
    EXPECT_LT(s, 0);
  }
}

TEST(Thurston, ConvergesWithContractionOneOverTwoA) {
  PrecisionScope p(128);
  for (const char* start : {"-0.5", "-1.6", "-1000"}) {
    auto run = iterate_to_fixed_point(MarkedTriple<Real>{Real(start)}, Real("1e-30"));
    EXPECT_LT(to_double(abs(run.limit.gamma + 1)), 1e-29) << start;
    EXPECT_NEAR(to_double(run.rates.back()), 1.0 / (2 * golden<double>()), 1e-6) << start;
    EXPECT_LE(run.steps, 200u);
  }
}

TEST(Thurston, DistanceToFixedPointShrinks) {
  PrecisionScope p(128);
  auto run = iterate_to_fixed_point(MarkedTriple<Real>{Real("-0.05")}, Real("1e-25"));
  for (std::size_t k = 1; k < run.gammas.size(); ++k)
    EXPECT_LE(abs(run.gammas[k] + 1), abs(run.gammas[k - 1] + 1));
}

TEST(Thurston, DegenerateTriple) {
  PrecisionScope p(128);
  for (const char* g : {"0", "0.5"}) {
    try {
      thurston_step(MarkedTriple<Real>{Real(g)});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::usage);
      EXPECT_STREQ(e.what(), "triple degenerate");
    }
  }
  EXPECT_THROW(iterate_to_fixed_point(MarkedTriple<Real>{Real(-1)}, Real(0)), Error);
}
