#include <gtest/gtest.h>

#include <boost/math/special_functions/airy.hpp>

#include <cmath>
#include <numbers>

#include "dgue/airy.hpp"

using namespace dgue;

TEST(Airy, ValuesAtZero) {
  const auto a = airy(0.0);
  EXPECT_NEAR(a.ai, 0.355028053887817, 1e-14);
  EXPECT_NEAR(a.ai_prime, -0.258819403792807, 1e-14);
  const auto c = airy_contour(0.0);
  EXPECT_NEAR(c.ai, a.ai, 1e-10);
  EXPECT_NEAR(c.ai_prime, a.ai_prime, 1e-10);
}

TEST(Airy, PositiveDecay) {
  const auto a = airy(10.0);
  EXPECT_LT(std::abs(a.ai), 1e-9);
  EXPECT_NEAR(a.ai / 1.1047532552898686e-10, 1.0, 1e-10);
}

TEST(Airy, NegativeEnvelope) {
  const auto a = airy(-50.0);
  EXPECT_NEAR(a.ai, -0.161881423612321, 1e-10);
  // |Ai| + |Ai'|/sqrt(|x|) combine to the envelope |x|^{-1/4}/sqrt(pi)
  const double env = std::pow(50.0, -0.25) / std::sqrt(std::numbers::pi);
  const double amp = std::hypot(a.ai, a.ai_prime / std::sqrt(50.0));
  EXPECT_NEAR(amp / env, 1.0, 0.05);
}

TEST(Airy, MatchesBoostAcrossRanges) {
  for (double x = -30.0; x <= 12.0; x += 0.173) {
    const auto a = airy(x);
    const double ai = boost::math::airy_ai(x);
    const double aip = boost::math::airy_ai_prime(x);
    const double tol_ai = 1e-9 * std::max(std::abs(ai), 1e-3);
    const double tol_aip = 1e-9 * std::max(std::abs(aip), 1e-3);
    EXPECT_NEAR(a.ai, ai, tol_ai) << x;
    EXPECT_NEAR(a.ai_prime, aip, tol_aip) << x;
  }
}

TEST(Airy, ContourOracleAgrees) {
  for (double x : {-5.0, -2.0, -0.5, 1.0, 3.0}) {
    const auto a = airy(x);
    const auto c = airy_contour(x);
    EXPECT_NEAR(a.ai, c.ai, 1e-10) << x;
    EXPECT_NEAR(a.ai_prime, c.ai_prime, 1e-10) << x;
  }
}

TEST(Airy, DifferentialEquation) {
  // Richardson-extrapolated central differences of Ai'
  auto central = [](double x, double h) { return (airy(x + h).ai_prime - airy(x - h).ai_prime) / (2.0 * h); };
  const double h = 1e-3;
  for (double x = -12.0; x <= 8.0; x += 0.37) {
    const double d2 = (4.0 * central(x, 0.5 * h) - central(x, h)) / 3.0;
    EXPECT_NEAR(d2, x * airy(x).ai, 1e-8) << x;
  }
}

TEST(Airy, DomainLimit) { EXPECT_THROW(airy(1001.0), ValidationError); }

TEST(AiryKernel, Diagonal) {
  EXPECT_NEAR(airy_kernel(0.0, 0.0), 0.06698748377966, 1e-13);
  EXPECT_NEAR(airy_kernel(-25.0, -25.0) / (5.0 / std::numbers::pi), 1.0, 0.05);
}

TEST(AiryKernel, OffDiagonalSign) { EXPECT_NEAR(airy_kernel(0.0, 1.0), 0.021485503837038, 1e-12); }

TEST(AiryKernel, SpliceIsContinuous) {
  for (double x : {-3.0, 0.0, 2.0}) {
    const double inside = airy_kernel(x, x + 0.99e-4);
    const double outside = airy_kernel(x, x + 1.01e-4);
    // the jump across the splice is far below the first-order change over 2e-6
    EXPECT_NEAR(inside, outside, 2e-6 * (std::abs(airy(x).ai * airy(x).ai) + 1e-3));
  }
}

TEST(AiryKernel, Symmetric) {
  for (double x : {-4.0, -1.0, 0.5})
    for (double y : {-2.0, 0.0, 1.5}) EXPECT_NEAR(airy_kernel(x, y), airy_kernel(y, x), 1e-15);
}
