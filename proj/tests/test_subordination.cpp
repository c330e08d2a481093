#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dgue/edge.hpp"
#include "dgue/subordination.hpp"

using namespace dgue;

TEST(Subordination, PointMassAtI) {
  const auto sol = solve_subordination(*point_masses({0.0}, {1.0}), {0.0, 1.0}, 1e-13);
  EXPECT_NEAR(sol.f.real(), 0.0, 1e-12);
  EXPECT_NEAR(sol.f.imag(), (std::sqrt(5.0) - 1.0) / 2.0, 1e-12);
  EXPECT_LE(sol.residual, 1e-13);
}

TEST(Subordination, SemicircleSource) {
  const auto sol = solve_subordination(*semicircle(1.0), {0.0, 4.0}, 1e-13);
  EXPECT_NEAR(sol.f.imag(), (std::sqrt(24.0) - 4.0) / 4.0, 1e-12);
  EXPECT_NEAR(sol.f.real(), 0.0, 1e-12);
}

TEST(Subordination, FarFieldAsymptote) {
  for (const auto& m : {point_masses({0.0}, {1.0}), semicircle(1.0), two_point(1.0)}) {
    const cplx z{0.0, 1e6};
    const auto sol = solve_subordination(*m, z, 1e-13);
    EXPECT_NEAR(std::abs(sol.f * z + 1.0), 0.0, 1e-5);
  }
}

TEST(Subordination, HerglotzAndResidual) {
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.5}) {
    for (double y : {1e-3, 0.1, 2.0}) {
      const auto sol = solve_subordination(*two_point(1.0), {x, y}, 1e-12);
      EXPECT_GE(sol.f.imag(), 0.0);
      EXPECT_LE(sol.residual, 1e-12);
    }
  }
}

TEST(Subordination, Preconditions) {
  EXPECT_THROW(solve_subordination(*semicircle(1.0), {0.0, 0.0}, 1e-10), DomainError);
  EXPECT_THROW(solve_subordination(*semicircle(1.0), {0.0, 1.0}, 0.0), ValidationError);
}

TEST(Density, Examples) {
  const auto gue = point_masses({0.0}, {1.0});
  EXPECT_NEAR(density(*gue, 0.0), 1.0 / std::numbers::pi, 1e-6);
  EXPECT_NEAR(density(*gue, 3.0), 0.0, 1e-8);
  EXPECT_NEAR(density(*semicircle(1.0), 0.0), std::sqrt(8.0) / (4.0 * std::numbers::pi), 1e-6);
}

TEST(Density, LadderValidation) {
  const auto gue = point_masses({0.0}, {1.0});
  EXPECT_THROW(density(*gue, 0.0, {1e-2, 1e-3}), ValidationError);
  EXPECT_THROW(density(*gue, 0.0, {1e-3, 1e-2, 1e-4}), ValidationError);
}

TEST(Density, IntegratesToOneAndNonnegative) {
  for (const auto& m : {point_masses({0.0}, {1.0}), semicircle(1.0), two_point(1.0)}) {
    const double lo = m->support_min() - 2.5;
    const double hi = m->support_max() + 2.5;
    const double h = 1e-3;
    double total = 0.0;
    double prev = density(*m, lo);
    for (double x = lo + h; x <= hi + 1e-12; x += h) {
      const double r = density(*m, x);
      EXPECT_GE(r, 0.0);
      total += 0.5 * h * (prev + r);
      prev = r;
    }
    EXPECT_NEAR(total, 1.0, 1e-3);
  }
}

TEST(Density, SquareRootEdgeLaw) {
  for (const auto& m : {point_masses({0.0}, {1.0}), semicircle(1.0), two_point(1.0)}) {
    const auto e = find_limiting_edge(m);
    double prev_dev = 1e9;
    for (double delta : {1e-2, 1e-3, 1e-4}) {
      const double rho = density(*m, e.lambda0 - delta, {delta * 1e-2, delta * 1e-3, delta * 1e-4});
      const double ratio = rho * std::numbers::pi / (e.gamma * std::sqrt(delta));
      const double dev = std::abs(ratio - 1.0);
      EXPECT_LT(dev, prev_dev);
      prev_dev = dev;
    }
    EXPECT_LT(prev_dev, 0.05);
  }
}
