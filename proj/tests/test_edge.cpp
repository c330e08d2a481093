#include <gtest/gtest.h>

#include <cmath>

#include "dgue/edge.hpp"

using namespace dgue;

TEST(LimitingEdge, Gue) {
  const auto e = find_limiting_edge(point_masses({0.0}, {1.0}));
  EXPECT_NEAR(e.z0, 1.0, 1e-12);
  EXPECT_NEAR(e.lambda0, 2.0, 1e-12);
  EXPECT_NEAR(e.gamma, 1.0, 1e-12);
  EXPECT_LE(e.residual_eq, 1e-12);
  EXPECT_GT(e.clearance, 0.0);
  EXPECT_FALSE(e.ambiguous);
}

TEST(LimitingEdge, Semicircle) {
  const auto e = find_limiting_edge(semicircle(1.0));
  EXPECT_NEAR(e.z0, 3.0 * std::sqrt(2.0) / 2.0, 1e-10);
  EXPECT_NEAR(e.lambda0, 2.0 * std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(e.gamma, std::pow(2.0 * std::sqrt(2.0), -0.5), 1e-10);
  EXPECT_GT(e.clearance, 0.0);
}

TEST(LimitingEdge, TwoAtoms) {
  const auto e = find_limiting_edge(two_point(1.0));
  EXPECT_NEAR(e.z0, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(e.lambda0, 1.5 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(e.gamma, 0.877382675301662, 1e-12);
  EXPECT_GT(e.clearance, 0.0);
}

TEST(LimitingEdge, LeftByReflection) {
  const auto m = point_masses({-1.0, 0.5}, {0.3, 0.7});
  const auto r = find_limiting_edge(m, std::nullopt, Side::Right);
  const auto l = find_limiting_edge(reflected(m), std::nullopt, Side::Left);
  EXPECT_NEAR(l.lambda0, -r.lambda0, 1e-12);
  EXPECT_NEAR(l.gamma, r.gamma, 1e-12);
  const auto l2 = find_limiting_edge(m, std::nullopt, Side::Left);
  const auto r2 = find_limiting_edge(reflected(m), std::nullopt, Side::Right);
  EXPECT_NEAR(l2.lambda0, -r2.lambda0, 1e-12);
  EXPECT_NEAR(l2.z0, -r2.z0, 1e-12);
  EXPECT_NEAR(l2.gamma, r2.gamma, 1e-12);
  EXPECT_EQ(l2.side, Side::Left);
  EXPECT_LT(l2.z0, -1.0);
}

TEST(LimitingEdge, BracketWithoutSignChange) {
  EXPECT_THROW(find_limiting_edge(semicircle(1.0), Interval{5.0, 6.0}), DomainError);
}

TEST(LimitingEdge, AmbiguousBracketIsFlagged) {
  // two well separated atoms: m2 = 1 has solutions in the gap and outside
  const auto m = two_point(3.0);
  const auto e = find_limiting_edge(m, Interval{-2.9, 6.0});
  EXPECT_TRUE(e.ambiguous);
  const auto plain = find_limiting_edge(m);
  EXPECT_NEAR(e.lambda0, plain.lambda0, 1e-10);
}

TEST(CriticalPoint, SingleAtom) {
  const auto e = find_critical_point(AtomicSpectrum({0.0}), 1.0, 0.5);
  EXPECT_NEAR(e.z_star.real(), 1.0, 1e-14);
  EXPECT_NEAR(e.lambda0n, 2.0, 1e-14);
  EXPECT_NEAR(e.gamma_n, 1.0, 1e-14);
}

TEST(CriticalPoint, TwoAtoms) {
  const auto e = find_critical_point(AtomicSpectrum({-1.0, 1.0}), std::sqrt(3.0), 0.5);
  EXPECT_NEAR(e.z_star.real(), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(e.lambda0n, 1.5 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(e.gamma_n, 0.877382675301662, 1e-10);
  EXPECT_LE(e.residual, 1e-10);
}

TEST(CriticalPoint, SemicircleQuantiles) {
  AtomicSpectrum s(semicircle_quantiles(1000, 1.0));
  const auto e = find_critical_point(s, 3.0 * std::sqrt(2.0) / 2.0, 0.1);
  EXPECT_LE(std::abs(e.z_star.real() - 3.0 * std::sqrt(2.0) / 2.0), 1e-2);
  EXPECT_LE(std::abs(e.lambda0n - 2.0 * std::sqrt(2.0)), 1e-2);
  EXPECT_NEAR(right_critical_point(s).z_star.real(), e.z_star.real(), 1e-12);
}

TEST(CriticalPoint, Errors) {
  EXPECT_THROW(find_critical_point(AtomicSpectrum({0.0}), 0.2, 0.5), DomainError);
  EXPECT_THROW(find_critical_point(AtomicSpectrum({0.0}), 0.9, 0.05), ConvergenceError);
}

TEST(CriticalPoint, LeftEdge) {
  AtomicSpectrum s({-1.0, 0.0, 2.0});
  const auto l = left_critical_point(s);
  const auto r = right_critical_point(s.reflected());
  EXPECT_NEAR(l.z_star.real(), -r.z_star.real(), 1e-14);
  EXPECT_NEAR(l.lambda0n, -r.lambda0n, 1e-14);
  EXPECT_NEAR(l.gamma_n, r.gamma_n, 1e-14);
  const auto n = find_critical_point(s, l.z_star, 0.3);
  EXPECT_EQ(n.side, Side::Left);
  EXPECT_NEAR(n.gamma_n, l.gamma_n, 1e-12);
}

TEST(Consistency, QuantileFamiliesConverge) {
  for (const auto& src : {semicircle(1.0), two_point(1.0)}) {
    const auto lim = find_limiting_edge(src);
    double prev_l = 1e9, prev_g = 1e9;
    for (std::size_t n : {100u, 1000u, 10000u}) {
      std::vector<double> atoms;
      if (src->kind() == MeasureKind::Semicircle) {
        atoms = semicircle_quantiles(n, 1.0);
      } else {
        for (std::size_t i = 0; i < n; ++i) atoms.push_back(i < n / 2 ? -1.0 : 1.0);
        atoms[0] = -1.0 - 1.0 / double(n);  // perturbed so the family actually varies with n
      }
      const auto e = right_critical_point(AtomicSpectrum(atoms));
      const double dl = std::abs(e.lambda0n - lim.lambda0);
      const double dg = std::abs(e.gamma_n - lim.gamma);
      EXPECT_LT(dl, prev_l);
      EXPECT_LT(dg, prev_g);
      prev_l = dl;
      prev_g = dg;
    }
  }
}
