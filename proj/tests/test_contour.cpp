#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dgue/contour.hpp"

using namespace dgue;

TEST(MasterRoots, SingleAtomOutsideSupport) {
  const auto r = master_roots(AtomicSpectrum({0.0}), 3.0);
  ASSERT_EQ(r.roots.size(), 2u);
  EXPECT_NEAR(r.roots[0].real(), (3.0 - std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_NEAR(r.roots[1].real(), (3.0 + std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_NEAR(std::abs(r.outlier - (3.0 + std::sqrt(5.0)) / 2.0), 0.0, 1e-12);
}

TEST(MasterRoots, SingleAtomInsideSupport) {
  const auto r = master_roots(AtomicSpectrum({0.0}), 0.0);
  ASSERT_EQ(r.roots.size(), 2u);
  EXPECT_NEAR(std::abs(r.roots[0] - cplx(0.0, -1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.roots[1] - cplx(0.0, 1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.outlier - cplx(0.0, 1.0)), 0.0, 1e-12);
}

TEST(MasterRoots, TwoAtomsInterlace) {
  const auto r = master_roots(AtomicSpectrum({-1.0, 1.0}), 10.0);
  ASSERT_EQ(r.roots.size(), 3u);
  for (const auto& z : r.roots) EXPECT_EQ(z.imag(), 0.0);
  EXPECT_GT(r.roots[0].real(), -1.0);
  EXPECT_LT(r.roots[0].real(), 1.0);
  EXPECT_GT(r.roots[1].real(), 1.0);
  EXPECT_NEAR(r.outlier.real(), 9.9, 0.01);
  EXPECT_LE(r.max_residual, 1e-8);
}

TEST(MasterRoots, ConjugatePairsAndLargeK) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (std::size_t n : {50u, 300u}) {
    std::vector<double> h(n);
    for (auto& x : h) x = nd(rng);
    AtomicSpectrum s(h);
    for (double lam : {0.1, 5.0}) {
      const auto r = master_roots(s, lam);
      EXPECT_EQ(r.roots.size(), n + 1);
      double im = 0.0;
      for (const auto& z : r.roots) im += z.imag();
      EXPECT_NEAR(im, 0.0, 1e-8);
      const cplx branch = LevelCurve(s).branch(lam);
      EXPECT_LT(std::abs(r.outlier - branch), 1e-6);
    }
  }
}

TEST(MasterRoots, OutlierAsymptote) {
  const auto r = master_roots(AtomicSpectrum({-0.5, 0.2, 0.9}), 50.0);
  EXPECT_NEAR(r.outlier.real(), 50.0 - 1.0 / 50.0, 1e-3);
}

TEST(LevelCurve, SingleAtomIsUnitCircle) {
  LevelCurve c(AtomicSpectrum({0.0}));
  ASSERT_EQ(c.components().size(), 1u);
  EXPECT_NEAR(c.left_tip(), -1.0, 1e-14);
  EXPECT_NEAR(c.right_tip(), 1.0, 1e-14);
  for (double lam : {-1.9, -1.0, 0.0, 0.7, 1.99}) {
    const cplx z = c.branch(lam);
    EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
    EXPECT_NEAR(z.real(), lam / 2.0, 1e-12);
  }
  EXPECT_NEAR(c.branch(3.0).real(), (3.0 + std::sqrt(5.0)) / 2.0, 1e-12);
}

TEST(LevelCurve, GapsSplitComponents) {
  LevelCurve c(AtomicSpectrum({-3.0, -3.0, 3.0, 3.0}));
  EXPECT_EQ(c.components().size(), 2u);
  LevelCurve d(AtomicSpectrum({-0.5, 0.5}));
  EXPECT_EQ(d.components().size(), 1u);
}

TEST(Contours, UnitCircleAndAnchor) {
  AtomicSpectrum s({0.0});
  const auto e = right_critical_point(s);
  const auto cp = build_contours(s, e);
  ASSERT_EQ(cp.loops.size(), 1u);
  for (const auto& v : cp.loops[0].vertices) EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
  EXPECT_NEAR(cp.l_anchor, 1.0 + cp.eps_sep, 1e-14);
  EXPECT_NEAR(cp.eps_sep, 0.5, 1e-14);
  EXPECT_NEAR(winding_number(cp.loops[0].vertices, 0.0), 1.0, 1e-12);
}

TEST(Contours, TwoAtomsWinding) {
  AtomicSpectrum s({-1.0, 1.0});
  const auto cp = build_contours(s, right_critical_point(s));
  const auto d = check_contours(cp);
  ASSERT_EQ(d.winding.size(), 2u);
  EXPECT_NEAR(d.winding[0], 1.0, 1e-12);
  EXPECT_NEAR(d.winding[1], 1.0, 1e-12);
  EXPECT_TRUE(d.all_ok());
}

TEST(Contours, SeparatedAtomsGiveSeveralLoops) {
  AtomicSpectrum s({-3.0, -3.0, 3.0, 3.0});
  const auto cp = build_contours(s, right_critical_point(s));
  EXPECT_EQ(cp.loops.size(), 2u);
  const auto d = check_contours(cp);
  EXPECT_TRUE(d.winding_ok);
  EXPECT_TRUE(d.all_ok());
}

TEST(Contours, LeftEdge) {
  AtomicSpectrum s({-1.0, 0.3, 0.4, 2.0});
  const auto e = left_critical_point(s);
  const auto cp = build_contours(s, e);
  EXPECT_LT(cp.l_anchor, e.z_star.real());
  EXPECT_TRUE(check_contours(cp).all_ok());
}

TEST(Contours, RandomSpectraProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-1.5, 1.5);
  int done = 0;
  while (done < 10) {
    std::vector<double> h(20);
    for (auto& x : h) x = ud(rng);
    AtomicSpectrum s(h);
    const auto e = right_critical_point(s);
    if (e.z_star.real() - s.max() <= 0.3) continue;
    const auto d = check_contours(build_contours(s, e));
    EXPECT_TRUE(d.winding_ok);
    EXPECT_TRUE(d.lipschitz_ok) << d.max_chord_ratio;
    EXPECT_TRUE(d.length_ok);
    EXPECT_TRUE(d.monotone_L);
    EXPECT_TRUE(d.monotone_l);
    EXPECT_TRUE(d.tail_ok);
    EXPECT_TRUE(d.velocity_ok);
    EXPECT_NEAR(d.argmin_phase_L, e.z_star.real(), 0.05);
    ++done;
  }
}

TEST(Phase, Examples) {
  AtomicSpectrum s({0.0});
  const auto e = right_critical_point(s);
  const auto pf = make_phase(s, e, 2.0);
  EXPECT_NEAR(std::abs(phase(pf, 1.0)), 0.0, 1e-15);
  const cplx v = phase(pf, cplx(1.0, 1.0));
  EXPECT_NEAR(v.real(), 0.5 * std::log(2.0) - 0.5, 1e-14);
  EXPECT_NEAR(v.imag(), std::numbers::pi / 4.0 - 1.0, 1e-14);
  EXPECT_THROW(phase(pf, 0.0), DomainError);
}

TEST(Phase, RealPartVanishesAtCriticalPoint) {
  AtomicSpectrum s({-1.0, -0.2, 0.4, 1.1});
  const auto e = right_critical_point(s);
  EXPECT_NEAR(phase(make_phase(s, e), e.z_star).real(), 0.0, 1e-12);
}

TEST(Phase, BranchTracking) {
  AtomicSpectrum s({0.0});
  const auto pf = make_phase(s, right_critical_point(s), 2.0);
  std::vector<cplx> circle;
  for (int i = 0; i <= 64; ++i) circle.push_back(std::polar(1.0, 2.0 * std::numbers::pi * i / 64.0));
  const auto vals = phase_along(pf, circle);
  // a full turn adds 2 pi i to the logarithm
  EXPECT_NEAR((vals.back() - vals.front()).imag(), 2.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR((vals.back() - vals.front()).real(), 0.0, 1e-12);
  EXPECT_THROW(phase_along(pf, {cplx(1.0, 0.1), cplx(-1.0, -0.1)}), ValidationError);
}

TEST(Phase, TailCheckHeightBounded) {
  for (const auto& h : {std::vector<double>{0.0}, std::vector<double>{-1.0, 1.0}, std::vector<double>{-2.0, 0.1, 0.2}}) {
    AtomicSpectrum s(h);
    EXPECT_LE(tail_check_height(s, right_critical_point(s)), 4.0);
  }
}
