#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dgue/airy.hpp"
#include "dgue/contour.hpp"
#include "dgue/ensemble.hpp"
#include "dgue/kernel.hpp"

using namespace dgue;

namespace {

EnsembleSource gue_source(std::size_t n) { return EnsembleSource::fixed(AtomicSpectrum(std::vector<double>(n, 0.0))); }

const EdgeScaling kGueEdge{2.0, 1.0, Side::Right};

}  // namespace

TEST(SampleGue, Hermitian) {
  const auto w = sample_gue(2, 99);
  EXPECT_EQ(w(0, 1), std::conj(w(1, 0)));
  EXPECT_EQ(w(0, 0).imag(), 0.0);
  const auto big = sample_gue(30, 5);
  EXPECT_EQ((big - big.adjoint()).norm(), 0.0);
}

TEST(SampleGue, SecondMoments) {
  // one off-diagonal entry across 1e5 independent samples
  cplx m2 = 0.0;
  double abs2 = 0.0, diag2 = 0.0;
  const int draws = 100000;
  for (int s = 0; s < draws; ++s) {
    const auto w = sample_gue(2, 11, s);
    m2 += w(0, 1) * w(0, 1);
    abs2 += std::norm(w(0, 1));
    diag2 += std::norm(w(1, 1));
  }
  EXPECT_NEAR(abs2 / draws, 1.0, 0.01);
  EXPECT_LT(std::abs(m2 / double(draws)), 0.01);
  EXPECT_NEAR(diag2 / draws, 1.0, 0.02);
}

TEST(SampleWigner, EntriesAreRademacher) {
  const auto w = sample_wigner_source(6, 3);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(std::abs(w(i, i).real()), 1.0);
    for (int j = i + 1; j < 6; ++j) {
      EXPECT_NEAR(std::norm(w(i, j)), 1.0, 1e-15);
      EXPECT_NEAR(std::abs(w(i, j).real()), std::sqrt(0.5), 1e-15);
    }
  }
}

TEST(SampleDgue, ScalarCase) {
  const double h = 0.7;
  const auto s = sample_dgue(EnsembleSource::fixed(AtomicSpectrum({h})), 1, 17, 4);
  const double g = sample_gue(1, 17, 4)(0, 0).real();
  ASSERT_EQ(s.eigenvalues.size(), 1u);
  EXPECT_DOUBLE_EQ(s.eigenvalues[0], h + g);
}

TEST(SampleDgue, ReproducibleAndTracePreserving) {
  const auto src = EnsembleSource::fixed(AtomicSpectrum({-1.0, -0.5, 0.0, 0.5, 1.0, 1.0, 2.0, 3.0}));
  const auto a = sample_dgue(src, 8, 123, 7);
  const auto b = sample_dgue(src, 8, 123, 7);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_NE(a.eigenvalues, sample_dgue(src, 8, 123, 8).eigenvalues);
  EXPECT_TRUE(std::is_sorted(a.eigenvalues.begin(), a.eigenvalues.end()));
  double sum = 0.0;
  for (double l : a.eigenvalues) sum += l;
  EXPECT_NEAR(sum, a.trace, 1e-10 * std::max(1.0, std::abs(a.trace)));
  EXPECT_THROW(sample_dgue(src, 9, 1), ValidationError);
}

TEST(SampleDgue, BatchIndependentOfThreads) {
  const auto src = gue_source(20);
  const auto a = sample_batch(src, 20, 12, 9, 1);
  const auto b = sample_batch(src, 20, 12, 9, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].eigenvalues, b[i].eigenvalues);
}

TEST(SampleDgue, SpectralEdges) {
  const auto g = sample_dgue(gue_source(500), 500, 2024);
  EXPECT_NEAR(g.eigenvalues.back(), 2.0, 0.2);
  const auto w = sample_dgue(EnsembleSource::wigner(), 500, 2024);
  EXPECT_NEAR(w.eigenvalues.back(), 2.0 * std::sqrt(2.0), 0.2);
}

TEST(EmpiricalGap, TrivialIntervals) {
  const auto b = sample_batch(gue_source(30), 30, 50, 1);
  const auto st = empirical_gap(b, kGueEdge, {{0.5, 0.5}, {-1e6, INFINITY}});
  EXPECT_EQ(st.gap_estimates.at({0.5, 0.5}).frequency, 1.0);
  EXPECT_EQ(st.gap_estimates.at({-1e6, INFINITY}).frequency, 0.0);
  EXPECT_EQ(st.gap_estimates.at({-1e6, INFINITY}).standard_error, 0.0);
  EXPECT_THROW(empirical_gap({}, kGueEdge, {{0.0, 1.0}}), ValidationError);
}

TEST(EmpiricalFunctional, Reductions) {
  const auto b = sample_batch(gue_source(40), 40, 400, 8);
  const auto zero = empirical_functional(b, kGueEdge, {[](double) { return 0.0; }, -5.0, 5.0, {}});
  EXPECT_EQ(zero.mean, 1.0);
  const auto ind = empirical_functional(b, kGueEdge, scaled_indicator(1.0, -2.0, 1e9));
  const auto gap = empirical_gap(b, kGueEdge, {{-2.0, 1e9}});
  EXPECT_DOUBLE_EQ(ind.mean, gap.gap_estimates.at({-2.0, 1e9}).frequency);
}

TEST(EmpiricalOnePoint, MatchesAiryDiagonal) {
  // n = 200, 1e4 samples; bin [-0.5, 0.5] against A(0, 0), deep bins against sqrt(-xi)/pi
  const auto b = sample_batch(gue_source(200), 200, 10000, 31337);
  const auto h = empirical_one_point(b, kGueEdge, {-22.0, -20.0, -0.5, 0.5, 6.0, 8.0});
  // density of the bin [-0.5, 0.5] against the bin average of A(x, x)
  const auto q = gauss_legendre(16, -0.5, 0.5);
  double a = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) a += q.weights[i] * airy_kernel(q.nodes[i], q.nodes[i]);
  EXPECT_NEAR(h.density[2], a, 0.1 * a);
  EXPECT_NEAR(h.density[0], std::sqrt(21.0) / std::numbers::pi, 0.15 * std::sqrt(21.0) / std::numbers::pi);
  EXPECT_LT(h.density[4], 1e-3);
  EXPECT_THROW(empirical_one_point(b, kGueEdge, {0.0, 0.05}), ValidationError);
}

TEST(EmpiricalOnePoint, SingleEigenvalueMatchesExactKernel) {
  // n = 1: the eigenvalue histogram is K_1(lambda, lambda) from the contour evaluation
  const AtomicSpectrum s({0.0});
  const auto b = sample_batch(EnsembleSource::fixed(s), 1, 1000000, 2);
  const EdgeScaling identity{0.0, 1.0, Side::Right};  // xi = lambda for n = 1
  std::vector<double> edges;
  for (double x = -2.5; x <= 2.5 + 1e-12; x += 0.5) edges.push_back(x);
  const auto h = empirical_one_point(b, identity, edges);
  const auto e = right_critical_point(s);
  const auto cp = build_contours(s, e);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const auto q = gauss_legendre(8, edges[k], edges[k + 1]);
    double mean = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) mean += q.weights[i] * kernel_evaluate(cp, q.nodes[i], q.nodes[i]).value().real();
    mean /= edges[k + 1] - edges[k];
    EXPECT_NEAR(h.density[k], mean, 3.0 * h.standard_error[k]) << "bin " << k;
  }
}
