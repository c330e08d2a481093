#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dgue/source_io.hpp"
#include "dgue/spectrum.hpp"

using namespace dgue;

TEST(Stieltjes, SingleAtom) {
  AtomicSpectrum s({0.0});
  const cplx f = stieltjes_atomic(s, {0.0, 2.0});
  EXPECT_NEAR(f.real(), 0.0, 1e-15);
  EXPECT_NEAR(f.imag(), 0.5, 1e-15);
}

TEST(Stieltjes, TwoAtomsRealPoint) {
  AtomicSpectrum s({1.0, -1.0});
  EXPECT_NEAR(stieltjes_atomic(s, 3.0).real(), -3.0 / 8.0, 1e-15);
  EXPECT_EQ(s.atoms()[0], -1.0);
}

TEST(Stieltjes, AtomCollisionIsDomainError) {
  AtomicSpectrum s({0.0, 1.0});
  EXPECT_THROW(stieltjes_atomic(s, 1.0), DomainError);
  EXPECT_THROW(stieltjes_atomic(s, 1.0 + 1e-15), DomainError);
  EXPECT_NO_THROW(stieltjes_atomic(s, 1.0 + 1e-12));
}

TEST(Stieltjes, SemicircleQuantilesApproachLimit) {
  const auto sc = semicircle(1.0);
  AtomicSpectrum s(semicircle_quantiles(100, 1.0));
  const double exact = (-5.0 + std::sqrt(21.0)) / 2.0;
  EXPECT_NEAR(limit_stieltjes(*sc, 5.0).real(), exact, 1e-14);
  EXPECT_LT(std::abs(stieltjes_atomic(s, 5.0) - exact), 1e-1);
}

TEST(Stieltjes, IidAtomsErrorDecreases) {
  // atoms drawn i.i.d. from the semicircle by inverse-CDF on a fixed uniform stream
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const cplx z{0.5, 1.0};
  const cplx exact = limit_stieltjes(*semicircle(1.0), z);
  auto draw = [&](std::size_t n) {
    std::vector<double> a(n);
    for (auto& x : a) {
      const double p = u(rng);
      double lo = -2.0, hi = 2.0;
      for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (lo + hi);
        (semicircle_cdf(m, 1.0) < p ? lo : hi) = m;
      }
      x = 0.5 * (lo + hi);
    }
    return AtomicSpectrum(a);
  };
  // average over repetitions so the monotone trend is not masked by noise
  std::vector<double> err;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    double e = 0.0;
    for (int r = 0; r < 20; ++r) e += std::abs(stieltjes_atomic(draw(n), z) - exact);
    err.push_back(e / 20);
  }
  EXPECT_GT(err[0], err[1]);
  EXPECT_GT(err[1], err[2]);
}

TEST(LimitStieltjes, Examples) {
  const auto pm = point_masses({0.0}, {1.0});
  const cplx f = limit_stieltjes(*pm, {0.0, 2.0});
  EXPECT_NEAR(std::abs(f - cplx(0.0, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(limit_stieltjes(*semicircle(1.0), 3.0).real(), (-3.0 + std::sqrt(5.0)) / 2.0, 1e-14);
  EXPECT_NEAR(limit_stieltjes(*two_point(1.0), 2.0).real(), -2.0 / 3.0, 1e-15);
}

TEST(LimitStieltjes, OnSupportIsDomainError) {
  EXPECT_THROW(limit_stieltjes(*semicircle(1.0), 0.3), DomainError);
  EXPECT_THROW(limit_stieltjes(*two_point(1.0), 1.0), DomainError);
  EXPECT_NO_THROW(limit_stieltjes(*semicircle(1.0), cplx(0.3, 1e-3)));
}

TEST(LimitStieltjes, TotalMassAsymptote) {
  for (const auto& m : {point_masses({0.0}, {1.0}), semicircle(1.0), semicircle(3.0), two_point(1.5)}) {
    for (const cplx z : {cplx(1e6, 0.0), cplx(0.0, 1e6), cplx(-1e6, 0.0), cplx(7e5, -7e5)}) {
      const cplx scaled = limit_stieltjes(*m, z) * z;
      EXPECT_NEAR(std::abs(scaled + 1.0), 0.0, 1e-5);
    }
  }
}

TEST(LimitStieltjes, Herglotz) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> re(-6.0, 6.0), im(1e-6, 10.0);
  AtomicSpectrum atoms(semicircle_quantiles(50, 1.0));
  const auto meas = {semicircle(1.0), two_point(1.0), point_masses({0.0}, {1.0})};
  for (int i = 0; i < 1000; ++i) {
    const cplx z{re(rng), im(rng)};
    for (const auto& m : meas) EXPECT_GT(limit_stieltjes(*m, z).imag(), 0.0);
    EXPECT_GT(stieltjes_atomic(atoms, z).imag(), 0.0);
  }
}

TEST(Moment, Examples) {
  EXPECT_NEAR(moment_integral(*point_masses({0.0}, {1.0}), 1.0, 2).real(), 1.0, 1e-15);
  const double z = 3.0 * std::sqrt(2.0) / 2.0;
  const auto sc = semicircle(1.0);
  EXPECT_NEAR(moment_integral(*sc, z, 2).real(), 1.0, 1e-13);
  EXPECT_NEAR(moment_integral(*sc, z, 3).real(), 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_THROW(moment_integral(*sc, 1.0, 2), DomainError);
  EXPECT_THROW(moment_integral(*sc, 3.0, 5), ValidationError);
}

TEST(Moment, FirstMomentIsMinusStieltjes) {
  for (const auto& m : {semicircle(2.0), two_point(0.7)}) {
    const cplx z{0.3, 0.8};
    EXPECT_NEAR(std::abs(m->moment(z, 1) + m->stieltjes(z)), 0.0, 1e-15);
  }
}

TEST(Moment, FiniteDifferenceChain) {
  const double h = 1e-4;
  for (const auto& m : {semicircle(1.0), two_point(1.0), point_masses({-1.0, 0.5, 2.0}, {0.2, 0.3, 0.5})}) {
    for (const cplx z : {cplx(3.1, 0.0), cplx(0.4, 1.3), cplx(-2.5, -0.7)}) {
      for (int k = 2; k <= 4; ++k) {
        const cplx fd = -(m->moment(z + h, k - 1) - m->moment(z - h, k - 1)) / (2.0 * h) / double(k - 1);
        const cplx exact = m->moment(z, k);
        EXPECT_LT(std::abs(fd - exact), 1e-6 * std::abs(exact)) << "k=" << k;
      }
    }
  }
}

TEST(Measure, ReflectedMatchesDefinition) {
  const auto m = point_masses({-1.0, 0.5, 2.0}, {0.2, 0.3, 0.5});
  const auto r = reflected(m);
  const cplx z{0.7, 0.4};
  EXPECT_NEAR(std::abs(r->stieltjes(z) + m->stieltjes(-z)), 0.0, 1e-15);
  EXPECT_NEAR(r->support_max(), 1.0, 0.0);
  for (int k = 1; k <= 4; ++k) {
    cplx direct = 0.0;
    direct += 0.2 * std::pow(z - 1.0, -k) + 0.3 * std::pow(z + 0.5, -k) + 0.5 * std::pow(z + 2.0, -k);
    EXPECT_NEAR(std::abs(r->moment(z, k) - direct), 0.0, 1e-14);
  }
}

TEST(Measure, CustomBranchValidated) {
  const auto good = custom_measure({{-2.0, 2.0}},
                                   [](cplx z) { return (-z + std::sqrt(z - 2.0) * std::sqrt(z + 2.0)) / 2.0; },
                                   [](cplx z, int k) { return semicircle(1.0)->moment(z, k); });
  EXPECT_NEAR(good->stieltjes(3.0).real(), (-3.0 + std::sqrt(5.0)) / 2.0, 1e-14);
  auto wrong_branch = [] {
    return custom_measure({{-2.0, 2.0}}, [](cplx z) { return (-z - std::sqrt(z - 2.0) * std::sqrt(z + 2.0)) / 2.0; },
                          [](cplx, int) { return cplx(0.0); });
  };
  EXPECT_THROW(wrong_branch(), ValidationError);
}

TEST(Measure, ValidationErrors) {
  EXPECT_THROW(point_masses({0.0, 1.0}, {0.5, 0.6}), ValidationError);
  EXPECT_THROW(point_masses({0.0}, {-1.0}), ValidationError);
  EXPECT_THROW(semicircle(0.0), ValidationError);
  EXPECT_THROW(AtomicSpectrum({}), ValidationError);
  EXPECT_THROW(AtomicSpectrum({NAN}), ValidationError);
}

TEST(AtomicSpectrum, MultiplicityMerged) {
  AtomicSpectrum s({0.0, 0.0, 1.0, 0.0});
  ASSERT_EQ(s.distinct().size(), 2u);
  EXPECT_DOUBLE_EQ(s.weights()[0], 0.75);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_NEAR(stieltjes_atomic(s, 2.0).real(), 0.75 / -2.0 + 0.25 / -1.0, 1e-15);
}

TEST(SourceJson, RoundTripIsByteStable) {
  for (const auto& spec : {SourceSpec::atomic({0.5, -1.0, 0.1}), SourceSpec::semicircle(1.0), SourceSpec::two_point(1.0)}) {
    const std::string a = dump_source(spec);
    const std::string b = dump_source(parse_source(a));
    EXPECT_EQ(a, b);
  }
  EXPECT_EQ(dump_source(SourceSpec::two_point(1.0)), "{\n  \"a\": 1.0,\n  \"kind\": \"two_point\"\n}\n");
}

TEST(SourceJson, RejectsBadInput) {
  EXPECT_THROW(parse_source("{\"kind\": \"semicircle\", \"variance\": 1, \"extra\": 2}"), ValidationError);
  EXPECT_THROW(parse_source("{\"kind\": \"semicircle\", \"variance\": -1}"), ValidationError);
  EXPECT_THROW(parse_source("{\"kind\": \"cauchy\"}"), ValidationError);
  EXPECT_THROW(parse_source("{\"kind\": \"atomic\", \"atoms\": []}"), ValidationError);
  EXPECT_THROW(parse_source("not json"), ValidationError);
}

TEST(SourceJson, FiniteAtoms) {
  const auto tp = SourceSpec::two_point(2.0).atoms_for(4);
  EXPECT_EQ(tp.atoms()[0], -2.0);
  EXPECT_EQ(tp.atoms()[3], 2.0);
  EXPECT_THROW(SourceSpec::atomic({1.0, 2.0}).atoms_for(3), ValidationError);
  const auto rep = SourceSpec::atomic({0.0}).atoms_for(7);
  EXPECT_EQ(rep.size(), 7u);
  EXPECT_EQ(rep.distinct().size(), 1u);
  const auto q = SourceSpec::semicircle(1.0).atoms_for(1000);
  EXPECT_NEAR(semicircle_cdf(q.atoms()[0], 1.0), 0.5 / 1000, 1e-12);
}
