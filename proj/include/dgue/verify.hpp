#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dgue/airy.hpp"
#include "dgue/contour.hpp"
#include "dgue/edge.hpp"
#include "dgue/ensemble.hpp"
#include "dgue/fredholm.hpp"
#include "dgue/kernel.hpp"
#include "dgue/source_io.hpp"
#include "dgue/subordination.hpp"

namespace dgue {

struct CheckResult {
  std::string id;
  std::string title;
  bool pass = false;
  std::string measured;
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds, 0 for none
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = default_threads();
  std::size_t mc_samples = 10000;
};

struct Check {
  std::string id;
  std::string title;
  double time_limit;
  std::function<bool(std::ostringstream&)> run;
};

namespace detail {

inline AtomicSpectrum zeros(std::size_t n) { return AtomicSpectrum(std::vector<double>(n, 0.0)); }

inline double kernel_diag(const AtomicSpectrum& s, double x) {
  const auto cp = build_contours(s, right_critical_point(s));
  return kernel_evaluate(cp, x, x).value().real();
}

inline bool edge_constants(std::ostringstream& m, const MeasurePtr& meas, double l0, double z0, double g, double tol) {
  const auto e = find_limiting_edge(meas);
  const double dl = std::abs(e.lambda0 - l0), dz = std::abs(e.z0 - z0), dg = std::abs(e.gamma - g);
  const double res = std::abs(moment_integral(*meas, e.z0, 2).real() - 1.0);
  m << "lambda0=" << e.lambda0 << " z0=" << e.z0 << " gamma=" << e.gamma << " max_err=" << std::max({dl, dz, dg})
    << " residual=" << res;
  return dl <= tol && dz <= tol && dg <= tol && res <= 1e-10;
}

inline bool square_root_law(std::ostringstream& m, const MeasurePtr& meas, const char* name) {
  const auto e = find_limiting_edge(meas);
  double prev = INFINITY, ratio = 0.0;
  bool monotone = true;
  for (double d : {1e-2, 1e-3, 1e-4}) {
    const double rho = density(*meas, e.lambda0 - d, {d * 1e-2, d * 1e-3, d * 1e-4});
    ratio = rho * std::numbers::pi / (e.gamma * std::sqrt(d));
    monotone = monotone && std::abs(ratio - 1.0) < prev;
    prev = std::abs(ratio - 1.0);
  }
  m << name << ": ratio(1e-4)=" << ratio << (monotone ? " monotone; " : " NOT monotone; ");
  return monotone && ratio >= 0.95 && ratio <= 1.05;
}

/// sup over the 7x7 grid of |gauged rescaled K_n - A|; the Airy variable is (gamma_n n)^{2/3} (lambda - lambda0n).
inline double airy_sup_error(const AtomicSpectrum& s, unsigned threads) {
  const auto e = right_critical_point(s);
  const auto cp = build_contours(s, e);
  const auto pf = make_phase(s, e);
  KernelOptions o;
  o.window = 1.0;
  const double g23 = std::pow(e.gamma_n, 2.0 / 3.0);
  std::vector<double> err(49);
  parallel_for(49, threads, [&](std::size_t k) {
    const double xi = -4.0 + static_cast<double>(k / 7), eta = -4.0 + static_cast<double>(k % 7);
    const cplx v = kernel_rescaled(s, cp, pf, e, xi / g23, eta / g23, o) / g23;
    err[k] = std::abs(v - airy_kernel(xi, eta));
  });
  return *std::max_element(err.begin(), err.end());
}

}  // namespace detail

/// Fast checks with closed-form or structural answers.
inline std::vector<Check> quick_suite(const SuiteOptions& opt = {}) {
  std::vector<Check> c;
  c.push_back({"Q1", "empty interval has gap probability 1", 1.0, [](std::ostringstream& m) {
                 const double v = fredholm_gap({0.7, 0.7}).value;
                 m << "det=" << v;
                 return v == 1.0;
               }});
  c.push_back({"Q2", "Airy kernel symmetric", 1.0, [](std::ostringstream& m) {
                 double d = 0.0;
                 for (double x : {-3.0, -0.5, 0.0, 1.2})
                   for (double y : {-2.0, 0.3, 2.5}) d = std::max(d, std::abs(airy_kernel(x, y) - airy_kernel(y, x)));
                 m << "max_asym=" << d;
                 return d <= 1e-14;
               }});
  c.push_back({"Q3", "phase vanishes at the critical point", 1.0, [](std::ostringstream& m) {
                 const AtomicSpectrum s({0.0});
                 const auto e = right_critical_point(s);
                 const double v = std::abs(phase(make_phase(s, e, 2.0), 1.0));
                 m << "|S(1)|=" << v;
                 return v <= 1e-15;
               }});
  c.push_back({"Q4", "sampled W is Hermitian", 1.0, [opt](std::ostringstream& m) {
                 const auto w = sample_gue(2, opt.seed);
                 const bool ok = w(0, 1) == std::conj(w(1, 0)) && w(0, 0).imag() == 0.0;
                 m << "W01=" << w(0, 1).real() << (w(0, 1).imag() < 0 ? "" : "+") << w(0, 1).imag() << "i";
                 return ok;
               }});
  c.push_back({"Q5", "scalar ensemble is h + g", 1.0, [opt](std::ostringstream& m) {
                 const auto s = sample_dgue(EnsembleSource::fixed(AtomicSpectrum({0.7})), 1, opt.seed);
                 const double g = sample_gue(1, opt.seed)(0, 0).real();
                 m << "lambda=" << s.eigenvalues[0];
                 return s.eigenvalues[0] == 0.7 + g;
               }});
  c.push_back({"Q6", "trivial gap intervals and phi = 0", 5.0, [opt](std::ostringstream& m) {
                 const auto b = sample_batch(EnsembleSource::fixed(detail::zeros(20)), 20, 20, opt.seed, opt.threads);
                 const EdgeScaling edge{2.0, 1.0, Side::Right};
                 const auto st = empirical_gap(b, edge, {{0.5, 0.5}, {-1e6, INFINITY}});
                 const double f = empirical_functional(b, edge, {[](double) { return 0.0; }, -5.0, 5.0, {}}).mean;
                 const double p0 = st.gap_estimates.at({0.5, 0.5}).frequency;
                 const double p1 = st.gap_estimates.at({-1e6, INFINITY}).frequency;
                 m << "empty=" << p0 << " everything=" << p1 << " phi0=" << f;
                 return p0 == 1.0 && p1 == 0.0 && f == 1.0;
               }});
  c.push_back({"Q7", "single eigenvalue kernel is the normal density", 5.0, [](std::ostringstream& m) {
                 const double v = detail::kernel_diag(detail::zeros(1), 0.0);
                 const double want = 1.0 / std::sqrt(2.0 * std::numbers::pi);
                 m << "K1(0,0)=" << v << " err=" << std::abs(v - want);
                 return std::abs(v - want) <= 1e-6;
               }});
  return c;
}

/// The acceptance criteria; the Monte Carlo checks draw from opt.seed.
inline std::vector<Check> full_suite(const SuiteOptions& opt) {
  std::vector<Check> c;
  c.push_back({"AC1", "edge constants, GUE source", 1.0, [](std::ostringstream& m) {
                 return detail::edge_constants(m, point_masses({0.0}, {1.0}), 2.0, 1.0, 1.0, 1e-10);
               }});
  c.push_back({"AC2", "edge constants, semicircle source", 1.0, [](std::ostringstream& m) {
                 const double r2 = std::sqrt(2.0);
                 return detail::edge_constants(m, semicircle(1.0), 2.0 * r2, 1.5 * r2, 1.0 / std::sqrt(2.0 * r2), 1e-8);
               }});
  c.push_back({"AC3", "square-root edge law", 10.0, [](std::ostringstream& m) {
                 const bool a = detail::square_root_law(m, point_masses({0.0}, {1.0}), "gue");
                 const bool b = detail::square_root_law(m, semicircle(1.0), "semicircle");
                 return a && b;
               }});
  c.push_back({"AC4", "finite-n kernel oracle, n = 1", 5.0, [](std::ostringstream& m) {
                 const auto s = detail::zeros(1);
                 const auto e = right_critical_point(s);
                 const auto cp = build_contours(s, e);
                 const auto pf = make_phase(s, e);
                 double err = 0.0;
                 for (double mu : {-1.0, 0.0, 0.5, 2.0}) {
                   const double want = std::exp(-0.5 * mu * mu) / std::sqrt(2.0 * std::numbers::pi);
                   err = std::max(err, std::abs(kernel_exact(s, cp, pf, mu, mu) - want));
                 }
                 KernelGrid g;
                 g.xi_grid = g.eta_grid = {-0.8, 0.4};
                 g.values.resize(2, 2);
                 for (int i = 0; i < 2; ++i)
                   for (int j = 0; j < 2; ++j) g.values(i, j) = kernel_evaluate(cp, g.xi_grid[i], g.eta_grid[j]).value();
                 const double det = correlation_det(g, {0, 1}).value;
                 m << "max_err=" << err << " det2=" << det;
                 return err <= 1e-6 && std::abs(det) <= 1e-8;
               }});
  c.push_back({"AC5", "kernel normalization, n = 50", 120.0, [opt](std::ostringstream& m) {
                 const auto s = detail::zeros(50);
                 const auto cp = build_contours(s, right_critical_point(s));
                 const auto q = composite_gauss_legendre(8, 24, -3.0, 3.0);
                 std::vector<double> v(q.nodes.size());
                 parallel_for(v.size(), opt.threads,
                              [&](std::size_t i) { v[i] = kernel_evaluate(cp, q.nodes[i], q.nodes[i]).value().real(); });
                 double total = 0.0;
                 for (std::size_t i = 0; i < v.size(); ++i) total += q.weights[i] * v[i];
                 m << "integral=" << total << " rel_err=" << std::abs(total - 50.0) / 50.0;
                 return std::abs(total - 50.0) <= 0.5;
               }});
  c.push_back({"AC6", "Airy-limit convergence", 1200.0, [opt](std::ostringstream& m) {
                 bool ok = true;
                 for (const auto& src : {SourceSpec::atomic({0.0}), SourceSpec::two_point(1.0)}) {
                   const double e100 = detail::airy_sup_error(src.atoms_for(100), opt.threads);
                   const double e400 = detail::airy_sup_error(src.atoms_for(400), opt.threads);
                   m << to_string(src.kind) << ": sup100=" << e100 << " sup400=" << e400 << "; ";
                   ok = ok && e400 < e100 && e400 <= 0.15;
                 }
                 return ok;
               }});
  c.push_back({"AC7", "contour properties on random spectra", 60.0, [opt](std::ostringstream& m) {
                 std::mt19937_64 rng(opt.seed);
                 std::uniform_real_distribution<double> ud(-1.5, 1.5);
                 int done = 0, bad = 0;
                 double worst_ratio = 0.0;
                 while (done < 50) {
                   std::vector<double> h(20);
                   for (auto& x : h) x = ud(rng);
                   const AtomicSpectrum s(h);
                   const auto e = right_critical_point(s);
                   if (e.z_star.real() - s.max() <= 0.3) continue;
                   const auto d = check_contours(build_contours(s, e));
                   worst_ratio = std::max(worst_ratio, d.max_chord_ratio);
                   if (!(d.monotone_L && d.monotone_l && d.lipschitz_ok && d.tail_ok)) ++bad;
                   ++done;
                 }
                 m << "spectra=" << done << " failures=" << bad << " max_length_ratio=" << worst_ratio;
                 return bad == 0;
               }});
  c.push_back({"AC8", "Fredholm engine", 30.0, [opt](std::ostringstream& m) {
                 std::vector<double> s;
                 for (int k = -4; k <= 4; ++k) s.push_back(k);
                 const auto f = tw_table(s, 1e-10, opt.threads);
                 bool mono = true;
                 double worst = 0.0;
                 for (std::size_t i = 0; i < f.size(); ++i) {
                   if (i > 0 && !(f[i].value > f[i - 1].value)) mono = false;
                   worst = std::max(worst, f[i].err_estimate);
                 }
                 const auto nys = fredholm_gap({0.0, 2.0});
                 worst = std::max(worst, nys.err_estimate);
                 const auto ser3 = fredholm_series({0.0, 2.0}, 3);
                 const double omitted = std::abs(fredholm_series({0.0, 2.0}, 4).terms.back());
                 const double diff = std::abs(nys.value - ser3.value);
                 // the comparison cannot resolve below the Nystrom value's own error and rounding
                 const double allowed = omitted + nys.err_estimate + 8.0 * std::numeric_limits<double>::epsilon();
                 m << "monotone=" << (mono ? "yes" : "no") << " F2(4)=" << f.back().value << " |nystrom-series3|=" << diff
                   << " first_omitted=" << omitted << " allowed=" << allowed << " max_err_estimate=" << worst;
                 return mono && std::abs(f.back().value - 1.0) <= 1e-4 && diff <= allowed && worst <= 1e-8;
               }});
  c.push_back({"AC9", "Monte Carlo gap probabilities, GUE", 1800.0, [opt](std::ostringstream& m) {
                 const std::vector<GapInterval> iv{{0.0, INFINITY}, {-1.0, INFINITY}, {0.0, 2.0}};
                 const EdgeScaling edge{2.0, 1.0, Side::Right};
                 std::vector<EdgeStatistics> st;
                 for (std::size_t n : {100u, 200u}) {
                   const auto b = sample_batch(EnsembleSource::fixed(detail::zeros(n)), n, opt.mc_samples, opt.seed, opt.threads);
                   st.push_back(empirical_gap(b, edge, iv));
                 }
                 bool ok = true;
                 for (const auto& I : iv) {
                   const double exact = fredholm_gap(I).value;
                   const auto g100 = st[0].gap_estimates.at({I.a, I.b});
                   const auto g200 = st[1].gap_estimates.at({I.a, I.b});
                   const double b100 = g100.frequency - exact, b200 = g200.frequency - exact;
                   const bool within = std::abs(b200) <= 3.0 * g200.standard_error + 0.03;
                   // the bias at n = 200 must not be significantly larger than at n = 100
                   const double se = std::hypot(g100.standard_error, g200.standard_error);
                   const bool shrinking = std::abs(b200) <= std::abs(b100) + 3.0 * se;
                   m << "[" << I.a << "," << I.b << "] emp=" << g200.frequency << " se=" << g200.standard_error
                     << " exact=" << exact << " bias100=" << b100 << " bias200=" << b200 << "; ";
                   ok = ok && within && shrinking;
                 }
                 return ok;
               }});
  c.push_back({"AC10", "Wigner-source generating functional", 1800.0, [opt](std::ostringstream& m) {
                 const auto e = find_limiting_edge(semicircle(1.0));
                 const auto phi = scaled_indicator(0.5, 0.0, 2.0);
                 const auto b = sample_batch(EnsembleSource::wigner(), 200, opt.mc_samples, opt.seed, opt.threads);
                 const auto est = empirical_functional(b, EdgeScaling::from(e), phi);
                 const double exact = generating_functional(phi).value;
                 m << "emp=" << est.mean << " se=" << est.standard_error << " exact=" << exact;
                 return std::abs(est.mean - exact) <= 3.0 * est.standard_error + 0.03;
               }});
  c.push_back({"AC11", "off-spectrum decay", 60.0, [](std::ostringstream& m) {
                 const auto s50 = detail::zeros(50), s25 = detail::zeros(25);
                 const double k50 = kernel_offspectrum_decay(s50, right_critical_point(s50), 3.0);
                 const double k25 = kernel_offspectrum_decay(s25, right_critical_point(s25), 3.0);
                 m << "|K50(3,3)|=" << k50 << " |K25(3,3)|=" << k25;
                 return k50 < 1e-6 && k25 > k50;
               }});
  return c;
}

/// Runs one check; a check that throws fails with the message as its measurement.
inline CheckResult run_check(const Check& c) {
  CheckResult r{c.id, c.title, false, "", 0.0, c.time_limit};
  std::ostringstream m;
  m.precision(6);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.pass = c.run(m);
    r.measured = m.str();
  } catch (const std::exception& e) {
    r.measured = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string format_result(const CheckResult& r, bool with_time) {
  std::ostringstream o;
  o << (r.pass ? "PASS " : "FAIL ") << r.id << " " << r.title << ": " << r.measured;
  if (with_time) {
    o.precision(3);
    o << " [" << r.seconds << " s, limit " << r.time_limit << " s]";
  }
  return o.str();
}

}  // namespace dgue
