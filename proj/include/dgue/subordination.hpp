#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "dgue/errors.hpp"
#include "dgue/spectrum.hpp"

namespace dgue {

struct SubordinationSolution {
  cplx z;
  cplx f;
  double residual = 0.0;
  int iterations = 0;
};

struct SubordinationOptions {
  double tol = 1e-13;
  int max_iterations = 10000;
};

namespace detail {

inline double subordination_residual(const LimitMeasure& meas, cplx z, cplx f) {
  return std::abs(f - meas.stieltjes(z + f));
}

// Newton on F(f) = f - f0(z + f), F'(f) = 1 - m2(z + f). Steps are halved
// until the residual drops and Im f stays nonnegative.
inline bool subordination_newton(const LimitMeasure& meas, cplx z, cplx& f, double& res, int& it,
                                 const SubordinationOptions& opt) {
  res = subordination_residual(meas, z, f);
  for (int k = 0; k < 60 && it < opt.max_iterations; ++k, ++it) {
    if (res <= opt.tol) return true;
    const cplx w = z + f;
    const cplx F = f - meas.stieltjes(w);
    const cplx dF = 1.0 - meas.moment(w, 2);
    if (std::abs(dF) == 0.0) return false;
    const cplx step = F / dF;
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      const cplx trial = f - t * step;
      if (z.imag() > 0.0 && trial.imag() < 0.0) continue;
      const double r = subordination_residual(meas, z, trial);
      if (std::isfinite(r) && r < res) {
        f = trial;
        res = r;
        improved = true;
        break;
      }
    }
    if (!improved) return res <= opt.tol;
  }
  return res <= opt.tol;
}

}  // namespace detail

namespace detail {

// Damped iteration f <- (1 - w) f + w f0(z + f), w halved whenever the residual grows.
inline void subordination_damped(const LimitMeasure& meas, cplx z, cplx& f, double& res, int& it, double target,
                                 int max_iterations) {
  res = subordination_residual(meas, z, f);
  double omega = 1.0;
  while (it < max_iterations && res > target) {
    const cplx next = (1.0 - omega) * f + omega * meas.stieltjes(z + f);
    const double r = subordination_residual(meas, z, next);
    ++it;
    if (r < res) {
      f = next;
      res = r;
    } else {
      omega *= 0.5;
      if (omega < 1e-8) break;
    }
  }
}

}  // namespace detail

/// Fixed point f = f0(z + f) for Im z > 0.
///
/// Without a warm start the damped map is run from f = -1/z at
/// Im z' = max(2, Im z), where it contracts, and the solution is continued down
/// to Im z by Newton steps; the continuation step shrinks whenever Newton fails.
/// A warm start goes straight to Newton with the damped map as fallback.
inline SubordinationSolution solve_subordination(const LimitMeasure& meas, cplx z, double tol,
                                                 std::optional<cplx> initial = std::nullopt,
                                                 int max_iterations = 10000) {
  if (!(z.imag() > 0.0)) throw DomainError("solve_subordination: Im z must be positive");
  if (!(tol > 0.0)) throw ValidationError("solve_subordination: tol must be positive");
  const SubordinationOptions opt{tol, max_iterations};
  int it = 0;
  double res = 0.0;

  if (initial) {
    cplx f = *initial;
    if (detail::subordination_newton(meas, z, f, res, it, opt)) return {z, f, res, it};
  }

  double eps = std::max(2.0, z.imag());
  cplx f = -1.0 / cplx(z.real(), eps);
  detail::subordination_damped(meas, {z.real(), eps}, f, res, it, std::max(tol, 1e-10), max_iterations);
  if (!detail::subordination_newton(meas, {z.real(), eps}, f, res, it, opt)) {
    throw ConvergenceError("solve_subordination: no convergence", res);
  }
  double ratio = 0.25;
  while (eps > z.imag()) {
    const double next = std::max(z.imag(), eps * ratio);
    cplx trial = f;
    double r = 0.0;
    if (detail::subordination_newton(meas, {z.real(), next}, trial, r, it, opt)) {
      f = trial;
      res = r;
      eps = next;
      ratio = std::max(0.25, ratio * ratio);
    } else {
      ratio = std::sqrt(ratio);
      if (ratio > 0.999 || it >= max_iterations) throw ConvergenceError("solve_subordination: no convergence", r);
    }
  }
  return {z, f, res, it};
}

/// Polynomial extrapolation to x = 0 through (x_i, y_i) (Neville).
inline double extrapolate_to_zero(const std::vector<double>& x, std::vector<double> y) {
  const std::size_t m = x.size();
  for (std::size_t k = 1; k < m; ++k) {
    for (std::size_t i = 0; i + k < m; ++i) {
      y[i] = (x[i + k] * y[i] - x[i] * y[i + 1]) / (x[i + k] - x[i]);
    }
  }
  return y[0];
}

inline const std::vector<double>& default_eps_ladder() {
  static const std::vector<double> ladder{1e-2, 1e-3, 1e-4};
  return ladder;
}

/// Limiting density rho(lambda) = lim Im f(lambda + i eps) / pi, extrapolated
/// over a strictly decreasing eps ladder. The solver is continued from eps = 1
/// down the ladder so every solve is warm-started.
inline double density(const LimitMeasure& meas, double lambda, const std::vector<double>& eps_ladder,
                      double tol = 1e-13) {
  if (eps_ladder.size() < 3) throw ValidationError("density: eps ladder needs at least 3 values");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0)) throw ValidationError("density: eps values must be positive");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1])) {
      throw ValidationError("density: eps ladder must be strictly decreasing");
    }
  }

  // geometric path from eps = 1 through every ladder value
  std::vector<std::pair<double, bool>> path;
  double e = std::max(1.0, 4.0 * eps_ladder.front());
  for (double target : eps_ladder) {
    while (0.25 * e > target) {
      e *= 0.25;
      path.emplace_back(e, false);
    }
    path.emplace_back(target, true);
    e = target;
  }

  std::vector<double> values;
  std::optional<cplx> f;
  for (const auto& [eps, record] : path) {
    f = solve_subordination(meas, {lambda, eps}, tol, f).f;
    if (record) values.push_back(f->imag() / std::numbers::pi);
  }

  double rho = extrapolate_to_zero(eps_ladder, values);
  if (rho < 0.0) {
    // negatives within the extrapolation uncertainty are noise as well
    const std::vector<double> tail(eps_ladder.end() - 2, eps_ladder.end());
    const double lower = extrapolate_to_zero(tail, {values.end() - 2, values.end()});
    if (rho >= -1e-8 || rho >= -std::abs(lower - rho)) rho = 0.0;
  }
  return rho;
}

inline double density(const LimitMeasure& meas, double lambda) { return density(meas, lambda, default_eps_ladder()); }

}  // namespace dgue
