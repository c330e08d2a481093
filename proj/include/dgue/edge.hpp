#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dgue/errors.hpp"
#include "dgue/spectrum.hpp"
#include "dgue/subordination.hpp"

namespace dgue {

enum class Side { Right, Left };

inline const char* to_string(Side s) { return s == Side::Right ? "right" : "left"; }

struct EdgeData {
  double lambda0 = 0.0;
  double z0 = 0.0;
  double gamma = 0.0;
  Side side = Side::Right;
  double residual_eq = 0.0;
  double clearance = 0.0;
  /// Set when the bracket held several solutions of m2(z) = 1 and one was
  /// picked by comparison with a density scan.
  bool ambiguous = false;
};

struct FiniteEdgeData {
  cplx z_star;
  double lambda0n = 0.0;
  double gamma_n = 0.0;
  double residual = 0.0;
  Side side = Side::Right;
};

namespace detail {

inline double support_distance(const LimitMeasure& meas, double x) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& iv : meas.support()) {
    if (x >= iv.lo && x <= iv.hi) return 0.0;
    d = std::min(d, std::min(std::abs(x - iv.lo), std::abs(x - iv.hi)));
  }
  return d;
}

inline double edge_g(const LimitMeasure& meas, double x) { return meas.moment(x, 2).real() - 1.0; }

// Root of m2(x) = 1 inside [a, b] with g(a) > 0 > g(b) (or reversed):
// bisection to 1e-10 then Newton with g' = -2 m3.
inline double edge_root(const LimitMeasure& meas, double a, double b) {
  double ga = edge_g(meas, a);
  for (int it = 0; it < 200 && b - a > 1e-10 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double gm = edge_g(meas, m);
    if ((gm > 0.0) == (ga > 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  double x = 0.5 * (a + b);
  for (int it = 0; it < 20; ++it) {
    const double g = edge_g(meas, x);
    if (std::abs(g) <= 1e-15) break;
    const double dg = -2.0 * meas.moment(x, 3).real();
    if (dg == 0.0) break;
    const double nx = x - g / dg;
    if (!(nx > a - 1e-8 && nx < b + 1e-8)) break;
    if (std::abs(edge_g(meas, nx)) >= std::abs(g)) break;
    x = nx;
  }
  return x;
}

inline EdgeData edge_from_root(const LimitMeasure& meas, double z0) {
  EdgeData e;
  e.z0 = z0;
  e.residual_eq = std::abs(meas.moment(z0, 2).real() - 1.0);
  e.clearance = support_distance(meas, z0);
  const double m3 = meas.moment(z0, 3).real();
  if (!(m3 > 0.0)) throw DomainError("degenerate edge: third moment is not positive");
  e.gamma = 1.0 / std::sqrt(m3);
  e.lambda0 = z0 - meas.stieltjes(z0).real();
  return e;
}

// Largest lambda on a grid with positive density; used to disambiguate.
inline double density_scan_edge(const LimitMeasure& meas, double lo, double hi) {
  const int steps = 2000;
  double edge = lo;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + (hi - lo) * i / steps;
    if (density(meas, x) > 1e-6) edge = x;
  }
  return edge;
}

inline EdgeData right_edge(const LimitMeasure& meas, const std::optional<Interval>& bracket) {
  const double tol = 1e-12;
  std::vector<std::pair<double, double>> changes;
  if (bracket) {
    if (!(bracket->lo < bracket->hi)) throw ValidationError("edge bracket must satisfy lo < hi");
    const int steps = 4000;
    double px = bracket->lo;
    double pg = support_distance(meas, px) > 0.0 ? edge_g(meas, px) : NAN;
    for (int i = 1; i <= steps; ++i) {
      const double x = bracket->lo + (bracket->hi - bracket->lo) * i / steps;
      const double g = support_distance(meas, x) > 0.0 ? edge_g(meas, x) : NAN;
      if (std::isfinite(pg) && std::isfinite(g) && (pg > 0.0) != (g > 0.0)) changes.emplace_back(px, x);
      px = x;
      pg = g;
    }
  } else {
    const double start = meas.support_max();
    double px = start + 1e-2;
    double pg = edge_g(meas, px);
    if (pg > 0.0) {
      for (double x = px + 1e-2; x <= start + 2.0; x += 1e-2) {
        const double g = edge_g(meas, x);
        if (g <= 0.0) {
          changes.emplace_back(px, x);
          break;
        }
        px = x;
      }
    } else {
      // root closer to the support than the first scan step
      double lo = start + 1e-2;
      while (edge_g(meas, lo) <= 0.0 && lo - start > 1e-13) lo = start + 0.5 * (lo - start);
      if (edge_g(meas, lo) > 0.0) changes.emplace_back(lo, start + 1e-2);
    }
  }
  if (changes.empty()) throw DomainError("no sign change of m2(z) - 1 in the edge bracket");

  std::vector<EdgeData> candidates;
  if (changes.size() == 1) {
    candidates.push_back(edge_from_root(meas, edge_root(meas, changes[0].first, changes[0].second)));
  } else {
    // several roots: keep those with m3 > 0 (right edges of a band)
    for (const auto& [a, b] : changes) {
      const double z = edge_root(meas, a, b);
      if (meas.moment(z, 3).real() > 0.0) candidates.push_back(edge_from_root(meas, z));
    }
    if (candidates.empty()) throw DomainError("degenerate edge: third moment is not positive");
  }
  if (candidates.size() == 1) {
    if (candidates[0].residual_eq > tol) throw ConvergenceError("edge solver residual above tolerance", candidates[0].residual_eq);
    return candidates[0];
  }

  double lo = candidates.front().lambda0;
  double hi = lo;
  for (const auto& c : candidates) {
    lo = std::min(lo, c.lambda0);
    hi = std::max(hi, c.lambda0);
  }
  const double scan = density_scan_edge(meas, lo - 0.5, hi + 0.5);
  EdgeData best = candidates.front();
  for (const auto& c : candidates) {
    if (std::abs(c.lambda0 - scan) < std::abs(best.lambda0 - scan)) best = c;
  }
  best.ambiguous = true;
  return best;
}

}  // namespace detail

/// Limiting edge (lambda0, z0, gamma). Without a bracket the real axis right of
/// the support (left of it for Side::Left) is scanned in steps of 1e-2.
inline EdgeData find_limiting_edge(const MeasurePtr& meas, const std::optional<Interval>& bracket = std::nullopt,
                                   Side side = Side::Right) {
  if (side == Side::Right) return detail::right_edge(*meas, bracket);
  std::optional<Interval> rb;
  if (bracket) rb = Interval{-bracket->hi, -bracket->lo};
  const auto refl = reflected(meas);
  EdgeData e = detail::right_edge(*refl, rb);
  e.lambda0 = -e.lambda0;
  e.z0 = -e.z0;
  e.side = Side::Left;
  return e;
}

namespace detail {

inline FiniteEdgeData finite_edge_from(const AtomicSpectrum& spec, double z, Side side) {
  FiniteEdgeData e;
  e.z_star = z;
  e.side = side;
  e.residual = std::abs(spec.inverse_power_mean(z, 2).real() - 1.0);
  const double m3 = (side == Side::Right ? 1.0 : -1.0) * spec.inverse_power_mean(z, 3).real();
  if (!(m3 > 0.0)) throw DomainError("critical point: third moment sum has the wrong sign");
  e.gamma_n = 1.0 / std::sqrt(m3);
  e.lambda0n = z + spec.inverse_power_mean(z, 1).real();
  return e;
}

}  // namespace detail

/// Right critical point z* > max h_j of (1/n) sum (z - h_j)^{-2} = 1, by
/// bisection on (max h, max h + 1] and Newton polish.
inline FiniteEdgeData right_critical_point(const AtomicSpectrum& spec) {
  const double top = spec.max();
  auto g = [&](double x) { return spec.inverse_power_mean(x, 2).real() - 1.0; };
  double a = top;
  double b = top + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    (g(m) > 0.0 ? a : b) = m;
  }
  double x = 0.5 * (a + b);
  for (int it = 0; it < 10; ++it) {
    const double gx = g(x);
    const double nx = x + gx / (2.0 * spec.inverse_power_mean(x, 3).real());
    if (!(nx > top) || std::abs(g(nx)) >= std::abs(gx)) break;
    x = nx;
  }
  auto e = detail::finite_edge_from(spec, x, Side::Right);
  if (e.residual > 1e-10) throw ConvergenceError("critical point residual above tolerance", e.residual);
  return e;
}

inline FiniteEdgeData left_critical_point(const AtomicSpectrum& spec) {
  const auto r = right_critical_point(spec.reflected());
  return detail::finite_edge_from(spec, -r.z_star.real(), Side::Left);
}

/// Newton iteration on (1/n) sum (z - h_j)^{-2} = 1 from `seed`, confined to the
/// ball of the given radius around it.
inline FiniteEdgeData find_critical_point(const AtomicSpectrum& spec, cplx seed, double radius, double tol = 1e-10) {
  if (!(radius > 0.0)) throw ValidationError("find_critical_point: radius must be positive");
  if (spec.distance_to_atoms(seed) <= radius) throw DomainError("find_critical_point: atom within radius of seed");
  cplx z = seed;
  double res = std::abs(spec.inverse_power_mean(z, 2) - 1.0);
  for (int it = 0; it < 100 && res > 1e-15; ++it) {
    const cplx g = spec.inverse_power_mean(z, 2) - 1.0;
    const cplx dg = -2.0 * spec.inverse_power_mean(z, 3);
    if (std::abs(dg) == 0.0) break;
    const cplx nz = z - g / dg;
    if (std::abs(nz - seed) > radius) {
      throw ConvergenceError("find_critical_point: Newton left the search ball (edge conditions violated?)", res);
    }
    const double nres = std::abs(spec.inverse_power_mean(nz, 2) - 1.0);
    z = nz;
    if (nres >= res && res <= tol) break;
    res = nres;
  }
  if (res > tol) throw ConvergenceError("find_critical_point: residual above tolerance", res);
  if (std::abs(z.imag()) > 1e-10) throw ConvergenceError("find_critical_point: solution is not real", std::abs(z.imag()));
  // a positive third moment sum means the density lies to the left
  const Side side = spec.inverse_power_mean(z.real(), 3).real() > 0.0 ? Side::Right : Side::Left;
  auto e = detail::finite_edge_from(spec, z.real(), side);
  return e;
}

}  // namespace dgue
