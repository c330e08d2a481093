#pragma once

// Integration contours for the finite-n kernel.
//
// The closed contour L_n is the set of non-real roots z_n(lambda) of the master
// equation z + (1/n) sum 1/(z - h_j) = lambda together with its real touch
// points. Writing z = x + iy, Im(...) = 0 with y > 0 is equivalent to
//   (1/n) sum 1/((x - h_j)^2 + y^2) = 1,
// so the upper half of L_n is a graph y(x) over the x-intervals where
// g(x) = (1/n) sum (x - h_j)^{-2} exceeds 1. Each interval gives one closed loop.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "dgue/edge.hpp"
#include "dgue/errors.hpp"
#include "dgue/spectrum.hpp"

namespace dgue {

struct CurveComponent {
  double lo;  // left tip (real touch point)
  double hi;  // right tip
};

class LevelCurve {
 public:
  explicit LevelCurve(AtomicSpectrum spec) : spec_(std::move(spec)) {
    const auto u = spec_.distinct();
    const std::size_t k = u.size();
    std::vector<double> roots;
    roots.push_back(outer_root(u.front(), -1.0));
    for (std::size_t i = 0; i + 1 < k; ++i) {
      // g is convex between consecutive atoms; a gap opens where its minimum drops below 1
      double a = u[i], b = u[i + 1];
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        (dg(m) < 0.0 ? a : b) = m;
      }
      const double xm = 0.5 * (a + b);
      if (g(xm) < 1.0) {
        roots.push_back(bisect_g(u[i], xm));
        roots.push_back(bisect_g(xm, u[i + 1]));
      }
    }
    roots.push_back(outer_root(u.back(), 1.0));
    for (std::size_t i = 0; i < roots.size(); i += 2) components_.push_back({roots[i], roots[i + 1]});
  }

  const AtomicSpectrum& spectrum() const { return spec_; }
  const std::vector<CurveComponent>& components() const { return components_; }
  double left_tip() const { return components_.front().lo; }
  double right_tip() const { return components_.back().hi; }

  /// g(x) = (1/n) sum (x - h_j)^{-2}
  double g(double x) const { return spec_.inverse_power_mean(x, 2).real(); }

  /// Index of the component whose open x-interval contains x, or -1.
  int component_of(double x) const {
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (x > components_[i].lo && x < components_[i].hi) return static_cast<int>(i);
    }
    return -1;
  }

  /// y(x) >= 0 on the upper half of L_n; zero off the components.
  double height(double x) const {
    if (component_of(x) < 0) return 0.0;
    const auto u = spec_.distinct();
    const auto w = spec_.weights();
    // h(s) = sum w/((x-u)^2 + s) - 1 is convex decreasing in s = y^2 with a root in (0, 1]
    auto h = [&](double s, double& dh) {
      double v = 0.0;
      dh = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double q = 1.0 / ((x - u[i]) * (x - u[i]) + s);
        v += w[i] * q;
        dh -= w[i] * q * q;
      }
      return v - 1.0;
    };
    // the largest single-term root w - d^2 is a lower bound for the root
    double lo = 0.0, hi = 1.0;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s = std::max(s, w[i] - (x - u[i]) * (x - u[i]));
    for (int it = 0; it < 200; ++it) {
      double dh = 0.0;
      const double v = h(s, dh);
      if (v > 0.0) lo = s; else hi = s;
      if (v == 0.0 || hi - lo <= 1e-16 * hi) break;
      double next = s - v / dh;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 1e-16 * s) {
        s = next;
        break;
      }
      s = next;
    }
    return std::sqrt(s);
  }

  cplx point(double x) const { return {x, height(x)}; }

  /// Lambda(x) = Re(Z + (1/n) sum 1/(Z - h_j)) with Z = x + i y(x); continuous and increasing.
  double lambda_of(double x) const {
    const cplx z = point(x);
    if (z.imag() == 0.0 && spec_.distance_to_atoms(z) == 0.0) return x;
    return (z + spec_.inverse_power_mean(z, 1)).real();
  }

  /// Inverse of lambda_of by bisection.
  double abscissa(double lambda) const {
    double lo = std::min(lambda, left_tip()) - 1.0;
    double hi = std::max(lambda, right_tip()) + 1.0;
    while (lambda_of(lo) > lambda) lo -= 2.0 * (hi - lo);
    while (lambda_of(hi) < lambda) hi += 2.0 * (hi - lo);
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      if (m == lo || m == hi) break;
      (lambda_of(m) < lambda ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
  }

  /// The branch z_n(lambda) with Im z_n >= 0, tending to lambda - 1/lambda at infinity.
  cplx branch(double lambda) const { return point(abscissa(lambda)); }

 private:
  double dg(double x) const { return -2.0 * spec_.inverse_power_mean(x, 3).real(); }

  // g(x) = 1 on a monotone stretch [a, b] with g - 1 of opposite signs at the ends
  double bisect_g(double a, double b) const {
    const bool a_above = g(a) > 1.0 || spec_.distance_to_atoms(a) == 0.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (m == a || m == b) break;
      ((g(m) > 1.0) == a_above ? a : b) = m;
    }
    return 0.5 * (a + b);
  }

  double outer_root(double atom, double dir) const {
    // g <= 1/4 at distance 2 from the outermost atom; distance 1 can sit exactly on g = 1
    return dir > 0 ? bisect_g(atom, atom + 2.0) : bisect_g(atom - 2.0, atom);
  }

  AtomicSpectrum spec_;
  std::vector<CurveComponent> components_;
};

/// One closed counterclockwise polyline; vertices are exact curve points
/// (first vertex is the right tip, the polyline closes back onto it).
struct ContourLoop {
  std::vector<cplx> vertices;
  int component = 0;
};

struct ContourPair {
  std::shared_ptr<const LevelCurve> curve;
  std::vector<ContourLoop> loops;
  FiniteEdgeData edge;
  double l_anchor = 0.0;
  double l_halfheight = 0.0;
  double eps_sep = 0.0;
  /// Signed horizontal clearance between l_n and the nearest point of L_n.
  double separation = 0.0;
  double y_check = 0.0;
  double max_chord = 0.0;

  /// All loops concatenated, each closed by repeating its first vertex.
  std::vector<cplx> L_points() const {
    std::vector<cplx> out;
    for (const auto& loop : loops) {
      out.insert(out.end(), loop.vertices.begin(), loop.vertices.end());
      out.push_back(loop.vertices.front());
    }
    return out;
  }
};

/// Phase S_n(z, lambda) = z^2/2 + (1/n) sum log(z - h_j) - lambda z - S*.
struct PhaseFunction {
  std::shared_ptr<const AtomicSpectrum> spectrum;
  double lambda = 0.0;
  cplx s_star;
};

namespace detail {

inline cplx log_sum(const AtomicSpectrum& spec, cplx z) {
  cplx s = 0.0;
  const auto u = spec.distinct();
  const auto w = spec.weights();
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::log(z - u[i]);
  return s;
}

}  // namespace detail

/// S* fixed so that Re S_n(z*, lambda0n) = 0; evaluated at `lambda`.
inline PhaseFunction make_phase(const AtomicSpectrum& spec, const FiniteEdgeData& edge, double lambda) {
  const double z = edge.z_star.real();
  PhaseFunction pf;
  pf.spectrum = std::make_shared<const AtomicSpectrum>(spec);
  pf.lambda = lambda;
  pf.s_star = 0.5 * z * z + detail::log_sum(spec, z) - edge.lambda0n * z;
  return pf;
}

inline PhaseFunction make_phase(const AtomicSpectrum& spec, const FiniteEdgeData& edge) {
  return make_phase(spec, edge, edge.lambda0n);
}

/// S_n(z, lambda) with principal logarithms.
inline cplx phase(const PhaseFunction& pf, cplx z) {
  detail::check_off_atoms(*pf.spectrum, z);
  return 0.5 * z * z + detail::log_sum(*pf.spectrum, z) - pf.lambda * z - pf.s_star;
}

/// S_n along a contiguous point sequence, each logarithm continued by its
/// cumulative argument from the principal value at the first point.
inline std::vector<cplx> phase_along(const PhaseFunction& pf, const std::vector<cplx>& points) {
  std::vector<cplx> out;
  if (points.empty()) return out;
  const auto& spec = *pf.spectrum;
  const auto u = spec.distinct();
  const auto w = spec.weights();
  std::vector<double> arg(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) arg[i] = std::arg(points[0] - u[i]);
  out.reserve(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const cplx z = points[p];
    detail::check_off_atoms(spec, z);
    cplx logs = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (p > 0) {
        double d = std::arg(z - u[i]) - std::remainder(arg[i], 2.0 * std::numbers::pi);
        d = std::remainder(d, 2.0 * std::numbers::pi);
        if (std::abs(d) > 0.5 * std::numbers::pi) {
          throw ValidationError("phase_along: point set is not contiguous (argument jump above pi/2)");
        }
        arg[i] += d;
      }
      logs += w[i] * cplx(std::log(std::abs(z - u[i])), arg[i]);
    }
    out.push_back(0.5 * z * z + logs - pf.lambda * z - pf.s_star);
  }
  return out;
}

/// Smallest y0 with Re S_n(z* + iy, lambda0n) <= -y^2/4 for all |y| >= y0.
/// With t = y^2 the difference -t/4 + (1/2n) sum log(1 + t/d_j^2) is concave
/// and vanishes at 0, so its positive root is unique.
inline double tail_check_height(const AtomicSpectrum& spec, const FiniteEdgeData& edge) {
  const double z = edge.z_star.real();
  auto q = [&](double t) {
    double s = 0.0;
    const auto u = spec.distinct();
    const auto w = spec.weights();
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::log1p(t / ((z - u[i]) * (z - u[i])));
    return -0.25 * t + 0.5 * s;
  };
  double lo = 1e-12, hi = 1.0;
  while (q(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double m = 0.5 * (lo + hi);
    (q(m) > 0.0 ? lo : hi) = m;
  }
  return std::sqrt(hi);
}

/// Roots of the master equation z + (1/n) sum 1/(z - h_j) = lambda, one per
/// distinct atom plus one (duplicated atoms lower the degree).
struct MasterRoots {
  std::vector<cplx> roots;
  cplx outlier;
  double max_residual = 0.0;
};

namespace detail {

inline cplx master_value(const AtomicSpectrum& spec, cplx z, double lambda) {
  return z + spec.inverse_power_mean(z, 1) - lambda;
}

inline double master_residual(const AtomicSpectrum& spec, cplx z, double lambda) {
  const auto u = spec.distinct();
  const auto w = spec.weights();
  double scale = std::abs(z) + std::abs(lambda);
  for (std::size_t i = 0; i < u.size(); ++i) scale += w[i] / std::abs(z - u[i]);
  return std::abs(master_value(spec, z, lambda)) / scale;
}

inline cplx master_polish(const AtomicSpectrum& spec, cplx z, double lambda) {
  double res = master_residual(spec, z, lambda);
  for (int it = 0; it < 50 && res > 1e-15; ++it) {
    const cplx f = master_value(spec, z, lambda);
    const cplx df = 1.0 - spec.inverse_power_mean(z, 2);
    if (std::abs(df) == 0.0) break;
    const cplx nz = z - f / df;
    if (spec.distance_to_atoms(nz) == 0.0) break;
    const double nres = master_residual(spec, nz, lambda);
    if (!(nres < res)) break;
    z = nz;
    res = nres;
  }
  return z;
}

}  // namespace detail

/// All roots. Up to 201 distinct atoms the roots are the eigenvalues of the
/// arrowhead matrix [[lambda, -w^T], [1, diag(u)]]; beyond that the K - 1 real
/// roots forced between consecutive atoms are bracketed and the remaining pair
/// follows from sum r = lambda + sum u and sum r^2 = lambda^2 + sum u^2 - 2.
/// Every root is Newton-polished; the outlier is the root nearest z_n(lambda).
inline MasterRoots master_roots(const AtomicSpectrum& spec, double lambda) {
  if (!std::isfinite(lambda)) throw ValidationError("master_roots: lambda must be finite");
  const auto u = spec.distinct();
  const auto w = spec.weights();
  const std::size_t k = u.size();
  MasterRoots out;
  if (k + 1 <= 201) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, k + 1);
    a(0, 0) = lambda;
    for (std::size_t i = 0; i < k; ++i) {
      a(0, i + 1) = -w[i];
      a(i + 1, 0) = 1.0;
      a(i + 1, i + 1) = u[i];
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("master_roots: eigensolver failed", INFINITY);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.roots.push_back(es.eigenvalues()(i));
  } else {
    double s1 = lambda, s2 = lambda * lambda - 2.0;
    for (double x : u) {
      s1 += x;
      s2 += x * x;
    }
    for (std::size_t i = 0; i + 1 < k; ++i) {
      double a = u[i], b = u[i + 1];
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        (detail::master_value(spec, m, lambda).real() > 0.0 ? a : b) = m;
      }
      const double r = 0.5 * (a + b);
      out.roots.push_back(r);
      s1 -= r;
      s2 -= r * r;
    }
    const cplx p = 0.5 * (s1 * s1 - s2);
    const cplx disc = std::sqrt(cplx(s1 * s1) - 4.0 * p);
    out.roots.push_back(0.5 * (s1 + disc));
    out.roots.push_back(0.5 * (s1 - disc));
  }
  for (auto& r : out.roots) {
    r = detail::master_polish(spec, r, lambda);
    if (std::abs(r.imag()) < 1e-14 * (1.0 + std::abs(r.real()))) r = r.real();
    out.max_residual = std::max(out.max_residual, detail::master_residual(spec, r, lambda));
  }
  if (out.max_residual > 1e-8) throw ConvergenceError("master_roots: polishing residual above 1e-8", out.max_residual);
  std::sort(out.roots.begin(), out.roots.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });

  const cplx target = LevelCurve(spec).branch(lambda);
  out.outlier = out.roots.front();
  for (const auto& r : out.roots) {
    if (std::abs(r - target) < std::abs(out.outlier - target)) out.outlier = r;
  }
  return out;
}

struct ContourOptions {
  /// Vertex density: chords are at most min(1/density, 0.5 n^{-1/3}) long.
  double density = 20.0;
  /// Half-height of l_n; 0 selects it automatically.
  double halfheight = 0.0;
  /// Offset of l_n from z*; 0 selects 0.5 n^{-1/3}.
  double eps_sep = 0.0;
  /// Slack constant for the chord Lipschitz condition.
  double lipschitz = 10.0;
};

namespace detail {

// Upper-half vertices of one component from the right tip to the left tip.
// Points are exact curve points on a Chebyshev grid x = m - r cos(theta);
// each chord is at most h long unless the Lipschitz bound |chord| <= C |dx|
// forces a longer one near a vertical tangent. The greedy walk runs inward
// from both tips and meets at the midpoint.
inline std::vector<cplx> upper_vertices(const LevelCurve& curve, const CurveComponent& c, double h, double lip) {
  const double m = 0.5 * (c.lo + c.hi);
  const double r = 0.5 * (c.hi - c.lo);
  double ymax = 0.0;
  for (int i = 1; i < 64; ++i) ymax = std::max(ymax, curve.height(m - r * std::cos(std::numbers::pi * i / 64.0)));
  const int fine = std::max(2000, 40 * static_cast<int>(std::ceil(std::numbers::pi * std::max(r, ymax) / h)));
  const int half = fine / 2;
  std::vector<cplx> pts(fine + 1);
  for (int i = 0; i <= fine; ++i) {
    const double x = (i == 0) ? c.hi : (i == fine) ? c.lo : m + r * std::cos(std::numbers::pi * i / fine);
    pts[i] = (i == 0 || i == fine) ? cplx(x, 0.0) : curve.point(x);
  }

  auto walk = [&](int from, int to, int step) {
    std::vector<int> idx{from};
    int i = from;
    while (i != to) {
      int best = -1;
      for (int j = i + step;; j += step) {
        const double chord = std::abs(pts[j] - pts[i]);
        const bool ok = chord <= lip * std::abs(pts[j].real() - pts[i].real());
        if (chord <= h) {
          if (ok) best = j;
        } else {
          if (best >= 0) break;
          if (ok) {
            best = j;
            break;
          }
        }
        if (j == to) {
          if (best < 0) best = j;
          break;
        }
      }
      i = best;
      idx.push_back(i);
    }
    return idx;
  };

  const auto right = walk(0, half, 1);
  const auto left = walk(fine, half, -1);
  std::vector<cplx> out;
  for (int i : right) out.push_back(pts[i]);
  for (auto it = left.rbegin() + 1; it != left.rend(); ++it) out.push_back(pts[*it]);
  return out;
}

}  // namespace detail

/// Counterclockwise loop through the upper vertices and their conjugates.
inline ContourLoop close_loop(const std::vector<cplx>& upper, int component) {
  ContourLoop loop;
  loop.component = component;
  loop.vertices = upper;
  for (std::size_t i = upper.size() - 2; i >= 1; --i) loop.vertices.push_back(std::conj(upper[i]));
  return loop;
}

/// L_n as polylines through exact curve points and l_n anchored right of z*.
inline ContourPair build_contours(const AtomicSpectrum& spec, const FiniteEdgeData& edge, const ContourOptions& opt = {}) {
  if (!(opt.density > 0.0)) throw ValidationError("build_contours: density must be positive");
  const double n = static_cast<double>(spec.size());
  ContourPair cp;
  auto curve = std::make_shared<const LevelCurve>(spec);
  cp.curve = curve;
  cp.edge = edge;
  if (std::abs(curve->right_tip() - edge.z_star.real()) > 1e-8 * (1.0 + std::abs(edge.z_star.real())) &&
      std::abs(curve->left_tip() - edge.z_star.real()) > 1e-8 * (1.0 + std::abs(edge.z_star.real()))) {
    // interior gap edges are allowed as long as z* is a tip of some component
    bool tip = false;
    for (const auto& c : curve->components()) {
      tip = tip || std::abs(c.lo - edge.z_star.real()) < 1e-8 || std::abs(c.hi - edge.z_star.real()) < 1e-8;
    }
    if (!tip) throw ValidationError("build_contours: edge is not a tip of L_n");
  }
  cp.max_chord = std::min(1.0 / opt.density, 0.5 * std::cbrt(1.0 / n));
  for (std::size_t i = 0; i < curve->components().size(); ++i) {
    const auto up = detail::upper_vertices(*curve, curve->components()[i], cp.max_chord, opt.lipschitz);
    if (up.size() < 3) throw ValidationError("build_contours: component too small to close");
    cp.loops.push_back(close_loop(up, static_cast<int>(i)));
  }
  cp.eps_sep = opt.eps_sep > 0.0 ? opt.eps_sep : 0.5 / std::cbrt(n);
  const double dir = edge.side == Side::Right ? 1.0 : -1.0;
  cp.l_anchor = edge.z_star.real() + dir * cp.eps_sep;
  cp.separation = cp.eps_sep;
  cp.y_check = tail_check_height(spec, edge);
  cp.l_halfheight = opt.halfheight > 0.0 ? opt.halfheight : std::max({4.0, 4.0 / std::sqrt(n), 1.5 * cp.y_check});
  return cp;
}

/// Winding number of a closed polyline around p.
inline double winding_number(const std::vector<cplx>& closed, cplx p) {
  double total = 0.0;
  for (std::size_t i = 0; i < closed.size(); ++i) {
    const cplx a = closed[i] - p;
    const cplx b = closed[(i + 1) % closed.size()] - p;
    total += std::arg(b / a);
  }
  return total / (2.0 * std::numbers::pi);
}

struct ContourDiagnostics {
  std::vector<double> winding;  // per distinct atom
  bool winding_ok = false;
  double max_chord_ratio = 0.0;
  bool lipschitz_ok = false;
  double total_length = 0.0;
  bool length_ok = false;
  bool monotone_L = false;
  bool monotone_l = false;
  double y_check = 0.0;
  bool tail_ok = false;
  bool velocity_ok = false;
  double min_phase_L = 0.0;
  double argmin_phase_L = 0.0;

  bool all_ok() const {
    return winding_ok && lipschitz_ok && length_ok && monotone_L && monotone_l && tail_ok && velocity_ok;
  }
};

/// Runtime checks of the contour properties: winding, chord Lipschitz ratio,
/// total length <= C n, monotonicity of Re S_n(., lambda0n) along L_n and l_n,
/// the tail bound beyond y_check and Re z_n'(lambda) > 0.
inline ContourDiagnostics check_contours(const ContourPair& cp, double lipschitz = 10.0) {
  ContourDiagnostics d;
  const auto& spec = cp.curve->spectrum();
  const double n = static_cast<double>(spec.size());
  const auto pf = make_phase(spec, cp.edge);

  for (double u : spec.distinct()) {
    double wsum = 0.0;
    for (const auto& loop : cp.loops) wsum += winding_number(loop.vertices, u);
    d.winding.push_back(wsum);
  }
  d.winding_ok = std::all_of(d.winding.begin(), d.winding.end(), [](double x) { return std::abs(x - 1.0) < 1e-9; });

  for (const auto& loop : cp.loops) {
    const auto& v = loop.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const cplx a = v[i];
      const cplx b = v[(i + 1) % v.size()];
      const double chord = std::abs(b - a);
      d.total_length += chord;
      const double dx = std::abs(b.real() - a.real());
      d.max_chord_ratio = std::max(d.max_chord_ratio, dx > 0.0 ? chord / dx : INFINITY);
    }
  }
  d.lipschitz_ok = d.max_chord_ratio <= lipschitz;
  d.length_ok = d.total_length <= lipschitz * n;

  // Re S along L_n in order of x (equivalently of lambda), real stretches included
  std::vector<double> xs;
  for (const auto& loop : cp.loops) {
    for (const auto& v : loop.vertices) {
      if (v.imag() >= 0.0) xs.push_back(v.real());
    }
  }
  const double lo = cp.curve->left_tip() - 1.0;
  const double hi = cp.curve->right_tip() + 1.0;
  for (int i = 0; i <= 400; ++i) xs.push_back(lo + (hi - lo) * i / 400.0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  // minimum at z*: nonincreasing before it, nondecreasing after it
  const double zs = cp.edge.z_star.real();
  d.monotone_L = true;
  d.min_phase_L = INFINITY;
  double prev = NAN;
  double prev_x = NAN;
  for (double x : xs) {
    if (spec.distance_to_atoms(x) == 0.0) continue;
    const double val = phase(pf, cp.curve->point(x)).real();
    if (val < d.min_phase_L) {
      d.min_phase_L = val;
      d.argmin_phase_L = x;
    }
    if (std::isfinite(prev)) {
      const double tol = 1e-10 * (1.0 + std::abs(val));
      if (x <= zs && val > prev + tol) d.monotone_L = false;
      if (prev_x >= zs && val < prev - tol) d.monotone_L = false;
    }
    prev = val;
    prev_x = x;
  }

  d.monotone_l = true;
  const double top = std::max(cp.l_halfheight, 2.0 * cp.y_check);
  double prev_l = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double y = top * i / 1000.0;
    const double up = phase(pf, cplx(zs, y)).real();
    const double down = phase(pf, cplx(zs, -y)).real();
    if (up >= prev_l + 1e-13 || std::abs(up - down) > 1e-10 * (1.0 + std::abs(up))) d.monotone_l = false;
    prev_l = up;
  }

  d.y_check = cp.y_check;
  d.tail_ok = true;
  for (int i = 0; i <= 1000; ++i) {
    const double y = cp.y_check * (1.0 + 4.0 * i / 1000.0);
    if (phase(pf, cplx(zs, y)).real() > -0.25 * y * y + 1e-12 * y * y) d.tail_ok = false;
  }

  d.velocity_ok = true;
  const double l0 = cp.curve->lambda_of(lo);
  const double l1 = cp.curve->lambda_of(hi);
  const double dl = (l1 - l0) / 400.0;
  cplx zprev = cp.curve->branch(l0);
  for (int i = 1; i <= 400; ++i) {
    const cplx z = cp.curve->branch(l0 + dl * i);
    if (!((z - zprev).real() / dl > 0.0)) d.velocity_ok = false;
    zprev = z;
  }
  return d;
}

}  // namespace dgue
