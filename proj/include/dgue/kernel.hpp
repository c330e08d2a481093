#pragma once

// Exact finite-n kernel
//   K_n(lambda, mu) = -(n / 4 pi^2) \int_l dt \oint_L dv a(t) b(v) / (v - t),
//   a(t) = exp(n (t^2/2 - mu t)) prod (t - h_j),  b(v) = exp(-n (v^2/2 - lambda v)) / prod (v - h_j),
// with L the level curve L_n (counterclockwise) and l a vertical line (downward).
//
// a(v) b(v) = exp(kappa v), kappa = n (lambda - mu), is entire, so for each closed
// loop of L the line may sit on either side of it. In the bulk the line is moved
// through the saddle: the loop that crosses x = c is cut at P+- = c +- i y, the
// left part is paired with the line Re t = c + d and the right part with
// Re t = c - d. The two closing segments cancel up to the residue at t = v, which
// integrates to R = (n y / pi) sinc(kappa y) exp(kappa c).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dgue/contour.hpp"
#include "dgue/edge.hpp"
#include "dgue/errors.hpp"
#include "dgue/parallel.hpp"
#include "dgue/quadrature.hpp"
#include "dgue/spectrum.hpp"

namespace dgue {

struct KernelOptions {
  double rtol = 1e-6;
  int max_doublings = 4;
  /// Offset of the line from a tip; 0 takes the contour pair's eps_sep.
  double eps_sep = 0.0;
  /// kernel_rescaled accepts |xi|, |eta| <= window * n^{2/3}.
  double window = 0.1;
};

enum class KernelConfig { RealSaddle, Edge, Bulk };

inline const char* to_string(KernelConfig c) {
  switch (c) {
    case KernelConfig::RealSaddle: return "real_saddle";
    case KernelConfig::Edge: return "edge";
    case KernelConfig::Bulk: return "bulk";
  }
  return "?";
}

/// K = mantissa * exp(log_scale).
struct KernelValue {
  cplx mantissa;
  double log_scale = 0.0;
  KernelConfig config = KernelConfig::Bulk;
  double line = 0.0;    // c
  double offset = 0.0;  // d
  int doublings = 0;
  std::size_t t_nodes = 0;
  std::size_t v_nodes = 0;
  /// sum of |terms| on the same scale as the mantissa
  double abs_sum = 0.0;

  cplx value() const { return mantissa * std::exp(log_scale); }
  double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

namespace detail {

struct Panel {
  cplx a, b;
};

struct KernelGroup {
  double line = 0.0;
  std::vector<Panel> v;  // pieces of L, all on one side of the line
  std::vector<Panel> t;  // the line, top to bottom
};

struct KernelSetup {
  KernelConfig config = KernelConfig::Bulk;
  double c = 0.0;
  double d = 0.0;
  double y_cross = 0.0;  // Im P+ (bulk only)
  std::vector<KernelGroup> groups;
};

// Pieces of length <= base, then bisection while a piece is longer than its
// distance to the other contour.
template <class Dist>
void graded_panels(cplx a, cplx b, double base, double min_len, Dist dist, std::vector<Panel>& out) {
  const int k = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / base)));
  std::vector<Panel> stack;
  for (int i = k - 1; i >= 0; --i) stack.push_back({a + (b - a) * (double(i) / k), a + (b - a) * (double(i + 1) / k)});
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double len = std::abs(p.b - p.a);
    if (len > min_len && len > dist(p.a, p.b)) {
      const cplx m = 0.5 * (p.a + p.b);
      stack.push_back({m, p.b});
      stack.push_back({p.a, m});
    } else {
      out.push_back(p);
    }
  }
}

inline double point_segment_distance(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  const double s = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + s * ab));
}

inline std::vector<double> multiplicities(const AtomicSpectrum& spec) {
  std::vector<double> m;
  for (double w : spec.weights()) m.push_back(std::round(w * spec.size()));
  return m;
}

inline cplx log_prod(const AtomicSpectrum& spec, const std::vector<double>& mult, cplx z) {
  // exp of a sum of principal logs with integer weights is the product itself
  cplx s = 0.0;
  const auto u = spec.distinct();
  for (std::size_t i = 0; i < u.size(); ++i) s += mult[i] * std::log(z - u[i]);
  return s;
}

// Half-height Y of the line Re t = c: past the maximum of Re log a, the first
// grid point where it has dropped by 40.
inline double line_halfheight(const AtomicSpectrum& spec, const std::vector<double>& mult, double c, double mu,
                              double ymin) {
  const double n = static_cast<double>(spec.size());
  const auto u = spec.distinct();
  auto ell = [&](double y) {
    double s = n * (0.5 * (c * c - y * y) - mu * c);
    for (std::size_t i = 0; i < u.size(); ++i) s += 0.5 * mult[i] * std::log((c - u[i]) * (c - u[i]) + y * y);
    return s;
  };
  const double step = std::min(0.05, 0.5 / std::sqrt(n));
  double best = ell(0.0);
  double y = 0.0;
  for (int it = 0; it < 1000000; ++it) {
    y += step;
    const double v = ell(y);
    best = std::max(best, v);
    if (v < best - 40.0 && y >= ymin) return y;
  }
  throw ConvergenceError("kernel: line half-height search did not terminate", y);
}

inline double clamp_into_gap(const LevelCurve& curve, double x, double eps) {
  const auto& comps = curve.components();
  if (x >= comps.back().hi) return std::max(x, comps.back().hi + eps);
  if (x <= comps.front().lo) return std::min(x, comps.front().lo - eps);
  for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
    const double lo = comps[i].hi, hi = comps[i + 1].lo;
    if (x >= lo && x <= hi) {
      if (hi - lo < 2.0 * eps) return 0.5 * (lo + hi);
      return std::clamp(x, lo + eps, hi - eps);
    }
  }
  return x;
}

inline KernelSetup kernel_setup(const ContourPair& cp, double lambda, double mu, const KernelOptions& opt) {
  const LevelCurve& curve = *cp.curve;
  const AtomicSpectrum& spec = curve.spectrum();
  const double n = static_cast<double>(spec.size());
  const double eps = opt.eps_sep > 0.0 ? opt.eps_sep : cp.eps_sep;
  const double lbar = 0.5 * (lambda + mu);
  const double xbar = curve.abscissa(lbar);

  KernelSetup s;
  if (curve.component_of(xbar) < 0) {
    s.config = KernelConfig::RealSaddle;
    s.c = clamp_into_gap(curve, xbar, eps);
  } else {
    // near an edge: put the line just outside the tip
    double best = std::numeric_limits<double>::infinity();
    for (const auto& comp : curve.components()) {
      for (const auto& [tip, dir] : {std::pair{comp.hi, 1.0}, std::pair{comp.lo, -1.0}}) {
        const double gap = std::abs(lbar - curve.lambda_of(tip));
        const double c = tip + dir * eps;
        if (gap <= 3.0 * std::pow(n, -2.0 / 3.0) && gap < best && curve.component_of(c) < 0 &&
            std::abs(clamp_into_gap(curve, c, eps) - c) < 1e-15) {
          best = gap;
          s.config = KernelConfig::Edge;
          s.c = c;
        }
      }
    }
    if (!std::isfinite(best)) {
      s.config = KernelConfig::Bulk;
      s.c = xbar;
      const cplx zb = curve.point(xbar);
      const double s2 = std::abs(1.0 - spec.inverse_power_mean(zb, 2));
      s.d = std::clamp(1.0 / std::sqrt(n * s2), 0.5 / std::sqrt(n), 0.5 / std::cbrt(n));
    }
  }

  // split L at x = c and sort the pieces by side
  std::vector<Panel> left, right;
  bool crossed = false;
  for (const auto& loop : cp.loops) {
    const auto& vs = loop.vertices;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const cplx p = vs[i], q = vs[(i + 1) % vs.size()];
      std::vector<Panel> pieces;
      if ((p.real() - s.c) * (q.real() - s.c) < 0.0) {
        const cplx x = p + (q - p) * ((s.c - p.real()) / (q.real() - p.real()));
        const cplx cross{s.c, x.imag()};
        pieces = {{p, cross}, {cross, q}};
        if (cross.imag() > 0.0) s.y_cross = cross.imag();
        crossed = true;
      } else {
        pieces = {{p, q}};
        if (p.real() == s.c && p.imag() > 0.0) {
          s.y_cross = p.imag();
          crossed = true;
        }
      }
      for (const auto& pc : pieces) (0.5 * (pc.a + pc.b).real() <= s.c ? left : right).push_back(pc);
    }
  }
  if (crossed && s.config != KernelConfig::Bulk) throw ValidationError("kernel: line crosses L outside the bulk configuration");

  double sep = s.d;
  if (s.config != KernelConfig::Bulk) {
    sep = std::numeric_limits<double>::infinity();
    for (const auto& loop : cp.loops)
      for (const cplx v : loop.vertices) sep = std::min(sep, std::abs(v.real() - s.c));
  }
  if (!(sep > 0.0)) throw ValidationError("kernel: contour separation violated");

  const double base = std::min(0.1, 0.5 / std::cbrt(n));
  const double min_len = 0.125 * sep;
  const double ycheck = std::max(cp.y_check, 1.5 * s.y_cross);

  auto make_group = [&](std::vector<Panel>& pieces, double line) {
    KernelGroup g;
    g.line = line;
    auto vdist = [&](cplx a, cplx b) { return std::min(std::abs(a.real() - line), std::abs(b.real() - line)); };
    for (const auto& pc : pieces) graded_panels(pc.a, pc.b, base, min_len, vdist, g.v);
    std::vector<cplx> pts;
    for (const auto& pc : pieces) pts.push_back(pc.a);
    auto tdist = [&](cplx a, cplx b) {
      double m = std::numeric_limits<double>::infinity();
      for (const cplx p : pts) m = std::min(m, point_segment_distance(p, a, b));
      return m;
    };
    const double y = line_halfheight(spec, multiplicities(spec), line, mu, ycheck);
    graded_panels(cplx(line, y), cplx(line, -y), base, min_len, tdist, g.t);
    return g;
  };
  if (s.config == KernelConfig::Bulk) {
    if (!left.empty()) s.groups.push_back(make_group(left, s.c + s.d));
    if (!right.empty()) s.groups.push_back(make_group(right, s.c - s.d));
  } else {
    std::vector<Panel> all = left;
    all.insert(all.end(), right.begin(), right.end());
    s.groups.push_back(make_group(all, s.c));
  }
  return s;
}

struct LevelSum {
  cplx sum;         // mantissa of the double integral
  double log_scale;
  double abs_sum;
  std::size_t t_nodes = 0, v_nodes = 0;
};

inline void panel_nodes(const std::vector<Panel>& panels, int split, const QuadratureRule& gl, std::vector<cplx>& z,
                        std::vector<cplx>& w) {
  z.clear();
  w.clear();
  for (const auto& p : panels) {
    for (int k = 0; k < split; ++k) {
      const cplx a = p.a + (p.b - p.a) * (double(k) / split);
      const cplx b = p.a + (p.b - p.a) * (double(k + 1) / split);
      const cplx half = 0.5 * (b - a), mid = 0.5 * (a + b);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        z.push_back(mid + half * gl.nodes[i]);
        w.push_back(half * gl.weights[i]);
      }
    }
  }
}

inline LevelSum kernel_level(const AtomicSpectrum& spec, const KernelSetup& s, double lambda, double mu, int level) {
  static const QuadratureRule gl = gauss_legendre(8);
  const double n = static_cast<double>(spec.size());
  const auto mult = multiplicities(spec);
  const int split = 1 << level;

  struct Nodes {
    std::vector<cplx> t, tw, v, vw, la, lb;
  };
  std::vector<Nodes> nodes(s.groups.size());
  double ma = -std::numeric_limits<double>::infinity(), mb = ma;
  LevelSum out{};
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    auto& nd = nodes[g];
    panel_nodes(s.groups[g].t, split, gl, nd.t, nd.tw);
    panel_nodes(s.groups[g].v, split, gl, nd.v, nd.vw);
    for (const cplx t : nd.t) {
      nd.la.push_back(n * (0.5 * t * t - mu * t) + log_prod(spec, mult, t));
      ma = std::max(ma, nd.la.back().real());
    }
    for (const cplx v : nd.v) {
      nd.lb.push_back(-n * (0.5 * v * v - lambda * v) - log_prod(spec, mult, v));
      mb = std::max(mb, nd.lb.back().real());
    }
    out.t_nodes += nd.t.size();
    out.v_nodes += nd.v.size();
  }

  cplx sum = 0.0;
  double abs_sum = 0.0;
  std::vector<cplx> bw;
  std::vector<double> bwa;
  for (auto& nd : nodes) {
    bw.resize(nd.v.size());
    bwa.resize(nd.v.size());
    for (std::size_t j = 0; j < nd.v.size(); ++j) {
      bw[j] = std::exp(nd.lb[j] - mb) * nd.vw[j];
      bwa[j] = std::abs(bw[j]);
    }
    for (std::size_t i = 0; i < nd.t.size(); ++i) {
      const cplx at = std::exp(nd.la[i] - ma) * nd.tw[i];
      const double aa = std::abs(at);
      if (aa == 0.0) continue;
      cplx inner = 0.0;
      double inner_abs = 0.0;
      const cplx t = nd.t[i];
      for (std::size_t j = 0; j < nd.v.size(); ++j) {
        const cplx dv = nd.v[j] - t;
        const double nr = std::norm(dv);
        inner += bw[j] * std::conj(dv) / nr;
        inner_abs += bwa[j] / std::sqrt(nr);
      }
      sum += at * inner;
      abs_sum += aa * inner_abs;
    }
  }
  const double pref = -n / (4.0 * std::numbers::pi * std::numbers::pi);
  out.sum = pref * sum;
  out.abs_sum = std::abs(pref) * abs_sum;
  out.log_scale = ma + mb;
  return out;
}

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace detail

/// K_n(lambda, mu) in log-scaled form with diagnostics.
inline KernelValue kernel_evaluate(const ContourPair& cp, double lambda, double mu, const KernelOptions& opt = {}) {
  if (!std::isfinite(lambda) || !std::isfinite(mu)) throw ValidationError("kernel: lambda and mu must be finite");
  if (!cp.curve) throw ValidationError("kernel: contours not built");
  const AtomicSpectrum& spec = cp.curve->spectrum();
  const double n = static_cast<double>(spec.size());
  const auto setup = detail::kernel_setup(cp, lambda, mu, opt);

  // residue term, on its own scale
  const double kappa = n * (lambda - mu);
  double r_scale = -std::numeric_limits<double>::infinity();
  double r_mant = 0.0;
  if (setup.config == KernelConfig::Bulk && setup.y_cross > 0.0) {
    r_scale = kappa * setup.c;
    r_mant = n * setup.y_cross / std::numbers::pi * detail::sinc(kappa * setup.y_cross);
  }

  auto combine = [&](const detail::LevelSum& ls, int level) {
    KernelValue kv;
    kv.config = setup.config;
    kv.line = setup.c;
    kv.offset = setup.d;
    kv.doublings = level;
    kv.t_nodes = ls.t_nodes;
    kv.v_nodes = ls.v_nodes;
    kv.log_scale = std::max(ls.log_scale, r_scale);
    const double f = std::exp(ls.log_scale - kv.log_scale);
    kv.mantissa = ls.sum * f;
    kv.abs_sum = ls.abs_sum * f;
    if (std::isfinite(r_scale)) {
      const double g = std::exp(r_scale - kv.log_scale);
      kv.mantissa += r_mant * g;
      kv.abs_sum += std::abs(r_mant) * g;
    }
    return kv;
  };

  KernelValue prev = combine(detail::kernel_level(spec, setup, lambda, mu, 0), 0);
  double delta = 0.0;
  for (int k = 1; k <= opt.max_doublings; ++k) {
    const KernelValue cur = combine(detail::kernel_level(spec, setup, lambda, mu, k), k);
    const cplx prev_on_cur = prev.mantissa * std::exp(prev.log_scale - cur.log_scale);
    delta = std::abs(cur.mantissa - prev_on_cur);
    const double scale = std::max(std::abs(cur.mantissa), 1e-8 * cur.abs_sum);
    if (delta <= opt.rtol * scale) return cur;
    prev = cur;
    delta /= scale;
  }
  throw ConvergenceError("kernel: quadrature did not converge after the allowed doublings", delta);
}

/// K_n(lambda, mu). The phase function only fixes the reference S*, which
/// cancels; it is accepted for interface symmetry with the rescaled form.
inline cplx kernel_exact(const AtomicSpectrum& spec, const ContourPair& cp, const PhaseFunction& pf, double lambda,
                         double mu, const KernelOptions& opt = {}) {
  (void)pf;
  if (cp.curve->spectrum().size() != spec.size()) throw ValidationError("kernel: contours built for another spectrum");
  return kernel_evaluate(cp, lambda, mu, opt).value();
}

/// theta(xi, eta) n^{-2/3} K_n(lambda0n + xi n^{-2/3}, lambda0n + eta n^{-2/3}),
/// theta = exp(-n^{1/3} (xi - eta) z*), applied in log space.
inline cplx kernel_rescaled(const AtomicSpectrum& spec, const ContourPair& cp, const PhaseFunction& pf,
                            const FiniteEdgeData& edge, double xi, double eta, const KernelOptions& opt = {}) {
  (void)pf;
  const double n = static_cast<double>(spec.size());
  const double lim = opt.window * std::pow(n, 2.0 / 3.0);
  if (!(std::abs(xi) <= lim && std::abs(eta) <= lim)) throw ValidationError("kernel_rescaled: |xi|, |eta| exceed the window");
  const double s = std::pow(n, -2.0 / 3.0);
  const auto kv = kernel_evaluate(cp, edge.lambda0n + xi * s, edge.lambda0n + eta * s, opt);
  const double log_theta = -std::cbrt(n) * (xi - eta) * edge.z_star.real();
  return kv.mantissa * std::exp(kv.log_scale + log_theta + std::log(s));
}

struct KernelGrid {
  std::vector<double> xi_grid;
  std::vector<double> eta_grid;
  Eigen::MatrixXcd values;
  struct Meta {
    std::size_t n = 0;
    double lambda0 = 0.0;
    double gamma_n = 0.0;
    double eps_sep = 0.0;
    std::size_t t_nodes = 0;  // largest over the grid
    std::size_t v_nodes = 0;
  } meta;
};

/// Gauged rescaled kernel on xi_grid x eta_grid, evaluated in parallel.
inline KernelGrid kernel_grid(const ContourPair& cp, const FiniteEdgeData& edge, const std::vector<double>& xi,
                              const std::vector<double>& eta, const KernelOptions& opt = {},
                              unsigned threads = default_threads()) {
  const AtomicSpectrum& spec = cp.curve->spectrum();
  const double n = static_cast<double>(spec.size());
  KernelGrid grid;
  grid.xi_grid = xi;
  grid.eta_grid = eta;
  grid.values.resize(static_cast<Eigen::Index>(xi.size()), static_cast<Eigen::Index>(eta.size()));
  grid.meta.n = spec.size();
  grid.meta.lambda0 = edge.lambda0n;
  grid.meta.gamma_n = edge.gamma_n;
  grid.meta.eps_sep = opt.eps_sep > 0.0 ? opt.eps_sep : cp.eps_sep;
  const double lim = opt.window * std::pow(n, 2.0 / 3.0);
  for (double x : xi)
    if (!(std::abs(x) <= lim)) throw ValidationError("kernel_grid: xi outside the window");
  for (double x : eta)
    if (!(std::abs(x) <= lim)) throw ValidationError("kernel_grid: eta outside the window");

  const double s = std::pow(n, -2.0 / 3.0);
  std::vector<KernelValue> raw(xi.size() * eta.size());
  parallel_for(raw.size(), threads, [&](std::size_t k) {
    const std::size_t i = k / eta.size(), j = k % eta.size();
    raw[k] = kernel_evaluate(cp, edge.lambda0n + xi[i] * s, edge.lambda0n + eta[j] * s, opt);
  });
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const std::size_t i = k / eta.size(), j = k % eta.size();
    const double log_theta = -std::cbrt(n) * (xi[i] - eta[j]) * edge.z_star.real();
    grid.values(i, j) = raw[k].mantissa * std::exp(raw[k].log_scale + log_theta + std::log(s));
    grid.meta.t_nodes = std::max(grid.meta.t_nodes, raw[k].t_nodes);
    grid.meta.v_nodes = std::max(grid.meta.v_nodes, raw[k].v_nodes);
  }
  return grid;
}

struct CorrelationDet {
  double value = 0.0;
  double condition = 0.0;
  bool ill_conditioned = false;
};

/// det of the kernel submatrix on `indices` (rows of xi_grid, columns of eta_grid).
inline CorrelationDet correlation_det(const KernelGrid& grid, const std::vector<std::size_t>& indices) {
  const auto m = static_cast<Eigen::Index>(indices.size());
  if (m == 0) throw ValidationError("correlation_det: no indices");
  for (auto i : indices)
    if (i >= static_cast<std::size_t>(grid.values.rows()) || i >= static_cast<std::size_t>(grid.values.cols()))
      throw ValidationError("correlation_det: index out of range");
  Eigen::MatrixXcd sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = grid.values(indices[i], indices[j]);
  CorrelationDet out;
  out.value = sub.determinant().real();
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub);
  const auto& sv = svd.singularValues();
  out.condition = sv(m - 1) > 0.0 ? sv(0) / sv(m - 1) : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.condition > 1e12;
  return out;
}

/// |K_n(lambda, lambda)| for lambda beyond the finite-n band, with the line
/// through the real root z_n(lambda) of the master equation.
inline KernelValue kernel_offspectrum(const AtomicSpectrum& spec, const FiniteEdgeData& edge, double lambda_out,
                                      const KernelOptions& opt = {}) {
  const auto cp = build_contours(spec, edge);
  if (cp.curve->component_of(cp.curve->abscissa(lambda_out)) >= 0)
    throw ValidationError("kernel_offspectrum_decay: lambda lies inside the spectrum");
  return kernel_evaluate(cp, lambda_out, lambda_out, opt);
}

inline double kernel_offspectrum_decay(const AtomicSpectrum& spec, const FiniteEdgeData& edge, double lambda_out,
                                       const KernelOptions& opt = {}) {
  return std::abs(kernel_offspectrum(spec, edge, lambda_out, opt).value());
}

/// GUE kernel with all atoms at 0 from Hermite functions:
/// K_n(x, x) = sqrt(n) sum_{k<n} phi_k(sqrt(n) x)^2, phi_k = He_k e^{-x^2/4} / sqrt(sqrt(2 pi) k!).
inline double gue_hermite_diagonal(std::size_t n, double x) {
  const double y = std::sqrt(double(n)) * x;
  double p0 = std::exp(-0.25 * y * y) / std::sqrt(std::sqrt(2.0 * std::numbers::pi));
  double p1 = y * p0;
  double s = p0 * p0 + (n > 1 ? p1 * p1 : 0.0);
  // normalized recurrence: phi_{k+1} = (y phi_k - sqrt(k) phi_{k-1}) / sqrt(k+1)
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double p2 = (y * p1 - std::sqrt(double(k)) * p0) / std::sqrt(double(k + 1));
    p0 = p1;
    p1 = p2;
    s += p1 * p1;
  }
  return std::sqrt(double(n)) * s;
}

}  // namespace dgue
