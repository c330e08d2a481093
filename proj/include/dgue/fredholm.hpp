#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "dgue/airy.hpp"
#include "dgue/errors.hpp"
#include "dgue/parallel.hpp"
#include "dgue/quadrature.hpp"

namespace dgue {

struct FredholmResult {
  double value = 1.0;
  int quad_order = 0;
  /// right endpoint used in place of +infinity (equal to b for finite intervals)
  double truncation = 0.0;
  double err_estimate = 0.0;
};

struct GapInterval {
  double a = 0.0;
  double b = std::numeric_limits<double>::infinity();
};

/// phi on a bounded support; `breaks` are points where phi may jump.
struct WeightFunction {
  std::function<double(double)> phi;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breaks;
};

/// c on [a, b], zero elsewhere; c < 1 gives a thinned gap probability.
inline WeightFunction scaled_indicator(double c, double a, double b) {
  return {[c, a, b](double x) { return x >= a && x <= b ? c : 0.0; }, a, b, {}};
}

namespace detail {

inline constexpr int kMinOrder = 16;
inline constexpr int kMaxOrder = 512;

/// Smallest T >= a (on a 0.05 grid) with A(T, T) < 1e-16.
inline double airy_truncation(double a) {
  double t = std::max(a, 0.0);
  while (airy_kernel(t, t) >= 1e-16) t += 0.05;
  return t;
}

/// Airy kernel matrix at the given nodes, reusing one Airy evaluation per node.
inline Eigen::MatrixXd airy_matrix(const std::vector<double>& x) {
  const auto m = static_cast<Eigen::Index>(x.size());
  std::vector<AiryValue> v;
  v.reserve(x.size());
  for (double xi : x) v.push_back(airy(xi));
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      double k;
      if (std::abs(x[i] - x[j]) > 1e-4) {
        k = (v[i].ai * v[j].ai_prime - v[i].ai_prime * v[j].ai) / (x[i] - x[j]);
      } else {
        k = airy_kernel(x[i], x[j]);
      }
      a(i, j) = a(j, i) = k;
    }
  }
  return a;
}

/// det(I - D A D) with D = diag(sqrt(weight_i))
inline double nystrom_det(const std::vector<double>& x, const std::vector<double>& w) {
  if (x.empty()) return 1.0;
  Eigen::MatrixXd m = airy_matrix(x);
  const auto k = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd s(k);
  for (Eigen::Index i = 0; i < k; ++i) s(i) = std::sqrt(w[i]);
  m = -(s.asDiagonal() * m * s.asDiagonal());
  m.diagonal().array() += 1.0;
  return m.partialPivLu().determinant();
}

// Order doubling on a rule builder: rule(m) returns nodes and effective weights.
template <class Rule>
FredholmResult doubling(Rule rule, double tol, double truncation) {
  if (!(tol > 0.0)) throw ValidationError("fredholm: tol must be positive");
  FredholmResult r;
  r.truncation = truncation;
  std::vector<double> x, w;
  rule(kMinOrder, x, w);
  double prev = nystrom_det(x, w);
  for (int m = 2 * kMinOrder; m <= kMaxOrder; m *= 2) {
    rule(m, x, w);
    const double cur = nystrom_det(x, w);
    r.value = cur;
    r.quad_order = m;
    r.err_estimate = std::abs(cur - prev);
    if (r.err_estimate <= tol) return r;
    prev = cur;
  }
  throw ConvergenceError("fredholm: no convergence at quadrature order 512", r.err_estimate);
}

}  // namespace detail

/// det(1 - A) on L^2([a, b]); b may be +infinity.
inline FredholmResult fredholm_gap(GapInterval iv, double tol = 1e-10) {
  if (std::isnan(iv.a) || std::isnan(iv.b) || !std::isfinite(iv.a)) throw ValidationError("fredholm_gap: a must be finite");
  if (iv.b < iv.a) throw ValidationError("fredholm_gap: a must not exceed b");
  FredholmResult r;
  if (iv.b == iv.a) {
    r.truncation = iv.b;
    return r;
  }
  const double b = std::isfinite(iv.b) ? iv.b : detail::airy_truncation(iv.a);
  if (b <= iv.a) {
    // the whole half-line lies beyond the truncation point
    r.truncation = b;
    return r;
  }
  return detail::doubling(
      [&](int m, std::vector<double>& x, std::vector<double>& w) {
        const auto q = gauss_legendre(m, iv.a, b);
        x = q.nodes;
        w = q.weights;
      },
      tol, b);
}

/// det(1 - sqrt(phi) A sqrt(phi)), panels split at the support ends and breaks.
inline FredholmResult generating_functional(const WeightFunction& f, double tol = 1e-10) {
  if (!f.phi) throw ValidationError("generating_functional: phi is empty");
  if (!(std::isfinite(f.lo) && std::isfinite(f.hi) && f.lo <= f.hi))
    throw ValidationError("generating_functional: support must be a bounded interval");
  std::vector<double> cuts{f.lo};
  for (double b : f.breaks)
    if (b > f.lo && b < f.hi) cuts.push_back(b);
  cuts.push_back(f.hi);
  std::sort(cuts.begin(), cuts.end());
  FredholmResult r;
  r.truncation = f.hi;
  if (f.hi == f.lo) return r;
  const std::size_t panels = cuts.size() - 1;
  return detail::doubling(
      [&](int m, std::vector<double>& x, std::vector<double>& w) {
        x.clear();
        w.clear();
        const int per = std::max(4, m / static_cast<int>(panels));
        for (std::size_t p = 0; p < panels; ++p) {
          if (cuts[p + 1] <= cuts[p]) continue;
          const auto q = gauss_legendre(per, cuts[p], cuts[p + 1]);
          for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double v = f.phi(q.nodes[i]);
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("generating_functional: phi must take values in [0, 1]");
            if (v == 0.0) continue;
            x.push_back(q.nodes[i]);
            w.push_back(q.weights[i] * v);
          }
        }
      },
      tol, f.hi);
}

struct SeriesResult {
  double value = 1.0;
  /// Hadamard tail sum_{l > l_max} t^l / l!, t = \int A(x, x)
  double bound = 0.0;
  std::vector<double> terms;  // signed terms l = 1..l_max
};

namespace detail {

inline double small_det(const Eigen::MatrixXd& a) {
  // direct cofactor expansion, sizes up to 4
  const auto n = a.rows();
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = a(r, c);
    s += ((j % 2 == 0) ? 1.0 : -1.0) * a(0, j) * small_det(minor);
  }
  return s;
}

}  // namespace detail

/// 1 + sum_{l=1}^{l_max} (-1)^l / l! \int_{[a,b]^l} det{A(x_i, x_j)} dx by tensor
/// Gauss-Legendre with `order` nodes per axis.
inline SeriesResult fredholm_series(GapInterval iv, int l_max, int order = 24) {
  if (!std::isfinite(iv.a) || !std::isfinite(iv.b)) throw ValidationError("fredholm_series: interval must be finite");
  if (iv.b < iv.a) throw ValidationError("fredholm_series: a must not exceed b");
  if (l_max < 0 || l_max > 4) throw ValidationError("fredholm_series: l_max must be in 0..4");
  SeriesResult r;
  if (iv.b == iv.a) return r;
  const auto q = gauss_legendre(order, iv.a, iv.b);
  const Eigen::MatrixXd a = detail::airy_matrix(q.nodes);
  const int m = order;
  double trace = 0.0;
  for (int i = 0; i < m; ++i) trace += q.weights[i] * a(i, i);

  double fact = 1.0;
  for (int l = 1; l <= l_max; ++l) {
    fact *= l;
    double integral = 0.0;
    std::vector<int> idx(l, 0);
    Eigen::MatrixXd sub(l, l);
    for (;;) {
      double w = 1.0;
      for (int i = 0; i < l; ++i) {
        w *= q.weights[idx[i]];
        for (int j = 0; j < l; ++j) sub(i, j) = a(idx[i], idx[j]);
      }
      integral += w * detail::small_det(sub);
      int k = 0;
      while (k < l && ++idx[k] == m) idx[k++] = 0;
      if (k == l) break;
    }
    const double term = ((l % 2 == 0) ? 1.0 : -1.0) * integral / fact;
    r.terms.push_back(term);
    r.value += term;
  }
  // Hadamard: |det| <= prod of diagonal for a positive kernel
  double partial = 0.0, t_l = 1.0;
  for (int l = 0; l <= l_max; ++l) {
    if (l > 0) t_l *= trace / l;
    partial += t_l;
  }
  r.bound = std::max(0.0, std::exp(trace) - partial);
  return r;
}

/// F2(s) = det(1 - A) on [s, +infinity) for each s, in parallel.
inline std::vector<FredholmResult> tw_table(const std::vector<double>& s, double tol = 1e-10,
                                            unsigned threads = default_threads()) {
  std::vector<FredholmResult> out(s.size());
  parallel_for(s.size(), threads, [&](std::size_t i) { out[i] = fredholm_gap({s[i], INFINITY}, tol); });
  return out;
}

}  // namespace dgue
