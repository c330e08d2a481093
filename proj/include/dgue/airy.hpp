#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "dgue/errors.hpp"
#include "dgue/quadrature.hpp"

namespace dgue {

struct AiryValue {
  double x = 0.0;
  double ai = 0.0;
  double ai_prime = 0.0;
};

namespace detail {

// Extended precision: for x near 6 the two solutions cancel by about nine digits.
inline AiryValue airy_maclaurin(double xd) {
  using real = long double;
  const real x = xd;
  const real x3 = x * x * x;
  real f = 1, t = 1;    // sum 3^k (1/3)_k x^{3k} / (3k)!
  real g = x, s = x;    // sum 3^k (2/3)_k x^{3k+1} / (3k+1)!
  real fp = 0, p = 0;   // f'
  real gp = 1, q = 1;   // g'
  for (int k = 1; k < 200; ++k) {
    t *= x3 / ((3 * k - 1) * (3 * k));
    s *= x3 / ((3 * k) * (3 * k + 1));
    p = (k == 1) ? x * x / 2 : p * x3 / ((3 * k - 1) * (3 * k - 3));
    q *= x3 / ((3 * k) * (3 * k - 2));
    f += t;
    g += s;
    fp += p;
    gp += q;
    const real scale = std::abs(f) + std::abs(g) + std::abs(fp) + std::abs(gp);
    if (std::abs(t) + std::abs(s) + std::abs(p) + std::abs(q) < 1e-21L * scale) break;
  }
  const real c1 = 0.355028053887817239260063186004183176L;
  const real c2 = 0.258819403792806798405183560189203963L;
  return {xd, static_cast<double>(c1 * f - c2 * g), static_cast<double>(c1 * fp - c2 * gp)};
}

// u_k, v_k of the asymptotic expansions
inline double airy_u(int k) {
  double u = 1.0;
  for (int j = 1; j <= k; ++j) u *= (6.0 * j - 5.0) * (6.0 * j - 3.0) * (6.0 * j - 1.0) / ((2.0 * j - 1.0) * 216.0 * j);
  return u;
}

inline double airy_v(int k) { return k == 0 ? 1.0 : -(6.0 * k + 1.0) / (6.0 * k - 1.0) * airy_u(k); }

inline AiryValue airy_asymptotic_positive(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  double su = 0.0, sv = 0.0;
  double last = INFINITY;
  double zk = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double tu = airy_u(k) / zk;
    const double tv = airy_v(k) / zk;
    if (std::abs(tu) > last) break;
    last = std::abs(tu);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    su += sign * tu;
    sv += sign * tv;
    if (std::abs(tu) < 1e-17) break;
    zk *= zeta;
  }
  const double e = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
  const double r = std::sqrt(std::sqrt(x));
  return {x, e / r * su, -e * r * sv};
}

inline AiryValue airy_asymptotic_negative(double x) {
  const double ax = -x;
  const double zeta = 2.0 / 3.0 * ax * std::sqrt(ax);
  double cu = 0.0, su = 0.0, cv = 0.0, sv = 0.0;
  double last = INFINITY;
  double zk = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double tu = airy_u(k) / zk;
    const double tv = airy_v(k) / zk;
    if (std::abs(tu) > last) break;
    last = std::abs(tu);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      cu += sign * tu;
      cv += sign * tv;
    } else {
      su += sign * tu;
      sv += sign * tv;
    }
    if (std::abs(tu) < 1e-17) break;
    zk *= zeta;
  }
  const double th = zeta - 0.25 * std::numbers::pi;
  const double c = std::cos(th), s = std::sin(th);
  const double r = std::sqrt(std::sqrt(ax));
  const double pre = 1.0 / std::sqrt(std::numbers::pi);
  return {x, pre / r * (c * cu + s * su), pre * r * (s * cv - c * sv)};
}

}  // namespace detail

/// Ai and Ai': Maclaurin series for |x| <= 6, asymptotic expansions beyond.
inline AiryValue airy(double x) {
  if (!(std::abs(x) <= 1e3)) throw ValidationError("airy: |x| must not exceed 1e3");
  if (std::abs(x) <= 6.0) return detail::airy_maclaurin(x);
  return x > 0.0 ? detail::airy_asymptotic_positive(x) : detail::airy_asymptotic_negative(x);
}

/// A(x, y) = (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y), with the diagonal
/// Ai'(x)^2 - x Ai(x)^2 and a second-order expansion about the midpoint for
/// |x - y| <= 1e-4.
inline double airy_kernel(double x, double y) {
  if (std::abs(x - y) > 1e-4) {
    const auto a = airy(x);
    const auto b = airy(y);
    return (a.ai * b.ai_prime - a.ai_prime * b.ai) / (x - y);
  }
  const double m = 0.5 * (x + y);
  const double h = 0.5 * (x - y);
  const auto a = airy(m);
  const double diag = a.ai_prime * a.ai_prime - m * a.ai * a.ai;
  const double c2 = -(2.0 * m * m * a.ai * a.ai - 2.0 * m * a.ai_prime * a.ai_prime - a.ai * a.ai_prime) / 3.0;
  return diag + h * h * c2;
}

/// Ai and Ai' by direct quadrature of (1/2 pi) \int_S exp(i s^3/3 + i s x) ds along
/// the rays arg s = pi/6 and 5 pi/6. Slow; used to cross-check airy().
inline AiryValue airy_contour(double x, int panels = 400) {
  using c = std::complex<double>;
  const double rmax = std::cbrt(3.0 * 60.0) + std::sqrt(std::abs(x)) + 2.0;
  const auto rule = composite_gauss_legendre(16, panels, 0.0, rmax);
  c ai = 0.0, aip = 0.0;
  for (const double ang : {std::numbers::pi / 6.0, 5.0 * std::numbers::pi / 6.0}) {
    const c dir = std::polar(1.0, ang);
    const double orient = ang < 1.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const c s = rule.nodes[i] * dir;
      const c e = std::exp(c(0.0, 1.0) * (s * s * s / 3.0 + s * x)) * dir * (orient * rule.weights[i]);
      ai += e;
      aip += c(0.0, 1.0) * s * e;
    }
  }
  const double k = 0.5 / std::numbers::pi;
  return {x, (k * ai).real(), (k * aip).real()};
}

}  // namespace dgue
