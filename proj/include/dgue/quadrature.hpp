#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dgue {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with m nodes on [-1, 1]. Nodes are found by Newton
/// iteration on P_m from the Chebyshev-like initial guesses.
inline QuadratureRule gauss_legendre(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: m must be positive");
  QuadratureRule rule;
  rule.nodes.assign(m, 0.0);
  rule.weights.assign(m, 2.0);
  if (m == 1) return rule;

  // P_m(x) and P_m'(x) by the three-term recurrence
  auto legendre = [m](double x, double& dp) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };

  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  return rule;
}

/// Rule mapped to [a, b].
inline QuadratureRule gauss_legendre(int m, double a, double b) {
  QuadratureRule rule = gauss_legendre(m);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

/// Composite rule: `panels` equal panels on [a, b], m nodes each.
inline QuadratureRule composite_gauss_legendre(int m, int panels, double a, double b) {
  QuadratureRule out;
  const QuadratureRule base = gauss_legendre(m);
  const double width = (b - a) / panels;
  out.nodes.reserve(static_cast<std::size_t>(m) * panels);
  out.weights.reserve(static_cast<std::size_t>(m) * panels);
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    for (int i = 0; i < m; ++i) {
      out.nodes.push_back(lo + 0.5 * width * (base.nodes[i] + 1.0));
      out.weights.push_back(0.5 * width * base.weights[i]);
    }
  }
  return out;
}

}  // namespace dgue
