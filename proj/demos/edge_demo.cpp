// Edge of a two-atom source: limiting constants, the finite-n kernel next to
// the Airy kernel, and a Tracy-Widom value.
#include <cstdio>

#include "dgue/dgue.hpp"

using namespace dgue;

int main() {
  const auto src = SourceSpec::two_point(1.0);
  const auto e = find_limiting_edge(src.limit());
  std::printf("limit edge: lambda0 = %.10f  z0 = %.10f  gamma = %.10f\n", e.lambda0, e.z0, e.gamma);

  const auto spec = src.atoms_for(200);
  const auto f = right_critical_point(spec);
  std::printf("n = 200:    lambda0n = %.10f  gamma_n = %.10f\n", f.lambda0n, f.gamma_n);

  const auto cp = build_contours(spec, f);
  const auto pf = make_phase(spec, f);
  const double g23 = std::pow(f.gamma_n, 2.0 / 3.0);
  std::printf("\n%6s %14s %14s\n", "xi", "K_n(xi, xi)", "A(xi, xi)");
  for (double xi : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0}) {
    KernelOptions o;
    o.window = 1.0;
    const double k = kernel_rescaled(spec, cp, pf, f, xi / g23, xi / g23, o).real() / g23;
    std::printf("%6.1f %14.8f %14.8f\n", xi, k, airy_kernel(xi, xi));
  }

  std::printf("\nF2(-2) = %.12f\n", fredholm_gap({-2.0, INFINITY}).value);
}
