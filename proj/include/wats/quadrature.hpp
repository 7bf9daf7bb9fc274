#pragma once

#include <span>
#include <vector>

namespace wats {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order);

  // Shared 32-point rule: exact for polynomial integrands up to degree 63,
  // which covers every piecewise-polynomial integrand in this library.
  static const GaussLegendre& order32();
};

// Composite quadrature over the panels defined by consecutive `breaks`.
// F may return double or any Eigen type supporting scale and +=.
template <class F>
auto integrate_panels(F&& f, std::span<const double> breaks,
                      const GaussLegendre& gl = GaussLegendre::order32())
    -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  R acc{};
  bool first = true;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
    const double half = 0.5 * (breaks[s + 1] - breaks[s]);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      R term = f(mid + half * gl.nodes[k]) * (gl.weights[k] * half);
      if (first) {
        acc = term;
        first = false;
      } else {
        acc += term;
      }
    }
  }
  return acc;
}

}  // namespace wats
