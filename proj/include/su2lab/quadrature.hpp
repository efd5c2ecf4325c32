#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace su2lab {

template <typename Real>
struct QuadratureRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// Gauss-Legendre rule with `count` nodes mapped to [0, 1]; exact for
/// polynomials of degree <= 2 * count - 1.
template <typename Real>
QuadratureRule<Real> gauss_legendre_unit(int count) {
  if (count < 1) throw std::invalid_argument("gauss_legendre_unit: count < 1");
  QuadratureRule<Real> rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const Real pi = std::numbers::pi_v<Real>;
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Real x = std::cos(pi * (Real(i) + Real(0.75)) / (Real(count) + Real(0.5)));
    Real derivative = 0;
    for (int iter = 0; iter < 100; ++iter) {
      // Three-term recurrence for P_count(x) and its derivative.
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= count; ++k) {
        const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      derivative = count * (x * p1 - p0) / (x * x - 1);
      const Real step = p1 / derivative;
      x -= step;
      if (std::abs(step) <= 4 * std::numeric_limits<Real>::epsilon()) break;
    }
    // Recompute the derivative at the converged node for the weight.
    Real p0 = 1, p1 = x;
    for (int k = 2; k <= count; ++k) {
      const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    derivative = count * (x * p1 - p0) / (x * x - 1);
    const Real weight = 2 / ((1 - x * x) * derivative * derivative);
    // Map [-1, 1] -> [0, 1].
    rule.nodes[i] = (1 - x) / 2;
    rule.nodes[count - 1 - i] = (1 + x) / 2;
    rule.weights[i] = weight / 2;
    rule.weights[count - 1 - i] = weight / 2;
  }
  return rule;
}

}  // namespace su2lab
