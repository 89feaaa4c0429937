#pragma once

#include <vector>

namespace kron {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double integrate(const std::vector<double>& values) const;
};

/// Composite 8-point Gauss-Legendre rule on [a, b] with equal panels.
QuadratureRule composite_gauss(double a, double b, int panels);
/// Composite 8-point rule on [a, b] (a > 0) with geometrically growing panels,
/// resolving integrands that vary on the scale of the distance to 0.
QuadratureRule geometric_gauss(double a, double b, int panels);
/// Concatenation of rules over adjacent intervals.
QuadratureRule join(const QuadratureRule& a, const QuadratureRule& b);

}  // namespace kron
