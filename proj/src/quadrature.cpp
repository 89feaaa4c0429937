#include "kron/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "kron/errors.hpp"

namespace kron {

namespace {

using Rule = boost::math::quadrature::gauss<double, 8>;

void append_panel(QuadratureRule& q, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  // boost stores the nonnegative half of the symmetric 8-point rule
  for (std::size_t i = 0; i < x.size(); ++i) {
    q.nodes.push_back(mid - half * x[i]);
    q.weights.push_back(half * w[i]);
    q.nodes.push_back(mid + half * x[i]);
    q.weights.push_back(half * w[i]);
  }
}

}  // namespace

double QuadratureRule::integrate(const std::vector<double>& values) const {
  if (values.size() != weights.size()) throw DimensionError("quadrature: value count does not match the rule");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
  return s;
}

QuadratureRule composite_gauss(double a, double b, int panels) {
  if (!(b > a) || panels < 1) throw InputError("composite_gauss: need b > a and panels >= 1");
  QuadratureRule q;
  for (int p = 0; p < panels; ++p) append_panel(q, a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels);
  return q;
}

QuadratureRule geometric_gauss(double a, double b, int panels) {
  if (!(b > a && a > 0.0) || panels < 1) throw InputError("geometric_gauss: need b > a > 0 and panels >= 1");
  QuadratureRule q;
  const double r = std::pow(b / a, 1.0 / panels);
  double lo = a;
  for (int p = 0; p < panels; ++p) {
    const double hi = p + 1 == panels ? b : lo * r;
    append_panel(q, lo, hi);
    lo = hi;
  }
  return q;
}

QuadratureRule join(const QuadratureRule& a, const QuadratureRule& b) {
  QuadratureRule q = a;
  q.nodes.insert(q.nodes.end(), b.nodes.begin(), b.nodes.end());
  q.weights.insert(q.weights.end(), b.weights.begin(), b.weights.end());
  return q;
}

}  // namespace kron
