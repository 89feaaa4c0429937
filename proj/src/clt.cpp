#include "kron/clt.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "kron/mde.hpp"
#include "kron/quadrature.hpp"
#include "kron/rng.hpp"
#include "kron/sampler.hpp"

namespace kron {

TestFunction bump3() {
  TestFunction t;
  t.tag = "bump3";
  t.sigma = 1.0;
  t.g = [](double x) { return std::abs(x) >= 1.0 ? 0.0 : std::pow(1.0 - x * x, 3); };
  t.d1 = [](double x) { return std::abs(x) >= 1.0 ? 0.0 : -6.0 * x * std::pow(1.0 - x * x, 2); };
  t.d2 = [](double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    const double u = 1.0 - x * x;
    return -6.0 * u * u + 24.0 * x * x * u;
  };
  return t;
}

TestFunction gaussian_truncated() {
  // h(x) = exp(-x^2/2), p(x) = (1 - x^2/9)^3
  TestFunction t;
  t.tag = "gaussian_truncated";
  t.sigma = 3.0;
  t.g = [](double x) { return std::abs(x) >= 3.0 ? 0.0 : std::exp(-0.5 * x * x) * std::pow(1.0 - x * x / 9.0, 3); };
  t.d1 = [](double x) {
    if (std::abs(x) >= 3.0) return 0.0;
    const double h = std::exp(-0.5 * x * x), u = 1.0 - x * x / 9.0;
    const double p = u * u * u, dp = -2.0 / 3.0 * x * u * u;
    return h * (dp - x * p);
  };
  t.d2 = [](double x) {
    if (std::abs(x) >= 3.0) return 0.0;
    const double h = std::exp(-0.5 * x * x), u = 1.0 - x * x / 9.0;
    const double p = u * u * u, dp = -2.0 / 3.0 * x * u * u;
    const double ddp = -2.0 / 3.0 * u * u + 8.0 / 27.0 * x * x * u;
    return h * (ddp - 2.0 * x * dp + (x * x - 1.0) * p);
  };
  return t;
}

TestFunction custom_sampled(const std::vector<double>& samples, double sigma) {
  if (samples.size() < 4) throw InputError("custom_sampled: need at least four samples");
  if (!(sigma > 0.0)) throw InputError("custom_sampled: sigma must be positive");
  if (std::abs(samples.front()) > 1e-14 || std::abs(samples.back()) > 1e-14)
    throw DomainError("custom_sampled: samples must vanish at both ends of the support");
  const double h = 2.0 * sigma / double(samples.size() - 1);
  auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      samples.data(), samples.size(), -sigma, h, 0.0, 0.0);
  TestFunction t;
  t.tag = "custom-sampled";
  t.sigma = sigma;
  t.g = [spline, sigma](double x) { return std::abs(x) >= sigma ? 0.0 : (*spline)(x); };
  t.d1 = [spline, sigma](double x) { return std::abs(x) >= sigma ? 0.0 : spline->prime(x); };
  t.d2 = [spline, sigma](double x) { return std::abs(x) >= sigma ? 0.0 : spline->double_prime(x); };
  return t;
}

TestFunction test_function_from_tag(const std::string& tag) {
  if (tag == "bump3") return bump3();
  if (tag == "gaussian_truncated") return gaussian_truncated();
  throw InputError("unknown test function '" + tag + "' (expected bump3 or gaussian_truncated)");
}

TestFunction transformed(const TestFunction& g, double c, double shift, bool reflect) {
  const double s = reflect ? -1.0 : 1.0;
  TestFunction t;
  t.tag = g.tag + "-transformed";
  t.sigma = g.sigma + std::abs(shift);
  t.g = [g, c, s, shift](double x) { return c * g.g(s * x - shift); };
  t.d1 = [g, c, s, shift](double x) { return c * s * g.d1(s * x - shift); };
  t.d2 = [g, c, s, shift](double x) { return c * g.d2(s * x - shift); };
  return t;
}

double vg_at_resolution(const TestFunction& g, int beta, int panels) {
  if (beta != 1 && beta != 2) throw InputError("V[g]: beta must be 1 or 2");
  const double s = g.sigma;
  const QuadratureRule q = composite_gauss(-s, s, panels);
  const std::size_t m = q.nodes.size();
  std::vector<double> gv(m), dv(m);
  for (std::size_t i = 0; i < m; ++i) {
    gv[i] = g.g(q.nodes[i]);
    dv[i] = g.d1(q.nodes[i]);
  }
  double box = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double dx = q.nodes[i] - q.nodes[j];
      const double quotient = i == j ? dv[i] : (gv[i] - gv[j]) / dx;
      row += q.weights[j] * quotient * quotient;
    }
    box += q.weights[i] * row;
  }
  // pairs with one point outside the box: int_{|y|>s} dy/(x-y)^2 = 1/(s-x) + 1/(s+x)
  double tail = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = q.nodes[i];
    tail += q.weights[i] * gv[i] * gv[i] * (1.0 / (s - x) + 1.0 / (s + x));
  }
  return (box + 2.0 * tail) / (2.0 * beta * M_PI * M_PI);
}

double vg_quadrature(const TestFunction& g, int beta, const VgOptions& opts) {
  const double coarse = vg_at_resolution(g, beta, opts.panels);
  const double fine = vg_at_resolution(g, beta, 2 * opts.panels);
  if (std::abs(coarse - fine) > opts.rel_tol * std::abs(fine)) {
    throw NumericalError("V[g] quadrature is not resolved: " + std::to_string(coarse) + " vs " +
                         std::to_string(fine));
  }
  return fine;
}

ScaledFunction scaled_function(const TestFunction& g, double E0, double gamma, int N) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("scaled_function: gamma must lie in (0, 1)");
  if (N < 1) throw InputError("scaled_function: N must be positive");
  ScaledFunction f;
  f.g = g;
  f.E0 = E0;
  f.gamma = gamma;
  f.N = N;
  f.eta0 = std::pow(double(N), -gamma);
  return f;
}

NormIdentities check_norm_identities(const ScaledFunction& f, int panels) {
  const QuadratureRule qg = composite_gauss(-f.g.sigma, f.g.sigma, panels);
  const QuadratureRule qf = composite_gauss(f.E0 - f.half_width(), f.E0 + f.half_width(), panels);
  NormIdentities r;
  double g0 = 0, g1 = 0, g2 = 0;
  for (std::size_t i = 0; i < qg.nodes.size(); ++i) {
    g0 += qg.weights[i] * std::abs(f.g.g(qg.nodes[i]));
    g1 += qg.weights[i] * std::abs(f.g.d1(qg.nodes[i]));
    g2 += qg.weights[i] * std::abs(f.g.d2(qg.nodes[i]));
  }
  for (std::size_t i = 0; i < qf.nodes.size(); ++i) {
    r.l1 += qf.weights[i] * std::abs(f(qf.nodes[i]));
    r.d1 += qf.weights[i] * std::abs(f.d1(qf.nodes[i]));
    r.d2 += qf.weights[i] * std::abs(f.d2(qf.nodes[i]));
  }
  r.l1_expected = g0 * f.eta0;
  r.d1_expected = g1;
  r.d2_expected = std::pow(double(f.N), f.gamma) * g2;
  auto rel = [](double a, double b) { return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b); };
  r.max_relative_deviation =
      std::max({rel(r.l1, r.l1_expected), rel(r.d1, r.d1_expected), rel(r.d2, r.d2_expected)});
  return r;
}

double linear_statistic(const RealVector& eigenvalues, const ScaledFunction& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) s += f(eigenvalues(i));
  return s;
}

namespace {

struct Cutoff {
  double delta;
  static double smootherstep(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }
  static double smootherstep_d(double t) { return 30.0 * t * t * (t - 1.0) * (t - 1.0); }
  double chi(double y) const {
    const double t = (std::abs(y) - delta) / delta;
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    return 1.0 - smootherstep(t);
  }
  double chi_d(double y) const {  // y > 0
    const double t = (y - delta) / delta;
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return -smootherstep_d(t) / delta;
  }
};

double hs_on_grid(const std::function<cplx(cplx)>& tr, const ScaledFunction& f, int x_panels, int y_panels,
                  double y_min, Execution exec) {
  const double delta = f.half_width();
  const Cutoff cut{delta};
  const QuadratureRule qx = composite_gauss(f.E0 - delta, f.E0 + delta, x_panels);
  const QuadratureRule qy = join(geometric_gauss(y_min * delta, delta, y_panels),
                                 composite_gauss(delta, 2.0 * delta, std::max(2, y_panels / 4)));
  std::vector<double> fx(qx.nodes.size()), f1(qx.nodes.size()), f2(qx.nodes.size());
  for (std::size_t i = 0; i < qx.nodes.size(); ++i) {
    fx[i] = f(qx.nodes[i]);
    f1[i] = f.d1(qx.nodes[i]);
    f2[i] = f.d2(qx.nodes[i]);
  }
  std::vector<double> column(qx.nodes.size(), 0.0);
  parallel_for(
      qx.nodes.size(),
      [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < qy.nodes.size(); ++j) {
          const double y = qy.nodes[j];
          const cplx dbar = kI * y * f2[i] * cut.chi(y) + kI * cplx(fx[i], y * f1[i]) * cut.chi_d(y);
          acc += qy.weights[j] * (dbar * tr(cplx(qx.nodes[i], y))).real();
        }
        column[i] = acc;
      },
      exec);
  return qx.integrate(column) / M_PI;
}

}  // namespace

double hs_statistic(const std::function<cplx(cplx)>& tr_resolvent, const ScaledFunction& f, const HsOptions& opts) {
  if (opts.x_panels < 1 || opts.y_panels < 1 || !(opts.y_min > 0.0 && opts.y_min < 1.0))
    throw InputError("hs_statistic: invalid quadrature options");
  const double coarse = hs_on_grid(tr_resolvent, f, opts.x_panels, opts.y_panels, opts.y_min, opts.execution);
  const double fine = hs_on_grid(tr_resolvent, f, opts.x_panels * 3 / 2, opts.y_panels * 3 / 2, opts.y_min,
                                 opts.execution);
  if (std::abs(coarse - fine) > opts.rel_tol * (1.0 + std::abs(fine))) {
    throw NumericalError("Helffer-Sjostrand quadrature disagrees between grids: " + std::to_string(coarse) +
                         " vs " + std::to_string(fine));
  }
  return fine;
}

double hs_statistic(const RealVector& eigenvalues, const ScaledFunction& f, const HsOptions& opts) {
  const RealVector eig = eigenvalues;
  auto tr = [&eig](cplx z) {
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < eig.size(); ++i) s += 1.0 / (eig(i) - z);
    return s;
  };
  return hs_statistic(tr, f, opts);
}

void summarize(CltReport& r) {
  const auto& x = r.statistics;
  const double n = static_cast<double>(x.size());
  if (x.size() < 4) throw InputError("CLT summary needs at least four samples");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double c = v - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  r.mean = mean;
  r.variance = m2 * n / (n - 1.0);
  r.variance_se = std::sqrt(std::max(0.0, (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n));
  if (m2 > 0.0) {
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  } else {
    r.skewness = 0.0;
    r.excess_kurtosis = 0.0;
  }
  const double se_skew = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));
  const double se_kurt = 2.0 * se_skew * std::sqrt((n * n - 1.0) / ((n - 3.0) * (n + 5.0)));
  r.skewness_z = r.skewness / se_skew;
  r.kurtosis_z = r.excess_kurtosis / se_kurt;

  // Kolmogorov-Smirnov distance against Normal(0, variance) of the centered values
  r.ks_distance = 0.0;
  if (r.variance > 0.0) {
    std::vector<double> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] - mean;
    std::sort(c.begin(), c.end());
    const double sd = std::sqrt(r.variance);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double F = 0.5 * std::erfc(-c[i] / (sd * std::sqrt(2.0)));
      r.ks_distance = std::max({r.ks_distance, (i + 1) / n - F, F - i / n});
    }
  }
  if (r.vg > 0.0) {
    r.variance_ratio = r.variance / r.vg;
    r.variance_ratio_se = r.variance_se / r.vg;
  }
}

CltReport run_clt_experiment(const StructureEnsemble& ens, const TestFunction& g, double E0, double gamma, int N,
                             int samples, std::uint64_t seed, const CltOptions& opts) {
  validate(ens);
  if (samples < 100) throw InputError("run_clt_experiment: at least 100 samples are required");
  const ScaledFunction f = scaled_function(g, E0, gamma, N);
  CltReport r;
  r.ensemble_hash = ensemble_hash(ens);
  r.N = N;
  r.gamma = gamma;
  r.E0 = E0;
  r.beta = ens.beta;
  r.samples = samples;
  r.seed = seed;
  r.test_function = g.tag;
  if (ens.d() > 0) {
    r.rho_E0 = density_from(continue_to_real_axis(ens, E0).M);
  }
  if (opts.require_bulk && !(r.rho_E0 >= opts.bulk_threshold)) {
    throw DomainError("run_clt_experiment: E0 = " + std::to_string(E0) + " is not in the bulk (rho = " +
                      std::to_string(r.rho_E0) + ")");
  }
  r.vg = vg_quadrature(g, ens.beta);
  r.statistics.assign(static_cast<std::size_t>(samples), 0.0);
  r.substream_seeds.resize(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) r.substream_seeds[static_cast<std::size_t>(k)] = substream_seed(seed, k);
  parallel_for(
      static_cast<std::size_t>(samples),
      [&](std::size_t k) {
        const Sample s = draw_sample(ens, N, seed, k);
        r.statistics[k] = linear_statistic(sample_eigenvalues(s), f);
      },
      opts.execution);
  summarize(r);
  return r;
}

}  // namespace kron
