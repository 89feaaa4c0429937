#pragma once

// Mesoscopic linear eigenvalue statistics: test functions, the limiting
// variance V[g], the Helffer-Sjostrand representation and the Monte Carlo
// experiment.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kron/algebra.hpp"
#include "kron/ensemble.hpp"
#include "kron/parallel.hpp"

namespace kron {

struct TestFunction {
  std::string tag;
  double sigma = 1.0;  ///< g vanishes outside [-sigma, sigma]
  std::function<double(double)> g, d1, d2;
  double operator()(double x) const { return g(x); }
};

/// (1 - x^2)^3 on [-1, 1].
TestFunction bump3();
/// exp(-x^2/2) (1 - (x/3)^2)^3 on [-3, 3].
TestFunction gaussian_truncated();
/// Cubic spline through equally spaced samples on [-sigma, sigma] with zero
/// end slopes; the samples must vanish at both ends.
TestFunction custom_sampled(const std::vector<double>& samples, double sigma);
/// bump3 | gaussian_truncated.
TestFunction test_function_from_tag(const std::string& tag);
/// x -> c g(s x - shift) with s = -1 (reflect) or +1.
TestFunction transformed(const TestFunction& g, double c, double shift, bool reflect);

struct VgOptions {
  int panels = 64;        ///< coarse resolution; the check uses twice as many
  double rel_tol = 1e-6;  ///< allowed disagreement between the two resolutions
};

/// V[g] = (1/(2 beta pi^2)) int int ((g(x) - g(y)) / (x - y))^2 dx dy.
double vg_quadrature(const TestFunction& g, int beta, const VgOptions& opts = {});
/// Single-resolution evaluation (no consistency check).
double vg_at_resolution(const TestFunction& g, int beta, int panels);

/// f_N(x) = g(N^gamma (x - E0)).
struct ScaledFunction {
  TestFunction g;
  double E0 = 0.0;
  double gamma = 0.0;
  int N = 0;
  double eta0 = 1.0;  ///< N^{-gamma}
  double operator()(double x) const { return g.g((x - E0) / eta0); }
  double d1(double x) const { return g.d1((x - E0) / eta0) / eta0; }
  double d2(double x) const { return g.d2((x - E0) / eta0) / (eta0 * eta0); }
  double half_width() const { return g.sigma * eta0; }
};

ScaledFunction scaled_function(const TestFunction& g, double E0, double gamma, int N);

struct NormIdentities {
  double l1 = 0, l1_expected = 0;  ///< |f_N|_1 vs |g|_1 eta0
  double d1 = 0, d1_expected = 0;  ///< |f_N'|_1 vs |g'|_1
  double d2 = 0, d2_expected = 0;  ///< |f_N''|_1 vs N^gamma |g''|_1
  double max_relative_deviation = 0;
};
NormIdentities check_norm_identities(const ScaledFunction& f, int panels = 400);

double linear_statistic(const RealVector& eigenvalues, const ScaledFunction& f);

struct HsOptions {
  int x_panels = 200;
  int y_panels = 30;       ///< geometric panels on [y_min, delta]
  double y_min = 1e-7;     ///< relative to delta
  double rel_tol = 1e-3;   ///< allowed disagreement between the two grids
  Execution execution = Execution::parallel;
};

/// Helffer-Sjostrand evaluation of sum_i f(lambda_i) from tr_resolvent(z) =
/// Tr G(z), with the almost-analytic extension (f + i y f') chi(y) and a
/// smootherstep cutoff chi equal to 1 on [-delta, delta], 0 beyond 2 delta,
/// delta = sigma eta0. Evaluated on two grids; throws NumericalError when they
/// disagree by more than rel_tol.
double hs_statistic(const std::function<cplx(cplx)>& tr_resolvent, const ScaledFunction& f,
                    const HsOptions& opts = {});
double hs_statistic(const RealVector& eigenvalues, const ScaledFunction& f, const HsOptions& opts = {});

struct CltOptions {
  double bulk_threshold = 1e-3;
  bool require_bulk = true;  ///< refuse to run unless rho(E0) >= bulk_threshold
  Execution execution = Execution::parallel;
};

struct CltReport {
  std::string ensemble_hash;
  int N = 0;
  double gamma = 0.0;
  double E0 = 0.0;
  int beta = 2;
  int samples = 0;
  std::uint64_t seed = 0;
  std::string test_function;
  double rho_E0 = 0.0;
  std::vector<double> statistics;  ///< raw (uncentered) per-sample values
  std::vector<std::uint64_t> substream_seeds;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double variance_se = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double skewness_z = 0.0;
  double kurtosis_z = 0.0;
  double ks_distance = 0.0;
  double vg = 0.0;
  double variance_ratio = 0.0;  ///< variance / V[g]
  double variance_ratio_se = 0.0;
};

/// Summary statistics of a sample of values (fills the moment fields).
void summarize(CltReport& report);

CltReport run_clt_experiment(const StructureEnsemble& ens, const TestFunction& g, double E0, double gamma, int N,
                             int samples, std::uint64_t seed, const CltOptions& opts = {});

}  // namespace kron
