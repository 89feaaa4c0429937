#pragma once

// Solver for the matrix Dyson equation  -M^{-1} = z - K0 + Gamma[M]  with
// Im M > 0 on the upper half-plane, its boundary values on the real axis and
// the self-consistent density of states.

#include <optional>
#include <vector>

#include "kron/algebra.hpp"
#include "kron/ensemble.hpp"
#include "kron/parallel.hpp"

namespace kron {

struct MdeOptions {
  double tol = 1e-11;     ///< target for the HS residual
  int max_iter = 10000;   ///< fixed-point iterations (Newton steps count too)
  double damping = 1.0;   ///< initial fixed-point damping in (0, 1]
  bool newton = true;     ///< accelerate with guarded Newton steps
  std::optional<Matrix> warm_start;
};

struct MdePoint {
  cplx z;
  Matrix M;
  double residual = 0.0;
  int iterations = 0;
};

/// Residual |M + (z - K0 + Gamma[M])^{-1}|_HS.
double mde_residual(const StructureEnsemble& ens, cplx z, const Matrix& M);

/// Solves at Im z != 0. For Im z < 0 the reflection M(conj z)* is returned.
/// Throws ConvergenceError or NumericalError (loss of positivity).
MdePoint solve_mde_at(const StructureEnsemble& ens, cplx z, const MdeOptions& opts = {});

/// Geometric ladder of n values from hi down to lo.
std::vector<double> geometric_etas(double hi = 1e-1, double lo = 1e-6, int count = 11);

struct ContinuationOptions {
  std::vector<double> etas = geometric_etas();
  double tol = 1e-11;
  /// Flag the point when successive values differ by more than this.
  double flag_threshold = 1e-3;
  /// Refine the extrapolated bulk value by Newton's method on the real axis.
  bool polish = true;
};

struct BoundaryValue {
  double x = 0.0;
  Matrix M;                 ///< best estimate of lim M(x + i eta)
  Matrix M_last;            ///< solution at the smallest eta reached
  double eta_used = 0.0;    ///< smallest eta reached
  double error_indicator = 0.0;
  double residual = 0.0;    ///< residual of M at eta_used, or on the axis if polished
  bool polished = false;
  bool flagged = false;     ///< continuation failed to settle (likely a spectral edge)
};

BoundaryValue continue_to_real_axis(const StructureEnsemble& ens, double x,
                                    const ContinuationOptions& opts = {});

struct DosCurve {
  std::vector<double> grid;
  std::vector<double> rho;
  std::vector<Matrix> M_boundary;
  std::vector<double> residual;
  std::vector<double> eta_used;
  std::vector<bool> flagged;
  double eta_floor = 0.0;
  double mass = 0.0;  ///< trapezoid integral of rho over the grid
};

struct DosOptions {
  ContinuationOptions continuation;
  double mass_tol = 1e-2;
  Execution execution = Execution::parallel;
};

std::vector<double> uniform_grid(double lo, double hi, int points);

/// rho(x) = <Im M(x)> / pi on an ascending grid; throws NumericalError when
/// the integrated mass deviates from 1 by more than mass_tol.
DosCurve density_of_states(const StructureEnsemble& ens, const std::vector<double>& grid,
                           const DosOptions& opts = {});

/// rho(x) from a boundary value M(x).
double density_from(const Matrix& M);

/// M'(z) from (Id - C_M Gamma)[M'] = M^2 with M = M(z) (also valid for
/// boundary values). Throws SingularOperatorError above condition 1e12.
Matrix mde_derivative(const StructureEnsemble& ens, const Matrix& M);

}  // namespace kron
