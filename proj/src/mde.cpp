#include "kron/mde.hpp"

#include <cmath>
#include <limits>

#include "kron/self_energy.hpp"

namespace kron {

namespace {

Matrix rhs_inverse(const StructureEnsemble& ens, const SuperOperator& gamma, cplx z, const Matrix& M) {
  Matrix A = z * Matrix::Identity(ens.n, ens.n) - ens.K0 + gamma.apply(M);
  return A.partialPivLu().inverse();
}

double min_imag_eig(const Matrix& M) { return min_eigenvalue(hermitian_imag_part(M)); }

double residual_of(const StructureEnsemble& ens, const SuperOperator& gamma, cplx z, const Matrix& M) {
  const Matrix Ainv = rhs_inverse(ens, gamma, z, M);
  return hs_norm(M + Ainv);
}

/// One guarded Newton step for G(M) = M + A(M)^{-1}. Returns true when a
/// step decreasing the residual (and keeping Im M > 0 if required) was taken.
bool newton_step(const StructureEnsemble& ens, const SuperOperator& gamma, cplx z, Matrix& M, double& residual,
                 bool require_positive) {
  const int n = ens.n;
  const Matrix Ainv = rhs_inverse(ens, gamma, z, M);
  const Matrix G = M + Ainv;
  const Matrix J = Matrix::Identity(n * n, n * n) - kron(Ainv, Ainv.transpose()) * gamma.matrix();
  const Vector step = J.partialPivLu().solve(-vectorize(G));
  if (!step.allFinite()) return false;
  const Matrix X = unvectorize(step, n);
  double t = 1.0;
  for (int k = 0; k < 8; ++k, t *= 0.5) {
    const Matrix trial = M + t * X;
    if (!trial.allFinite()) continue;
    if (require_positive && !(min_imag_eig(trial) > 0.0)) continue;
    const double r = residual_of(ens, gamma, z, trial);
    if (r < residual) {
      M = trial;
      residual = r;
      return true;
    }
  }
  return false;
}

}  // namespace

double mde_residual(const StructureEnsemble& ens, cplx z, const Matrix& M) {
  return residual_of(ens, gamma_superop(ens), z, M);
}

MdePoint solve_mde_at(const StructureEnsemble& ens, cplx z, const MdeOptions& opts) {
  validate(ens);
  if (z.imag() == 0.0) throw DomainError("solve_mde_at: Im z must be nonzero (use continue_to_real_axis)");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("solve_mde_at: z must be finite");
  if (z.imag() < 0.0) {
    MdeOptions reflected = opts;
    if (opts.warm_start) reflected.warm_start = Matrix(opts.warm_start->adjoint());
    MdePoint p = solve_mde_at(ens, std::conj(z), reflected);
    p.z = z;
    p.M = p.M.adjoint().eval();
    return p;
  }
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw InputError("solve_mde_at: damping must lie in (0, 1]");

  const int n = ens.n;
  const SuperOperator gamma = gamma_superop(ens);
  Matrix M = kI * Matrix::Identity(n, n);
  if (opts.warm_start) {
    if (opts.warm_start->rows() != n || opts.warm_start->cols() != n)
      throw DimensionError("solve_mde_at: warm start must be n x n");
    if (min_imag_eig(*opts.warm_start) > 0.0) M = *opts.warm_start;
  }
  double residual = residual_of(ens, gamma, z, M);
  double lambda = opts.damping;
  int iter = 0;
  int newton_failures = 0;
  while (residual > opts.tol && iter < opts.max_iter) {
    ++iter;
    const bool try_newton =
        opts.newton && newton_failures < 3 && (residual < 1e-2 || iter > 50 || opts.warm_start.has_value());
    if (try_newton) {
      if (newton_step(ens, gamma, z, M, residual, true)) {
        newton_failures = 0;
        continue;
      }
      ++newton_failures;
    }
    const Matrix F = -rhs_inverse(ens, gamma, z, M);
    while (true) {
      const Matrix trial = (1.0 - lambda) * M + lambda * F;
      const double r = residual_of(ens, gamma, z, trial);
      if (r <= residual || lambda < 1e-6) {
        M = trial;
        residual = r;
        lambda = std::min(1.0, 2.0 * lambda);
        break;
      }
      lambda *= 0.5;
    }
    // a plain fixed-point run that stalls re-enables Newton trials
    if (iter % 100 == 0) newton_failures = 0;
  }
  if (!M.allFinite()) throw NumericalError("MDE iteration produced non-finite values");
  if (!(min_imag_eig(M) > 0.0)) throw NumericalError("MDE iterate lost positivity of Im M");
  if (residual > opts.tol) {
    throw ConvergenceError("MDE did not converge at z = (" + std::to_string(z.real()) + ", " +
                               std::to_string(z.imag()) + "), residual " + std::to_string(residual),
                           residual);
  }
  return {z, M, residual, iter};
}

std::vector<double> geometric_etas(double hi, double lo, int count) {
  if (!(hi > lo && lo > 0.0) || count < 2) throw InputError("geometric_etas: need hi > lo > 0 and count >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = hi * std::pow(lo / hi, double(k) / (count - 1));
  return out;
}

BoundaryValue continue_to_real_axis(const StructureEnsemble& ens, double x, const ContinuationOptions& opts) {
  validate(ens);
  if (opts.etas.size() < 2) throw InputError("continuation needs at least two eta values");
  for (std::size_t k = 0; k < opts.etas.size(); ++k) {
    if (!(opts.etas[k] > 0.0) || (k > 0 && !(opts.etas[k] < opts.etas[k - 1])))
      throw InputError("continuation etas must be positive and strictly decreasing");
  }
  BoundaryValue out;
  out.x = x;
  Matrix prev, last;
  double eta_prev = 0.0, eta_last = 0.0, residual = 0.0;
  int reached = 0;
  for (double eta : opts.etas) {
    MdeOptions mo;
    mo.tol = opts.tol;
    if (reached > 0) mo.warm_start = last;
    MdePoint p;
    try {
      p = solve_mde_at(ens, cplx(x, eta), mo);
    } catch (const ConvergenceError&) {
      if (reached < 2) throw;
      out.flagged = true;
      break;
    }
    prev = last;
    eta_prev = eta_last;
    last = p.M;
    eta_last = eta;
    residual = p.residual;
    ++reached;
  }
  out.M_last = last;
  out.eta_used = eta_last;
  out.residual = residual;
  out.error_indicator = hs_norm(last - prev);
  const double q = eta_prev / eta_last;
  out.M = (q * last - prev) / (q - 1.0);
  if (out.error_indicator > opts.flag_threshold) out.flagged = true;

  if (opts.polish && !out.flagged) {
    const double scale = std::max(1.0, max_abs(out.M));
    if (min_imag_eig(out.M) > 1e-6 * scale) {
      const SuperOperator gamma = gamma_superop(ens);
      Matrix M = out.M;
      double r = residual_of(ens, gamma, cplx(x, 0.0), M);
      for (int k = 0; k < 50 && r > 1e-14 * scale; ++k) {
        if (!newton_step(ens, gamma, cplx(x, 0.0), M, r, true)) break;
      }
      if (r <= opts.tol && hs_norm(M - out.M) <= 10.0 * std::max(out.error_indicator, 1e-12) + 1e-8) {
        out.M = M;
        out.residual = r;
        out.polished = true;
      }
    }
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (!(hi > lo) || points < 2) throw InputError("uniform_grid: need hi > lo and at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * double(k) / (points - 1);
  return g;
}

double density_from(const Matrix& M) {
  return std::max(0.0, normalized_trace(hermitian_imag_part(M)).real() / M_PI);
}

DosCurve density_of_states(const StructureEnsemble& ens, const std::vector<double>& grid, const DosOptions& opts) {
  validate(ens);
  if (grid.size() < 2) throw InputError("density_of_states: grid needs at least two points");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw InputError("density_of_states: grid must be strictly ascending");

  const std::size_t m = grid.size();
  DosCurve c;
  c.grid = grid;
  c.rho.resize(m);
  c.M_boundary.resize(m);
  c.residual.resize(m);
  c.eta_used.resize(m);
  c.flagged.resize(m);
  std::vector<char> flags(m, 0);
  parallel_for(
      m,
      [&](std::size_t i) {
        const BoundaryValue b = continue_to_real_axis(ens, grid[i], opts.continuation);
        c.M_boundary[i] = b.M;
        c.rho[i] = density_from(b.M);
        c.residual[i] = b.residual;
        c.eta_used[i] = b.polished ? 0.0 : b.eta_used;
        flags[i] = b.flagged ? 1 : 0;
      },
      opts.execution);
  for (std::size_t i = 0; i < m; ++i) c.flagged[i] = flags[i] != 0;
  c.eta_floor = opts.continuation.etas.back();
  double mass = 0.0;
  for (std::size_t i = 1; i < m; ++i) mass += 0.5 * (c.rho[i] + c.rho[i - 1]) * (grid[i] - grid[i - 1]);
  c.mass = mass;
  if (std::abs(mass - 1.0) > opts.mass_tol) {
    throw NumericalError("density of states integrates to " + std::to_string(mass) +
                         " (grid too coarse or the support is not bracketed)");
  }
  return c;
}

Matrix mde_derivative(const StructureEnsemble& ens, const Matrix& M) {
  if (M.rows() != ens.n || M.cols() != ens.n) throw DimensionError("mde_derivative: M must be n x n");
  const SuperOperator stab = SuperOperator::identity(ens.n) - sandwich(M) * gamma_superop(ens);
  return stab.solve(M * M, 1e12);
}

}  // namespace kron
