#pragma once

// Monte Carlo realizations of H, their spectra and resolvents, and empirical
// checks of the local laws and of the two-resolvent averages.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kron/algebra.hpp"
#include "kron/ensemble.hpp"
#include "kron/mde.hpp"
#include "kron/parallel.hpp"

namespace kron {

struct Sample {
  int n = 0;
  int N = 0;
  int beta = 2;
  std::uint64_t master_seed = 0;
  std::uint64_t index = 0;
  BlockMatrix H;
};

/// H = K0 (x) I + sum_a (L_a (x) X_a + L_a* (x) X_a*) with i.i.d. entries of
/// variance 1/N drawn from `rng` (X_1, ..., X_d in row-major order).
BlockMatrix draw_matrix(const StructureEnsemble& ens, int N, std::mt19937_64& rng);
/// Same, using the substream (master_seed, index).
Sample draw_sample(const StructureEnsemble& ens, int N, std::uint64_t master_seed, std::uint64_t index);

/// One i.i.d. entry of the given law with E|x|^2 = 1/N (complex for beta = 2).
cplx draw_entry(EntryLaw law, int beta, int N, std::mt19937_64& rng);

/// Eigen-decomposition of a sampled H; resolvents are assembled per z.
class HermitianSpectrum {
 public:
  HermitianSpectrum(const Sample& s, bool with_vectors);

  int inner_dim() const { return n_; }
  int outer_dim() const { return N_; }
  bool real() const { return real_; }
  const RealVector& eigenvalues() const { return values_; }
  /// Eigenvector matrix (complex even for real samples).
  Matrix eigenvectors() const;
  /// G(z) = V diag(1/(lambda - z)) V*.
  BlockMatrix resolvent(cplx z) const;
  /// Tr G(z) = sum_i 1/(lambda_i - z).
  cplx trace_resolvent(cplx z) const;

 private:
  int n_, N_;
  bool real_;
  bool has_vectors_;
  RealVector values_;
  Matrix vectors_;
  RealMatrix real_vectors_;
};

/// Eigenvalues only, ascending; uses the real solver for real samples.
RealVector sample_eigenvalues(const Sample& s);

/// (H - z)^{-1} by LU.
BlockMatrix resolvent(const BlockMatrix& H, cplx z);

/// |(G_{H+hR} - G_{H-hR}) / (2h) + G R G| (Frobenius).
double directional_derivative_check(const Matrix& H, cplx z, const Matrix& R, double h = 1e-6);

// --- local laws --------------------------------------------------------------------

struct LocalLawReport {
  cplx z;
  int N = 0;
  std::vector<double> entrywise;  ///< per sample: max_ij max-entry |G_ij - delta_ij M|
  std::vector<double> averaged;   ///< per sample: |(1/N) sum_i G_ii - M|_HS
  double entrywise_median = 0.0, entrywise_q90 = 0.0;
  double averaged_median = 0.0, averaged_q90 = 0.0;
  double scale_entrywise = 0.0;  ///< (N eta)^{-1/2}
  double scale_averaged = 0.0;   ///< (N eta)^{-1}
};

LocalLawReport local_law_report(const StructureEnsemble& ens, int N, cplx z, int samples, std::uint64_t seed,
                                Execution exec = Execution::parallel);

struct LocalLawSweep {
  std::vector<LocalLawReport> reports;
  double entrywise_slope = 0.0;  ///< of log median error vs log(N eta)
  double averaged_slope = 0.0;
};

/// Runs local_law_report at z = E0 + i eta(N) for each N and fits slopes.
LocalLawSweep local_law_sweep(const StructureEnsemble& ens, const std::vector<int>& Ns, double E0,
                              const std::function<double(int)>& eta_of_N, int samples, std::uint64_t seed,
                              Execution exec = Execution::parallel);

double quantile(std::vector<double> values, double q);
/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// --- two-resolvent averages ------------------------------------------------------------

/// (1/N) sum_kl G_lk(z) B G_kl(zeta).
Matrix multiresolvent_plain(const BlockMatrix& Gz, const BlockMatrix& Gzeta, const Matrix& B);
/// (1/N) sum_kl G_lk(z) B G_lk(zeta); real samples only (beta = 1).
Matrix multiresolvent_tilde(const BlockMatrix& Gz, const BlockMatrix& Gzeta, const Matrix& B, int beta);

/// |G^B - M(z) B M(zeta) - M(z) Gamma[G^B] M(zeta)|_HS.
double self_consistency_residual(const StructureEnsemble& ens, const Matrix& GB, const Matrix& Mz,
                                 const Matrix& Mzeta, const Matrix& B);

// --- global law ----------------------------------------------------------------------

/// L1 distance between the eigenvalue histogram (equal bins over the DOS grid
/// range) and the integrated density per bin.
double global_law_distance(const std::vector<double>& eigenvalues, const DosCurve& dos, int bins);

}  // namespace kron
