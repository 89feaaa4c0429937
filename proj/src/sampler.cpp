#include "kron/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "kron/lapack.hpp"
#include "kron/rng.hpp"
#include "kron/self_energy.hpp"

namespace kron {

cplx draw_entry(EntryLaw law, int beta, int N, std::mt19937_64& rng) {
  const double var = 1.0 / N;
  if (beta == 1) {
    const double s = std::sqrt(var);
    switch (law) {
      case EntryLaw::gaussian: return {std::normal_distribution<double>(0.0, s)(rng), 0.0};
      case EntryLaw::rademacher: return {(rng() >> 63) ? s : -s, 0.0};
      case EntryLaw::uniform:
        return {std::uniform_real_distribution<double>(-std::sqrt(3.0) * s, std::sqrt(3.0) * s)(rng), 0.0};
    }
  }
  // real and imaginary parts independent, each of variance 1/(2N)
  const double s = std::sqrt(var / 2.0);
  switch (law) {
    case EntryLaw::gaussian: {
      std::normal_distribution<double> g(0.0, s);
      const double re = g(rng);
      return {re, g(rng)};
    }
    case EntryLaw::rademacher: {
      const double re = (rng() >> 63) ? s : -s;
      return {re, (rng() >> 63) ? s : -s};
    }
    case EntryLaw::uniform: {
      std::uniform_real_distribution<double> u(-std::sqrt(3.0) * s, std::sqrt(3.0) * s);
      const double re = u(rng);
      return {re, u(rng)};
    }
  }
  return {};
}

BlockMatrix draw_matrix(const StructureEnsemble& ens, int N, std::mt19937_64& rng) {
  validate(ens);
  if (N < 2) throw InputError("draw_matrix: N must be at least 2");
  const int n = ens.n;
  const int d = ens.d();
  std::vector<Matrix> X(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    Matrix& x = X[static_cast<std::size_t>(a)];
    x.resize(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) x(i, j) = draw_entry(ens.entry_law, ens.beta, N, rng);
  }
  BlockMatrix H(n, N);
  Matrix block(n, n);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      block.setZero();
      if (i == j) block = ens.K0;
      for (int a = 0; a < d; ++a) {
        const Matrix& L = ens.L[static_cast<std::size_t>(a)];
        const Matrix& x = X[static_cast<std::size_t>(a)];
        block += x(i, j) * L + std::conj(x(j, i)) * L.adjoint();
      }
      if (i == j) {
        H.set_block(i, i, hermitian_real_part(block));
      } else {
        H.set_block(i, j, block);
        H.set_block(j, i, block.adjoint());
      }
    }
  }
  return H;
}

Sample draw_sample(const StructureEnsemble& ens, int N, std::uint64_t master_seed, std::uint64_t index) {
  auto rng = substream(master_seed, index);
  Sample s;
  s.n = ens.n;
  s.N = N;
  s.beta = ens.beta;
  s.master_seed = master_seed;
  s.index = index;
  s.H = draw_matrix(ens, N, rng);
  return s;
}

HermitianSpectrum::HermitianSpectrum(const Sample& s, bool with_vectors)
    : n_(s.n), N_(s.N), real_(s.beta == 1), has_vectors_(with_vectors) {
  if (real_) {
    const RealMatrix H = s.H.full().real();
    if (with_vectors) {
      lapack::eigh(H, values_, real_vectors_);
    } else {
      values_ = lapack::eigvalsh(H);
    }
  } else if (with_vectors) {
    lapack::eigh(s.H.full(), values_, vectors_);
  } else {
    values_ = lapack::eigvalsh(s.H.full());
  }
}

Matrix HermitianSpectrum::eigenvectors() const {
  if (!has_vectors_) throw InputError("spectrum was computed without eigenvectors");
  return real_ ? Matrix(real_vectors_.cast<cplx>()) : vectors_;
}

BlockMatrix HermitianSpectrum::resolvent(cplx z) const {
  if (!has_vectors_) throw InputError("resolvent needs eigenvectors");
  if (z.imag() == 0.0) throw DomainError("resolvent: Im z must be nonzero");
  const auto m = values_.size();
  Vector d(m);
  for (Eigen::Index i = 0; i < m; ++i) d(i) = 1.0 / (values_(i) - z);
  if (real_) {
    const RealMatrix re = real_vectors_ * d.real().asDiagonal() * real_vectors_.transpose();
    const RealMatrix im = real_vectors_ * d.imag().asDiagonal() * real_vectors_.transpose();
    Matrix G(m, m);
    G.real() = re;
    G.imag() = im;
    return BlockMatrix(n_, N_, std::move(G));
  }
  return BlockMatrix(n_, N_, vectors_ * d.asDiagonal() * vectors_.adjoint());
}

cplx HermitianSpectrum::trace_resolvent(cplx z) const {
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < values_.size(); ++i) s += 1.0 / (values_(i) - z);
  return s;
}

RealVector sample_eigenvalues(const Sample& s) { return HermitianSpectrum(s, false).eigenvalues(); }

BlockMatrix resolvent(const BlockMatrix& H, cplx z) {
  if (z.imag() == 0.0) throw DomainError("resolvent: Im z must be nonzero");
  Matrix A = H.full();
  A.diagonal().array() -= z;
  return BlockMatrix(H.inner_dim(), H.outer_dim(), A.partialPivLu().inverse());
}

double directional_derivative_check(const Matrix& H, cplx z, const Matrix& R, double h) {
  if (H.rows() != H.cols() || R.rows() != H.rows() || R.cols() != H.cols())
    throw DimensionError("directional_derivative_check: dimension mismatch");
  auto G = [&](const Matrix& A) {
    Matrix B = A;
    B.diagonal().array() -= z;
    return Matrix(B.partialPivLu().inverse());
  };
  const Matrix G0 = G(H);
  const Matrix diff = (G(H + h * R) - G(H - h * R)) / (2.0 * h);
  return (diff + G0 * R * G0).norm();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("fit_slope: need at least two paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

LocalLawReport local_law_report(const StructureEnsemble& ens, int N, cplx z, int samples, std::uint64_t seed,
                                Execution exec) {
  if (z.imag() <= 0.0) throw DomainError("local_law_report: Im z must be positive");
  if (samples < 1) throw InputError("local_law_report: need at least one sample");
  const Matrix M = solve_mde_at(ens, z).M;
  const int n = ens.n;
  LocalLawReport r;
  r.z = z;
  r.N = N;
  r.entrywise.resize(static_cast<std::size_t>(samples));
  r.averaged.resize(static_cast<std::size_t>(samples));
  parallel_for(
      static_cast<std::size_t>(samples),
      [&](std::size_t k) {
        const Sample s = draw_sample(ens, N, seed, k);
        BlockMatrix G = resolvent(s.H, z);
        Matrix avg = Matrix::Zero(n, n);
        for (int i = 0; i < N; ++i) {
          avg += G.block_view(i, i);
          G.full().block(i * n, i * n, n, n) -= M;
        }
        r.entrywise[k] = max_abs(G.full());
        r.averaged[k] = hs_norm(avg / double(N) - M);
      },
      exec);
  r.entrywise_median = quantile(r.entrywise, 0.5);
  r.entrywise_q90 = quantile(r.entrywise, 0.9);
  r.averaged_median = quantile(r.averaged, 0.5);
  r.averaged_q90 = quantile(r.averaged, 0.9);
  const double Neta = N * z.imag();
  r.scale_entrywise = 1.0 / std::sqrt(Neta);
  r.scale_averaged = 1.0 / Neta;
  return r;
}

LocalLawSweep local_law_sweep(const StructureEnsemble& ens, const std::vector<int>& Ns, double E0,
                              const std::function<double(int)>& eta_of_N, int samples, std::uint64_t seed,
                              Execution exec) {
  LocalLawSweep sweep;
  std::vector<double> x, ye, ya;
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    const int N = Ns[k];
    const double eta = eta_of_N(N);
    // each ladder rung gets its own seed so that rungs are independent
    sweep.reports.push_back(local_law_report(ens, N, cplx(E0, eta), samples, substream_seed(seed, k), exec));
    x.push_back(std::log(N * eta));
    ye.push_back(std::log(sweep.reports.back().entrywise_median));
    ya.push_back(std::log(sweep.reports.back().averaged_median));
  }
  if (Ns.size() >= 2) {
    sweep.entrywise_slope = fit_slope(x, ye);
    sweep.averaged_slope = fit_slope(x, ya);
  }
  return sweep;
}

Matrix multiresolvent_plain(const BlockMatrix& Gz, const BlockMatrix& Gzeta, const Matrix& B) {
  const int n = Gz.inner_dim();
  const int N = Gz.outer_dim();
  if (Gzeta.inner_dim() != n || Gzeta.outer_dim() != N || B.rows() != n || B.cols() != n)
    throw DimensionError("multiresolvent_plain: dimension mismatch");
  // Y = (I_N (x) B) G(zeta): B applied to every block row
  Matrix Y(n * N, n * N);
  for (int k = 0; k < N; ++k) Y.middleRows(k * n, n).noalias() = B * Gzeta.full().middleRows(k * n, n);
  Matrix acc = Matrix::Zero(n, n);
  for (int l = 0; l < N; ++l) acc.noalias() += Gz.full().middleRows(l * n, n) * Y.middleCols(l * n, n);
  return acc / double(N);
}

Matrix multiresolvent_tilde(const BlockMatrix& Gz, const BlockMatrix& Gzeta, const Matrix& B, int beta) {
  if (beta != 1) throw SymmetryError("multiresolvent_tilde requires a real (beta=1) sample");
  const int n = Gz.inner_dim();
  const int N = Gz.outer_dim();
  if (Gzeta.inner_dim() != n || Gzeta.outer_dim() != N || B.rows() != n || B.cols() != n)
    throw DimensionError("multiresolvent_tilde: dimension mismatch");
  Matrix acc = Matrix::Zero(n, n);
  Matrix V(n * N, n);
  for (int l = 0; l < N; ++l) {
    const Matrix BR = B * Gzeta.full().middleRows(l * n, n);  // blocks B G_lk(zeta)
    for (int k = 0; k < N; ++k) V.middleRows(k * n, n) = BR.middleCols(k * n, n);
    acc.noalias() += Gz.full().middleRows(l * n, n) * V;
  }
  return acc / double(N);
}

double self_consistency_residual(const StructureEnsemble& ens, const Matrix& GB, const Matrix& Mz,
                                 const Matrix& Mzeta, const Matrix& B) {
  return hs_norm(GB - Mz * B * Mzeta - Mz * gamma_apply(ens, GB) * Mzeta);
}

double global_law_distance(const std::vector<double>& eigenvalues, const DosCurve& dos, int bins) {
  if (bins < 1 || dos.grid.size() < 2 || eigenvalues.empty()) throw InputError("global_law_distance: empty input");
  const double lo = dos.grid.front(), hi = dos.grid.back();
  // cumulative DOS mass at grid points
  std::vector<double> cum(dos.grid.size(), 0.0);
  for (std::size_t i = 1; i < dos.grid.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (dos.rho[i] + dos.rho[i - 1]) * (dos.grid[i] - dos.grid[i - 1]);
  auto mass_below = [&](double x) {
    if (x <= lo) return 0.0;
    if (x >= hi) return cum.back();
    const auto it = std::upper_bound(dos.grid.begin(), dos.grid.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - dos.grid.begin());
    const double x0 = dos.grid[i - 1], x1 = dos.grid[i];
    const double t = (x - x0) / (x1 - x0);
    const double rx = dos.rho[i - 1] + t * (dos.rho[i] - dos.rho[i - 1]);
    return cum[i - 1] + 0.5 * (dos.rho[i - 1] + rx) * (x - x0);
  };
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  double outside = 0.0;
  const double width = (hi - lo) / bins;
  for (double e : eigenvalues) {
    if (e < lo || e >= hi) {
      outside += 1.0;
      continue;
    }
    const auto b = std::min(static_cast<std::size_t>((e - lo) / width), counts.size() - 1);
    counts[b] += 1.0;
  }
  const double total = static_cast<double>(eigenvalues.size());
  double dist = outside / total;
  for (int b = 0; b < bins; ++b) {
    const double mass = mass_below(lo + (b + 1) * width) - mass_below(lo + b * width);
    dist += std::abs(counts[static_cast<std::size_t>(b)] / total - mass);
  }
  return dist;
}

}  // namespace kron
