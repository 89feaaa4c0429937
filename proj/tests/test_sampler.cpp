#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "generators.hpp"
#include "kron/errors.hpp"
#include "kron/io.hpp"
#include "kron/mde.hpp"
#include "kron/rng.hpp"
#include "kron/sampler.hpp"

using namespace kron;
using kron::testing::Gen;

namespace {

StructureEnsemble deterministic_real() {
  Matrix K(3, 3);
  K << 0.4, 0.1, 0.0, 0.1, -0.3, 0.2, 0.0, 0.2, 0.1;
  return presets::deterministic(K, 1);
}

}  // namespace

// --- entries -------------------------------------------------------------------------------

TEST(Entries, CenteredWithVarianceOneOverN) {
  const int N = 50, draws = 200000;
  for (int beta : {1, 2})
    for (EntryLaw law : {EntryLaw::gaussian, EntryLaw::rademacher, EntryLaw::uniform}) {
      std::mt19937_64 rng(7);
      cplx mean = 0;
      double second = 0, re2 = 0, im2 = 0, fourth = 0;
      for (int k = 0; k < draws; ++k) {
        const cplx x = draw_entry(law, beta, N, rng);
        mean += x;
        second += std::norm(x);
        re2 += x.real() * x.real();
        im2 += x.imag() * x.imag();
        fourth += std::norm(x) * std::norm(x);
      }
      mean /= draws;
      second /= draws;
      const double se_mean = std::sqrt(1.0 / N / draws);
      EXPECT_LE(std::abs(mean), 5 * se_mean * std::sqrt(2.0)) << to_string(law) << beta;
      const double se_second = std::sqrt(fourth / draws - second * second) / std::sqrt(double(draws));
      EXPECT_LE(std::abs(second - 1.0 / N), 5 * se_second + 1e-15) << to_string(law) << beta;
      if (beta == 1) {
        EXPECT_EQ(im2, 0.0);
      } else {
        EXPECT_NEAR(re2 / draws, 0.5 / N, 5 * se_second);
        EXPECT_NEAR(im2 / draws, 0.5 / N, 5 * se_second);
      }
    }
}

TEST(Sampling, HermitianAndReproducible) {
  for (const auto& e : {presets::four_block(2), presets::two_block(1)}) {
    const Sample a = draw_sample(e, 16, 99, 3);
    const Sample b = draw_sample(e, 16, 99, 3);
    const Sample c = draw_sample(e, 16, 99, 4);
    EXPECT_TRUE(is_hermitian(a.H.full()));
    EXPECT_EQ(a.H.full(), b.H.full());
    EXPECT_NE(a.H.full(), c.H.full());
    if (e.beta == 1) EXPECT_EQ(a.H.full().imag().cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_NE(substream_seed(1, 0), substream_seed(2, 0));
  EXPECT_NE(substream_seed(1, 0), substream_seed(1, 1));
  EXPECT_THROW(draw_sample(presets::semicircle(), 1, 1, 0), InputError);
}

TEST(Sampling, DiagonalBlocksAndStructure) {
  // H - K0 (x) I is linear in the structure matrices: with K0 only, H = K0 (x) I
  const auto e = presets::deterministic(presets::two_block(2).K0, 2);
  const Sample s = draw_sample(e, 5, 1, 0);
  EXPECT_LE(max_abs(s.H.full() - BlockMatrix::tensor(e.K0, Matrix::Identity(5, 5)).full()), 0.0);
}

TEST(Sampling, WignerSpectralRadius) {
  const Sample s = draw_sample(presets::semicircle(2), 2048, 5, 0);
  const RealVector ev = sample_eigenvalues(s);
  EXPECT_NEAR(std::max(-ev(0), ev(ev.size() - 1)), 2.0, 0.1);
}

TEST(Sampling, RealSamplesHaveRealEigenvectors) {
  const Sample s = draw_sample(presets::two_block(1), 40, 3, 0);
  const HermitianSpectrum spec(s, true);
  EXPECT_TRUE(spec.real());
  EXPECT_LE(spec.eigenvectors().imag().cwiseAbs().maxCoeff(), 1e-12);
  // block transpose symmetry of the resolvent
  const BlockMatrix G = spec.resolvent(cplx(0.1, 0.2));
  for (int k = 0; k < 40; k += 7)
    for (int l = 0; l < 40; l += 5) EXPECT_LE(max_abs(G.block(l, k).transpose() - G.block(k, l)), 1e-12);
}

// --- resolvents ------------------------------------------------------------------------------

TEST(Resolvent, BasicIdentities) {
  const Sample s = draw_sample(presets::four_block(), 20, 8, 0);
  const cplx z(0.3, 0.05);
  const BlockMatrix G = resolvent(s.H, z);
  Matrix A = s.H.full();
  A.diagonal().array() -= z;
  const Matrix I = Matrix::Identity(80, 80);
  EXPECT_LE(max_abs(A * G.full() - I), 1e-10 * (1 + max_abs(G.full())));
  EXPECT_LE(Eigen::JacobiSVD<Matrix>(G.full()).singularValues()(0), 1.0 / z.imag() * (1 + 1e-12));
  EXPECT_LE(max_abs(resolvent(s.H, std::conj(z)).full() - G.full().adjoint()), 1e-10);
  const HermitianSpectrum spec(s, true);
  EXPECT_LE(max_abs(spec.resolvent(z).full() - G.full()), 1e-9);
  EXPECT_LE(std::abs(spec.trace_resolvent(z) - G.full().trace()), 1e-8);
}

TEST(Resolvent, DirectionalDerivative) {
  Gen g(50);
  EXPECT_EQ(directional_derivative_check(g.hermitian(8), cplx(0, 1), Matrix::Zero(8, 8)), 0.0);
  // scalar: d/dh (h - i)^{-1} at h = 0 equals -(-i)^{-2} = 1 = -G R G with G = i
  const Matrix H0 = Matrix::Zero(1, 1), R = Matrix::Constant(1, 1, 1.0);
  EXPECT_LE(directional_derivative_check(H0, cplx(0, 1), R), 1e-8);
  for (int t = 0; t < 10; ++t) {
    const Matrix H = g.hermitian(8), Rr = g.hermitian(8);
    const cplx z(g.uniform(-1, 1), g.uniform(0.2, 1));
    const Matrix G = (H - z * Matrix::Identity(8, 8)).inverse();
    const double gn = Eigen::JacobiSVD<Matrix>(G).singularValues()(0);
    const double rn = Eigen::JacobiSVD<Matrix>(Rr).singularValues()(0);
    EXPECT_LE(directional_derivative_check(H, z, Rr), 1e-4 * gn * gn * gn * rn);
  }
}

// --- local laws ----------------------------------------------------------------------------

TEST(LocalLaw, DeterministicEnsembleIsExact) {
  const auto r = local_law_report(deterministic_real(), 16, cplx(0.1, 0.2), 3, 1);
  for (double v : r.entrywise) EXPECT_LE(v, 1e-10);
  for (double v : r.averaged) EXPECT_LE(v, 1e-10);
}

TEST(LocalLaw, ReportInvariants) {
  const auto r = local_law_report(presets::four_block(), 32, cplx(0.0, 0.2), 11, 4);
  for (double v : r.entrywise) EXPECT_GE(v, 0.0);
  for (double v : r.averaged) EXPECT_GE(v, 0.0);
  EXPECT_LE(r.entrywise_median, r.entrywise_q90);
  EXPECT_LE(r.averaged_median, r.averaged_q90);
  EXPECT_NEAR(r.scale_entrywise, 1.0 / std::sqrt(32 * 0.2), 1e-14);
}

TEST(LocalLaw, SerialAndParallelAgreeBitwise) {
  const auto a = local_law_report(presets::four_block(), 24, cplx(0.0, 0.2), 6, 4, Execution::serial);
  const auto b = local_law_report(presets::four_block(), 24, cplx(0.0, 0.2), 6, 4, Execution::parallel);
  EXPECT_EQ(a.entrywise, b.entrywise);
  EXPECT_EQ(a.averaged, b.averaged);
}

TEST(LocalLaw, QuantileAndSlopeHelpers) {
  EXPECT_DOUBLE_EQ(quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2}, 0.9), 1.9);
  EXPECT_DOUBLE_EQ(fit_slope({0, 1, 2}, {1, 3, 5}), 2.0);
  EXPECT_THROW(quantile({}, 0.5), InputError);
}

// --- two-resolvent averages -------------------------------------------------------------------

TEST(Multiresolvent, ResolventIdentityForIdentityObservable) {
  const Sample s = draw_sample(presets::four_block(), 24, 2, 0);
  const HermitianSpectrum spec(s, true);
  const cplx z(0.1, 0.3), zeta(-0.2, 0.1);
  const BlockMatrix Gz = spec.resolvent(z), Gzeta = spec.resolvent(zeta);
  const Matrix GB = multiresolvent_plain(Gz, Gzeta, Matrix::Identity(4, 4));
  Matrix diff = Gz.full() - Gzeta.full();
  const Matrix expect = partial_trace(BlockMatrix(4, 24, diff)) / (double(24) * (z - zeta));
  EXPECT_LE(max_abs(GB - expect), 1e-10);
  // zeta = conj z gives the positive average (1/N) pt(G G*)
  const Matrix W = multiresolvent_plain(Gz, spec.resolvent(std::conj(z)), Matrix::Identity(4, 4));
  EXPECT_TRUE(is_hermitian(W, 1e-10));
  EXPECT_GT(min_eigenvalue(W), 0.0);
  const Matrix ward = partial_trace(BlockMatrix(4, 24, Matrix(Gz.full() - Gz.full().adjoint()))) /
                      (24.0 * 2.0 * kI * z.imag());
  EXPECT_LE(max_abs(W - ward), 1e-10);
}

TEST(Multiresolvent, MatchesDirectDefinition) {
  Gen g(51);
  const Sample s = draw_sample(presets::two_block(1), 6, 2, 0);
  const HermitianSpectrum spec(s, true);
  const BlockMatrix Gz = spec.resolvent(cplx(0.1, 0.3)), Gzeta = spec.resolvent(cplx(0.0, -0.2));
  const Matrix B = g.complex_matrix(2);
  Matrix plain = Matrix::Zero(2, 2), tilde = Matrix::Zero(2, 2);
  for (int k = 0; k < 6; ++k)
    for (int l = 0; l < 6; ++l) {
      plain += Gz.block(l, k) * B * Gzeta.block(k, l);
      tilde += Gz.block(l, k) * B * Gzeta.block(l, k);
    }
  EXPECT_LE(max_abs(multiresolvent_plain(Gz, Gzeta, B) - plain / 6.0), 1e-12);
  EXPECT_LE(max_abs(multiresolvent_tilde(Gz, Gzeta, B, 1) - tilde / 6.0), 1e-12);
}

TEST(Multiresolvent, ScalarTildeEqualsPlain) {
  const Sample s = draw_sample(presets::semicircle(1), 64, 2, 0);
  const HermitianSpectrum spec(s, true);
  const BlockMatrix Gz = spec.resolvent(cplx(0.1, 0.3)), Gzeta = spec.resolvent(cplx(0.0, -0.2));
  const Matrix B = Matrix::Constant(1, 1, cplx(0.3, -1.2));
  EXPECT_LE(max_abs(multiresolvent_tilde(Gz, Gzeta, B, 1) - multiresolvent_plain(Gz, Gzeta, B)), 1e-12);
  EXPECT_THROW(multiresolvent_tilde(Gz, Gzeta, B, 2), SymmetryError);
}

TEST(Multiresolvent, DeterministicClosedForms) {
  Gen g(52);
  const auto e = deterministic_real();
  const Sample s = draw_sample(e, 8, 1, 0);
  const HermitianSpectrum spec(s, true);
  const cplx z(0.05, 0.2), zeta(0.3, -0.1);
  // (K0 - z)^{-1} from the eigenbasis of K0
  Eigen::SelfAdjointEigenSolver<Matrix> es(e.K0);
  auto R = [&](cplx w) {
    Vector d(3);
    for (int i = 0; i < 3; ++i) d(i) = 1.0 / (es.eigenvalues()(i) - w);
    return Matrix(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint());
  };
  const Matrix B = g.complex_matrix(3);
  const Matrix expect = R(z) * B * R(zeta);
  const BlockMatrix Gz = spec.resolvent(z), Gzeta = spec.resolvent(zeta);
  EXPECT_LE(max_abs(multiresolvent_tilde(Gz, Gzeta, B, 1) - expect), 1e-10);
  EXPECT_LE(max_abs(multiresolvent_plain(Gz, Gzeta, B) - expect), 1e-10);
  const Matrix GB = multiresolvent_plain(Gz, Gzeta, B);
  EXPECT_LE(self_consistency_residual(e, GB, solve_mde_at(e, z).M, solve_mde_at(e, zeta).M, B), 1e-10);
}

TEST(Multiresolvent, SelfConsistencyResidualWithinEnvelope) {
  const auto e = presets::semicircle();
  const double eta = 0.05;
  const cplx z(0.0, eta);
  const Matrix Mz = solve_mde_at(e, z).M, Mzeta = solve_mde_at(e, std::conj(z)).M;
  const Matrix B = Matrix::Identity(1, 1);
  auto mean_residual = [&](int N) {
    double acc = 0.0;
    const int samples = 8;
    for (int k = 0; k < samples; ++k) {
      const HermitianSpectrum spec(draw_sample(e, N, 17, k), true);
      const Matrix GB = multiresolvent_plain(spec.resolvent(z), spec.resolvent(std::conj(z)), B);
      acc += self_consistency_residual(e, GB, Mz, Mzeta, B) / samples;
    }
    return acc;
  };
  auto envelope = [&](int N) { return std::pow(N, -0.5) * std::pow(eta, -1.5); };
  const double C = mean_residual(256) / envelope(256);
  RecordProperty("fitted_C", std::to_string(C));
  EXPECT_LE(mean_residual(512), C * envelope(512));
}

// --- global law and dumps ------------------------------------------------------------------------

TEST(GlobalLaw, SemicircleHistogram) {
  const auto e = presets::semicircle();
  const auto dos = density_of_states(e, uniform_grid(-2.5, 2.5, 1001));
  const RealVector ev = sample_eigenvalues(draw_sample(e, 1024, 3, 0));
  const double dist = global_law_distance(std::vector<double>(ev.data(), ev.data() + ev.size()), dos, 50);
  EXPECT_LE(dist, 0.05);
}

TEST(GlobalLaw, FourBlockHistogram) {
  const auto e = presets::four_block();
  const double R = support_radius(e);
  const auto dos = density_of_states(e, uniform_grid(-R, R, 2001));
  const RealVector ev = sample_eigenvalues(draw_sample(e, 1024, 3, 0));
  // bins over the grid range: 2R / 0.1
  const int bins = static_cast<int>(2 * R / 0.1);
  const double dist = global_law_distance(std::vector<double>(ev.data(), ev.data() + ev.size()), dos, bins);
  EXPECT_LE(dist, 0.05);
}

TEST(EigenvalueDump, RoundTrip) {
  Gen g(53);
  RealVector v(100);
  for (int i = 0; i < 100; ++i) v(i) = g.normal();
  const auto path = (std::filesystem::temp_directory_path() / "kron_dump_test.bin").string();
  write_eigenvalue_dump(path, v);
  EXPECT_EQ(read_eigenvalue_dump(path), v);
  EXPECT_EQ(std::filesystem::file_size(path), 8u + 8u * 100u);
  std::remove(path.c_str());
}
