#include <gtest/gtest.h>

#include "generators.hpp"
#include "kron/errors.hpp"
#include "kron/mde.hpp"
#include "kron/self_energy.hpp"
#include "kron/stability.hpp"

using namespace kron;
using kron::testing::Gen;

namespace {

cplx m_sc(cplx z) {
  cplx s = std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
  cplx m = (-z + s) / 2.0;
  if (z.imag() > 0 && m.imag() < 0) m = (-z - s) / 2.0;
  return m;
}

Matrix scalar(cplx v) { return Matrix::Constant(1, 1, v); }

std::vector<StructureEnsemble> bulk_ensembles() { return {presets::semicircle(), presets::four_block()}; }

}  // namespace

// --- one point -------------------------------------------------------------------------

TEST(OnePoint, SemicircleScalar) {
  const cplx m(0.0, std::sqrt(2.0) - 1.0);
  const auto B = build_one_point(presets::semicircle(), scalar(m));
  EXPECT_NEAR(std::abs(B.matrix()(0, 0) - (1.0 / (m * m) - 1.0)), 0.0, 1e-12);
  EXPECT_NEAR(B.matrix()(0, 0).real(), -6.828427, 1e-6);
}

TEST(OnePoint, InverseOfIdentityIsDerivative) {
  for (const auto& e : bulk_ensembles())
    for (const cplx z : {cplx(0.3, 0.2), cplx(-0.5, 0.05), cplx(1.0, 1.0)}) {
      const Matrix M = solve_mde_at(e, z).M;
      const Matrix I = Matrix::Identity(e.n, e.n);
      EXPECT_LE(hs_norm(invert_one_point(e, M, I) - mde_derivative(e, M)), 1e-8);
      // B = C_M^{-1} (Id - C_M Gamma)
      const auto lhs = build_one_point(e, M);
      const auto rhs = sandwich(Matrix(M.inverse())) * stability_form(e, M);
      EXPECT_LE(max_abs(lhs.matrix() - rhs.matrix()), 1e-10);
    }
}

TEST(OnePoint, DeterministicInverseIsSandwich) {
  Matrix K(2, 2);
  K << 0.5, 0.1, 0.1, -0.2;
  const auto e = presets::deterministic(K);
  const Matrix M = solve_mde_at(e, cplx(0.1, 0.4)).M;
  EXPECT_LE(max_abs(build_one_point(e, M).inverse().matrix() - sandwich(M).matrix()), 1e-12);
}

// --- two points -------------------------------------------------------------------------

TEST(TwoPoint, SemicircleAcrossTheAxisIsSingular) {
  const auto op = build_two_point(presets::semicircle(), cplx(0, -0.0), scalar(cplx(0, -1)), cplx(0, 0.0),
                                  scalar(cplx(0, 1)));
  EXPECT_LE(std::abs(op.superop.matrix()(0, 0)), 1e-15);
  EXPECT_THROW(invert_two_point(op, scalar(1.0)), SingularOperatorError);
}

TEST(TwoPoint, EqualArgumentsReduceToOnePoint) {
  const auto e = presets::four_block();
  const cplx z(0.2, 0.3);
  const Matrix M = solve_mde_at(e, z).M;
  EXPECT_LE(max_abs(build_two_point(e, z, M, z, M).superop.matrix() - build_one_point(e, M).matrix()), 1e-14);
}

TEST(TwoPoint, ScalarClosedFormOnPointPairs) {
  const auto e = presets::semicircle();
  Gen g(40);
  for (int t = 0; t < 20; ++t) {
    const cplx z(g.uniform(-2.5, 2.5), g.uniform(0.01, 1.0));
    const cplx zeta(g.uniform(-2.5, 2.5), (t % 2 ? 1.0 : -1.0) * g.uniform(0.01, 1.0));
    const cplx mz = m_sc(z), mzeta = zeta.imag() > 0 ? m_sc(zeta) : std::conj(m_sc(std::conj(zeta)));
    const auto op = build_two_point(e, z, solve_mde_at(e, z).M, zeta, solve_mde_at(e, zeta).M);
    const cplx got = invert_two_point(op, scalar(1.0))(0, 0);
    EXPECT_LE(std::abs(got - (mz - mzeta) / (z - zeta)), 1e-10 * (1.0 + std::abs(got)));
    EXPECT_LE(std::abs(got - mz * mzeta / (1.0 - mz * mzeta)), 1e-10 * (1.0 + std::abs(got)));
  }
}

TEST(TwoPoint, SolvesTheDefiningEquation) {
  Gen g(41);
  for (const auto& e : bulk_ensembles()) {
    const cplx z(0.3, 0.1), zeta(-0.2, 0.4);
    const Matrix Mz = solve_mde_at(e, z).M, Mzeta = solve_mde_at(e, zeta).M;
    const auto op = build_two_point(e, z, Mz, zeta, Mzeta);
    const Matrix B = g.complex_matrix(e.n);
    const Matrix MB = invert_two_point(op, B);
    EXPECT_LE(hs_norm(MB - Mz * B * Mzeta - Mz * gamma_apply(e, MB) * Mzeta), 1e-9);
    EXPECT_LE(hs_norm(op.superop(MB) - B), 1e-9 * hs_norm(B));
    EXPECT_LE(max_abs(invert_two_point(op, Matrix::Zero(e.n, e.n))), 0.0);
  }
}

TEST(TwoPoint, HalfPlaneConvention) {
  EXPECT_EQ(half_plane_theta(cplx(0, 1), cplx(0, -1)), 1);
  EXPECT_EQ(half_plane_theta(cplx(0, -1), cplx(0, 1)), -1);
  EXPECT_THROW(half_plane_theta(cplx(0, 1), cplx(0, 2)), DomainError);
}

TEST(TwoPoint, InverseNormBounds) {
  // same half-plane: bounded; opposite: grows like 1/|z - zeta|
  for (const auto& e : bulk_ensembles()) {
    const double E0 = 0.1;
    std::vector<double> same, opposite;
    for (double eta : {0.08, 0.04, 0.02, 0.01}) {
      const cplx z(E0, eta), zs(E0, 2 * eta), zo(E0, -eta);
      const Matrix Mz = solve_mde_at(e, z).M;
      same.push_back(build_two_point(e, z, Mz, zs, solve_mde_at(e, zs).M).superop.inverse().norm());
      opposite.push_back(build_two_point(e, z, Mz, zo, solve_mde_at(e, zo).M).superop.inverse().norm() * 2 * eta);
    }
    for (std::size_t k = 1; k < same.size(); ++k) {
      EXPECT_LT(same[k], 1.5 * same[0]);
      EXPECT_LT(opposite[k], 1.5 * opposite[0]);
      EXPECT_GT(opposite[k], opposite[0] / 1.5);
    }
  }
}

// --- pole decomposition ------------------------------------------------------------------

TEST(Pole, SemicircleAlphaAndLinearModel) {
  const auto e = presets::semicircle();
  const Matrix M0 = continue_to_real_axis(e, 0.0).M;
  const cplx w(0, -1e-3), xi(0, 1e-3);
  const auto pd = pole_decompose(e, 0.0, M0, w, xi);
  EXPECT_EQ(pd.theta, -1);
  EXPECT_LE(std::abs(pd.alpha - cplx(0, 0.5)), 1e-6);
  EXPECT_LE(std::abs(pd.alpha_perturbative - pd.alpha), 1e-6);
  EXPECT_LE(std::abs(pd.lambda - cplx(0, 0.5) * (w - xi)), 1e-5);
  EXPECT_LE(std::abs(pd.lambda_model - cplx(0, 0.5) * (w - xi)), 1e-15);
}

TEST(Pole, ReconstructionMatchesDirectInverse) {
  for (const auto& e : bulk_ensembles()) {
    const Matrix M0 = continue_to_real_axis(e, 0.0).M;
    for (const auto& [w, xi] : {std::pair{cplx(1e-3, 2e-3), cplx(-1e-3, -2e-3)},
                                std::pair{cplx(0, -5e-3), cplx(2e-3, 3e-3)}}) {
      const auto pd = pole_decompose(e, 0.0, M0, w, xi);
      ASSERT_GE(std::abs(pd.z - pd.zeta), 10 * (std::norm(w) + std::norm(xi)));
      const auto direct = build_two_point(e, pd.z, solve_mde_at(e, pd.z).M, pd.zeta, solve_mde_at(e, pd.zeta).M)
                              .superop.inverse(1e16);
      const auto rebuilt = (double(pd.theta) / (pd.z - pd.zeta)) * pd.pole + pd.J;
      EXPECT_LE((rebuilt.matrix() - direct.matrix()).norm(), 1e-7 * direct.matrix().norm());
      EXPECT_LE((pd.inverse.matrix() - direct.matrix()).norm(), 1e-7 * direct.matrix().norm());
    }
  }
}

TEST(Pole, EigenvalueRemainderIsQuadratic) {
  for (const auto& e : bulk_ensembles()) {
    const double E0 = 0.2;
    const Matrix M0 = continue_to_real_axis(e, E0).M;
    cplx w(0.006, 0.008), xi(-0.008, -0.006);
    std::vector<double> err;
    for (int k = 0; k < 4; ++k, w /= 2.0, xi /= 2.0) {
      const auto pd = pole_decompose(e, E0, M0, w, xi);
      err.push_back(std::abs(pd.lambda - pd.lambda_model));
    }
    for (std::size_t k = 1; k < err.size(); ++k) {
      EXPECT_GE(err[k - 1] / err[k], 3.0);
      EXPECT_LE(err[k - 1] / err[k], 5.0);
    }
  }
}

TEST(Pole, RequiresOppositeHalfPlanes) {
  const auto e = presets::semicircle();
  EXPECT_THROW(pole_decompose(e, 0.0, scalar(cplx(0, 1)), cplx(0, 1e-3), cplx(0, 2e-3)), DomainError);
}

// --- polar decomposition and saturated self-energy ----------------------------------------

TEST(Polar, ImaginaryUnit) {
  const auto p = balanced_polar(cplx(0, 1) * Matrix::Identity(3, 3));
  EXPECT_LE(max_abs(p.Q - Matrix::Identity(3, 3)), 1e-14);
  EXPECT_LE(max_abs(p.W - Matrix::Identity(3, 3)), 1e-14);
  EXPECT_LE(max_abs(p.U - cplx(0, 1) * Matrix::Identity(3, 3)), 1e-14);
}

TEST(Polar, SemicircleAtOne) {
  const Matrix M = scalar(cplx(-0.5, std::sqrt(3.0) / 2));
  const auto p = balanced_polar(M);
  EXPECT_LE(max_abs(p.Q.adjoint() * p.U * p.Q - M), 1e-12);
  EXPECT_LE(max_abs(p.U.adjoint() * p.U - Matrix::Identity(1, 1)), 1e-12);
}

TEST(Polar, RandomHerglotzMatrices) {
  Gen g(42);
  for (int t = 0; t < 50; ++t) {
    const int n = g.integer(1, 6);
    const Matrix M = g.herglotz(n);
    const auto p = balanced_polar(M);
    const Matrix I = Matrix::Identity(n, n);
    EXPECT_LE(max_abs(p.Q.adjoint() * p.U * p.Q - M), 1e-10);
    EXPECT_LE(max_abs(p.U.adjoint() * p.U - I), 1e-10);
    EXPECT_LE(max_abs(hermitian_imag_part(p.U) - p.W.inverse() * p.W.inverse()), 1e-10);
    EXPECT_GT(min_eigenvalue(p.W), 0.0);
    EXPECT_LE(max_abs(p.W * p.W * p.W * p.W - (I + p.T * p.T)), 1e-9);
  }
  EXPECT_THROW(balanced_polar(Matrix::Identity(2, 2)), DomainError);
}

TEST(Saturated, SemicircleAtZeroIsIdentity) {
  const auto s = saturated_self_energy(presets::semicircle(), scalar(cplx(0, 1)));
  EXPECT_NEAR(s.top_eigenvalue, 1.0, 1e-14);
  EXPECT_NEAR(std::abs(s.top_vector(0, 0)), 1.0, 1e-14);
}

TEST(Saturated, PerronFrobeniusAtBulkPoints) {
  for (const auto& e : bulk_ensembles())
    for (double E0 : {-0.6, 0.0, 0.45}) {
      const Matrix M0 = continue_to_real_axis(e, E0).M;
      const auto s = saturated_self_energy(e, M0);
      EXPECT_NEAR(s.top_eigenvalue, 1.0, 1e-6);
      EXPECT_GE(s.cosine_with_im_U, 1.0 - 1e-8);
      EXPECT_LE(s.self_adjointness_defect, 1e-10);
      if (e.n > 1) {
        EXPECT_GT(s.gap, 0.0);
        EXPECT_GE(s.eigenvalues(0), -1.0 + s.gap - 1e-12);
      }
    }
}

TEST(Saturated, StrictContractionOffTheAxis) {
  for (const auto& e : bulk_ensembles()) {
    const auto s = saturated_self_energy(e, solve_mde_at(e, cplx(0.0, 0.1)).M);
    EXPECT_LT(s.top_eigenvalue, 1.0 - 1e-4);
  }
}

// --- real class ------------------------------------------------------------------------------

TEST(RealPair, ScalarCaseEqualsTwoPoint) {
  const auto e = presets::semicircle(1);
  const Matrix Mz = scalar(m_sc(cplx(0.2, 0.3))), Mzeta = scalar(m_sc(cplx(-0.1, 0.5)));
  const auto P = real_two_point(e, Mz, Mzeta);
  const auto B = build_two_point(e, cplx(0.2, 0.3), Mz, cplx(-0.1, 0.5), Mzeta);
  EXPECT_LE(std::abs(P.matrix(0, 0) - B.superop.matrix()(0, 0)), 1e-14);
}

TEST(RealPair, DefinitionMatchesFlipConjugation) {
  for (const auto& e : {presets::two_block(1), presets::four_block(1)}) {
    const cplx z(0.1, 0.05), zeta(0.1, -0.05);
    const Matrix Mz = solve_mde_at(e, z).M, Mzeta = solve_mde_at(e, zeta).M;
    const auto a = real_two_point(e, Mz, Mzeta);
    const auto b = real_two_point_by_flip(e, Mz, Mzeta);
    EXPECT_LE(max_abs(a.matrix - b.matrix), 1e-12);
  }
}

TEST(RealPair, ApplyThenInvertRoundTrip) {
  Gen g(43);
  const auto e = presets::two_block(1);
  const cplx z(0.0, 0.1), zeta(0.2, 0.3);
  const Matrix Mz = solve_mde_at(e, z).M, Mzeta = solve_mde_at(e, zeta).M;
  const auto P = real_two_point(e, Mz, Mzeta);
  const auto Pi = invert_real_two_point(e, Mz, Mzeta);
  const Vector v = g.complex_vector(16);
  EXPECT_LE((Pi.apply(P.apply(v)) - v).norm(), 1e-9 * v.norm());
}

TEST(RealPair, RequiresRealClass) {
  const auto e = presets::two_block(2);
  const Matrix M = solve_mde_at(e, cplx(0, 1)).M;
  EXPECT_THROW(real_two_point(e, M, M), SymmetryError);
}

// --- leading terms -------------------------------------------------------------------------

TEST(LeadingTerm, ScalarValues) {
  const Matrix M0 = scalar(cplx(0, 1)), B = scalar(1.0);
  const cplx z(0, 0.1), zeta(0, -0.1);
  const Matrix plain = deterministic_two_point_approx(M0, z, zeta, B, TwoPointVariant::plain);
  EXPECT_LE(std::abs(plain(0, 0) - 2.0 * kI / (z - zeta)), 1e-14);
  const Matrix tilde = deterministic_two_point_approx(M0, z, zeta, B, TwoPointVariant::tilde);
  EXPECT_LE(max_abs(tilde - plain), 1e-14);
  // the theta sign flips with the half-planes
  EXPECT_LE(max_abs(deterministic_two_point_approx(M0, zeta, z, B, TwoPointVariant::plain) - plain), 1e-14);
}

TEST(LeadingTerm, OrthogonalObservableVanishes) {
  const auto e = presets::four_block();
  const Matrix M0 = continue_to_real_axis(e, 0.0).M;
  const Matrix ImM = hermitian_imag_part(M0);
  Gen g(44);
  Matrix B = g.complex_matrix(4);
  B -= (hs_inner(ImM, B) / hs_inner(ImM, ImM)) * ImM;
  EXPECT_LE(max_abs(deterministic_two_point_approx(M0, cplx(0, 0.1), cplx(0, -0.1), B, TwoPointVariant::plain)),
            1e-12);
}

// Near the pole, (z - zeta) times the exact deterministic solution converges to
// the leading term: B_{z,zeta}^{-1}[B] for the plain average and the pair-space
// inverse applied to I (x) I, contracted with B, for the real-class average.
TEST(LeadingTerm, MatchesExactInverseNearThePole) {
  Gen g(45);
  for (const auto& e : {presets::four_block(1), presets::two_block(1)}) {
    const int n = e.n;
    const Matrix M0 = continue_to_real_axis(e, 0.1).M;
    const Matrix B = g.real_matrix(n);
    const cplx z(0.1, 1e-5), zeta(0.1, -1e-5);
    const Matrix Mz = solve_mde_at(e, z).M, Mzeta = solve_mde_at(e, zeta).M;
    const Matrix plain = invert_two_point(build_two_point(e, z, Mz, zeta, Mzeta), B, 1e16);
    const Matrix plain_lead = deterministic_two_point_approx(M0, z, zeta, B, TwoPointVariant::plain);
    EXPECT_LE(hs_norm(plain - plain_lead), 1e-3 * hs_norm(plain_lead));

    const auto P = invert_real_two_point(e, Mz, Mzeta, 1e16);
    Vector id = Vector::Zero(n * n * n * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) id(pair_index(n, i, i, k, k)) = 1.0;
    const Vector x = P.apply(id);
    Matrix tilde = Matrix::Zero(n, n);  // sum x_ijkl E_ij B E_lk
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) tilde(i, k) += x(pair_index(n, i, j, k, l)) * B(j, l);
    const Matrix tilde_lead = deterministic_two_point_approx(M0, z, zeta, B, TwoPointVariant::tilde);
    EXPECT_LE(hs_norm(tilde - tilde_lead), 1e-3 * hs_norm(tilde_lead));
  }
}

TEST(LeadingTerm, RejectsEdgeEnergies) {
  EXPECT_THROW(deterministic_two_point_approx(scalar(-0.3), cplx(3, 0.1), cplx(3, -0.1), scalar(1.0),
                                              TwoPointVariant::plain),
               DomainError);
}

// --- bulk identities ---------------------------------------------------------------------------

TEST(BulkIdentities, WardKernelAndTrace) {
  for (const auto& e : {presets::semicircle(), presets::four_block(), presets::two_block(2)})
    for (double E0 : {-0.3, 0.0, 0.25}) {
      const Matrix M0 = continue_to_real_axis(e, E0).M;
      EXPECT_LE(ward_residual(e, M0), 1e-9);
      const auto k = kernel_check(e, M0);
      EXPECT_LE(k.residual, 1e-8);
      if (k.singular_values.size() > 1) EXPECT_GE(k.singular_values(1), 1e3 * k.singular_values(0));
      const auto t = trace_identity(e, M0, mde_derivative(e, M0));
      EXPECT_LE(std::abs(t.value - t.target), 1e-8);
      EXPECT_LE(std::abs(t.phi + 1.0), 1e-8);
    }
}
