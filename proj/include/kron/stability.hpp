#pragma once

// One- and two-point stability operators of the Dyson equation, the pole
// structure of the two-point operator across the real axis, the balanced
// polar decomposition and the saturated self-energy.

#include "kron/algebra.hpp"
#include "kron/ensemble.hpp"

namespace kron {

// --- one point -------------------------------------------------------------------

/// B = C_M^{-1} - Gamma.
SuperOperator build_one_point(const StructureEnsemble& ens, const Matrix& M);
/// Id - C_M Gamma.
SuperOperator stability_form(const StructureEnsemble& ens, const Matrix& M);
/// B^{-1}[R]; B^{-1}[I] = M'. Throws SingularOperatorError above condition 1e12.
Matrix invert_one_point(const StructureEnsemble& ens, const Matrix& M, const Matrix& R);

// --- two points --------------------------------------------------------------------

struct TwoPointOperator {
  cplx z;
  cplx zeta;
  Matrix M_z;
  Matrix M_zeta;
  SuperOperator superop;  ///< C^{-1}_{M(z), M(zeta)} - Gamma
  int sign_z = 0;          ///< sign of Im z (0 on the real axis)
  int sign_zeta = 0;
};

TwoPointOperator build_two_point(const StructureEnsemble& ens, cplx z, const Matrix& M_z, cplx zeta,
                                 const Matrix& M_zeta);

/// Solves M^B = M(z) B M(zeta) + M(z) Gamma[M^B] M(zeta). Throws
/// SingularOperatorError near the pole (use pole_decompose there).
Matrix invert_two_point(const TwoPointOperator& op, const Matrix& B, double max_condition = 1e12);

/// theta = +1 for (Im z > 0, Im zeta < 0), -1 for the reverse; DomainError otherwise.
int half_plane_theta(cplx z, cplx zeta);

struct PoleDecomposition {
  cplx z;
  cplx zeta;
  int theta = 0;
  SuperOperator pole;      ///< R -> (2i / <Im M0>) Im M0 <Im M0, R>
  SuperOperator J;         ///< B^{-1} - theta * pole / (z - zeta)
  SuperOperator inverse;   ///< B^{-1}, assembled from the spectral split
  cplx lambda;             ///< smallest-modulus eigenvalue of B
  cplx second;             ///< next eigenvalue by modulus (0 when n = 1)
  cplx alpha;              ///< i <Im M0> / (2 |Im M0|_HS^2)
  cplx alpha_perturbative; ///< first-order eigenvalue perturbation coefficient
  cplx lambda_model;       ///< first-order model of lambda in (w, xi)
  Matrix M0;
};

/// Decomposes B_{z,zeta} for z = E0 + w, zeta = E0 + xi in opposite
/// half-planes, given the boundary value M0 = M(E0).
PoleDecomposition pole_decompose(const StructureEnsemble& ens, double E0, const Matrix& M0, cplx w, cplx xi);

// --- polar decomposition and saturated self-energy ------------------------------------

struct PolarParts {
  Matrix Q;
  Matrix U;
  Matrix W;
  Matrix T;
};

/// M = Q* U Q with U unitary; requires Im M > 0.
PolarParts balanced_polar(const Matrix& M);

struct SaturatedSpectrum {
  SuperOperator F;
  RealVector eigenvalues;  ///< ascending
  Matrix top_vector;       ///< unit HS norm, phase fixed so that its trace is >= 0
  double top_eigenvalue = 0.0;
  double gap = 0.0;        ///< 1 - max |eigenvalue| over the rest of the spectrum
  double self_adjointness_defect = 0.0;
  Matrix im_U;
  double cosine_with_im_U = 0.0;
};

/// F[R] = Q Gamma[Q* R Q] Q* with M = Q* U Q.
SaturatedSpectrum saturated_self_energy(const StructureEnsemble& ens, const Matrix& M);

// --- real symmetry class ------------------------------------------------------------

/// Operator on C^{n x n} (x) C^{n x n} (vectors of length n^4, see pair_index).
struct PairOperator {
  int n = 0;
  Matrix matrix;
  Vector apply(const Vector& v) const { return matrix * v; }
};

/// Built from the definition
///   A (x) B -> M(z)^{-1} A (x) B M(zeta)^{-1} - sum_a (L A (x) B L^t + L^t A (x) B L).
PairOperator real_two_point(const StructureEnsemble& ens, const Matrix& M_z, const Matrix& M_zeta);
/// The same operator as Phi (B_{z,zeta} (x) Id) Phi.
PairOperator real_two_point_by_flip(const StructureEnsemble& ens, const Matrix& M_z, const Matrix& M_zeta);
/// Inverse as Phi (B_{z,zeta}^{-1} (x) Id) Phi.
PairOperator invert_real_two_point(const StructureEnsemble& ens, const Matrix& M_z, const Matrix& M_zeta,
                                   double max_condition = 1e12);

// --- leading terms near the pole ------------------------------------------------------

enum class TwoPointVariant { plain, tilde };

/// plain: theta (2i/(z-zeta)) (<Im M0, B>/<Im M0>) Im M0
/// tilde: theta (2i/((z-zeta) n <Im M0>)) Im M0 B^t Im M0
/// Throws DomainError when rho(E0) < bulk_threshold or z, zeta share a half-plane.
Matrix deterministic_two_point_approx(const Matrix& M0, cplx z, cplx zeta, const Matrix& B, TwoPointVariant variant,
                                      double bulk_threshold = 1e-3);

// --- bulk identities --------------------------------------------------------------------

/// |Gamma[Im M] - M^{-*} Im M M^{-1}|_HS.
double ward_residual(const StructureEnsemble& ens, const Matrix& M0);

struct KernelCheck {
  double residual = 0.0;      ///< |B_{E0,E0}[Im M0]|_HS
  RealVector singular_values; ///< ascending
};
/// B_{E0,E0} = C^{-1}_{M0*, M0} - Gamma and its action on Im M0.
KernelCheck kernel_check(const StructureEnsemble& ens, const Matrix& M0);

struct TraceIdentity {
  cplx value;   ///< <Gamma[Im M0 M0^{-1} M0'] Im M0>
  cplx target;  ///< (i/2) <Im M0>
  cplx phi;     ///< (2i / <Im M0>) value, equal to -1
};
TraceIdentity trace_identity(const StructureEnsemble& ens, const Matrix& M0, const Matrix& M0_prime);

}  // namespace kron
