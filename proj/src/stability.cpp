#include "kron/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kron/mde.hpp"
#include "kron/self_energy.hpp"

namespace kron {

namespace {

void require_square(const StructureEnsemble& ens, const Matrix& M, const char* what) {
  if (M.rows() != ens.n || M.cols() != ens.n) throw DimensionError(std::string(what) + ": matrix must be n x n");
}

Matrix checked_inverse(const Matrix& M, const char* what) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(s.size() - 1) > 1e-14 * s(0))) throw NumericalError(std::string(what) + ": M is singular");
  return M.inverse();
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

SuperOperator build_one_point(const StructureEnsemble& ens, const Matrix& M) {
  require_square(ens, M, "build_one_point");
  const Matrix Minv = checked_inverse(M, "build_one_point");
  return sandwich(Minv) - gamma_superop(ens);
}

SuperOperator stability_form(const StructureEnsemble& ens, const Matrix& M) {
  require_square(ens, M, "stability_form");
  return SuperOperator::identity(ens.n) - sandwich(M) * gamma_superop(ens);
}

Matrix invert_one_point(const StructureEnsemble& ens, const Matrix& M, const Matrix& R) {
  return build_one_point(ens, M).solve(R, 1e12);
}

TwoPointOperator build_two_point(const StructureEnsemble& ens, cplx z, const Matrix& M_z, cplx zeta,
                                 const Matrix& M_zeta) {
  require_square(ens, M_z, "build_two_point");
  require_square(ens, M_zeta, "build_two_point");
  TwoPointOperator op;
  op.z = z;
  op.zeta = zeta;
  op.M_z = M_z;
  op.M_zeta = M_zeta;
  op.sign_z = sign_of(z.imag());
  op.sign_zeta = sign_of(zeta.imag());
  op.superop = sandwich(checked_inverse(M_z, "build_two_point"), checked_inverse(M_zeta, "build_two_point")) -
               gamma_superop(ens);
  return op;
}

Matrix invert_two_point(const TwoPointOperator& op, const Matrix& B, double max_condition) {
  // Conditioning is measured against the size of the two parts C^{-1} and
  // Gamma, so that a cancellation between them counts as singular even when
  // the operator is a scalar.
  const SuperOperator c_inv = sandwich(Matrix(op.M_z.inverse()), Matrix(op.M_zeta.inverse()));
  const double scale = std::max({c_inv.norm(), (c_inv - op.superop).norm(), op.superop.norm()});
  Eigen::BDCSVD<Matrix> svd(op.superop.matrix());
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double cond = smin > 0.0 ? scale / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    throw SingularOperatorError("two-point operator is numerically singular (condition " + std::to_string(cond) +
                                    "); z and zeta are too close to the pole, use pole_decompose",
                                cond);
  }
  return op.superop.solve(B, std::numeric_limits<double>::infinity());
}

int half_plane_theta(cplx z, cplx zeta) {
  if (z.imag() > 0.0 && zeta.imag() < 0.0) return 1;
  if (z.imag() < 0.0 && zeta.imag() > 0.0) return -1;
  throw DomainError("z and zeta must lie in opposite half-planes");
}

PoleDecomposition pole_decompose(const StructureEnsemble& ens, double E0, const Matrix& M0, cplx w, cplx xi) {
  require_square(ens, M0, "pole_decompose");
  const cplx z = E0 + w;
  const cplx zeta = E0 + xi;
  PoleDecomposition pd;
  pd.z = z;
  pd.zeta = zeta;
  pd.theta = half_plane_theta(z, zeta);
  pd.M0 = M0;
  const int n = ens.n;
  const Matrix imM0 = hermitian_imag_part(M0);
  if (!(min_eigenvalue(imM0) > 0.0)) throw DomainError("pole_decompose: Im M(E0) is not positive definite");
  const cplx trace_im = normalized_trace(imM0);
  const double norm_sq = std::pow(hs_norm(imM0), 2);

  auto solve_near = [&](cplx p) {
    MdeOptions mo;
    mo.warm_start = p.imag() > 0.0 ? M0 : Matrix(M0.adjoint());
    return solve_mde_at(ens, p, mo).M;
  };
  const TwoPointOperator op = build_two_point(ens, z, solve_near(z), zeta, solve_near(zeta));
  const Matrix& B = op.superop.matrix();

  Eigen::ComplexEigenSolver<Matrix> right(B);
  Eigen::ComplexEigenSolver<Matrix> left(B.adjoint());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(B.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(right.eigenvalues()(a)) < std::abs(right.eigenvalues()(b));
  });
  pd.lambda = right.eigenvalues()(order[0]);
  pd.second = order.size() > 1 ? right.eigenvalues()(order[1]) : cplx{};
  if (order.size() > 1 && std::abs(pd.second) < 3.0 * std::abs(pd.lambda)) {
    throw NumericalError("pole_decompose: smallest eigenvalue is not isolated (degenerate gap)");
  }
  Eigen::Index li = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < left.eigenvalues().size(); ++k) {
    const double dist = std::abs(left.eigenvalues()(k) - std::conj(pd.lambda));
    if (dist < best) {
      best = dist;
      li = k;
    }
  }
  const Vector r = right.eigenvectors().col(order[0]);
  const Vector l = left.eigenvectors().col(li);
  const Matrix P = r * l.adjoint() / l.dot(r);
  const Matrix Id = Matrix::Identity(B.rows(), B.cols());
  const Matrix deflated = (B + P).partialPivLu().solve(Id - P);
  pd.inverse = SuperOperator(n, P / pd.lambda + deflated);

  const Vector v = vectorize(imM0);
  pd.pole = SuperOperator(n, (2.0 * kI / trace_im) * v * v.adjoint() / static_cast<double>(n));
  pd.J = pd.inverse - (double(pd.theta) / (z - zeta)) * pd.pole;

  pd.alpha = kI * trace_im / (2.0 * norm_sq);
  const Matrix L = imM0 / std::sqrt(norm_sq);
  const Matrix Minv = M0.inverse();
  const Matrix Mp = mde_derivative(ens, M0);
  pd.alpha_perturbative = hs_inner(L, Minv.adjoint() * L * Minv * Mp * Minv);
  pd.lambda_model = pd.theta == 1 ? -pd.alpha * w - std::conj(pd.alpha) * xi
                                  : -std::conj(pd.alpha) * w - pd.alpha * xi;
  return pd;
}

PolarParts balanced_polar(const Matrix& M) {
  if (M.rows() != M.cols()) throw DimensionError("balanced_polar: M must be square");
  const Matrix im = hermitian_imag_part(M);
  const Matrix re = hermitian_real_part(M);
  if (!(min_eigenvalue(im) > 0.0)) throw DomainError("balanced_polar: Im M is not positive definite");
  const auto n = M.rows();
  const Matrix im_inv_sqrt = pd_power(im, -0.5);
  const Matrix im_sqrt = pd_power(im, 0.5);
  PolarParts p;
  p.T = hermitian_real_part(im_inv_sqrt * re * im_inv_sqrt);
  const Matrix I = Matrix::Identity(n, n);
  p.W = pd_power(I + p.T * p.T, 0.25);
  const Matrix W_inv = pd_power(I + p.T * p.T, -0.25);
  p.Q = p.W * im_sqrt;
  p.U = W_inv * (p.T + kI * I) * W_inv;
  return p;
}

SaturatedSpectrum saturated_self_energy(const StructureEnsemble& ens, const Matrix& M) {
  require_square(ens, M, "saturated_self_energy");
  const PolarParts p = balanced_polar(M);
  SaturatedSpectrum s;
  const Matrix Qa = p.Q.adjoint();
  s.F = sandwich(p.Q, Qa) * gamma_superop(ens) * sandwich(Qa, p.Q);
  const Matrix& F = s.F.matrix();
  s.self_adjointness_defect = Eigen::JacobiSVD<Matrix>(F - F.adjoint()).singularValues()(0);
  Eigen::SelfAdjointEigenSolver<Matrix> es((F + F.adjoint()) * 0.5);
  s.eigenvalues = es.eigenvalues();
  const auto m = s.eigenvalues.size();
  s.top_eigenvalue = s.eigenvalues(m - 1);
  Matrix top = unvectorize(es.eigenvectors().col(m - 1), ens.n);
  const cplx tr = top.trace();
  if (std::abs(tr) > 0.0) top *= std::conj(tr) / std::abs(tr);
  s.top_vector = top / hs_norm(top);
  double rest = 0.0;
  for (Eigen::Index k = 0; k + 1 < m; ++k) rest = std::max(rest, std::abs(s.eigenvalues(k)));
  s.gap = 1.0 - rest;
  s.im_U = hermitian_imag_part(p.U);
  s.cosine_with_im_U = std::abs(hs_inner(s.top_vector, s.im_U)) / (hs_norm(s.top_vector) * hs_norm(s.im_U));
  return s;
}

PairOperator real_two_point(const StructureEnsemble& ens, const Matrix& M_z, const Matrix& M_zeta) {
  if (ens.beta != 1) throw SymmetryError("real_two_point requires the real (beta=1) class");
  require_square(ens, M_z, "real_two_point");
  require_square(ens, M_zeta, "real_two_point");
  const int n = ens.n;
  const Matrix I = Matrix::Identity(n, n);
  const Matrix Mz_inv = checked_inverse(M_z, "real_two_point");
  const Matrix Mzeta_inv = checked_inverse(M_zeta, "real_two_point");
  // A (x) B -> (X A) (x) (B Y) has matrix kron(kron(X, I), kron(I, Y^t)).
  auto pair_map = [&](const Matrix& X, const Matrix& Y) { return kron(kron(X, I), kron(I, Matrix(Y.transpose()))); };
  Matrix out = pair_map(Mz_inv, Mzeta_inv);
  for (const auto& L : ens.L) {
    const Matrix Lt = L.transpose();
    out -= pair_map(L, Lt) + pair_map(Lt, L);
  }
  return {n, out};
}

PairOperator real_two_point_by_flip(const StructureEnsemble& ens, const Matrix& M_z, const Matrix& M_zeta) {
  if (ens.beta != 1) throw SymmetryError("real_two_point requires the real (beta=1) class");
  const TwoPointOperator op = build_two_point(ens, cplx{}, M_z, cplx{}, M_zeta);
  const FlipInvolution phi(ens.n);
  return {ens.n, phi.conjugate(lift_first_factor(op.superop))};
}

PairOperator invert_real_two_point(const StructureEnsemble& ens, const Matrix& M_z, const Matrix& M_zeta,
                                   double max_condition) {
  if (ens.beta != 1) throw SymmetryError("real_two_point requires the real (beta=1) class");
  const TwoPointOperator op = build_two_point(ens, cplx{}, M_z, cplx{}, M_zeta);
  const SuperOperator inv = op.superop.inverse(max_condition);
  const FlipInvolution phi(ens.n);
  return {ens.n, phi.conjugate(lift_first_factor(inv))};
}

Matrix deterministic_two_point_approx(const Matrix& M0, cplx z, cplx zeta, const Matrix& B, TwoPointVariant variant,
                                      double bulk_threshold) {
  if (M0.rows() != M0.cols() || B.rows() != M0.rows() || B.cols() != M0.cols())
    throw DimensionError("deterministic_two_point_approx: dimension mismatch");
  if (density_from(M0) < bulk_threshold) throw DomainError("deterministic_two_point_approx: E0 is not in the bulk");
  const int theta = half_plane_theta(z, zeta);
  const Matrix imM0 = hermitian_imag_part(M0);
  const cplx tr = normalized_trace(imM0);
  if (variant == TwoPointVariant::plain) {
    return double(theta) * (2.0 * kI / (z - zeta)) * (hs_inner(imM0, B) / tr) * imM0;
  }
  // the pair-space projection contributes a normalized trace, hence the 1/n
  return double(theta) * (2.0 * kI / ((z - zeta) * tr * double(M0.rows()))) * imM0 * B.transpose() * imM0;
}

double ward_residual(const StructureEnsemble& ens, const Matrix& M0) {
  require_square(ens, M0, "ward_residual");
  const Matrix imM = hermitian_imag_part(M0);
  const Matrix Minv = M0.inverse();
  return hs_norm(gamma_apply(ens, imM) - Minv.adjoint() * imM * Minv);
}

KernelCheck kernel_check(const StructureEnsemble& ens, const Matrix& M0) {
  require_square(ens, M0, "kernel_check");
  const TwoPointOperator op = build_two_point(ens, cplx{}, Matrix(M0.adjoint()), cplx{}, M0);
  KernelCheck k;
  k.residual = hs_norm(op.superop.apply(hermitian_imag_part(M0)));
  RealVector s = Eigen::JacobiSVD<Matrix>(op.superop.matrix()).singularValues();
  k.singular_values = s.reverse();
  return k;
}

TraceIdentity trace_identity(const StructureEnsemble& ens, const Matrix& M0, const Matrix& M0_prime) {
  require_square(ens, M0, "trace_identity");
  const Matrix imM = hermitian_imag_part(M0);
  TraceIdentity t;
  t.value = normalized_trace(gamma_apply(ens, imM * M0.inverse() * M0_prime) * imM);
  t.target = 0.5 * kI * normalized_trace(imM);
  t.phi = 2.0 * kI / normalized_trace(imM) * t.value;
  return t;
}

}  // namespace kron
