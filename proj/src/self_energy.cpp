#include "kron/self_energy.hpp"

namespace kron {

namespace {

void require_dim(const StructureEnsemble& ens, const Matrix& R) {
  if (R.rows() != ens.n || R.cols() != ens.n) throw DimensionError("self-energy: argument must be n x n");
}

void require_real_class(const StructureEnsemble& ens) {
  if (ens.beta != 1) throw SymmetryError("the transposed self-energy is defined for the real (beta=1) class only");
}

}  // namespace

Matrix gamma_apply(const StructureEnsemble& ens, const Matrix& R) {
  require_dim(ens, R);
  Matrix out = Matrix::Zero(ens.n, ens.n);
  for (const auto& L : ens.L) out += L * R * L.adjoint() + L.adjoint() * R * L;
  return out;
}

Matrix gamma_tilde_apply(const StructureEnsemble& ens, const Matrix& R) {
  require_real_class(ens);
  require_dim(ens, R);
  Matrix out = Matrix::Zero(ens.n, ens.n);
  for (const auto& L : ens.L) out += L * R * L + L.transpose() * R * L.transpose();
  return out;
}

SuperOperator gamma_superop(const StructureEnsemble& ens) {
  SuperOperator S = SuperOperator::zero(ens.n);
  for (const auto& L : ens.L) S += sandwich(L, L.adjoint()) + sandwich(L.adjoint(), L);
  return S;
}

SuperOperator gamma_tilde_superop(const StructureEnsemble& ens) {
  require_real_class(ens);
  SuperOperator S = SuperOperator::zero(ens.n);
  for (const auto& L : ens.L) S += sandwich(L, L) + sandwich(Matrix(L.transpose()), Matrix(L.transpose()));
  return S;
}

}  // namespace kron
