#pragma once

#include "kron/algebra.hpp"
#include "kron/ensemble.hpp"

namespace kron {

/// Gamma[R] = sum_a (L_a R L_a* + L_a* R L_a).
Matrix gamma_apply(const StructureEnsemble& ens, const Matrix& R);
/// Real-class companion sum_a (L_a R L_a + L_a^t R L_a^t); throws SymmetryError for beta = 2.
Matrix gamma_tilde_apply(const StructureEnsemble& ens, const Matrix& R);

SuperOperator gamma_superop(const StructureEnsemble& ens);
SuperOperator gamma_tilde_superop(const StructureEnsemble& ens);

}  // namespace kron
