#pragma once

// Dense Hermitian eigensolvers backed by LAPACK (divide and conquer). BLAS
// threading is pinned to one thread so that results are reproducible and
// outer parallel loops do not oversubscribe.

#include "kron/algebra.hpp"

namespace kron::lapack {

RealVector eigvalsh(const Matrix& A);
RealVector eigvalsh(const RealMatrix& A);
void eigh(const Matrix& A, RealVector& values, Matrix& vectors);
void eigh(const RealMatrix& A, RealVector& values, RealMatrix& vectors);

}  // namespace kron::lapack
