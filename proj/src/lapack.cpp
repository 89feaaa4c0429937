#include "kron/lapack.hpp"

#include <string>

#include <lapacke.h>

#include "kron/errors.hpp"

extern "C" void openblas_set_num_threads(int num_threads);

namespace kron::lapack {

namespace {

void single_threaded_blas() {
  static const bool once = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)once;
}

template <class M>
void require_square(const M& A) {
  if (A.rows() != A.cols()) throw DimensionError("eigensolver: matrix is not square");
}

void check(lapack_int info, const char* routine) {
  if (info != 0) throw NumericalError(std::string(routine) + " failed with info " + std::to_string(info));
}

Matrix symmetrized(const Matrix& A) { return (A + A.adjoint()) * 0.5; }
RealMatrix symmetrized(const RealMatrix& A) { return (A + A.transpose()) * 0.5; }

}  // namespace

RealVector eigvalsh(const Matrix& A) {
  require_square(A);
  single_threaded_blas();
  Matrix work = symmetrized(A);
  const auto n = static_cast<lapack_int>(work.rows());
  RealVector w(n);
  if (n == 0) return w;
  check(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n, reinterpret_cast<lapack_complex_double*>(work.data()), n,
                       w.data()),
        "zheevd");
  return w;
}

RealVector eigvalsh(const RealMatrix& A) {
  require_square(A);
  single_threaded_blas();
  RealMatrix work = symmetrized(A);
  const auto n = static_cast<lapack_int>(work.rows());
  RealVector w(n);
  if (n == 0) return w;
  check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, w.data()), "dsyevd");
  return w;
}

void eigh(const Matrix& A, RealVector& values, Matrix& vectors) {
  require_square(A);
  single_threaded_blas();
  vectors = symmetrized(A);
  const auto n = static_cast<lapack_int>(vectors.rows());
  values.resize(n);
  if (n == 0) return;
  check(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, reinterpret_cast<lapack_complex_double*>(vectors.data()), n,
                       values.data()),
        "zheevd");
}

void eigh(const RealMatrix& A, RealVector& values, RealMatrix& vectors) {
  require_square(A);
  single_threaded_blas();
  vectors = symmetrized(A);
  const auto n = static_cast<lapack_int>(vectors.rows());
  values.resize(n);
  if (n == 0) return;
  check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, vectors.data(), n, values.data()), "dsyevd");
}

}  // namespace kron::lapack
