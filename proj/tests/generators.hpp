#pragma once

// Seeded random generators for property tests.

#include <cmath>
#include <random>

#include "kron/algebra.hpp"
#include "kron/ensemble.hpp"

namespace kron::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }
  double normal() { return normal_(rng_); }
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Matrix complex_matrix(int rows, int cols) {
    Matrix A(rows, cols);
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = cplx(normal(), normal());
    return A;
  }
  Matrix complex_matrix(int n) { return complex_matrix(n, n); }
  Matrix real_matrix(int n) {
    Matrix A(n, n);
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = normal();
    return A;
  }
  Vector complex_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = cplx(normal(), normal());
    return v;
  }
  Vector unit_vector(int n) {
    Vector v = complex_vector(n);
    return v / v.norm();
  }
  Matrix hermitian(int n) {
    const Matrix A = complex_matrix(n);
    return (A + A.adjoint()) / 2.0;
  }
  Matrix real_symmetric(int n) {
    const Matrix A = real_matrix(n);
    return (A + A.transpose()) / 2.0;
  }
  /// Random positive semidefinite matrix of random rank in [1, n].
  Matrix psd(int n) {
    const Matrix A = complex_matrix(n, integer(1, n));
    return A * A.adjoint();
  }
  /// Hermitian positive definite with eigenvalues in [lo, hi].
  Matrix positive_definite(int n, double lo = 0.2, double hi = 2.0) {
    Eigen::HouseholderQR<Matrix> qr(complex_matrix(n));
    const Matrix Q = qr.householderQ();
    RealVector d(n);
    for (int i = 0; i < n; ++i) d(i) = uniform(lo, hi);
    return Q * d.cast<cplx>().asDiagonal() * Q.adjoint();
  }
  /// Random matrix with positive definite imaginary part.
  Matrix herglotz(int n) { return hermitian(n) + kI * positive_definite(n); }

  /// Random valid ensemble with n in [1, max_n], d in [1, 3].
  StructureEnsemble ensemble(int beta, int max_n = 3) {
    StructureEnsemble e;
    e.n = integer(1, max_n);
    e.beta = beta;
    e.K0 = beta == 1 ? real_symmetric(e.n) : hermitian(e.n);
    const int d = integer(1, 3);
    for (int a = 0; a < d; ++a) {
      Matrix L = beta == 1 ? real_matrix(e.n) : complex_matrix(e.n);
      // sparsify so that support patterns vary
      for (Eigen::Index i = 0; i < L.size(); ++i)
        if (uniform() < 0.3) L(i) = 0.0;
      e.L.push_back(L / std::sqrt(2.0 * e.n));
    }
    return e;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

}  // namespace kron::testing
