#pragma once

// Dense complex matrices, superoperators on C^{n x n}, the pair-space flip,
// and nN x nN block matrices.
//
// Vectorization convention: an n x n matrix R is flattened row by row,
// vec(R)[i*n + j] = R(i, j). Under this convention the map R -> A R B is the
// Kronecker product A (x) B^t, and vec(E_ij) = e_i (x) e_j.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace kron {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// --- scalar products and norms -------------------------------------------

/// Normalized Hilbert-Schmidt product <S, T> = Tr(S* T) / r.
cplx hs_inner(const Matrix& S, const Matrix& T);
double hs_norm(const Matrix& T);
/// <T> = <I, T> = Tr(T) / r.
cplx normalized_trace(const Matrix& T);

double max_abs(const Matrix& A);
bool all_finite(const Matrix& A);
bool is_hermitian(const Matrix& A, double rel_tol = 1e-12);

/// E_ij in C^{n x n} (zero-based indices).
Matrix unit_matrix(int n, int i, int j);
Matrix kron(const Matrix& A, const Matrix& B);

/// (A + A*) / 2 and (A - A*) / 2i.
Matrix hermitian_real_part(const Matrix& A);
Matrix hermitian_imag_part(const Matrix& A);

// --- Hermitian functional calculus ----------------------------------------
// All of these symmetrize the argument first.

RealVector hermitian_eigenvalues(const Matrix& A);
double min_eigenvalue(const Matrix& A);
double max_eigenvalue(const Matrix& A);
Matrix hermitian_function(const Matrix& A, const std::function<double(double)>& f);
/// A^p for positive definite A; throws DomainError if A is not positive definite.
Matrix pd_power(const Matrix& A, double p);

// --- vectorization ----------------------------------------------------------

Vector vectorize(const Matrix& R);
Matrix unvectorize(const Vector& v, int n);

// --- superoperators ---------------------------------------------------------

/// Linear map on C^{n x n}, stored as its n^2 x n^2 matrix in the row-major
/// vectorization.
class SuperOperator {
 public:
  SuperOperator() = default;
  SuperOperator(int n, Matrix matrix);

  static SuperOperator identity(int n);
  static SuperOperator zero(int n);
  /// Builds the matrix column by column from images of the units E_ij.
  static SuperOperator from_map(int n, const std::function<Matrix(const Matrix&)>& map);

  int dim() const { return n_; }
  const Matrix& matrix() const { return matrix_; }

  Matrix apply(const Matrix& R) const;
  Matrix operator()(const Matrix& R) const { return apply(R); }

  /// Adjoint with respect to hs_inner (the conjugate transpose).
  SuperOperator adjoint() const;
  /// 2-norm condition number (operator norm induced by hs_norm).
  double condition_number() const;
  /// Operator norm induced by hs_norm.
  double norm() const;
  /// Throws SingularOperatorError when the condition number exceeds max_condition.
  SuperOperator inverse(double max_condition = 1e12) const;
  /// Solves this[X] = B; throws SingularOperatorError like inverse().
  Matrix solve(const Matrix& B, double max_condition = 1e12) const;

  SuperOperator& operator+=(const SuperOperator& other);
  SuperOperator& operator-=(const SuperOperator& other);
  friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }
  friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) { return a -= b; }
  /// Composition (a * b)[R] = a[b[R]].
  friend SuperOperator operator*(const SuperOperator& a, const SuperOperator& b);
  friend SuperOperator operator*(cplx s, SuperOperator a);

 private:
  int n_ = 0;
  Matrix matrix_;
};

/// C_{A,B}: R -> A R B.
SuperOperator sandwich(const Matrix& A, const Matrix& B);
/// C_T: R -> T R T.
SuperOperator sandwich(const Matrix& T);

// --- pair space C^{n x n} (x) C^{n x n} ---------------------------------------
// Elements are vectors of length n^4; E_ij (x) E_kl sits at
// ((i*n + j)*n + k)*n + l, i.e. the Kronecker product of the two row-major
// vectorizations.

std::size_t pair_index(int n, int i, int j, int k, int l);
Vector pair_tensor(const Matrix& A, const Matrix& B);

/// Phi[E_ij (x) E_kl] = E_il (x) E_kj, held as an index permutation.
class FlipInvolution {
 public:
  explicit FlipInvolution(int n);

  int dim() const { return n_; }
  /// Image index of the basis element at position `index`.
  std::size_t image(std::size_t index) const { return perm_[index]; }
  const std::vector<std::size_t>& permutation() const { return perm_; }

  Vector apply(const Vector& v) const;
  /// Phi A Phi for an n^4 x n^4 matrix A.
  Matrix conjugate(const Matrix& A) const;
  /// Composition as a permutation: (this o other).
  FlipInvolution compose(const FlipInvolution& other) const;
  bool is_identity() const;

 private:
  FlipInvolution(int n, std::vector<std::size_t> perm) : n_(n), perm_(std::move(perm)) {}
  int n_;
  std::vector<std::size_t> perm_;
};

/// (S (x) Id) on the pair space: S acts on the first tensor factor.
Matrix lift_first_factor(const SuperOperator& S);

// --- block matrices -----------------------------------------------------------

/// Matrix on C^n (x) C^N holding left coefficients R_ij in C^{n x n} with
/// R = sum_ij R_ij (x) E_ij. Storage is block-contiguous: entry (a, b) of
/// R_ij sits at (i*n + a, j*n + b).
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(int n, int N);
  BlockMatrix(int n, int N, Matrix full);

  int inner_dim() const { return n_; }
  int outer_dim() const { return N_; }
  const Matrix& full() const { return full_; }
  Matrix& full() { return full_; }

  Matrix block(int i, int j) const;
  auto block_view(int i, int j) const { return full_.block(i * n_, j * n_, n_, n_); }
  void set_block(int i, int j, const Matrix& value);

  /// A (x) B with A in C^{n x n} and B in C^{N x N}.
  static BlockMatrix tensor(const Matrix& A, const Matrix& B);

 private:
  int n_ = 0;
  int N_ = 0;
  Matrix full_;
};

/// (Id_n (x) Tr_N)[R] = sum_j R_jj.
Matrix partial_trace(const BlockMatrix& R);

}  // namespace kron
