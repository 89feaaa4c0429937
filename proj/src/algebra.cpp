#include "kron/algebra.hpp"

#include <cmath>
#include <string>

#include "kron/errors.hpp"

namespace kron {

namespace {

void require_square_same(const Matrix& S, const Matrix& T, const char* what) {
  if (S.rows() != S.cols() || T.rows() != T.cols() || S.rows() != T.rows()) {
    throw DimensionError(std::string(what) + ": operands must be square of equal size");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> hermitian_solver(const Matrix& A, bool vectors) {
  if (A.rows() != A.cols()) throw DimensionError("hermitian eigensolver: matrix is not square");
  const Matrix sym = (A + A.adjoint()) * 0.5;
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym, vectors ? Eigen::ComputeEigenvectors
                                                            : Eigen::EigenvaluesOnly);
}

}  // namespace

cplx hs_inner(const Matrix& S, const Matrix& T) {
  require_square_same(S, T, "hs_inner");
  if (S.rows() == 0) return {};
  return S.conjugate().cwiseProduct(T).sum() / static_cast<double>(S.rows());
}

double hs_norm(const Matrix& T) {
  if (T.rows() == 0) return 0.0;
  return T.norm() / std::sqrt(static_cast<double>(T.rows()));
}

cplx normalized_trace(const Matrix& T) {
  if (T.rows() != T.cols()) throw DimensionError("normalized_trace: matrix is not square");
  return T.trace() / static_cast<double>(T.rows());
}

double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

bool all_finite(const Matrix& A) { return A.allFinite(); }

bool is_hermitian(const Matrix& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  const double scale = max_abs(A);
  return max_abs(A - A.adjoint()) <= rel_tol * scale;
}

Matrix unit_matrix(int n, int i, int j) {
  Matrix E = Matrix::Zero(n, n);
  E(i, j) = 1.0;
  return E;
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

Matrix hermitian_real_part(const Matrix& A) { return (A + A.adjoint()) * 0.5; }

Matrix hermitian_imag_part(const Matrix& A) { return (A - A.adjoint()) / cplx(0.0, 2.0); }

RealVector hermitian_eigenvalues(const Matrix& A) { return hermitian_solver(A, false).eigenvalues(); }

double min_eigenvalue(const Matrix& A) { return hermitian_eigenvalues(A).minCoeff(); }

double max_eigenvalue(const Matrix& A) { return hermitian_eigenvalues(A).maxCoeff(); }

Matrix hermitian_function(const Matrix& A, const std::function<double(double)>& f) {
  const auto solver = hermitian_solver(A, true);
  RealVector values = solver.eigenvalues();
  for (Eigen::Index k = 0; k < values.size(); ++k) values(k) = f(values(k));
  const Matrix& V = solver.eigenvectors();
  return V * values.cast<cplx>().asDiagonal() * V.adjoint();
}

Matrix pd_power(const Matrix& A, double p) {
  const auto solver = hermitian_solver(A, true);
  RealVector values = solver.eigenvalues();
  if (values.minCoeff() <= 0.0) throw DomainError("pd_power: matrix is not positive definite");
  for (Eigen::Index k = 0; k < values.size(); ++k) values(k) = std::pow(values(k), p);
  const Matrix& V = solver.eigenvectors();
  return V * values.cast<cplx>().asDiagonal() * V.adjoint();
}

Vector vectorize(const Matrix& R) {
  const auto n = R.rows();
  Vector v(R.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < R.cols(); ++j) v(i * R.cols() + j) = R(i, j);
  return v;
}

Matrix unvectorize(const Vector& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * n) throw DimensionError("unvectorize: length is not n^2");
  Matrix R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = v(i * n + j);
  return R;
}

// --- SuperOperator -------------------------------------------------------------

SuperOperator::SuperOperator(int n, Matrix matrix) : n_(n), matrix_(std::move(matrix)) {
  if (matrix_.rows() != static_cast<Eigen::Index>(n) * n || matrix_.cols() != matrix_.rows()) {
    throw DimensionError("SuperOperator: matrix must be n^2 x n^2");
  }
}

SuperOperator SuperOperator::identity(int n) {
  return SuperOperator(n, Matrix::Identity(n * n, n * n));
}

SuperOperator SuperOperator::zero(int n) { return SuperOperator(n, Matrix::Zero(n * n, n * n)); }

SuperOperator SuperOperator::from_map(int n, const std::function<Matrix(const Matrix&)>& map) {
  Matrix m(n * n, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m.col(i * n + j) = vectorize(map(unit_matrix(n, i, j)));
  }
  return SuperOperator(n, std::move(m));
}

Matrix SuperOperator::apply(const Matrix& R) const {
  if (R.rows() != n_ || R.cols() != n_) throw DimensionError("SuperOperator::apply: dimension mismatch");
  return unvectorize(matrix_ * vectorize(R), n_);
}

SuperOperator SuperOperator::adjoint() const { return SuperOperator(n_, matrix_.adjoint()); }

double SuperOperator::condition_number() const {
  Eigen::BDCSVD<Matrix> svd(matrix_);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / smin;
}

double SuperOperator::norm() const {
  Eigen::BDCSVD<Matrix> svd(matrix_);
  return svd.singularValues()(0);
}

SuperOperator SuperOperator::inverse(double max_condition) const {
  const double cond = condition_number();
  if (!(cond <= max_condition)) {
    throw SingularOperatorError("superoperator is numerically singular (condition " +
                                    std::to_string(cond) + ")",
                                cond);
  }
  return SuperOperator(n_, matrix_.partialPivLu().inverse());
}

Matrix SuperOperator::solve(const Matrix& B, double max_condition) const {
  if (B.rows() != n_ || B.cols() != n_) throw DimensionError("SuperOperator::solve: dimension mismatch");
  const double cond = condition_number();
  if (!(cond <= max_condition)) {
    throw SingularOperatorError("superoperator is numerically singular (condition " +
                                    std::to_string(cond) + ")",
                                cond);
  }
  return unvectorize(matrix_.partialPivLu().solve(vectorize(B)), n_);
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& other) {
  if (other.n_ != n_) throw DimensionError("SuperOperator: dimension mismatch");
  matrix_ += other.matrix_;
  return *this;
}

SuperOperator& SuperOperator::operator-=(const SuperOperator& other) {
  if (other.n_ != n_) throw DimensionError("SuperOperator: dimension mismatch");
  matrix_ -= other.matrix_;
  return *this;
}

SuperOperator operator*(const SuperOperator& a, const SuperOperator& b) {
  if (a.n_ != b.n_) throw DimensionError("SuperOperator: dimension mismatch");
  return SuperOperator(a.n_, a.matrix_ * b.matrix_);
}

SuperOperator operator*(cplx s, SuperOperator a) {
  a.matrix_ *= s;
  return a;
}

SuperOperator sandwich(const Matrix& A, const Matrix& B) {
  require_square_same(A, B, "sandwich");
  return SuperOperator(static_cast<int>(A.rows()), kron(A, B.transpose()));
}

SuperOperator sandwich(const Matrix& T) { return sandwich(T, T); }

// --- pair space ------------------------------------------------------------------

std::size_t pair_index(int n, int i, int j, int k, int l) {
  const auto N = static_cast<std::size_t>(n);
  return ((static_cast<std::size_t>(i) * N + j) * N + k) * N + l;
}

Vector pair_tensor(const Matrix& A, const Matrix& B) {
  require_square_same(A, B, "pair_tensor");
  const Vector a = vectorize(A);
  const Vector b = vectorize(B);
  Vector out(a.size() * b.size());
  for (Eigen::Index p = 0; p < a.size(); ++p) out.segment(p * b.size(), b.size()) = a(p) * b;
  return out;
}

FlipInvolution::FlipInvolution(int n) : n_(n) {
  if (n < 1) throw DimensionError("FlipInvolution: n must be positive");
  perm_.resize(static_cast<std::size_t>(n) * n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) perm_[pair_index(n, i, j, k, l)] = pair_index(n, i, l, k, j);
}

Vector FlipInvolution::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != perm_.size()) {
    throw DimensionError("FlipInvolution::apply: vector length is not n^4");
  }
  Vector out(v.size());
  for (std::size_t p = 0; p < perm_.size(); ++p) out(static_cast<Eigen::Index>(perm_[p])) = v(p);
  return out;
}

Matrix FlipInvolution::conjugate(const Matrix& A) const {
  const auto m = static_cast<Eigen::Index>(perm_.size());
  if (A.rows() != m || A.cols() != m) throw DimensionError("FlipInvolution::conjugate: size is not n^4");
  // (Phi A Phi)(perm[p], perm[q]) = A(p, q); Phi is its own inverse.
  Matrix out(m, m);
  for (Eigen::Index q = 0; q < m; ++q)
    for (Eigen::Index p = 0; p < m; ++p) out(perm_[p], perm_[q]) = A(p, q);
  return out;
}

FlipInvolution FlipInvolution::compose(const FlipInvolution& other) const {
  if (other.n_ != n_) throw DimensionError("FlipInvolution::compose: dimension mismatch");
  std::vector<std::size_t> p(perm_.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = perm_[other.perm_[k]];
  return FlipInvolution(n_, std::move(p));
}

bool FlipInvolution::is_identity() const {
  for (std::size_t k = 0; k < perm_.size(); ++k)
    if (perm_[k] != k) return false;
  return true;
}

Matrix lift_first_factor(const SuperOperator& S) {
  const int n = S.dim();
  return kron(S.matrix(), Matrix::Identity(n * n, n * n));
}

// --- BlockMatrix -------------------------------------------------------------------

BlockMatrix::BlockMatrix(int n, int N) : n_(n), N_(N), full_(Matrix::Zero(n * N, n * N)) {}

BlockMatrix::BlockMatrix(int n, int N, Matrix full) : n_(n), N_(N), full_(std::move(full)) {
  if (full_.rows() != static_cast<Eigen::Index>(n) * N || full_.cols() != full_.rows()) {
    throw DimensionError("BlockMatrix: matrix is not nN x nN");
  }
}

Matrix BlockMatrix::block(int i, int j) const { return full_.block(i * n_, j * n_, n_, n_); }

void BlockMatrix::set_block(int i, int j, const Matrix& value) {
  if (value.rows() != n_ || value.cols() != n_) throw DimensionError("BlockMatrix::set_block: block is not n x n");
  full_.block(i * n_, j * n_, n_, n_) = value;
}

BlockMatrix BlockMatrix::tensor(const Matrix& A, const Matrix& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols()) throw DimensionError("BlockMatrix::tensor: factors must be square");
  const int n = static_cast<int>(A.rows());
  const int N = static_cast<int>(B.rows());
  BlockMatrix R(n, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (B(i, j) != cplx{}) R.set_block(i, j, B(i, j) * A);
  return R;
}

Matrix partial_trace(const BlockMatrix& R) {
  const int n = R.inner_dim();
  Matrix acc = Matrix::Zero(n, n);
  for (int j = 0; j < R.outer_dim(); ++j) acc += R.block_view(j, j);
  return acc;
}

}  // namespace kron
