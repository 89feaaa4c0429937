#include "kron/flatness.hpp"

#include <cmath>
#include <limits>

#include "kron/rng.hpp"

namespace kron {

Pattern support_pattern(const StructureEnsemble& ens) {
  const int n = ens.n;
  Pattern Z = Pattern::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      double weight = 0.0;
      for (const auto& L : ens.L) weight += std::norm(L(l, k)) + std::norm(L(k, l));
      Z(k, l) = (k == l || weight > 1e-14) ? 1 : 0;
    }
  }
  return Z;
}

std::optional<int> primitivity_exponent(const Pattern& Z, int cap) {
  const auto n = Z.rows();
  if (n == 0 || Z.cols() != n) throw DimensionError("primitivity_exponent: pattern must be square and nonempty");
  if (cap < 0) cap = static_cast<int>(n * n);
  Pattern B = Z.unaryExpr([](int v) { return v != 0 ? 1 : 0; });
  Pattern P = B;
  for (int p = 1; p <= cap; ++p) {
    if ((P.array() > 0).all()) return p;
    Pattern next = Pattern::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k)
        if (P(i, k))
          for (Eigen::Index j = 0; j < n; ++j)
            if (B(k, j)) next(i, j) = 1;
    P = next;
  }
  return std::nullopt;
}

namespace {

double denominator(const Pattern& Z, const Vector& u, const Vector& v) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < Z.rows(); ++k)
    for (Eigen::Index l = 0; l < Z.cols(); ++l)
      if (Z(k, l)) s += std::norm(v(k)) * std::norm(u(l));
  return s;
}

double numerator(const StructureEnsemble& ens, const Vector& u, const Vector& v) {
  double s = 0.0;
  for (const auto& L : ens.L) s += std::norm(u.dot(L * v)) + std::norm(u.dot(L.adjoint() * v));
  return s;
}

/// Minimizes x* A x / x* D x over x with diagonal D >= 0 (entries of D on
/// the null set are eliminated by a Schur complement). Returns (value, x).
std::pair<double, Vector> min_generalized(const Matrix& A, const RealVector& D) {
  const auto n = A.rows();
  std::vector<Eigen::Index> S, N;
  const double dmax = D.maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) (D(i) > 1e-14 * dmax ? S : N).push_back(i);
  const auto s = static_cast<Eigen::Index>(S.size());
  const auto m = static_cast<Eigen::Index>(N.size());
  Matrix ASS(s, s), ASN(s, m), ANN(m, m);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) ASS(i, j) = A(S[i], S[j]);
    for (Eigen::Index j = 0; j < m; ++j) ASN(i, j) = A(S[i], N[j]);
  }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) ANN(i, j) = A(N[i], N[j]);
  Matrix pinvNN;
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((ANN + ANN.adjoint()) * 0.5);
    RealVector w = es.eigenvalues();
    const double cut = 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < m; ++i) w(i) = w(i) > cut ? 1.0 / w(i) : 0.0;
    pinvNN = es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  }
  Matrix schur = ASS;
  if (m > 0) schur -= ASN * pinvNN * ASN.adjoint();
  RealVector dinv(s);
  for (Eigen::Index i = 0; i < s; ++i) dinv(i) = 1.0 / std::sqrt(D(S[i]));
  Matrix scaled = dinv.cast<cplx>().asDiagonal() * schur * dinv.cast<cplx>().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es((scaled + scaled.adjoint()) * 0.5);
  const Vector y = es.eigenvectors().col(0);
  Vector xs = dinv.cast<cplx>().asDiagonal() * y;
  Vector x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < s; ++i) x(S[i]) = xs(i);
  if (m > 0) {
    const Vector xn = -pinvNN * ASN.adjoint() * xs;
    for (Eigen::Index i = 0; i < m; ++i) x(N[i]) = xn(i);
  }
  return {std::max(0.0, es.eigenvalues()(0)), x.normalized()};
}

Vector random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v.normalized();
}

double descend(const StructureEnsemble& ens, const Pattern& Z, Vector v, int max_sweeps) {
  const auto n = static_cast<Eigen::Index>(ens.n);
  double best = std::numeric_limits<double>::infinity();
  Vector u = Vector::Zero(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // fixed v: minimize over u
    Matrix A = Matrix::Zero(n, n);
    for (const auto& L : ens.L) {
      const Vector a = L * v, b = L.adjoint() * v;
      A += a * a.adjoint() + b * b.adjoint();
    }
    RealVector D = RealVector::Zero(n);
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index k = 0; k < n; ++k)
        if (Z(k, l)) D(l) += std::norm(v(k));
    u = min_generalized(A, D).second;
    // fixed u: minimize over v
    Matrix At = Matrix::Zero(n, n);
    for (const auto& L : ens.L) {
      const Vector a = L.adjoint() * u, b = L * u;
      At += a * a.adjoint() + b * b.adjoint();
    }
    RealVector Dt = RealVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index l = 0; l < n; ++l)
        if (Z(k, l)) Dt(k) += std::norm(u(l));
    v = min_generalized(At, Dt).second;
    const double value = flatness_ratio(ens, Z, u, v);
    const bool stalled = best - value <= 1e-13 * std::max(1.0, std::abs(value));
    best = std::min(best, value);
    if (stalled) break;
  }
  return best;
}

}  // namespace

double flatness_ratio(const StructureEnsemble& ens, const Pattern& Z, const Vector& u, const Vector& v) {
  const double den = denominator(Z, u, v);
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return numerator(ens, u, v) / den;
}

FlatnessReport estimate_flatness_constant(const StructureEnsemble& ens, const Pattern& Z,
                                          const FlatnessOptions& opts) {
  validate(ens);
  if (Z.rows() != ens.n || Z.cols() != ens.n) throw DimensionError("flatness: pattern must be n x n");
  for (Eigen::Index k = 0; k < Z.rows(); ++k)
    if (!Z(k, k)) throw DomainError("flatness: pattern must have a unit diagonal");
  if (opts.budget < 1) throw InputError("flatness: budget must be at least 1");

  FlatnessReport report;
  report.Z = Z;
  report.exponent = primitivity_exponent(Z);
  report.samples_used = opts.budget;
  report.minima_trace.assign(static_cast<std::size_t>(opts.budget), 0.0);
  const auto n = static_cast<Eigen::Index>(ens.n);
  parallel_for(
      static_cast<std::size_t>(opts.budget),
      [&](std::size_t r) {
        Vector v;
        if (static_cast<Eigen::Index>(r) < n) {
          v = Vector::Unit(n, static_cast<Eigen::Index>(r));
        } else {
          auto rng = substream(opts.seed, r);
          v = random_unit(rng, n);
        }
        report.minima_trace[r] = descend(ens, Z, v, opts.max_sweeps);
      },
      opts.execution);
  double c = std::numeric_limits<double>::infinity();
  for (double m : report.minima_trace) c = std::min(c, m);
  report.c_estimate = std::max(0.0, c);
  return report;
}

}  // namespace kron
