// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace physarum {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense real symmetric matrix. Construction symmetrizes the input as
/// (M + M^T)/2, so entries(i,j) == entries(j,i) holds exactly for every
/// instance; all operations in this library assume that.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& raw) {
    if (raw.rows() != raw.cols())
      throw std::invalid_argument("SymMatrix: input must be square");
    if (raw.rows() < 1)
      throw std::invalid_argument("SymMatrix: dimension must be at least 1");
    mat_ = 0.5 * (raw + raw.transpose());
  }

  static SymMatrix Identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix Zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix FromDiagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

  Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }
  double operator()(Index i, Index j) const { return mat_(i, j); }
  /// Frobenius norm.
  double norm() const { return mat_.norm(); }

 private:
  Matrix mat_;
};

/// A symmetric matrix in column-stacked vector form: data(n*j + i) == M(i,j).
struct VecMatrix {
  Index n = 0;
  Vector data;
};

inline VecMatrix vec(const SymMatrix& m) {
  VecMatrix v;
  v.n = m.dim();
  v.data.resize(v.n * v.n);
  Eigen::Map<Matrix>(v.data.data(), v.n, v.n) = m.mat();
  return v;
}

inline SymMatrix unvec(const VecMatrix& v) {
  if (v.data.size() != v.n * v.n)
    throw std::invalid_argument("unvec: data length must be n^2");
  return SymMatrix(Matrix(Eigen::Map<const Matrix>(v.data.data(), v.n, v.n)));
}

/// tr(AB) for symmetric A, B; equals vec(A) . vec(B).
inline double trace_inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("trace_inner: dimension mismatch");
  return a.mat().cwiseProduct(b.mat()).sum();
}

/// Eigendecomposition of a symmetric matrix. values are ascending and
/// vectors.col(i) pairs with values(i); the first component of each vector
/// whose magnitude exceeds roundoff is made positive, so the decomposition
/// is deterministic.
struct EigenDecomp {
  Vector values;
  Matrix vectors;
};

inline EigenDecomp eigendecompose(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: iteration did not converge");
  EigenDecomp d{es.eigenvalues(), es.eigenvectors()};
  for (Index j = 0; j < d.vectors.cols(); ++j) {
    for (Index i = 0; i < d.vectors.rows(); ++i) {
      const double x = d.vectors(i, j);
      if (std::abs(x) > 1e-12) {
        if (x < 0) d.vectors.col(j) = -d.vectors.col(j);
        break;
      }
    }
  }
  return d;
}

inline double min_eigenvalue(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline bool is_psd(const SymMatrix& m, double tol) {
  if (tol < 0) throw std::invalid_argument("is_psd: tol must be nonnegative");
  return min_eigenvalue(m) >= -tol;
}

/// Minimum-norm least-squares solution L^+ rhs for a symmetric positive
/// semidefinite L. Eigenvalues below rcond * max|eigenvalue| count as zero;
/// L is Gram-like here and small eigenvalues reflect rank collapse, not data.
inline Vector pinv_solve(const Matrix& L, const Vector& rhs, double rcond = 1e-12) {
  if (L.rows() != L.cols() || L.rows() != rhs.size())
    throw std::invalid_argument("pinv_solve: L must be square and match rhs");
  if (L.rows() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (L + L.transpose()));
  const Vector& lam = es.eigenvalues();
  Vector out = Vector::Zero(rhs.size());
  const double lmax = lam.cwiseAbs().maxCoeff();
  if (lmax == 0.0) return out;
  const double cut = rcond * lmax;
  const Vector proj = es.eigenvectors().transpose() * rhs;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam(i) > cut) out += (proj(i) / lam(i)) * es.eigenvectors().col(i);
  return out;
}

/// Nonsingular U with U^T C U and U^T X0 U both diagonal, for positive
/// definite C and X0. Whitens C, then diagonalizes the whitened X0
/// (symmetric-definite generalized eigenproblem).
inline Matrix simultaneous_diagonalize(const SymMatrix& c, const SymMatrix& x0) {
  if (c.dim() != x0.dim())
    throw std::invalid_argument("simultaneous_diagonalize: dimension mismatch");
  const EigenDecomp ec = eigendecompose(c);
  if (ec.values(0) <= 0)
    throw std::invalid_argument("simultaneous_diagonalize: C must be positive definite");
  const Matrix cinvsqrt =
      ec.vectors * ec.values.cwiseSqrt().cwiseInverse().asDiagonal() * ec.vectors.transpose();
  const SymMatrix s(cinvsqrt * x0.mat() * cinvsqrt);
  const EigenDecomp ed = eigendecompose(s);
  if (ed.values(0) <= 0)
    throw std::invalid_argument("simultaneous_diagonalize: X0 must be positive definite");
  return cinvsqrt * ed.vectors;
}

/// Symmetric PSD square root. Eigenvalues in [-1e-10, 0) are clamped to
/// zero; anything lower is an error.
inline SymMatrix matrix_sqrt(const SymMatrix& m) {
  const EigenDecomp d = eigendecompose(m);
  if (d.values(0) < -1e-10)
    throw std::invalid_argument("matrix_sqrt: matrix is not positive semidefinite");
  const Vector s = d.values.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix(d.vectors * s.asDiagonal() * d.vectors.transpose());
}

/// Inverse of a symmetric positive definite matrix via eigendecomposition.
inline SymMatrix inverse_spd(const SymMatrix& m) {
  const EigenDecomp d = eigendecompose(m);
  if (d.values(0) <= 0)
    throw std::invalid_argument("inverse_spd: matrix must be positive definite");
  return SymMatrix(d.vectors * d.values.cwiseInverse().asDiagonal() * d.vectors.transpose());
}

/// ln det M for positive definite M.
inline double log_det_pd(const SymMatrix& m) {
  const EigenDecomp d = eigendecompose(m);
  if (d.values(0) <= 0)
    throw std::invalid_argument("log_det_pd: matrix must be positive definite");
  return d.values.array().log().sum();
}

}  // namespace physarum
