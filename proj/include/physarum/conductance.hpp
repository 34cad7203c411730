// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>

#include "physarum/matrix.hpp"
#include "physarum/model.hpp"

namespace physarum {

enum class ConductanceKind { FirstAnsatz, SecondAnsatz };

/// The map M -> unvec(G vec(M)) for the chosen conductance, bound to one
/// iterate X. Applications cost two or three n x n products; the n^2 x n^2
/// matrix G is never materialized.
///
/// FirstAnsatz:  G = (C^{-1} (x) X + X (x) C^{-1}) / 2, so
///               apply(M) = (X M C^{-1} + C^{-1} M X) / 2.
/// SecondAnsatz: G = X (x) X, so apply(M) = X M X.
class ConductanceOperator {
 public:
  static ConductanceOperator first_ansatz(SymMatrix X, SymMatrix Cinv) {
    if (X.dim() != Cinv.dim())
      throw std::invalid_argument("ConductanceOperator: X and C^{-1} dimension mismatch");
    return ConductanceOperator(ConductanceKind::FirstAnsatz, std::move(X), std::move(Cinv));
  }

  static ConductanceOperator second_ansatz(SymMatrix X) {
    return ConductanceOperator(ConductanceKind::SecondAnsatz, std::move(X), std::nullopt);
  }

  ConductanceKind kind() const { return kind_; }
  const SymMatrix& iterate() const { return X_; }

  SymMatrix apply(const SymMatrix& M) const {
    if (M.dim() != X_.dim())
      throw std::invalid_argument("ConductanceOperator::apply: dimension mismatch");
    if (kind_ == ConductanceKind::FirstAnsatz) {
      const Matrix& ci = cinv_->mat();
      return SymMatrix(0.5 * (X_.mat() * M.mat() * ci + ci * M.mat() * X_.mat()));
    }
    return SymMatrix(X_.mat() * M.mat() * X_.mat());
  }

 private:
  ConductanceOperator(ConductanceKind kind, SymMatrix X, std::optional<SymMatrix> cinv)
      : kind_(kind), X_(std::move(X)), cinv_(std::move(cinv)) {}

  ConductanceKind kind_;
  SymMatrix X_;
  std::optional<SymMatrix> cinv_;
};

/// The m x m update matrix L_ij = vec(A_i)^T G vec(A_j); symmetric, and PSD
/// whenever X is.
inline Matrix build_L(const ConductanceOperator& op, const SdpProblem& prob) {
  const Index m = prob.m();
  std::vector<SymMatrix> applied;
  applied.reserve(static_cast<size_t>(m));
  for (Index l = 0; l < m; ++l) applied.push_back(op.apply(prob.A(l)));
  Matrix L(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = j; i < m; ++i) {
      L(i, j) = trace_inner(prob.A(i), applied[static_cast<size_t>(j)]);
      L(j, i) = L(i, j);
    }
  return L;
}

/// Entries tr(A_l G[C]). For the first ansatz G[C] = X, so at a linearly
/// feasible iterate this is exactly b.
inline Vector rhs_feasible(const ConductanceOperator& op, const SdpProblem& prob) {
  const SymMatrix gc = op.apply(prob.C());
  Vector r(prob.m());
  for (Index l = 0; l < prob.m(); ++l) r(l) = trace_inner(prob.A(l), gc);
  return r;
}

}  // namespace physarum
