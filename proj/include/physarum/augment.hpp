// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "physarum/matrix.hpp"
#include "physarum/model.hpp"

namespace physarum {

/// The (n+1)-dimensional problem whose cost inverse is linearly feasible:
///   Cbar = [[gamma C, 0], [0, 1]],
///   Abar_l = [[A_l, 0], [0, alpha_l]],  alpha_l = b_l - tr(A_l C^{-1}) / gamma,
/// so tr(Abar_l Cbar^{-1}) = b_l holds exactly. The corner entry of an
/// augmented iterate is called beta.
struct AugmentedProblem {
  SdpProblem base;
  SdpProblem aug;
  double gamma;
  Vector alpha;
  SymMatrix base_cost_inverse;
};

inline AugmentedProblem augment(const SdpProblem& prob, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("augment: gamma must be positive");
  const Index n = prob.n();
  const SymMatrix cinv = inverse_spd(prob.C());

  Matrix cbar = Matrix::Zero(n + 1, n + 1);
  cbar.topLeftCorner(n, n) = gamma * prob.C().mat();
  cbar(n, n) = 1.0;

  Vector alpha(prob.m());
  std::vector<SymMatrix> abar;
  abar.reserve(static_cast<size_t>(prob.m()));
  for (Index l = 0; l < prob.m(); ++l) {
    alpha(l) = prob.b()(l) - trace_inner(prob.A(l), cinv) / gamma;
    Matrix a = Matrix::Zero(n + 1, n + 1);
    a.topLeftCorner(n, n) = prob.A(l).mat();
    a(n, n) = alpha(l);
    abar.emplace_back(a);
  }

  SdpProblem aug(SymMatrix(cbar), std::move(abar), prob.b(), prob.meta());
  return AugmentedProblem{prob, std::move(aug), gamma, std::move(alpha), cinv};
}

/// Cbar^{-1} = [[C^{-1}/gamma, 0], [0, 1]]: positive definite and linearly
/// feasible in the augmented problem, the canonical starting point.
inline SymMatrix initial_point(const AugmentedProblem& ap) {
  const Index n = ap.base.n();
  Matrix x0 = Matrix::Zero(n + 1, n + 1);
  x0.topLeftCorner(n, n) = ap.base_cost_inverse.mat() / ap.gamma;
  x0(n, n) = 1.0;
  return SymMatrix(x0);
}

/// Upper-left block, corner entry, and the largest off-block entry (which
/// stays at zero along dynamics started from an augmented point).
struct Extraction {
  SymMatrix Xtilde;
  double beta;
  double off_block_inf_norm;
};

inline Extraction extract(const AugmentedProblem& ap, const SymMatrix& Xbar) {
  const Index n = ap.base.n();
  if (Xbar.dim() != n + 1)
    throw std::invalid_argument("extract: augmented iterate has wrong dimension");
  double off = 0.0;
  for (Index i = 0; i < n; ++i) off = std::max(off, std::abs(Xbar(i, n)));
  return Extraction{SymMatrix(Xbar.mat().topLeftCorner(n, n)), Xbar(n, n), off};
}

}  // namespace physarum
