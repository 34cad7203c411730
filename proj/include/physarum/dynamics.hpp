// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <vector>

#include "physarum/conductance.hpp"
#include "physarum/matrix.hpp"
#include "physarum/model.hpp"

namespace physarum {

/// Velocity of the projection dynamic together with the Lagrange
/// multipliers p of the update problem; p doubles as the dual candidate.
struct Velocity {
  SymMatrix Xdot;
  Vector p;
};

/// Step-size selection parameters. safety is the fraction of the exact
/// positive-definiteness bound that a step may take.
struct StepControl {
  double h_max = 1.0;
  double safety = 0.9;
  double floor = 1e-12;
};

inline void validate(const StepControl& ctl) {
  if (!(ctl.safety > 0.0 && ctl.safety < 1.0))
    throw std::invalid_argument("StepControl: safety must lie in (0,1)");
  if (!(ctl.h_max > 0.0) || !(ctl.floor > 0.0))
    throw std::invalid_argument("StepControl: h_max and floor must be positive");
}

/// Feasible: velocity of the constrained projection dynamic,
///   vec(Xdot) = G Omega^T p - G vec(C) with p = L^+ (Omega G vec C);
///   keeps tr(A_l Xdot) = 0.
/// General: infeasible-start variant,
///   vec(Xdot) = G Omega^T p - vec(X) with p = L^+ b;
///   drives tr(A_l Xdot) = b_l - tr(A_l X).
enum class UpdateMode { Feasible, General };

inline Velocity solve_update(const SdpProblem& prob, const ConductanceOperator& op,
                             UpdateMode mode) {
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

  Matrix xdot;
  Vector rhs(m);
  if (mode == UpdateMode::Feasible) {
    const SymMatrix gc = op.apply(prob.C());
    for (Index l = 0; l < m; ++l) rhs(l) = trace_inner(prob.A(l), gc);
    xdot = -gc.mat();
  } else {
    rhs = prob.b();
    xdot = -op.iterate().mat();
  }
  const Vector p = pinv_solve(L, rhs);
  for (Index l = 0; l < m; ++l) xdot += p(l) * applied[static_cast<size_t>(l)].mat();
  return Velocity{SymMatrix(xdot), p};
}

namespace detail {

// Shared with the solver loop, which already has the decomposition of X.
inline double max_psd_step_from(const EigenDecomp& xd, const SymMatrix& Xdot,
                                const StepControl& ctl) {
  validate(ctl);
  if (xd.values(0) <= 0)
    throw std::invalid_argument("max_psd_step: X must be positive definite");
  const Matrix w =
      xd.vectors * xd.values.cwiseSqrt().cwiseInverse().asDiagonal() * xd.vectors.transpose();
  const double rate = -min_eigenvalue(SymMatrix(w * Xdot.mat() * w));
  double h = ctl.h_max;
  if (rate > 0.0) h = std::min(ctl.h_max, ctl.safety / rate);
  return std::max(h, ctl.floor);
}

}  // namespace detail

/// Largest Euler step keeping X + h Xdot positive definite, with margin:
///   h = min(h_max, safety / lambda_max(-X^{-1/2} Xdot X^{-1/2})),
/// where safety/0 means h_max. Never returns below ctl.floor; a return of
/// exactly ctl.floor signals that the positive-definiteness bound collapsed.
inline double max_psd_step(const SymMatrix& X, const SymMatrix& Xdot, const StepControl& ctl) {
  return detail::max_psd_step_from(eigendecompose(X), Xdot, ctl);
}

/// X + h Xdot, re-symmetrized.
inline SymMatrix step(const SymMatrix& X, const Velocity& v, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step: h must be positive");
  return SymMatrix(X.mat() + h * v.Xdot.mat());
}

}  // namespace physarum
