// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "physarum/matrix.hpp"

namespace physarum {

/// Acceptance thresholds for certified solutions.
struct Thresholds {
  double eps_feas = 1e-6;
  double eps_psd = 1e-6;
  double eps_opt = 1e-5;
};

/// min tr(CX) s.t. tr(A_l X) = b_l, X >= 0, with positive definite C.
class SdpProblem {
 public:
  SdpProblem(SymMatrix C, std::vector<SymMatrix> A, Vector b,
             std::map<std::string, double> meta = {})
      : C_(std::move(C)), A_(std::move(A)), b_(std::move(b)), meta_(std::move(meta)) {
    if (static_cast<Index>(A_.size()) != b_.size())
      throw std::invalid_argument("SdpProblem: constraint count must match b");
    for (const auto& a : A_)
      if (a.dim() != C_.dim())
        throw std::invalid_argument("SdpProblem: constraint dimension mismatch");
    if (min_eigenvalue(C_) <= 1e-12 * C_.norm())
      throw std::invalid_argument("SdpProblem: cost matrix must be positive definite");
  }

  Index n() const { return C_.dim(); }
  Index m() const { return static_cast<Index>(A_.size()); }
  const SymMatrix& C() const { return C_; }
  const SymMatrix& A(Index l) const { return A_.at(static_cast<size_t>(l)); }
  const std::vector<SymMatrix>& constraints() const { return A_; }
  const Vector& b() const { return b_; }
  const std::map<std::string, double>& meta() const { return meta_; }

  double objective(const SymMatrix& X) const { return trace_inner(C_, X); }

  /// Per-constraint residuals tr(A_l X) - b_l.
  Vector residual(const SymMatrix& X) const {
    Vector r(m());
    for (Index l = 0; l < m(); ++l) r(l) = trace_inner(A_[static_cast<size_t>(l)], X) - b_(l);
    return r;
  }

 private:
  SymMatrix C_;
  std::vector<SymMatrix> A_;
  Vector b_;
  std::map<std::string, double> meta_;
};

/// Primal iterate plus dual candidate. Objectives are always recomputed
/// from X, C and b, p; they are never cached.
struct PrimalDualSolution {
  SymMatrix X;
  Vector p;

  double objective(const SdpProblem& prob) const { return prob.objective(X); }
  double dual_objective(const SdpProblem& prob) const { return prob.b().dot(p); }
};

/// max( max_l |b_l - tr(A_l X)| , max(0, -lambda_min(X)) ).
inline double infeasibility(const SdpProblem& prob, const SymMatrix& X) {
  if (X.dim() != prob.n())
    throw std::invalid_argument("infeasibility: dimension mismatch");
  const double lin = prob.m() > 0 ? prob.residual(X).cwiseAbs().maxCoeff() : 0.0;
  return std::max(lin, std::max(0.0, -min_eigenvalue(X)));
}

/// |tr(CX) - reference_obj|.
inline double gap(const SdpProblem& prob, const SymMatrix& X, double reference_obj) {
  return std::abs(prob.objective(X) - reference_obj);
}

struct Certificate {
  double duality_gap = 0.0;
  double dual_slack_min_eig = 0.0;
  double infeasibility = 0.0;

  bool accepted(const Thresholds& th = {}) const {
    return duality_gap <= th.eps_opt && dual_slack_min_eig >= -th.eps_psd &&
           infeasibility <= th.eps_feas;
  }
};

inline Certificate certify(const SdpProblem& prob, const PrimalDualSolution& sol) {
  Certificate cert;
  cert.duality_gap = std::abs(sol.objective(prob) - sol.dual_objective(prob));
  Matrix slack = prob.C().mat();
  for (Index l = 0; l < prob.m(); ++l) slack -= sol.p(l) * prob.A(l).mat();
  cert.dual_slack_min_eig = min_eigenvalue(SymMatrix(slack));
  cert.infeasibility = infeasibility(prob, sol.X);
  return cert;
}

/// One accepted Euler step: the state before the step plus the step taken.
struct StepRecord {
  double t = 0.0;
  double h = 0.0;
  double objective = 0.0;   // tr(CX) of the running dynamic
  double work = 0.0;        // ln det X
  double xdot_norm = 0.0;   // Frobenius norm of the velocity
  double lambda_min = 0.0;  // smallest eigenvalue of the iterate
  Vector residuals;         // tr(A_l X) - b_l per constraint
  std::optional<double> beta;           // corner entry on augmented runs
  std::optional<double> basis_offdiag;  // max off-diagonal of the basis congruences
  std::optional<int> basis_size;        // diagonalization basis size
};

struct FinalSnapshot {
  double t = 0.0;
  double objective = 0.0;
  double work = 0.0;
  double xdot_norm = 0.0;
  double lambda_min = 0.0;
  Vector residuals;
  std::optional<double> beta;
};

/// Per-run trace: exactly one StepRecord per accepted step, a snapshot of
/// the terminal state, and the indices where epochs begin.
struct Diagnostics {
  std::vector<StepRecord> steps;
  FinalSnapshot final_state;
  std::vector<long> epoch_starts;
};

}  // namespace physarum
