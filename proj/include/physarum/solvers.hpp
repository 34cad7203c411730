// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "physarum/augment.hpp"
#include "physarum/conductance.hpp"
#include "physarum/dynamics.hpp"
#include "physarum/matrix.hpp"
#include "physarum/model.hpp"

namespace physarum {

enum class Algorithm { Vanilla, Modified };

enum class TerminationStatus { Converged, MaxIters, Stalled };

inline const char* to_string(TerminationStatus s) {
  switch (s) {
    case TerminationStatus::Converged: return "converged";
    case TerminationStatus::MaxIters: return "max_iters";
    case TerminationStatus::Stalled: return "stalled";
  }
  return "unknown";
}

struct SolverConfig {
  ConductanceKind ansatz = ConductanceKind::FirstAnsatz;
  Algorithm algorithm = Algorithm::Vanilla;
  double eps = 1e-8;      // convergence threshold on ||Xdot||_F
  double eps_eig = 1e-8;  // eigenvalue floor triggering an epoch restart
  double gamma = 0.01;    // augmentation scale for the vanilla first ansatz
  std::optional<double> eta;  // modified initial scale; derived from the problem when unset
  long max_iters = 200000;
  StepControl step{};
  Thresholds thresholds{};
};

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.eps > 0.0) || !(cfg.eps_eig > 0.0) || !(cfg.gamma > 0.0))
    throw std::invalid_argument("SolverConfig: eps, eps_eig and gamma must be positive");
  if (cfg.eta && !(*cfg.eta > 0.0))
    throw std::invalid_argument("SolverConfig: eta must be positive");
  if (cfg.max_iters < 0) throw std::invalid_argument("SolverConfig: max_iters must be nonnegative");
  validate(cfg.step);
}

struct SolveResult {
  PrimalDualSolution solution;
  Diagnostics diagnostics;
  Certificate certificate;
  TerminationStatus status = TerminationStatus::Converged;
  long iterations = 0;
  int epochs = 1;
  std::optional<double> beta_final;  // augmented vanilla runs
  std::optional<double> eta_used;    // modified runs
  double wall_time_sec = 0.0;
};

/// Initial scale for the modified solver when none is configured:
/// 10 * max(1, max_l |b_l| / max(1e-12, min_l ||A_l||_F)). Large enough to
/// dominate a feasible solution on reasonably scaled problems; the used
/// value lands in the report so a bad guess is diagnosable.
inline double default_eta(const SdpProblem& prob) {
  double bmax = 0.0;
  double amin = std::numeric_limits<double>::infinity();
  for (Index l = 0; l < prob.m(); ++l) {
    bmax = std::max(bmax, std::abs(prob.b()(l)));
    amin = std::min(amin, prob.A(l).norm());
  }
  if (prob.m() == 0) amin = 1.0;
  return 10.0 * std::max(1.0, bmax / std::max(1e-12, amin));
}

/// Best approximation of M by sum_i c_i u_i u_i^T over the basis columns
/// u_i (least squares in the Frobenius norm). For orthonormal columns the
/// coefficients reduce to c_i = u_i^T M u_i; the oblique case solves the
/// k x k normal equations. An empty basis projects to zero.
inline SymMatrix project_matrix(const SymMatrix& M, const Matrix& basis) {
  const Index n = M.dim();
  if (basis.rows() != n) throw std::invalid_argument("project_matrix: basis dimension mismatch");
  const Index k = basis.cols();
  if (k == 0) return SymMatrix::Zero(n);
  const Matrix bb = basis.transpose() * basis;
  const Matrix gram = bb.cwiseProduct(bb);  // <u_i u_i^T, u_j u_j^T> = (u_i . u_j)^2
  const Vector rhs = (basis.transpose() * M.mat() * basis).diagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector& lam = es.eigenvalues();
  if (lam(0) <= 1e-12 * lam.cwiseAbs().maxCoeff())
    throw std::invalid_argument("project_matrix: rank-deficient basis");
  const Vector c =
      es.eigenvectors() * lam.cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * rhs);
  return SymMatrix(basis * c.asDiagonal() * basis.transpose());
}

namespace detail {

// Step cap for the infeasible phase. A step at the full PSD-safety bound
// multiplies the worst eigenvalue by (1 - safety) while the residual only
// contracts by (1 - h); at safety 0.9 that skews the eigenvalue/residual
// decay race far from the continuous flow, and an eigenvalue can hit the
// rank floor long before the iterate is near the feasible set, which makes
// the collapsed direction meaningless. Capping h * rate keeps the discrete
// race within ~10% of the flow. Feasible-mode steps are unaffected: there
// the kernel property holds for any h.
inline constexpr double kGeneralPhaseSafety = 0.2;

struct LoopOutcome {
  SymMatrix X;
  Vector p;
  TerminationStatus status;
  long iterations;
};

// The discrete projection dynamic: solve the update problem, take the
// largest PSD-safe Euler step, repeat until ||Xdot|| <= eps. The mode is
// re-selected from the current iterate each round: Feasible once the linear
// residuals are inside eps_feas, General otherwise. The two fields coincide
// at feasible points for the first ansatz; for the second ansatz only the
// Feasible field descends the objective, so the switch is what carries
// infeasible starts to the optimum rather than to an arbitrary feasible
// point.
inline LoopOutcome run_dynamic(const SdpProblem& prob, const SolverConfig& cfg, SymMatrix X,
                               bool augmented, Diagnostics& diag, double& t) {
  const Index nn = prob.n();
  std::optional<SymMatrix> cinv;
  if (cfg.ansatz == ConductanceKind::FirstAnsatz) cinv = inverse_spd(prob.C());

  LoopOutcome out{std::move(X), Vector::Zero(prob.m()), TerminationStatus::MaxIters, 0};
  int stall = 0;

  while (out.iterations < cfg.max_iters) {
    const EigenDecomp xd = eigendecompose(out.X);
    if (xd.values(0) <= 0.0)
      throw std::runtime_error("run_dynamic: iterate left the positive definite cone");
    const Vector r = prob.residual(out.X);
    const double lin_inf = prob.m() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
    const UpdateMode mode =
        lin_inf <= cfg.thresholds.eps_feas ? UpdateMode::Feasible : UpdateMode::General;

    const ConductanceOperator op = cfg.ansatz == ConductanceKind::FirstAnsatz
                                       ? ConductanceOperator::first_ansatz(out.X, *cinv)
                                       : ConductanceOperator::second_ansatz(out.X);
    const Velocity v = solve_update(prob, op, mode);
    out.p = v.p;
    const double xdn = v.Xdot.norm();
    const double work = xd.values.array().log().sum();
    const double obj = prob.objective(out.X);
    const std::optional<double> beta =
        augmented ? std::optional<double>(out.X(nn - 1, nn - 1)) : std::nullopt;

    if (xdn <= cfg.eps) {
      out.status = TerminationStatus::Converged;
      diag.final_state = FinalSnapshot{t, obj, work, xdn, xd.values(0), r, beta};
      return out;
    }

    const double h = max_psd_step_from(xd, v.Xdot, cfg.step);
    stall = h <= cfg.step.floor ? stall + 1 : 0;
    if (stall >= 100) {
      out.status = TerminationStatus::Stalled;
      diag.final_state = FinalSnapshot{t, obj, work, xdn, xd.values(0), r, beta};
      return out;
    }

    diag.steps.push_back(StepRecord{t, h, obj, work, xdn, xd.values(0), r, beta, {}, {}});
    out.X = step(out.X, v, h);
    t += h;
    ++out.iterations;
  }

  // iteration budget exhausted: snapshot the terminal state
  const EigenDecomp xd = eigendecompose(out.X);
  diag.final_state = FinalSnapshot{
      t,
      prob.objective(out.X),
      xd.values(0) > 0 ? xd.values.array().log().sum() : -std::numeric_limits<double>::infinity(),
      0.0,
      xd.values(0),
      prob.residual(out.X),
      augmented ? std::optional<double>(out.X(nn - 1, nn - 1)) : std::nullopt};
  return out;
}

inline double elapsed_sec(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Plain discretization of the projection dynamic. With no starting point,
/// the first ansatz solves the augmented problem from Cbar^{-1} and maps the
/// solution back (corner beta reported, dual candidate rescaled by 1/gamma);
/// the second ansatz starts from the identity when that is feasible and
/// refuses to guess otherwise.
inline SolveResult vanilla_solve(const SdpProblem& prob, const SolverConfig& cfg,
                                 std::optional<SymMatrix> X0 = {}) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  Diagnostics diag;
  double t = 0.0;

  if (X0) {
    if (X0->dim() != prob.n())
      throw std::invalid_argument("vanilla_solve: X0 dimension mismatch");
    if (min_eigenvalue(*X0) <= 0.0)
      throw std::invalid_argument("vanilla_solve: X0 must be positive definite");
    auto out = detail::run_dynamic(prob, cfg, *X0, false, diag, t);
    PrimalDualSolution sol{out.X, out.p};
    const Certificate cert = certify(prob, sol);
    return SolveResult{std::move(sol), std::move(diag), cert,         out.status, out.iterations,
                       1,              std::nullopt,    std::nullopt, detail::elapsed_sec(t0)};
  }

  if (cfg.ansatz == ConductanceKind::FirstAnsatz) {
    const AugmentedProblem ap = augment(prob, cfg.gamma);
    auto out = detail::run_dynamic(ap.aug, cfg, initial_point(ap), true, diag, t);
    const Extraction ex = extract(ap, out.X);
    PrimalDualSolution sol{ex.Xtilde, out.p / cfg.gamma};
    const Certificate cert = certify(prob, sol);
    return SolveResult{std::move(sol), std::move(diag), cert,         out.status, out.iterations,
                       1,              ex.beta,         std::nullopt, detail::elapsed_sec(t0)};
  }

  const SymMatrix ident = SymMatrix::Identity(prob.n());
  if (infeasibility(prob, ident) > cfg.thresholds.eps_feas)
    throw std::invalid_argument(
        "vanilla_solve: the second ansatz needs a positive definite feasible X0 "
        "unless the identity satisfies the constraints");
  auto out = detail::run_dynamic(prob, cfg, ident, false, diag, t);
  PrimalDualSolution sol{out.X, out.p};
  const Certificate cert = certify(prob, sol);
  return SolveResult{std::move(sol), std::move(diag), cert,         out.status, out.iterations,
                     1,              std::nullopt,    std::nullopt, detail::elapsed_sec(t0)};
}

/// Epoch-based solver for rank-deficient optima. Starts from eta * I with no
/// augmentation and keeps a diagonalization basis of C and X. When an
/// X-eigenvalue collapses below eps_eig, the corresponding basis vectors are
/// popped, the iterate is rescaled to eta * projection(X), the cost is
/// projected, and the dynamic restarts inside the smaller subspace. The
/// subspace is carried as an orthonormal n x k frame and the dynamic runs on
/// the restricted k x k matrices, which keeps every update well conditioned.
/// The basis is refreshed from (C, X) at each accepted step so its
/// congruences stay diagonal along the whole trajectory.
inline SolveResult modified_solve(const SdpProblem& prob, const SolverConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = prob.n();
  const double eta = cfg.eta ? *cfg.eta : default_eta(prob);

  Diagnostics diag;
  Matrix frame = Matrix::Identity(n, n);  // orthonormal columns spanning the active subspace
  SymMatrix cost = prob.C();
  std::vector<SymMatrix> cons = prob.constraints();
  SymMatrix Y(eta * Matrix::Identity(n, n));
  Vector p = Vector::Zero(prob.m());
  double t = 0.0;
  long iters = 0;
  int epochs = 0;
  TerminationStatus status = TerminationStatus::MaxIters;
  std::optional<PrimalDualSolution> final_sol;
  bool done = false;

  while (!done) {
    ++epochs;
    if (epochs > static_cast<int>(n) + 1)
      throw std::runtime_error("modified_solve: epoch count exceeded n + 1");
    const Index k = frame.cols();

    // pop collapsed directions off the diagonalization basis
    const Matrix u = simultaneous_diagonalize(cost, Y);
    const Vector d = (u.transpose() * Y.mat() * u).diagonal();
    std::vector<Index> keep;
    for (Index i = 0; i < k; ++i)
      if (d(i) >= cfg.eps_eig) keep.push_back(i);
    if (keep.empty()) {
      // every direction collapsed; the zero matrix is the limit
      final_sol = PrimalDualSolution{SymMatrix::Zero(n), p};
      status = TerminationStatus::Converged;
      break;
    }
    Matrix ukeep(k, static_cast<Index>(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i) ukeep.col(static_cast<Index>(i)) = u.col(keep[i]);

    // orthonormalize the popped-down basis so the projection is a plain
    // orthogonal expansion, then rescale and project
    Eigen::HouseholderQR<Matrix> qr(ukeep);
    const Matrix q = qr.householderQ() * Matrix::Identity(k, static_cast<Index>(keep.size()));
    frame = frame * q;
    Y = SymMatrix(eta * Matrix(Vector((q.transpose() * Y.mat() * q).diagonal()).asDiagonal()));
    cost = SymMatrix(Matrix(Vector((q.transpose() * cost.mat() * q).diagonal()).asDiagonal()));
    for (auto& a : cons) a = SymMatrix(q.transpose() * a.mat() * q);

    const SdpProblem rprob(cost, cons, prob.b());
    diag.epoch_starts.push_back(static_cast<long>(diag.steps.size()));

    std::optional<SymMatrix> cinv;
    if (cfg.ansatz == ConductanceKind::FirstAnsatz) cinv = inverse_spd(cost);

    int stall = 0;
    while (true) {
      if (iters >= cfg.max_iters) {
        status = TerminationStatus::MaxIters;
        done = true;
        break;
      }
      const EigenDecomp yd = eigendecompose(Y);
      const Matrix uin = simultaneous_diagonalize(cost, Y);
      const Matrix ycon = uin.transpose() * Y.mat() * uin;
      const Matrix ccon = uin.transpose() * cost.mat() * uin;
      double offd = 0.0;
      for (Index i = 0; i < ycon.rows(); ++i)
        for (Index j = 0; j < ycon.cols(); ++j)
          if (i != j) offd = std::max(offd, std::max(std::abs(ycon(i, j)), std::abs(ccon(i, j))));

      // rank check before any update evaluation
      if (yd.values(0) < cfg.eps_eig || ycon.diagonal().minCoeff() < cfg.eps_eig) break;

      const Vector r = rprob.residual(Y);
      const double lin_inf = rprob.m() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
      const UpdateMode mode =
          lin_inf <= cfg.thresholds.eps_feas ? UpdateMode::Feasible : UpdateMode::General;
      const ConductanceOperator op = cfg.ansatz == ConductanceKind::FirstAnsatz
                                         ? ConductanceOperator::first_ansatz(Y, *cinv)
                                         : ConductanceOperator::second_ansatz(Y);
      const Velocity v = solve_update(rprob, op, mode);
      p = v.p;
      const double xdn = v.Xdot.norm();
      const double work = yd.values.array().log().sum();
      const double obj = rprob.objective(Y);

      if (xdn <= cfg.eps) {
        // lambda_min >= eps_eig held above, so this is full convergence
        status = TerminationStatus::Converged;
        diag.final_state = FinalSnapshot{t, obj, work, xdn, yd.values(0), r, {}};
        done = true;
        break;
      }

      const double h = detail::max_psd_step_from(yd, v.Xdot, cfg.step);
      stall = h <= cfg.step.floor ? stall + 1 : 0;
      if (stall >= 100) {
        status = TerminationStatus::Stalled;
        diag.final_state = FinalSnapshot{t, obj, work, xdn, yd.values(0), r, {}};
        done = true;
        break;
      }

      diag.steps.push_back(StepRecord{t, h, obj, work, xdn, yd.values(0), r, {}, offd,
                                      static_cast<int>(frame.cols())});
      Y = step(Y, v, h);
      t += h;
      ++iters;
    }
  }

  if (!final_sol) final_sol = PrimalDualSolution{SymMatrix(frame * Y.mat() * frame.transpose()), p};
  if (status != TerminationStatus::Converged) {
    diag.final_state.t = t;
    diag.final_state.lambda_min = min_eigenvalue(Y);
    diag.final_state.residuals = prob.residual(final_sol->X);
    diag.final_state.objective = prob.objective(final_sol->X);
  }
  const Certificate cert = certify(prob, *final_sol);
  return SolveResult{std::move(*final_sol), std::move(diag), cert, status, iters,
                     epochs,                std::nullopt,    eta,  detail::elapsed_sec(t0)};
}

}  // namespace physarum
