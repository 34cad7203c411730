// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "physarum/model.hpp"

using namespace physarum;

TEST_CASE("SdpProblem validates its inputs") {
  Vector d(2), b(1);
  d << 1.0, 2.0;
  b << 1.0;
  CHECK_NOTHROW(SdpProblem(SymMatrix::FromDiagonal(d), {SymMatrix::Identity(2)}, b));

  Vector neg(2);
  neg << 1.0, -1.0;
  CHECK_THROWS_AS(SdpProblem(SymMatrix::FromDiagonal(neg), {SymMatrix::Identity(2)}, b),
                  std::invalid_argument);
  // positive semidefinite but singular cost is rejected too
  Vector sing(2);
  sing << 1.0, 0.0;
  CHECK_THROWS_AS(SdpProblem(SymMatrix::FromDiagonal(sing), {SymMatrix::Identity(2)}, b),
                  std::invalid_argument);
  CHECK_THROWS_AS(SdpProblem(SymMatrix::FromDiagonal(d), {SymMatrix::Identity(3)}, b),
                  std::invalid_argument);
  Vector b2(2);
  b2 << 1.0, 2.0;
  CHECK_THROWS_AS(SdpProblem(SymMatrix::FromDiagonal(d), {SymMatrix::Identity(2)}, b2),
                  std::invalid_argument);
}

TEST_CASE("infeasibility evaluates the worst violation") {
  Vector b(1);
  b << 1.0;
  const SdpProblem prob(SymMatrix::Identity(2), {SymMatrix::Identity(2)}, b);

  Vector feas(2);
  feas << 0.5, 0.5;
  CHECK(infeasibility(prob, SymMatrix::FromDiagonal(feas)) == Catch::Approx(0.0).margin(1e-15));

  Vector x1(2);
  x1 << 1.0, -0.1;
  CHECK(infeasibility(prob, SymMatrix::FromDiagonal(x1)) == Catch::Approx(0.1));

  Vector x2(2);
  x2 << 0.6, 0.6;
  CHECK(infeasibility(prob, SymMatrix::FromDiagonal(x2)) == Catch::Approx(0.2));
}

TEST_CASE("gap is the absolute objective difference") {
  const SdpProblem e1 = oracles::e1_problem();
  Vector x(2);
  x << 0.9, 0.1;
  CHECK(gap(e1, SymMatrix::FromDiagonal(x), 1.0) == Catch::Approx(0.1));
  Vector opt(2);
  opt << 1.0, 0.0;
  CHECK(gap(e1, SymMatrix::FromDiagonal(opt), 1.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("certify fills the certificate from the primal-dual pair") {
  const SdpProblem e1 = oracles::e1_problem();

  Vector xopt(2);
  xopt << 1.0, 0.0;
  Vector p(1);
  p << 1.0;
  const Certificate at_opt = certify(e1, PrimalDualSolution{SymMatrix::FromDiagonal(xopt), p});
  CHECK(at_opt.duality_gap == Catch::Approx(0.0).margin(1e-14));
  CHECK(at_opt.dual_slack_min_eig == Catch::Approx(0.0).margin(1e-12));
  CHECK(at_opt.infeasibility == Catch::Approx(0.0).margin(1e-14));
  CHECK(at_opt.accepted());

  // zero dual candidate: gap equals the primal objective, slack is C itself
  const SymMatrix cinv = inverse_spd(e1.C());
  const Certificate zero_dual = certify(e1, PrimalDualSolution{cinv, Vector::Zero(1)});
  CHECK(zero_dual.duality_gap == Catch::Approx(e1.objective(cinv)));
  CHECK(zero_dual.dual_slack_min_eig == Catch::Approx(1.0));
}

TEST_CASE("weak duality holds for feasible X against any PSD-slack dual") {
  Rng rng(101);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng.integer(5));
    const int m = 1 + static_cast<int>(rng.integer(3));
    auto gen = gen_random_positive(n, m, 1000 + static_cast<std::uint64_t>(rep));
    const SdpProblem& prob = gen.problem;

    // start from a random dual vector and shrink it until the slack is PSD
    Vector p(m);
    for (int l = 0; l < m; ++l) p(l) = rng.normal();
    for (int tries = 0; tries < 60; ++tries) {
      Matrix s = prob.C().mat();
      for (Index l = 0; l < prob.m(); ++l) s -= p(l) * prob.A(l).mat();
      if (min_eigenvalue(SymMatrix(s)) >= 0.0) break;
      p *= 0.5;
    }
    const double primal = prob.objective(gen.planted);
    const double dual = prob.b().dot(p);
    CHECK(primal - dual >= -1e-9 * (1.0 + std::abs(primal)));
  }
}

TEST_CASE("infeasibility is invariant under symmetrization of the input") {
  Vector b(1);
  b << 1.0;
  const SdpProblem prob(SymMatrix::Identity(2), {SymMatrix::Identity(2)}, b);
  Matrix raw(2, 2);
  raw << 0.5, 0.4, 0.0, 0.5;
  const Matrix symd = 0.5 * (raw + raw.transpose());
  CHECK(infeasibility(prob, SymMatrix(raw)) == infeasibility(prob, SymMatrix(symd)));
}

TEST_CASE("certificate acceptance thresholds") {
  Certificate c{1e-6, -1e-7, 1e-7};
  CHECK(c.accepted());
  CHECK_FALSE(Certificate{1e-4, -1e-7, 1e-7}.accepted());
  CHECK_FALSE(Certificate{1e-6, -1e-4, 1e-7}.accepted());
  CHECK_FALSE(Certificate{1e-6, -1e-7, 1e-4}.accepted());
}
