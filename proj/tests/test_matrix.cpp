// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "physarum/matrix.hpp"
#include "physarum/probgen.hpp"

using namespace physarum;

namespace {

SymMatrix random_sym(Rng& rng, Index n, double scale = 1.0) {
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = scale * rng.normal();
  return SymMatrix(m);
}

SymMatrix random_spd(Rng& rng, Index n) {
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = rng.normal();
  return SymMatrix(m.transpose() * m + Matrix::Identity(n, n));
}

}  // namespace

TEST_CASE("SymMatrix symmetrizes on construction") {
  Matrix raw(2, 2);
  raw << 1.0, 4.0, 2.0, 3.0;
  const SymMatrix s(raw);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == Catch::Approx(3.0));
  CHECK_THROWS_AS(SymMatrix(Matrix::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(SymMatrix(Matrix::Zero(0, 0)), std::invalid_argument);
}

TEST_CASE("vec uses column stacking") {
  const VecMatrix vi = vec(SymMatrix::Identity(2));
  CHECK(vi.data(0) == 1.0);
  CHECK(vi.data(1) == 0.0);
  CHECK(vi.data(2) == 0.0);
  CHECK(vi.data(3) == 1.0);

  Vector d(2);
  d << 1.0, 2.0;
  const VecMatrix vd = vec(SymMatrix::FromDiagonal(d));
  CHECK(vd.data(0) == 1.0);
  CHECK(vd.data(3) == 2.0);

  Matrix off(2, 2);
  off << 0.0, 3.0, 3.0, 0.0;
  const VecMatrix vo = vec(SymMatrix(off));
  CHECK(vo.data(1) == 3.0);
  CHECK(vo.data(2) == 3.0);
  CHECK(vo.data.dot(vo.data) == Catch::Approx(18.0));  // tr(M^T M)
}

TEST_CASE("vec/unvec round-trip is exact and the inner product matches the trace") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.integer(6));
    const SymMatrix a = random_sym(rng, n, 2.0);
    const SymMatrix b = random_sym(rng, n, 2.0);
    CHECK((unvec(vec(a)).mat() - a.mat()).norm() == 0.0);
    const double byvec = vec(a).data.dot(vec(b).data);
    const double bytrace = trace_inner(a, b);
    CHECK(byvec == Catch::Approx(bytrace).epsilon(1e-12).margin(1e-12));
  }
}

TEST_CASE("trace_inner basics") {
  CHECK(trace_inner(SymMatrix::Identity(2), SymMatrix::Identity(2)) == 2.0);
  Vector d1(2), d2(2);
  d1 << 1.0, 2.0;
  d2 << 0.5, 0.5;
  CHECK(trace_inner(SymMatrix::FromDiagonal(d1), SymMatrix::FromDiagonal(d2)) ==
        Catch::Approx(1.5));
  Matrix e(2, 2);
  e << 0.0, 1.0, 1.0, 0.0;
  CHECK(trace_inner(SymMatrix(e), SymMatrix::Identity(2)) == 0.0);
  CHECK_THROWS_AS(trace_inner(SymMatrix::Identity(2), SymMatrix::Identity(3)),
                  std::invalid_argument);
}

TEST_CASE("eigendecompose is deterministic with ascending values") {
  const EigenDecomp di = eigendecompose(SymMatrix::Identity(2));
  CHECK(di.values(0) == Catch::Approx(1.0));
  CHECK(di.values(1) == Catch::Approx(1.0));

  Vector d(2);
  d << 3.0, -1.0;
  const EigenDecomp dd = eigendecompose(SymMatrix::FromDiagonal(d));
  CHECK(dd.values(0) == Catch::Approx(-1.0));
  CHECK(dd.values(1) == Catch::Approx(3.0));

  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const EigenDecomp dm = eigendecompose(SymMatrix(m));
  CHECK(dm.values(0) == Catch::Approx(1.0));
  CHECK(dm.values(1) == Catch::Approx(3.0));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(dm.vectors(0, 0) == Catch::Approx(s));
  CHECK(dm.vectors(1, 0) == Catch::Approx(-s));
  CHECK(dm.vectors(0, 1) == Catch::Approx(s));
  CHECK(dm.vectors(1, 1) == Catch::Approx(s));
}

TEST_CASE("eigendecompose reconstruction and orthonormality on random input") {
  Rng rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.integer(8));
    const SymMatrix m = random_sym(rng, n, 3.0);
    const EigenDecomp d = eigendecompose(m);
    const Matrix rec = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    CHECK((rec - m.mat()).norm() <= 1e-10 * (1.0 + m.norm()));
    const Matrix vtv = d.vectors.transpose() * d.vectors;
    CHECK((vtv - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("min_eigenvalue and is_psd") {
  CHECK(is_psd(SymMatrix::Identity(2), 0.0));
  Vector d(2);
  d << 1.0, -0.1;
  const SymMatrix m = SymMatrix::FromDiagonal(d);
  CHECK(min_eigenvalue(m) == Catch::Approx(-0.1));
  CHECK_FALSE(is_psd(m, 1e-9));
  Vector d2(2);
  d2 << 1.0, -1e-12;
  CHECK(is_psd(SymMatrix::FromDiagonal(d2), 1e-9));
  CHECK_THROWS_AS(is_psd(m, -1.0), std::invalid_argument);
}

TEST_CASE("pinv_solve handles singular systems") {
  Vector b(2);
  b << 4.0, 0.0;
  CHECK((pinv_solve(Matrix::Identity(2, 2), b) - b).norm() == 0.0);

  Matrix L = Matrix::Zero(2, 2);
  L(0, 0) = 2.0;
  Vector r1(2);
  r1 << 4.0, 0.0;
  const Vector x1 = pinv_solve(L, r1);
  CHECK(x1(0) == Catch::Approx(2.0));
  CHECK(x1(1) == 0.0);

  Vector r2(2);
  r2 << 4.0, 1.0;
  const Vector x2 = pinv_solve(L, r2);
  CHECK(x2(0) == Catch::Approx(2.0));
  CHECK(x2(1) == 0.0);
  const Vector resid = L * x2 - r2;
  CHECK(resid(0) == Catch::Approx(0.0).margin(1e-14));
  CHECK(resid(1) == Catch::Approx(-1.0));
}

TEST_CASE("pinv_solve recovers the range component") {
  Rng rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.integer(5));
    // PSD with a deliberate null space
    Matrix base(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) base(i, j) = rng.normal();
    const EigenDecomp d = eigendecompose(SymMatrix(base.transpose() * base));
    Vector lam = d.values;
    lam(0) = 0.0;  // force rank deficiency
    const Matrix L = d.vectors * lam.asDiagonal() * d.vectors.transpose();
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = rng.normal();
    const Vector sol = pinv_solve(L, L * x);
    // expected: projection of x onto range(L)
    Vector expect = Vector::Zero(n);
    for (Index i = 0; i < n; ++i)
      if (lam(i) > 1e-10 * lam.maxCoeff()) expect += d.vectors.col(i).dot(x) * d.vectors.col(i);
    CHECK((sol - expect).norm() <= 1e-8 * (1.0 + expect.norm()));
  }
}

TEST_CASE("simultaneous_diagonalize meets its contract") {
  Vector dc(2), dx(2);
  dc << 1.0, 2.0;
  dx << 3.0, 4.0;
  const Matrix u = simultaneous_diagonalize(SymMatrix::FromDiagonal(dc),
                                            SymMatrix::FromDiagonal(dx));
  // already-diagonal input: one nonzero per column (diagonal up to column
  // scaling and ordering)
  for (Index j = 0; j < 2; ++j) {
    int nonzeros = 0;
    for (Index i = 0; i < 2; ++i)
      if (std::abs(u(i, j)) > 1e-12) ++nonzeros;
    CHECK(nonzeros == 1);
  }

  Matrix x0(2, 2);
  x0 << 2.0, 1.0, 1.0, 2.0;
  const Matrix u2 = simultaneous_diagonalize(SymMatrix::Identity(2), SymMatrix(x0));
  const Matrix con = u2.transpose() * x0 * u2;
  CHECK(std::abs(con(0, 1)) <= 1e-12);

  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.integer(5));
    const SymMatrix c = random_spd(rng, n);
    const SymMatrix x = random_spd(rng, n);
    const Matrix uu = simultaneous_diagonalize(c, x);
    const Matrix cc = uu.transpose() * c.mat() * uu;
    const Matrix xx = uu.transpose() * x.mat() * uu;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) {
          CHECK(std::abs(cc(i, j)) < 1e-9);
          CHECK(std::abs(xx(i, j)) < 1e-9);
        }
    CHECK(std::abs(uu.determinant()) > 0.0);
  }

  Vector neg(2);
  neg << 1.0, -1.0;
  CHECK_THROWS_AS(
      simultaneous_diagonalize(SymMatrix::FromDiagonal(neg), SymMatrix::Identity(2)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      simultaneous_diagonalize(SymMatrix::Identity(2), SymMatrix::FromDiagonal(neg)),
      std::invalid_argument);
}

TEST_CASE("matrix_sqrt") {
  CHECK((matrix_sqrt(SymMatrix::Identity(3)).mat() - Matrix::Identity(3, 3)).norm() <= 1e-12);

  Vector d(2);
  d << 4.0, 9.0;
  const SymMatrix r = matrix_sqrt(SymMatrix::FromDiagonal(d));
  CHECK(r(0, 0) == Catch::Approx(2.0));
  CHECK(r(1, 1) == Catch::Approx(3.0));

  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const SymMatrix rm = matrix_sqrt(SymMatrix(m));
  CHECK((rm.mat() * rm.mat() - m).norm() <= 1e-8 * (1.0 + m.norm()));

  Vector neg(2);
  neg << 1.0, -1e-6;
  CHECK_THROWS_AS(matrix_sqrt(SymMatrix::FromDiagonal(neg)), std::invalid_argument);
  // tiny negatives are clamped
  Vector tiny(2);
  tiny << 1.0, -1e-12;
  CHECK_NOTHROW(matrix_sqrt(SymMatrix::FromDiagonal(tiny)));
}

TEST_CASE("inverse_spd and log_det_pd") {
  Rng rng(3);
  const SymMatrix m = random_spd(rng, 4);
  const SymMatrix inv = inverse_spd(m);
  CHECK((m.mat() * inv.mat() - Matrix::Identity(4, 4)).norm() <= 1e-10 * m.norm());
  const EigenDecomp d = eigendecompose(m);
  CHECK(log_det_pd(m) == Catch::Approx(d.values.array().log().sum()));
  Vector neg(2);
  neg << 1.0, 0.0;
  CHECK_THROWS_AS(inverse_spd(SymMatrix::FromDiagonal(neg)), std::invalid_argument);
}
