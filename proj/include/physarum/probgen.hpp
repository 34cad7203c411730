// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "physarum/matrix.hpp"
#include "physarum/model.hpp"

namespace physarum {

/// Deterministic scalar RNG. Box-Muller over mt19937_64 keeps generated
/// problems bit-identical for a given seed regardless of the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }  // [0, 1)

  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t integer(std::uint64_t bound) { return bound == 0 ? 0 : eng_() % bound; }

 private:
  std::mt19937_64 eng_;
};

struct GenSpec {
  enum class Scheme { RandomPositive, VertexCover, MaxCut };
  Scheme scheme = Scheme::RandomPositive;
  int n = 1;  // matrix dimension (random scheme) or vertex count (graph schemes)
  int m = 1;  // constraint count (random scheme) or edge count (graph schemes)
  std::uint64_t seed = 0;
};

/// A generated instance together with the planted feasible interior point
/// that produced b (random scheme only).
struct GeneratedProblem {
  SdpProblem problem;
  SymMatrix planted;
};

/// C = M^T M + I for a standard-normal M, symmetrized standard-normal A_l,
/// and b planted from a random positive definite X so the instance is
/// guaranteed feasible and bounded.
inline GeneratedProblem gen_random_positive(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("gen_random_positive: n, m must be >= 1");
  Rng rng(seed);
  const auto randmat = [&rng, n] {
    Matrix mat(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) mat(i, j) = rng.normal();
    return mat;
  };
  const Matrix m0 = randmat();
  const SymMatrix C(m0.transpose() * m0 + Matrix::Identity(n, n));
  std::vector<SymMatrix> A;
  A.reserve(static_cast<size_t>(m));
  for (int l = 0; l < m; ++l) A.emplace_back(randmat());
  const Matrix p0 = randmat();
  const SymMatrix planted(p0.transpose() * p0 + Matrix::Identity(n, n));
  Vector b(m);
  for (int l = 0; l < m; ++l) b(l) = trace_inner(A[static_cast<size_t>(l)], planted);
  return GeneratedProblem{SdpProblem(std::move(C), std::move(A), std::move(b)), planted};
}

using Edge = std::pair<int, int>;  // zero-based vertex ids

namespace detail {

inline std::vector<Edge> canonical_edges(int n_vertices, std::vector<Edge> edges) {
  if (n_vertices < 1) throw std::invalid_argument("graph must have at least one vertex");
  std::set<Edge> seen;
  for (auto& [v, w] : edges) {
    if (v < 0 || w < 0 || v >= n_vertices || w >= n_vertices)
      throw std::invalid_argument("edge endpoint out of range");
    if (v == w) throw std::invalid_argument("self-loops are not allowed");
    if (v > w) std::swap(v, w);
    if (!seen.insert({v, w}).second) throw std::invalid_argument("duplicate edge");
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace detail

/// Vertex-cover relaxation on matrices of size n+1: one constraint per
/// vertex (b = 0), one per edge (b = 2), and one pinning the corner entry
/// (b = 1); n + m + 1 constraints total, C = I.
inline SdpProblem vertex_cover_problem(int n_vertices, std::vector<Edge> edges) {
  edges = detail::canonical_edges(n_vertices, std::move(edges));
  const Index d = n_vertices + 1;
  std::vector<SymMatrix> A;
  Vector b(static_cast<Index>(n_vertices + edges.size() + 1));
  Index l = 0;
  for (int v = 0; v < n_vertices; ++v) {
    Matrix a = Matrix::Zero(d, d);
    a(0, v + 1) = -1.0;
    a(v + 1, 0) = -1.0;
    a(v + 1, v + 1) = 2.0;
    A.emplace_back(a);
    b(l++) = 0.0;
  }
  for (const auto& [v, w] : edges) {
    Matrix a = Matrix::Zero(d, d);
    a(v + 1, w + 1) = -1.0;
    a(w + 1, v + 1) = -1.0;
    a(0, v + 1) = 1.0;
    a(v + 1, 0) = 1.0;
    a(0, w + 1) = 1.0;
    a(w + 1, 0) = 1.0;
    A.emplace_back(a);
    b(l++) = 2.0;
  }
  Matrix corner = Matrix::Zero(d, d);
  corner(0, 0) = 1.0;
  A.emplace_back(corner);
  b(l++) = 1.0;
  return SdpProblem(SymMatrix::Identity(d), std::move(A), std::move(b));
}

/// Max-cut relaxation min tr((xi I - W) X) with diag(X) = 1, where W is the
/// graph Laplacian and xi = 2 * max_degree + 1 (Gershgorin keeps xi I - W
/// positive definite). xi is recorded in the problem metadata so
/// tr(WX) = xi * n - tr(CX) stays recoverable.
inline SdpProblem max_cut_problem(int n_vertices, std::vector<Edge> edges) {
  edges = detail::canonical_edges(n_vertices, std::move(edges));
  const Index n = n_vertices;
  Matrix w = Matrix::Zero(n, n);
  for (const auto& [v, u] : edges) {
    w(v, v) += 1.0;
    w(u, u) += 1.0;
    w(v, u) -= 1.0;
    w(u, v) -= 1.0;
  }
  const double maxdeg = n > 0 ? w.diagonal().maxCoeff() : 0.0;
  const double xi = 2.0 * maxdeg + 1.0;
  std::vector<SymMatrix> A;
  Vector b = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) {
    Matrix a = Matrix::Zero(n, n);
    a(i, i) = 1.0;
    A.emplace_back(a);
  }
  return SdpProblem(SymMatrix(xi * Matrix::Identity(n, n) - w), std::move(A), std::move(b),
                    {{"maxcut_xi", xi}});
}

/// Uniform simple graph with exactly n_edges edges, deterministic in seed.
inline std::vector<Edge> random_graph(int n_vertices, int n_edges, std::uint64_t seed) {
  if (n_vertices < 1) throw std::invalid_argument("random_graph: need at least one vertex");
  std::vector<Edge> all;
  for (int v = 0; v < n_vertices; ++v)
    for (int w = v + 1; w < n_vertices; ++w) all.push_back({v, w});
  if (n_edges < 0 || static_cast<size_t>(n_edges) > all.size())
    throw std::invalid_argument("random_graph: edge count out of range");
  Rng rng(seed);
  for (size_t i = 0; i < static_cast<size_t>(n_edges); ++i) {
    const size_t j = i + static_cast<size_t>(rng.integer(all.size() - i));
    std::swap(all[i], all[j]);
  }
  all.resize(static_cast<size_t>(n_edges));
  return all;
}

inline SdpProblem generate(const GenSpec& gs) {
  switch (gs.scheme) {
    case GenSpec::Scheme::RandomPositive:
      return gen_random_positive(gs.n, gs.m, gs.seed).problem;
    case GenSpec::Scheme::VertexCover:
      return vertex_cover_problem(gs.n, random_graph(gs.n, gs.m, gs.seed));
    case GenSpec::Scheme::MaxCut:
      return max_cut_problem(gs.n, random_graph(gs.n, gs.m, gs.seed));
  }
  throw std::invalid_argument("generate: unknown scheme");
}

inline SdpProblem gen_vertex_cover(int n_vertices, int n_edges, std::uint64_t seed) {
  return vertex_cover_problem(n_vertices, random_graph(n_vertices, n_edges, seed));
}

inline SdpProblem gen_max_cut(int n_vertices, int n_edges, std::uint64_t seed) {
  return max_cut_problem(n_vertices, random_graph(n_vertices, n_edges, seed));
}

}  // namespace physarum
