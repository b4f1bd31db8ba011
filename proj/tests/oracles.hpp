#pragma once

// Independent reference computations used by the test suites.

#include "graphfilt/graph.hpp"
#include "graphfilt/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

using graphfilt::Edge;
using graphfilt::Graph;
using graphfilt::Index;
using graphfilt::Matrix;
using graphfilt::Rng;
using graphfilt::Vector;

/// Erdos-Renyi graph with weights in [0.5, 1.5]; a spanning path keeps it connected when asked.
inline Graph random_graph(Index n, double p, Rng& rng, bool directed = false, bool connected = true) {
  std::vector<Edge> e;
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  auto add = [&](Index i, Index j) {
    if (i == j || has[i][j]) return;
    has[i][j] = 1;
    if (!directed) has[j][i] = 1;
    e.push_back({i, j, rng.uniform(0.5, 1.5)});
  };
  if (connected)
    for (Index i = 0; i + 1 < n; ++i) add(i, i + 1);
  for (Index i = 0; i < n; ++i)
    for (Index j = directed ? 0 : i + 1; j < n; ++j)
      if (i != j && rng.bernoulli(p)) add(i, j);
  if (connected && directed) add(n - 1, 0);
  return Graph::from_edge_list(e, directed, n);
}

/// Dense adjacency built edge by edge, A(dst, src) = w.
inline Matrix dense_adjacency(const Graph& g) {
  Matrix a = Matrix::Zero(g.node_count(), g.node_count());
  for (const Edge& e : g.edges()) {
    a(e.dst, e.src) = e.weight;
    if (!g.directed()) a(e.src, e.dst) = e.weight;
  }
  return a;
}

inline Matrix dense_laplacian(const Graph& g) {
  const Matrix a = dense_adjacency(g);
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

/// sum_k h_k S^k by explicit matrix powers.
inline Matrix poly(const Vector& h, const Matrix& s) {
  Matrix out = Matrix::Zero(s.rows(), s.cols());
  Matrix p = Matrix::Identity(s.rows(), s.cols());
  for (Index k = 0; k < h.size(); ++k) {
    out += h[k] * p;
    p = p * s;
  }
  return out;
}

inline Matrix perm_matrix(const std::vector<Index>& perm) {
  const Index n = static_cast<Index>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) p(perm[i], i) = 1.0;  // [P^T x]_i = x_perm[i]
  return p;
}

inline std::vector<Index> random_perm(Index n, Rng& rng) {
  std::vector<Index> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (Index i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_index(i + 1)]);
  return p;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double d = std::max(1e-300, b.norm());
  return (a - b).norm() / d;
}

/// Box-constrained dual of min ||x - y||^2 + gamma ||D y||_1, solved by exact coordinate descent:
/// y = x - D^T u / 2 with |u_i| <= gamma.
inline Vector l1_dual_solve(const Matrix& d, const Vector& x, double gamma, int sweeps = 200000, double tol = 1e-15) {
  const Index m = d.rows();
  Vector u = Vector::Zero(m);
  Vector r = x;  // x - D^T u / 2
  for (int s = 0; s < sweeps; ++s) {
    double change = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double nrm = d.row(i).squaredNorm();
      if (nrm == 0.0) continue;
      // minimize over u_i: ||x - D^T u/2||^2 restricted, i.e. -(D r)_i step
      const double gi = d.row(i).dot(r);
      double ui = u[i] + 2.0 * gi / nrm;
      ui = std::clamp(ui, -gamma, gamma);
      const double du = ui - u[i];
      if (du != 0.0) {
        r -= 0.5 * du * d.row(i).transpose();
        u[i] = ui;
        change = std::max(change, std::abs(du));
      }
    }
    if (change < tol) break;
  }
  return r;
}

inline double l1_objective(const Matrix& d, const Vector& x, const Vector& y, double gamma) {
  return (x - y).squaredNorm() + gamma * (d * y).lpNorm<1>();
}

inline std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle
