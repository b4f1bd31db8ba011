#pragma once

#include "graphfilt/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graphfilt {

struct Edge {
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;
};

// Immutable weighted graph. Undirected graphs store each edge once; weight()
// answers symmetrically. Self-loops are rejected: canonical shift operators
// assume a simple graph.
class Graph {
 public:
  Graph() = default;

  static Graph from_edge_list(std::span<const Edge> edges, bool directed,
                              std::optional<Index> node_count = std::nullopt);

  Index node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return directed_; }

  /// W(i,j): weight of the edge i -> j (symmetric for undirected graphs), 0 if absent.
  double weight(Index i, Index j) const;
  bool has_edge(Index i, Index j) const { return weight(i, j) != 0.0; }

  /// Weighted adjacency with A(dst, src) = w, so that (A x)_j aggregates from in-neighbors.
  const SparseMatrix& adjacency() const { return adj_; }

  /// Neighbor lists ignoring direction, sorted ascending.
  std::vector<std::vector<Index>> undirected_neighbors() const;

 private:
  Index n_ = 0;
  bool directed_ = false;
  std::vector<Edge> edges_;
  SparseMatrix adj_;
};

enum class GsoKind {
  adjacency,
  laplacian,
  normalized_adjacency,
  normalized_laplacian,
  random_walk_laplacian,
  custom,
};

std::string_view to_string(GsoKind kind);
GsoKind gso_kind_from_string(std::string_view name);

// Graph shift operator: sparse N x N matrix in compressed-row form with sorted
// column indices.
class ShiftOperator {
 public:
  ShiftOperator() = default;

  /// Wraps an arbitrary square matrix (self-loops allowed).
  static ShiftOperator custom(SparseMatrix matrix);
  static ShiftOperator custom(const Matrix& dense, double drop_tol = 0.0);

  const SparseMatrix& matrix() const { return m_; }
  GsoKind kind() const { return kind_; }
  bool symmetric() const { return symmetric_; }
  Index size() const { return m_.rows(); }
  Index nonzeros() const { return m_.nonZeros(); }

  Matrix dense() const { return Matrix(m_); }

  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& x) const;
  /// Product with the transpose, used by reverse-mode gradients.
  Matrix apply_transpose(const Matrix& x) const;

  /// Internal constructor for canonical kinds; validates the invariants.
  ShiftOperator(SparseMatrix matrix, GsoKind kind);

 private:
  SparseMatrix m_;
  GsoKind kind_ = GsoKind::custom;
  bool symmetric_ = false;
};

ShiftOperator gso(const Graph& g, GsoKind kind);

/// Self-loop augmented symmetric normalization D^{-1/2}(I + A)D^{-1/2}.
ShiftOperator augmented_normalized_adjacency(const Graph& g);

enum class SimilarityMode { epsilon, knn, full };

// Similarity graph from feature rows with Gaussian kernel exp(-dist / (2 theta^2)),
// dist = Euclidean distance. `param` is epsilon (epsilon mode) or k (knn mode).
Graph build_similarity_graph(const Matrix& features, SimilarityMode mode, double theta,
                             double param = 0.0);

Graph cycle_graph(Index n);
Graph path_graph(Index n, double weight = 1.0);
Graph complete_graph(Index n, double weight = 1.0);

/// Returns P^T S P with [P^T x]_i = x_{perm[i]}.
ShiftOperator permute(const ShiftOperator& s, std::span<const Index> perm);
Vector permute_signal(const Vector& x, std::span<const Index> perm);
Matrix permute_rows(const Matrix& x, std::span<const Index> perm);

/// Connected components of the underlying undirected graph; label per node.
std::vector<Index> connected_components(const Graph& g, Index* count = nullptr);

/// 2-coloring (0/1 per node) if the graph is bipartite.
std::optional<std::vector<int>> two_coloring(const Graph& g);

/// Unweighted hop distance from `source` to every node (-1 if unreachable).
std::vector<Index> hop_distances(const Graph& g, Index source);

}  // namespace graphfilt
