#include "graphfilt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

namespace graphfilt {

namespace {

SparseMatrix from_triplets(Index n, const std::vector<Triplet>& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double max_asymmetry(const SparseMatrix& m) {
  SparseMatrix d = m - SparseMatrix(m.transpose());
  double worst = 0.0;
  for (Index k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

Vector row_sums(const SparseMatrix& m) {
  Vector s = Vector::Zero(m.rows());
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) s[r] += it.value();
  return s;
}

}  // namespace

Graph Graph::from_edge_list(std::span<const Edge> edges, bool directed, std::optional<Index> node_count) {
  Index max_index = -1;
  std::set<std::pair<Index, Index>> seen;
  for (const Edge& e : edges) {
    if (e.src < 0 || e.dst < 0) throw InvalidArgument("edge has a negative node index");
    if (e.src == e.dst)
      throw InvalidArgument("self-loop at node " + std::to_string(e.src) + " (use a custom shift operator)");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw InvalidArgument("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                            ") has non-positive or non-finite weight");
    auto key = directed ? std::make_pair(e.src, e.dst)
                        : std::make_pair(std::min(e.src, e.dst), std::max(e.src, e.dst));
    if (!seen.insert(key).second)
      throw InvalidArgument("duplicate edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
    max_index = std::max({max_index, e.src, e.dst});
  }
  Graph g;
  g.n_ = max_index + 1;
  if (node_count) {
    if (*node_count <= max_index)
      throw InvalidArgument("node index " + std::to_string(max_index) + " overflows node count " +
                            std::to_string(*node_count));
    g.n_ = *node_count;
  }
  if (g.n_ <= 0) throw InvalidArgument("graph must have at least one node");
  g.directed_ = directed;
  g.edges_.assign(edges.begin(), edges.end());

  std::vector<Triplet> t;
  t.reserve(edges.size() * 2);
  for (const Edge& e : g.edges_) {
    t.emplace_back(e.dst, e.src, e.weight);
    if (!directed) t.emplace_back(e.src, e.dst, e.weight);
  }
  g.adj_ = from_triplets(g.n_, t);
  return g;
}

double Graph::weight(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) return 0.0;
  return adj_.coeff(j, i);
}

std::vector<std::vector<Index>> Graph::undirected_neighbors() const {
  std::vector<std::set<Index>> nb(static_cast<std::size_t>(n_));
  for (const Edge& e : edges_) {
    nb[e.src].insert(e.dst);
    nb[e.dst].insert(e.src);
  }
  std::vector<std::vector<Index>> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) out[i].assign(nb[i].begin(), nb[i].end());
  return out;
}

std::string_view to_string(GsoKind kind) {
  switch (kind) {
    case GsoKind::adjacency: return "adjacency";
    case GsoKind::laplacian: return "laplacian";
    case GsoKind::normalized_adjacency: return "normalized_adjacency";
    case GsoKind::normalized_laplacian: return "normalized_laplacian";
    case GsoKind::random_walk_laplacian: return "random_walk_laplacian";
    case GsoKind::custom: return "custom";
  }
  return "custom";
}

GsoKind gso_kind_from_string(std::string_view name) {
  for (GsoKind k : {GsoKind::adjacency, GsoKind::laplacian, GsoKind::normalized_adjacency,
                    GsoKind::normalized_laplacian, GsoKind::random_walk_laplacian, GsoKind::custom})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown shift operator kind '" + std::string(name) + "'");
}

ShiftOperator::ShiftOperator(SparseMatrix matrix, GsoKind kind) : m_(std::move(matrix)), kind_(kind) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("shift operator must be square");
  m_.makeCompressed();
  for (Index k = 0; k < m_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m_, k); it; ++it)
      if (!std::isfinite(it.value())) throw InvalidArgument("shift operator has non-finite entries");
  symmetric_ = max_asymmetry(m_) <= 1e-12;
  if (kind_ == GsoKind::laplacian) {
    const Vector rs = row_sums(m_);
    double scale = 1.0;
    for (Index k = 0; k < m_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m_, k); it; ++it) {
        scale = std::max(scale, std::abs(it.value()));
        if (it.row() != it.col() && it.value() > 0.0)
          throw InvalidArgument("laplacian has a positive off-diagonal entry");
      }
    if (rs.size() > 0 && rs.cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw InvalidArgument("laplacian rows must sum to zero");
  }
}

ShiftOperator ShiftOperator::custom(SparseMatrix matrix) { return ShiftOperator(std::move(matrix), GsoKind::custom); }

ShiftOperator ShiftOperator::custom(const Matrix& dense, double drop_tol) {
  require(dense.rows() == dense.cols(), "shift operator must be square");
  std::vector<Triplet> t;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_tol) t.emplace_back(i, j, dense(i, j));
  return custom(from_triplets(dense.rows(), t));
}

Vector ShiftOperator::apply(const Vector& x) const {
  if (x.size() != size())
    throw InvalidArgument("signal length " + std::to_string(x.size()) + " does not match shift operator size " +
                          std::to_string(size()));
  return m_ * x;
}

Matrix ShiftOperator::apply(const Matrix& x) const {
  if (x.rows() != size()) throw InvalidArgument("signal rows do not match shift operator size");
  return m_ * x;
}

Matrix ShiftOperator::apply_transpose(const Matrix& x) const {
  if (x.rows() != size()) throw InvalidArgument("signal rows do not match shift operator size");
  return m_.transpose() * x;
}

ShiftOperator gso(const Graph& g, GsoKind kind) {
  const Index n = g.node_count();
  const SparseMatrix& a = g.adjacency();
  if (kind == GsoKind::adjacency) return ShiftOperator(a, kind);
  if (kind == GsoKind::custom) return ShiftOperator(a, kind);

  const Vector deg = row_sums(a);
  SparseMatrix eye(n, n);
  eye.setIdentity();
  if (kind == GsoKind::laplacian) {
    SparseMatrix d(n, n);
    d.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Index i = 0; i < n; ++i) d.insert(i, i) = deg[i];
    return ShiftOperator(SparseMatrix(d - a), kind);
  }
  for (Index i = 0; i < n; ++i)
    if (!(deg[i] > 0.0)) {
      if (kind == GsoKind::random_walk_laplacian && g.directed())
        throw InvalidArgument("random-walk laplacian undefined: node " + std::to_string(i) + " has zero degree");
      throw InvalidArgument("normalization undefined: node " + std::to_string(i) + " has zero degree");
    }
  if (kind == GsoKind::random_walk_laplacian) {
    const Vector inv = deg.cwiseInverse();
    SparseMatrix p = inv.asDiagonal() * a;
    return ShiftOperator(SparseMatrix(eye - p), kind);
  }
  const Vector isq = deg.cwiseSqrt().cwiseInverse();
  SparseMatrix an = isq.asDiagonal() * a * isq.asDiagonal();
  if (kind == GsoKind::normalized_adjacency) return ShiftOperator(an, kind);
  return ShiftOperator(SparseMatrix(eye - an), GsoKind::normalized_laplacian);
}

ShiftOperator augmented_normalized_adjacency(const Graph& g) {
  const Index n = g.node_count();
  SparseMatrix eye(n, n);
  eye.setIdentity();
  SparseMatrix a = g.adjacency() + eye;
  const Vector isq = row_sums(a).cwiseSqrt().cwiseInverse();
  return ShiftOperator::custom(SparseMatrix(isq.asDiagonal() * a * isq.asDiagonal()));
}

Graph build_similarity_graph(const Matrix& features, SimilarityMode mode, double theta, double param) {
  const Index n = features.rows();
  require(n >= 1, "need at least one feature vector");
  require(theta > 0.0 && std::isfinite(theta), "kernel width must be positive");
  if (mode == SimilarityMode::epsilon) require(param > 0.0, "epsilon must be positive");
  Index k = 0;
  if (mode == SimilarityMode::knn) {
    k = static_cast<Index>(param);
    require(k >= 1 && static_cast<double>(k) == param, "knn requires a positive integer k");
    require(k < n, "knn requires k < N");
  }

  Matrix dist(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) dist(i, j) = (features.row(i) - features.row(j)).norm();

  std::set<std::pair<Index, Index>> keep;
  for (Index i = 0; i < n; ++i) {
    if (mode == SimilarityMode::knn) {
      std::vector<Index> order;
      for (Index j = 0; j < n; ++j)
        if (j != i) order.push_back(j);
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return dist(i, a) < dist(i, b); });
      for (Index r = 0; r < k; ++r) keep.emplace(std::min(i, order[r]), std::max(i, order[r]));
    } else {
      for (Index j = i + 1; j < n; ++j)
        if (mode == SimilarityMode::full || dist(i, j) <= param) keep.emplace(i, j);
    }
  }
  std::vector<Edge> edges;
  for (auto [i, j] : keep) {
    const double w = std::exp(-dist(i, j) / (2.0 * theta * theta));
    if (w > 0.0) edges.push_back({i, j, w});  // kernel underflow means no edge
  }
  return Graph::from_edge_list(edges, false, n);
}

Graph cycle_graph(Index n) {
  require(n >= 2, "cycle graph needs N >= 2");
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return Graph::from_edge_list(edges, true, n);
}

Graph path_graph(Index n, double weight) {
  require(n >= 1, "path graph needs N >= 1");
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, weight});
  return Graph::from_edge_list(edges, false, n);
}

Graph complete_graph(Index n, double weight) {
  require(n >= 1, "complete graph needs N >= 1");
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, weight});
  return Graph::from_edge_list(edges, false, n);
}

namespace {

std::vector<Index> inverse_permutation(std::span<const Index> perm, Index n) {
  if (static_cast<Index>(perm.size()) != n) throw InvalidArgument("permutation length does not match N");
  std::vector<Index> inv(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const Index p = perm[i];
    if (p < 0 || p >= n || inv[p] != -1) throw InvalidArgument("permutation is not a bijection");
    inv[p] = static_cast<Index>(i);
  }
  return inv;
}

}  // namespace

ShiftOperator permute(const ShiftOperator& s, std::span<const Index> perm) {
  const Index n = s.size();
  const std::vector<Index> inv = inverse_permutation(perm, n);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(s.nonzeros()));
  for (Index r = 0; r < s.matrix().outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(s.matrix(), r); it; ++it) t.emplace_back(inv[it.row()], inv[it.col()], it.value());
  return ShiftOperator(from_triplets(n, t), s.kind());
}

Vector permute_signal(const Vector& x, std::span<const Index> perm) {
  inverse_permutation(perm, x.size());
  Vector y(x.size());
  for (Index i = 0; i < x.size(); ++i) y[i] = x[perm[i]];
  return y;
}

Matrix permute_rows(const Matrix& x, std::span<const Index> perm) {
  inverse_permutation(perm, x.rows());
  Matrix y(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) y.row(i) = x.row(perm[i]);
  return y;
}

std::vector<Index> connected_components(const Graph& g, Index* count) {
  const auto nb = g.undirected_neighbors();
  std::vector<Index> label(nb.size(), -1);
  Index c = 0;
  for (std::size_t s = 0; s < nb.size(); ++s) {
    if (label[s] != -1) continue;
    std::queue<Index> q;
    q.push(static_cast<Index>(s));
    label[s] = c;
    while (!q.empty()) {
      Index u = q.front();
      q.pop();
      for (Index v : nb[u])
        if (label[v] == -1) {
          label[v] = c;
          q.push(v);
        }
    }
    ++c;
  }
  if (count) *count = c;
  return label;
}

std::optional<std::vector<int>> two_coloring(const Graph& g) {
  const auto nb = g.undirected_neighbors();
  std::vector<int> color(nb.size(), -1);
  for (std::size_t s = 0; s < nb.size(); ++s) {
    if (color[s] != -1) continue;
    color[s] = 0;
    std::queue<Index> q;
    q.push(static_cast<Index>(s));
    while (!q.empty()) {
      Index u = q.front();
      q.pop();
      for (Index v : nb[u]) {
        if (color[v] == -1) {
          color[v] = 1 - color[u];
          q.push(v);
        } else if (color[v] == color[u]) {
          return std::nullopt;
        }
      }
    }
  }
  return color;
}

std::vector<Index> hop_distances(const Graph& g, Index source) {
  const auto nb = g.undirected_neighbors();
  std::vector<Index> d(nb.size(), -1);
  d[source] = 0;
  std::queue<Index> q;
  q.push(source);
  while (!q.empty()) {
    Index u = q.front();
    q.pop();
    for (Index v : nb[u])
      if (d[v] == -1) {
        d[v] = d[u] + 1;
        q.push(v);
      }
  }
  return d;
}

}  // namespace graphfilt
