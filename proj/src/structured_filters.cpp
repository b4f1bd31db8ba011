#include "graphfilt/structured_filters.hpp"

#include "graphfilt/conv_filter.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace graphfilt {

namespace {

// Columns z^(0..K) with z^(k) = S z^(k-1).
Matrix shift_sequence(const ShiftOperator& s, const Vector& x, Index k) {
  Matrix z(x.size(), k + 1);
  z.col(0) = x;
  for (Index j = 1; j <= k; ++j) z.col(j) = s.apply(Vector(z.col(j - 1)));
  return z;
}

void check_signal(const ShiftOperator& s, const Vector& x) {
  if (x.size() != s.size()) throw InvalidArgument("signal length does not match shift operator size");
}

Vector min_norm_solve(const Matrix& a, const Vector& b, bool& rank_deficient) {
  Vector scale = a.colwise().norm().transpose();
  for (Index j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) scale[j] = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a * scale.cwiseInverse().asDiagonal());
  if (cod.rank() < a.cols()) rank_deficient = true;
  return cod.solve(b).cwiseQuotient(scale);
}

// Column sets {i} + supp(row i of S) per node, sorted.
std::vector<std::vector<Index>> row_supports(const ShiftOperator& s) {
  std::vector<std::vector<Index>> out(s.size());
  const SparseMatrix& m = s.matrix();
  for (Index r = 0; r < m.outerSize(); ++r) {
    std::set<Index> cols{r};
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      if (it.value() != 0.0) cols.insert(it.col());
    out[r].assign(cols.begin(), cols.end());
  }
  return out;
}

}  // namespace

NodeVaryingFilter::NodeVaryingFilter(Matrix coeffs) : coeffs_(std::move(coeffs)) {
  require(coeffs_.rows() >= 1 && coeffs_.cols() >= 1, "node-varying coefficients must be non-empty");
  require(coeffs_.allFinite(), "node-varying coefficients must be finite");
}

EdgeVaryingFilter::EdgeVaryingFilter(std::vector<SparseMatrix> mats, const ShiftOperator& s) : mats_(std::move(mats)) {
  require(!mats_.empty(), "edge-varying filter needs at least H_0");
  const Index n = s.size();
  const auto supports = row_supports(s);
  for (size_t k = 0; k < mats_.size(); ++k) {
    SparseMatrix& h = mats_[k];
    require(h.rows() == n && h.cols() == n, "H_" + std::to_string(k) + " has the wrong shape");
    h.makeCompressed();
    for (Index r = 0; r < h.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(h, r); it; ++it) {
        if (it.value() == 0.0) continue;
        if (!std::isfinite(it.value())) throw InvalidArgument("H_" + std::to_string(k) + " has a non-finite entry");
        const bool ok = k == 0 ? it.col() == r
                               : std::binary_search(supports[r].begin(), supports[r].end(), it.col());
        if (!ok)
          throw InvalidArgument("H_" + std::to_string(k) + " entry (" + std::to_string(r) + ", " +
                                std::to_string(it.col()) + ") lies outside the allowed support");
      }
    }
  }
}

Vector apply(const NodeVaryingFilter& f, const ShiftOperator& s, const Vector& x) {
  check_signal(s, x);
  if (f.node_count() != s.size()) throw InvalidArgument("node-varying filter size does not match shift operator");
  Vector z = x;
  Vector y = f.coeffs().row(0).transpose().cwiseProduct(z);
  for (Index k = 1; k <= f.order(); ++k) {
    z = s.apply(z);
    y += f.coeffs().row(k).transpose().cwiseProduct(z);
  }
  if (!y.allFinite()) throw NumericError("node-varying filter produced non-finite output");
  return y;
}

Vector apply(const EdgeVaryingFilter& f, const ShiftOperator& s, const Vector& x) {
  check_signal(s, x);
  if (f.mats().front().rows() != s.size()) throw InvalidArgument("edge-varying filter size does not match shift operator");
  Vector z = x;
  Vector y = f.mats()[0] * z;
  for (Index k = 1; k <= f.order(); ++k) {
    z = s.apply(z);
    y += f.mats()[k] * z;
  }
  if (!y.allFinite()) throw NumericError("edge-varying filter produced non-finite output");
  return y;
}

Matrix dense_operator(const NodeVaryingFilter& f, const Matrix& s) {
  Matrix p = Matrix::Identity(s.rows(), s.cols());
  Matrix h = Matrix::Zero(s.rows(), s.cols());
  for (Index k = 0; k <= f.order(); ++k) {
    if (k > 0) p = s * p;
    h += f.coeffs().row(k).transpose().asDiagonal() * p;
  }
  return h;
}

Matrix dense_operator(const EdgeVaryingFilter& f, const Matrix& s) {
  Matrix p = Matrix::Identity(s.rows(), s.cols());
  Matrix h = Matrix::Zero(s.rows(), s.cols());
  for (Index k = 0; k <= f.order(); ++k) {
    if (k > 0) p = s * p;
    h += Matrix(f.mats()[k]) * p;
  }
  return h;
}

NodeVaryingExactResult design_node_varying_exact(const Matrix& b, const SpectralBasis& basis, Index k) {
  const Index n = basis.size();
  require(b.rows() == n && b.cols() == n, "target operator must be N x N");
  require(k >= 0, "order must be nonnegative");
  const Matrix& v = basis.real_eigenvectors();
  const Vector& lam = basis.real_eigenvalues();
  const double bscale = std::max(b.norm(), std::numeric_limits<double>::min());
  const double zero_tol = 1e-10;
  const double ratio_tol = 1e-6;
  const auto groups = eigenvalue_groups(lam);

  NodeVaryingExactResult res;
  Matrix coeffs(k + 1, n);
  std::vector<std::string> violations;
  bool short_order = false;

  for (Index i = 0; i < n; ++i) {
    const Vector u = v.row(i).transpose();
    const Vector bbar = (b.row(i) * v).transpose();
    std::vector<double> nodes, values;
    bool borderline = false;
    for (const auto& grp : groups) {
      double ratio = 0.0;
      bool have = false;
      for (const Index j : grp) {
        const double au = std::abs(u[j]);
        if (au <= zero_tol) {
          if (std::abs(bbar[j]) > ratio_tol * bscale)
            violations.push_back("node " + std::to_string(i) + ": spectral coefficient at eigenvalue " +
                                 std::to_string(lam[j]) + " is nonzero where the node has no eigenvector support");
          continue;
        }
        if (au < 1e3 * zero_tol) borderline = true;
        const double r = bbar[j] / u[j];
        if (!have) {
          ratio = r;
          have = true;
        } else if (std::abs(r - ratio) > ratio_tol * std::max(1.0, std::abs(ratio))) {
          violations.push_back("node " + std::to_string(i) + ": ratios differ inside repeated eigenvalue " +
                               std::to_string(lam[j]));
        }
      }
      if (have) {
        nodes.push_back(lam[grp.front()]);
        values.push_back(ratio);
      }
    }
    if (borderline) res.borderline_nodes.push_back(i);
    if (static_cast<Index>(nodes.size()) > k + 1) short_order = true;
    if (nodes.empty()) {
      coeffs.col(i).setZero();
      continue;
    }
    const Matrix vm = vandermonde(Eigen::Map<const Vector>(nodes.data(), nodes.size()), k);
    bool rd = false;
    coeffs.col(i) = min_norm_solve(vm, Eigen::Map<const Vector>(values.data(), values.size()), rd);
  }
  if (!violations.empty()) {
    std::string msg = "operator cannot be realized by a node-varying filter:";
    for (const auto& v2 : violations) msg += "\n  " + v2;
    throw InvalidArgument(msg);
  }
  if (short_order) res.warnings.push_back("order K is below the number of distinct eigenvalues seen by some node");
  res.filter = NodeVaryingFilter(coeffs);
  res.residual = (dense_operator(res.filter, basis.operator_matrix(lam)) - b).norm();
  return res;
}

NodeVaryingLsResult design_node_varying_ls(const Matrix& x, const Matrix& y, const ShiftOperator& s, Index k) {
  const Index n = s.size();
  require(x.rows() == n && y.rows() == n && x.cols() == y.cols() && x.cols() >= 1, "data shapes do not match");
  require(k >= 0, "order must be nonnegative");
  const Index m = x.cols();
  std::vector<Matrix> z(m);
  for (Index c = 0; c < m; ++c) z[c] = shift_sequence(s, x.col(c), k);

  NodeVaryingLsResult res;
  Matrix coeffs(k + 1, n);
  for (Index i = 0; i < n; ++i) {
    Matrix a(m, k + 1);
    for (Index c = 0; c < m; ++c) a.row(c) = z[c].row(i);
    coeffs.col(i) = min_norm_solve(a, y.row(i).transpose(), res.info.rank_deficient);
  }
  if (m < k + 1) {
    res.info.underdetermined = true;
    res.info.warnings.push_back("underdetermined: " + std::to_string(n * (k + 1)) + " parameters for " +
                                std::to_string(n * m) + " equations");
  }
  if (res.info.rank_deficient) res.info.warnings.push_back("rank deficient; minimum-norm coefficients returned");
  res.filter = NodeVaryingFilter(coeffs);
  Matrix fit(n, m);
  for (Index c = 0; c < m; ++c) fit.col(c) = apply(res.filter, s, Vector(x.col(c)));
  res.info.residual = (fit - y).norm();
  return res;
}

EdgeVaryingLsResult design_edge_varying_ls(const Matrix& x, const Matrix& y, const ShiftOperator& s, Index k) {
  const Index n = s.size();
  require(x.rows() == n && y.rows() == n && x.cols() == y.cols() && x.cols() >= 1, "data shapes do not match");
  require(k >= 0, "order must be nonnegative");
  const Index m = x.cols();
  std::vector<Matrix> z(m);
  for (Index c = 0; c < m; ++c) z[c] = shift_sequence(s, x.col(c), k);
  const auto supports = row_supports(s);

  EdgeVaryingLsResult res;
  std::vector<std::vector<Triplet>> trip(k + 1);
  Index params = 0;
  for (Index i = 0; i < n; ++i) {
    const auto& sup = supports[i];
    const Index p = 1 + k * static_cast<Index>(sup.size());
    params += p;
    Matrix a(m, p);
    for (Index c = 0; c < m; ++c) {
      a(c, 0) = z[c](i, 0);
      Index col = 1;
      for (Index j = 1; j <= k; ++j)
        for (const Index nb : sup) a(c, col++) = z[c](nb, j);
    }
    const Vector h = min_norm_solve(a, y.row(i).transpose(), res.info.rank_deficient);
    trip[0].emplace_back(i, i, h[0]);
    Index col = 1;
    for (Index j = 1; j <= k; ++j)
      for (const Index nb : sup) trip[j].emplace_back(i, nb, h[col++]);
  }
  std::vector<SparseMatrix> mats;
  for (Index j = 0; j <= k; ++j) {
    SparseMatrix h(n, n);
    h.setFromTriplets(trip[j].begin(), trip[j].end());
    mats.push_back(std::move(h));
  }
  if (params > n * m) {
    res.info.underdetermined = true;
    res.info.warnings.push_back("underdetermined: " + std::to_string(params) + " parameters for " +
                                std::to_string(n * m) + " equations");
  }
  if (res.info.rank_deficient) res.info.warnings.push_back("rank deficient; minimum-norm coefficients returned");
  res.filter = EdgeVaryingFilter(std::move(mats), s);
  Matrix fit(n, m);
  for (Index c = 0; c < m; ++c) fit.col(c) = apply(res.filter, s, Vector(x.col(c)));
  res.info.residual = (fit - y).norm();
  return res;
}

VolterraFilter::VolterraFilter(std::vector<int> caps) : caps_(std::move(caps)) {
  require(!caps_.empty(), "Volterra filter needs at least one degree cap");
  for (const int c : caps_) require(c >= 0, "degree caps must be nonnegative");
}

void VolterraFilter::set(const MultiIndex& l, double h) {
  require(l.size() == caps_.size(), "multi-index length must be K+1");
  for (size_t j = 0; j < l.size(); ++j)
    require(l[j] >= 0 && l[j] <= caps_[j], "multi-index entry " + std::to_string(j) + " exceeds its cap");
  require(std::isfinite(h), "Volterra coefficient must be finite");
  if (h == 0.0)
    table_.erase(l);
  else
    table_[l] = h;
}

double VolterraFilter::get(const MultiIndex& l) const {
  const auto it = table_.find(l);
  return it == table_.end() ? 0.0 : it->second;
}

Index VolterraFilter::dense_size() const {
  double total = 1.0;
  for (const int c : caps_) total *= c + 1.0;
  if (total > 1e6) throw InvalidArgument("dense Volterra table would hold more than 1e6 entries");
  return static_cast<Index>(total);
}

Vector apply(const VolterraFilter& f, const ShiftOperator& s, const Vector& x) {
  check_signal(s, x);
  const Index k = f.shift_order();
  const Matrix z = shift_sequence(s, x, k);
  Vector y = Vector::Zero(x.size());
  for (const auto& [l, h] : f.table()) {
    Vector term = Vector::Constant(x.size(), h);
    for (Index j = 0; j <= k; ++j)
      if (l[j] > 0) term.array() *= z.col(j).array().pow(l[j]);
    y += term;
  }
  if (!y.allFinite()) throw NumericError("Volterra filter overflowed (non-finite output)");
  return y;
}

MedianFilter::MedianFilter(std::vector<int> replications) : reps_(std::move(replications)) {
  require(!reps_.empty(), "median filter needs at least one replication count");
  long total = 0;
  for (const int r : reps_) {
    require(r >= 0, "replication counts must be nonnegative");
    total += r;
  }
  require(total >= 1, "median filter replications are all zero");
}

Vector apply(const MedianFilter& f, const ShiftOperator& s, const Vector& x) {
  check_signal(s, x);
  const Matrix z = shift_sequence(s, x, f.order());
  Vector y(x.size());
  std::vector<double> buf;
  for (Index i = 0; i < x.size(); ++i) {
    buf.clear();
    for (Index k = 0; k <= f.order(); ++k) buf.insert(buf.end(), f.replications()[k], z(i, k));
    std::sort(buf.begin(), buf.end());
    const size_t m = buf.size();
    y[i] = m % 2 == 1 ? buf[m / 2] : 0.5 * (buf[m / 2 - 1] + buf[m / 2]);
  }
  return y;
}

MultiGsoFilter::MultiGsoFilter(std::vector<ShiftOperator> gsos, Matrix coeffs)
    : gsos_(std::move(gsos)), coeffs_(std::move(coeffs)) {
  require(!gsos_.empty(), "multi-GSO filter needs at least one shift operator");
  require(coeffs_.rows() == static_cast<Index>(gsos_.size()) && coeffs_.cols() >= 1,
          "coefficient matrix must be Q x (K+1)");
  require(coeffs_.allFinite(), "multi-GSO coefficients must be finite");
  for (const auto& s : gsos_) require(s.size() == gsos_.front().size(), "all shift operators must share N");
}

Vector apply(const MultiGsoFilter& f, const Vector& x) {
  Vector y = Vector::Zero(x.size());
  for (size_t q = 0; q < f.gsos().size(); ++q)
    y += apply(ConvFilter(f.coeffs().row(q).transpose()), f.gsos()[q], x);
  return y;
}

MultiGsoDesign design_multi_gso_group(const Matrix& x, const Matrix& y, const std::vector<ShiftOperator>& gsos,
                                      Index k, double mu, double alpha) {
  require(gsos.size() == 2, "group design expects exactly two shift operators");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(mu > 0.0, "mu must be positive");
  require(k >= 0, "order must be nonnegative");
  const Index n = gsos[0].size();
  require(gsos[1].size() == n, "all shift operators must share N");
  require(x.rows() == n && y.rows() == n && x.cols() == y.cols() && x.cols() >= 1, "data shapes do not match");
  const Index m = x.cols();
  const Index p = k + 1;
  Matrix phi(n * m, 2 * p);
  for (Index c = 0; c < m; ++c)
    for (Index q = 0; q < 2; ++q) phi.block(c * n, q * p, n, p) = shift_sequence(gsos[q], x.col(c), k);
  const Vector yv = Eigen::Map<const Vector>(y.data(), y.size());

  Matrix lhs = phi.transpose() * phi / mu;
  lhs.diagonal().head(p).array() += 1.0 / alpha;
  lhs.diagonal().tail(p).array() += 1.0 / (1.0 - alpha);
  const Vector h = lhs.llt().solve(phi.transpose() * yv / mu);

  MultiGsoDesign d;
  Matrix coeffs(2, p);
  coeffs.row(0) = h.head(p).transpose();
  coeffs.row(1) = h.tail(p).transpose();
  d.filter = MultiGsoFilter(gsos, coeffs);
  d.group_norms = {h.head(p).norm(), h.tail(p).norm()};
  d.fit_error = (phi * h - yv).norm();
  return d;
}

}  // namespace graphfilt
