#include "graphfilt/apps.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace graphfilt {

namespace {

double statistic_of(const Vector& y, AnomalyStatistic stat, const SpectralBasis* basis) {
  if (stat == AnomalyStatistic::l2_norm) return y.norm();
  const CVector c = gft(*basis, y);
  return c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
}

int argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (Index c = 1; c < row.size(); ++c)
    if (row[c] > row[best]) best = static_cast<int>(c);
  return best;
}

Matrix row_normalize(const Matrix& u, std::vector<Index>& zero_rows) {
  Matrix out = u;
  for (Index r = 0; r < u.rows(); ++r) {
    const double n = u.row(r).norm();
    if (n > 1e-300)
      out.row(r) /= n;
    else
      zero_rows.push_back(r);
  }
  return out;
}

}  // namespace

Detection anomaly_detect(const DetectorSpec& det, const SpectralBasis& basis, const Vector& x) {
  require(det.threshold > 0.0, "threshold must be positive");
  require(x.size() == basis.size(), "signal length does not match the basis");
  const Vector y = basis.filter(det.filter(basis.real_eigenvalues()), x);
  Detection d;
  d.statistic = statistic_of(y, det.statistic, &basis);
  d.anomalous = d.statistic > det.threshold;
  return d;
}

Detection anomaly_detect(const DetectorSpec& det, const ShiftOperator& s, const Vector& x) {
  require(det.threshold > 0.0, "threshold must be positive");
  if (det.filter.kind() != SpectralKernel::Kind::polynomial)
    throw InvalidArgument("detection on a shift operator needs a polynomial kernel");
  const Vector y = apply(det.filter.polynomial(), s, x);
  Detection d;
  if (det.statistic == AnomalyStatistic::l2_norm) {
    d.statistic = y.norm();
  } else {
    const SpectralBasis basis = eigendecompose(s);
    d.statistic = statistic_of(y, det.statistic, &basis);
  }
  d.anomalous = d.statistic > det.threshold;
  return d;
}

LabelProblem make_label_problem(const std::vector<int>& classes, const std::vector<Index>& labeled, Index c) {
  const Index n = static_cast<Index>(classes.size());
  LabelProblem p;
  p.labels = Matrix::Zero(n, c);
  p.mask.assign(n, 0);
  for (const Index i : labeled) {
    require(i >= 0 && i < n, "labeled node out of range");
    require(classes[i] >= 0 && classes[i] < c, "class out of range");
    p.labels(i, classes[i]) = 1.0;
    p.mask[i] = 1;
  }
  return p;
}

SslResult ssl_label_propagate(const LabelProblem& problem, const ShiftOperator& s, const SslOptions& opts) {
  const Index n = s.size();
  const Matrix& x = problem.labels;
  require(x.rows() == n && static_cast<Index>(problem.mask.size()) == n, "label problem size does not match the graph");
  require(x.cols() >= 1, "need at least one class");
  require(opts.gamma >= 0.0, "regularization weight must be nonnegative");
  const Index c = x.cols();
  for (Index j = 0; j < c; ++j) {
    bool present = false;
    for (Index i = 0; i < n; ++i) present = present || (problem.mask[i] && x(i, j) != 0.0);
    if (!present) throw InvalidArgument("class " + std::to_string(j) + " has no labeled node");
  }
  std::vector<Index> rows;
  for (Index i = 0; i < n; ++i)
    if (problem.mask[i]) rows.push_back(i);
  const Index m = static_cast<Index>(rows.size());

  // Masked, vectorized shifts of the label matrix.
  auto masked_vec = [&](const Matrix& y) {
    Vector v(m * c);
    for (Index j = 0; j < c; ++j)
      for (Index r = 0; r < m; ++r) v[j * m + r] = y(rows[r], j);
    return v;
  };
  const Index kmax = opts.family == SslFamily::conv ? opts.k : std::max(opts.p, opts.q);
  require(kmax >= 0 && opts.p >= 0 && opts.q >= 0, "orders must be nonnegative");
  std::vector<Matrix> shifts{x};
  for (Index k = 1; k <= kmax; ++k) shifts.push_back(s.apply(shifts.back()));
  const Vector target = masked_vec(x);

  SslResult res;
  if (opts.family == SslFamily::conv) {
    Matrix phi(m * c, opts.k + 1);
    for (Index k = 0; k <= opts.k; ++k) phi.col(k) = masked_vec(shifts[k]);
    Matrix lhs = phi.transpose() * phi;
    lhs.diagonal().array() += opts.gamma;
    const Vector h = lhs.ldlt().solve(phi.transpose() * target);
    res.conv = ConvFilter(h);
    res.scores = apply(res.conv, s, x);
  } else {
    // Linearized fit Q(S)X - P(S)X = 0 on the labeled rows, P = 1 + sum a_p S^p.
    Matrix phi(m * c, opts.p + opts.q + 1);
    for (Index k = 0; k <= opts.q; ++k) phi.col(k) = masked_vec(shifts[k]);
    for (Index p = 1; p <= opts.p; ++p) phi.col(opts.q + p) = -masked_vec(shifts[p]);
    Matrix lhs = phi.transpose() * phi;
    lhs.diagonal().array() += opts.gamma;
    const Vector sol = lhs.ldlt().solve(phi.transpose() * target);
    res.rational = RationalFilter(sol.head(opts.q + 1), sol.tail(opts.p));
    res.scores.resize(n, c);
    RationalSolveOptions ro;
    ro.solver = RationalSolver::dense;
    for (Index j = 0; j < c; ++j) res.scores.col(j) = apply(res.rational, s, Vector(x.col(j)), ro).y;
  }
  res.predicted.resize(n);
  for (Index i = 0; i < n; ++i) res.predicted[i] = argmax_lowest(res.scores.row(i));
  return res;
}

KMeansResult kmeans(const Matrix& points, Index k, Rng& rng, Index restarts, Index max_iter, double tol) {
  const Index n = points.rows();
  require(k >= 1 && k <= n, "k must lie in [1, N]");
  require(restarts >= 1, "need at least one restart");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (Index rs = 0; rs < restarts; ++rs) {
    // k-means++ seeding
    Matrix centers(k, points.cols());
    centers.row(0) = points.row(rng.uniform_index(n));
    Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (Index c = 1; c < k; ++c) {
      const double total = d2.sum();
      Index pick = 0;
      if (total <= 0.0) {
        pick = rng.uniform_index(n);
      } else {
        double u = rng.uniform() * total;
        for (pick = 0; pick < n - 1; ++pick) {
          u -= d2[pick];
          if (u < 0.0) break;
        }
      }
      centers.row(c) = points.row(pick);
      d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    std::vector<int> labels(n, 0);
    double inertia = 0.0;
    bool converged = false;
    for (Index it = 0; it < max_iter; ++it) {
      inertia = 0.0;
      for (Index i = 0; i < n; ++i) {
        double bd = std::numeric_limits<double>::infinity();
        for (Index c = 0; c < k; ++c) {
          const double dd = (points.row(i) - centers.row(c)).squaredNorm();
          if (dd < bd) {
            bd = dd;
            labels[i] = static_cast<int>(c);
          }
        }
        inertia += bd;
      }
      Matrix next = Matrix::Zero(k, points.cols());
      Vector count = Vector::Zero(k);
      for (Index i = 0; i < n; ++i) {
        next.row(labels[i]) += points.row(i);
        count[labels[i]] += 1.0;
      }
      for (Index c = 0; c < k; ++c) next.row(c) = count[c] > 0 ? Eigen::RowVectorXd(next.row(c) / count[c]) : Eigen::RowVectorXd(centers.row(c));
      const double shift = (next - centers).norm();
      centers = next;
      if (shift <= tol) {
        converged = true;
        break;
      }
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.labels = labels;
      best.converged = converged;
    }
  }
  return best;
}

Vector jackson_coefficients(Index m) {
  require(m >= 0, "order must be nonnegative");
  const double a = std::numbers::pi / static_cast<double>(m + 2);
  Vector g(m + 1);
  for (Index k = 0; k <= m; ++k) {
    const double kk = static_cast<double>(k);
    g[k] = ((1.0 - kk / (m + 2.0)) * std::sin(a) * std::cos(kk * a) + std::cos(a) * std::sin(kk * a) / (m + 2.0)) /
           std::sin(a);
  }
  return g;
}

ConvFilter chebyshev_step(double cutoff, double lambda_max, Index m) {
  require(lambda_max > 0.0, "lambda_max must be positive");
  const double gamma = lambda_max / 2.0;
  const double b = std::clamp((cutoff - gamma) / gamma, -1.0, 1.0);
  const double tb = std::acos(b);
  const Vector g = jackson_coefficients(m);
  Vector c(m + 1);
  c[0] = 2.0 * (std::numbers::pi - tb) / std::numbers::pi;
  for (Index k = 1; k <= m; ++k) c[k] = -2.0 * std::sin(static_cast<double>(k) * tb) / (static_cast<double>(k) * std::numbers::pi);
  return ConvFilter::chebyshev(c.cwiseProduct(g), lambda_max);
}

ClusterResult spectral_cluster(const Graph& g, Index k, ClusterMode mode, std::uint64_t seed, Index chebyshev_order) {
  const Index n = g.node_count();
  require(k >= 1, "k must be at least 1");
  require(k <= n, "k exceeds the number of nodes");
  ClusterResult res;
  Rng rng(seed);
  if (k == 1) {
    res.labels.assign(n, 0);
    res.embedding = Matrix::Ones(n, 1);
    return res;
  }
  const ShiftOperator l = gso(g, GsoKind::laplacian);
  Matrix u;
  if (mode == ClusterMode::exact) {
    const SpectralBasis basis = eigendecompose(l);
    u = basis.real_eigenvectors().leftCols(k);
  } else {
    const Index r = std::max<Index>(k, static_cast<Index>(std::ceil(4.0 * std::log(static_cast<double>(n)))));
    res.random_signals = r;
    Rng sig = rng.split(1);
    const Matrix rs = sig.normal_matrix(n, r);
    const double lmax = estimate_lambda_max(l);
    auto count = [&](double c) {
      const Matrix f = apply(chebyshev_step(c, lmax, chebyshev_order), l, rs);
      return rs.cwiseProduct(f).sum() / static_cast<double>(r);
    };
    double lo = 0.0, hi = lmax;
    const double want = static_cast<double>(k) + 0.5;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count(mid) >= want)
        hi = mid;
      else
        lo = mid;
    }
    res.cutoff = hi;
    const Matrix f = apply(chebyshev_step(res.cutoff, lmax, chebyshev_order), l, rs);
    Eigen::JacobiSVD<Matrix> svd(f, Eigen::ComputeThinU);
    u = svd.matrixU().leftCols(k);
  }
  res.embedding = row_normalize(u, res.zero_rows);
  Rng km = rng.split(2);
  res.labels = kmeans(res.embedding, k, km).labels;
  return res;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  require(a.size() == b.size(), "label vectors differ in length");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> ra, rb;
  for (size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sij = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, v] : table) sij += c2(v);
  for (const auto& [key, v] : ra) sa += c2(v);
  for (const auto& [key, v] : rb) sb += c2(v);
  const double expected = sa * sb / c2(n);
  const double maxv = 0.5 * (sa + sb);
  if (maxv == expected) return 1.0;
  return (sij - expected) / (maxv - expected);
}

Graph stochastic_block_model(const std::vector<Index>& sizes, double p_in, double p_out, Rng& rng) {
  require(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0, "probabilities must lie in [0, 1]");
  std::vector<Index> block;
  for (size_t b = 0; b < sizes.size(); ++b)
    for (Index i = 0; i < sizes[b]; ++i) block.push_back(static_cast<Index>(b));
  const Index n = static_cast<Index>(block.size());
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.bernoulli(block[i] == block[j] ? p_in : p_out)) edges.push_back({i, j, 1.0});
  return Graph::from_edge_list(edges, false, n);
}

}  // namespace graphfilt
