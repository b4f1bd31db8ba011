#include "graphfilt/learn.hpp"

#include "graphfilt/random.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace graphfilt {

namespace {

Matrix shift_sequence(const ShiftOperator& s, const Vector& x, Index k) {
  Matrix z(x.size(), k + 1);
  z.col(0) = x;
  for (Index j = 1; j <= k; ++j) z.col(j) = s.apply(Vector(z.col(j - 1)));
  return z;
}

double soft(double a, double t) { return a > t ? a - t : (a < -t ? a + t : 0.0); }

}  // namespace

// ---------------------------------------------------------------- LMS

LmsConfig default_lms_config(const Graph& g, double mu) {
  require(mu > 0.0, "step size must be positive");
  const Index n = g.node_count();
  const auto nbrs = g.undirected_neighbors();
  LmsConfig cfg;
  cfg.step_sizes = Vector::Constant(n, mu);
  cfg.combination = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double w = 1.0 / static_cast<double>(nbrs[i].size() + 1);
    cfg.combination(i, i) = w;
    for (const Index l : nbrs[i]) cfg.combination(l, i) = w;
  }
  return cfg;
}

LmsResult lms_diffusion(const ShiftOperator& s, const Matrix& x, const Matrix& y, Index k, const LmsConfig& cfg,
                        std::optional<Matrix> initial, std::optional<Vector> h_true) {
  const Index n = s.size();
  require(k >= 0, "order must be nonnegative");
  require(x.rows() == n && y.rows() == n && x.cols() == y.cols(), "data must be N x T with matching shapes");
  require(cfg.step_sizes.size() == n && (cfg.step_sizes.array() > 0.0).all(), "step sizes must be positive, one per node");
  require(cfg.combination.rows() == n && cfg.combination.cols() == n, "combination matrix must be N x N");
  const Matrix sd = s.dense();
  for (Index i = 0; i < n; ++i) {
    double col = 0.0;
    for (Index l = 0; l < n; ++l) {
      const double c = cfg.combination(l, i);
      require(c >= 0.0, "combination weights must be nonnegative");
      if (c != 0.0 && l != i && sd(i, l) == 0.0 && sd(l, i) == 0.0)
        throw InvalidArgument("combination weight c(" + std::to_string(l) + ", " + std::to_string(i) +
                              ") is outside the closed neighborhood");
      col += c;
    }
    require(std::abs(col - 1.0) <= 1e-10, "combination weights into node " + std::to_string(i) + " must sum to 1");
  }
  if (h_true) require(h_true->size() == k + 1, "reference taps must have K+1 entries");

  Matrix h = initial ? *initial : Matrix::Zero(k + 1, n);
  require(h.rows() == k + 1 && h.cols() == n, "initial taps must be (K+1) x N");
  LmsResult res;
  Matrix z_prev = Matrix::Zero(n, k + 1);
  Matrix psi(k + 1, n);
  for (Index t = 0; t < x.cols(); ++t) {
    Matrix z;
    if (cfg.time_lagged) {
      z.resize(n, k + 1);
      z.col(0) = x.col(t);
      for (Index j = 1; j <= k; ++j) z.col(j) = s.apply(Vector(z_prev.col(j - 1)));
      z_prev = z;
    } else {
      z = shift_sequence(s, x.col(t), k);
    }
    double err = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double e = y(i, t) - z.row(i).dot(h.col(i));
      err += e * e;
      psi.col(i) = h.col(i) + cfg.step_sizes[i] * e * z.row(i).transpose();
    }
    h = psi * cfg.combination;
    for (Index i = 0; i < n; ++i) {
      const double nh = h.col(i).norm();
      if (!std::isfinite(nh) || nh > cfg.divergence_threshold)
        throw NumericError("diffusion LMS diverged at round " + std::to_string(t));
    }
    res.mse.push_back(err / static_cast<double>(n));
    if (h_true) res.msd.push_back((h.colwise() - *h_true).colwise().squaredNorm().mean());
  }
  res.taps = h;
  return res;
}

// ---------------------------------------------------------------- system identification

namespace {

struct Regression {
  Matrix phi;
  Vector y;
};

Regression build_regression(const ShiftOperator& s, const Matrix& x, const Matrix& y, const std::vector<Index>& observed,
                            Index k) {
  const Index n = s.size();
  require(x.rows() == n && y.rows() == n && x.cols() == y.cols() && x.cols() >= 1, "data shapes do not match");
  require(k >= 0, "order must be nonnegative");
  if (observed.empty()) throw InvalidArgument("no observed nodes");
  for (const Index i : observed) require(i >= 0 && i < n, "observed node index out of range");
  const Index m = x.cols(), o = static_cast<Index>(observed.size());
  Regression r{Matrix(o * m, k + 1), Vector(o * m)};
  for (Index c = 0; c < m; ++c) {
    const Matrix z = shift_sequence(s, x.col(c), k);
    for (Index j = 0; j < o; ++j) {
      r.phi.row(c * o + j) = z.row(observed[j]);
      r.y[c * o + j] = y(observed[j], c);
    }
  }
  return r;
}

Vector default_weights(Index k) { return Vector::LinSpaced(k + 1, 1.0, static_cast<double>(k + 1)); }

}  // namespace

double system_identify_objective(const ShiftOperator& s, const Matrix& x, const Matrix& y,
                                 const std::vector<Index>& observed, const Vector& h, double gamma, const Vector& weights) {
  const Regression r = build_regression(s, x, y, observed, h.size() - 1);
  return (r.phi * h - r.y).squaredNorm() + gamma * weights.cwiseProduct(h).lpNorm<1>();
}

SysIdResult system_identify(const ShiftOperator& s, const Matrix& x, const Matrix& y, const std::vector<Index>& observed,
                            Index k, double gamma, const SysIdOptions& opts) {
  require(gamma >= 0.0, "gamma must be nonnegative");
  const Regression r = build_regression(s, x, y, observed, k);
  const Vector w = opts.weights ? *opts.weights : default_weights(k);
  require(w.size() == k + 1 && (w.array() >= 0.0).all(), "weights must be nonnegative, one per tap");

  auto objective = [&](const Vector& h) {
    return (r.phi * h - r.y).squaredNorm() + gamma * w.cwiseProduct(h).lpNorm<1>();
  };
  SysIdResult res;
  const double sigma = r.phi.jacobiSvd().singularValues()(0);
  const double lip = 2.0 * sigma * sigma;
  Vector xk = Vector::Zero(k + 1);
  if (lip == 0.0) {
    res.taps = xk;
    res.converged = true;
    res.objective_trace.push_back(objective(xk));
    return res;
  }
  if (opts.warm_start) {
    const Vector ls = r.phi.completeOrthogonalDecomposition().solve(r.y);
    if (ls.allFinite() && objective(ls) < objective(xk)) xk = ls;
  }
  double fk = objective(xk);
  res.objective_trace.push_back(fk);
  Vector yk = xk;
  double t = 1.0;
  for (Index it = 0; it < opts.max_iter; ++it) {
    const Vector grad = 2.0 * r.phi.transpose() * (r.phi * yk - r.y);
    Vector z = yk - grad / lip;
    for (Index j = 0; j <= k; ++j) z[j] = soft(z[j], gamma * w[j] / lip);
    const double fz = objective(z);
    const Vector xprev = xk;
    const bool accept = fz <= fk;
    if (accept) {
      xk = z;
      fk = fz;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yk = xk + (t / tn) * (z - xk) + ((t - 1.0) / tn) * (xk - xprev);
    t = tn;
    res.objective_trace.push_back(fk);
    res.iterations = it + 1;
    if (!xk.allFinite()) throw NumericError("system identification iterates became non-finite");
    if (accept && (xk - xprev).norm() <= opts.tol * std::max(1.0, xk.norm())) {
      res.converged = true;
      break;
    }
  }
  res.taps = xk;
  return res;
}

// ---------------------------------------------------------------- blind deconvolution

LiftedOperator::LiftedOperator(const SpectralBasis& basis, Index k) {
  require(k >= 0, "order must be nonnegative");
  v_ = basis.real_eigenvectors();
  vinv_ = basis.real_inverse();
  const Vector& lam = basis.real_eigenvalues();
  powers_.resize(lam.size(), k + 1);
  powers_.col(0).setOnes();
  for (Index j = 1; j <= k; ++j) powers_.col(j) = powers_.col(j - 1).cwiseProduct(lam);
}

Vector LiftedOperator::apply(const Matrix& z) const {
  require(z.rows() == rows() && z.cols() == powers_.cols(), "lifted variable must be N x (K+1)");
  return powers_.cwiseProduct(vinv_ * z).rowwise().sum();
}

Matrix LiftedOperator::adjoint(const Vector& r) const {
  return vinv_.transpose() * (r.asDiagonal() * powers_);
}

double LiftedOperator::norm_squared() const {
  Matrix z = Matrix::Ones(rows(), powers_.cols());
  for (Index i = 0; i < z.size(); ++i) z.data()[i] += 0.01 * static_cast<double>(i % 7);
  double est = 0.0;
  for (Index it = 0; it < 500; ++it) {
    const double nz = z.norm();
    if (nz == 0.0) return 0.0;
    z /= nz;
    const Matrix next = adjoint(apply(z));
    const double e = next.norm();
    const bool done = std::abs(e - est) <= 1e-12 * std::max(1.0, e);
    est = e;
    z = next;
    if (done) break;
  }
  return est;
}

double lifted_objective(const LiftedOperator& op, const Vector& y_spec, const Matrix& z, double gamma1, double gamma2) {
  double val = (y_spec - op.apply(z)).squaredNorm();
  if (gamma1 > 0.0) val += gamma1 * z.jacobiSvd().singularValues().sum();
  if (gamma2 > 0.0) val += gamma2 * z.rowwise().norm().sum();
  return val;
}

namespace {

Matrix prox_nuclear(const Matrix& v, double t) {
  if (t <= 0.0) return v;
  Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues();
  for (Index i = 0; i < sv.size(); ++i) sv[i] = std::max(0.0, sv[i] - t);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

Matrix prox_group(const Matrix& v, double t) {
  if (t <= 0.0) return v;
  Matrix out = v;
  for (Index i = 0; i < v.rows(); ++i) {
    const double nr = v.row(i).norm();
    out.row(i) *= nr > t ? 1.0 - t / nr : 0.0;
  }
  return out;
}

}  // namespace

Matrix prox_nuclear_group(const Matrix& v, double t1, double t2, Index iters, double tol) {
  if (t1 <= 0.0) return prox_group(v, t2);
  if (t2 <= 0.0) return prox_nuclear(v, t1);
  Matrix x = v;
  Matrix p = Matrix::Zero(v.rows(), v.cols());
  Matrix q = Matrix::Zero(v.rows(), v.cols());
  for (Index it = 0; it < iters; ++it) {
    const Matrix y = prox_nuclear(x + p, t1);
    p = x + p - y;
    const Matrix xn = prox_group(y + q, t2);
    q = y + q - xn;
    const double change = (xn - x).norm();
    x = xn;
    if (change <= tol * std::max(1.0, x.norm())) break;
  }
  return x;
}

LiftedSolution blind_deconvolve(const SpectralBasis& basis, const Vector& y, Index k, double gamma1, double gamma2,
                                const BlindOptions& opts) {
  require(gamma1 >= 0.0 && gamma2 >= 0.0, "regularization weights must be nonnegative");
  require(y.size() == basis.size(), "observation length does not match the basis");
  const LiftedOperator op(basis, k);
  const Vector ys = op.inverse() * y;
  const Index n = basis.size();
  const double lip = 2.0 * op.norm_squared() * 1.01;

  LiftedSolution sol;
  Matrix xk = Matrix::Zero(n, k + 1);
  auto objective = [&](const Matrix& z) { return lifted_objective(op, ys, z, gamma1, gamma2); };
  double fk = objective(xk);
  sol.objective_trace.push_back(fk);
  if (lip > 0.0 && ys.norm() > 0.0) {
    Matrix yk = xk;
    double t = 1.0;
    for (Index it = 0; it < opts.max_iter; ++it) {
      const Matrix grad = -2.0 * op.adjoint(ys - op.apply(yk));
      const Matrix z = prox_nuclear_group(yk - grad / lip, gamma1 / lip, gamma2 / lip, opts.prox_iter, opts.prox_tol);
      const double fz = objective(z);
      const Matrix xprev = xk;
      const double fprev = fk;
      if (fz <= fk) {
        xk = z;
        fk = fz;
      }
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      yk = xk + (t / tn) * (z - xk) + ((t - 1.0) / tn) * (xk - xprev);
      t = tn;
      if (!xk.allFinite()) throw NumericError("blind deconvolution iterates became non-finite");
      sol.objective_trace.push_back(fk);
      sol.iterations = it + 1;
      if (fprev - fk <= opts.tol * std::max(1.0, fk) && (xk - xprev).norm() <= std::sqrt(opts.tol) * std::max(1.0, xk.norm()) &&
          fz <= fprev) {
        sol.converged = true;
        break;
      }
    }
  } else {
    sol.converged = true;
  }
  sol.z = xk;
  Eigen::JacobiSVD<Matrix> svd(xk, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double s0 = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  sol.x_hat = std::sqrt(s0) * svd.matrixU().col(0);
  sol.h_hat = std::sqrt(s0) * svd.matrixV().col(0);
  Index imax = 0;
  sol.h_hat.cwiseAbs().maxCoeff(&imax);
  if (sol.h_hat.size() && sol.h_hat[imax] < 0.0) {
    sol.h_hat = -sol.h_hat;
    sol.x_hat = -sol.x_hat;
  }
  return sol;
}

// ---------------------------------------------------------------- GCNN

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "identity") return Activation::identity;
  throw InvalidArgument("unknown activation '" + s + "'");
}

std::string to_string(Readout r) {
  switch (r) {
    case Readout::none:
      return "none";
    case Readout::concat_linear:
      return "concat_linear";
    case Readout::per_node_linear:
      return "per_node_linear";
  }
  return "none";
}

Readout readout_from_string(const std::string& s) {
  if (s == "none") return Readout::none;
  if (s == "concat_linear") return Readout::concat_linear;
  if (s == "per_node_linear") return Readout::per_node_linear;
  throw InvalidArgument("unknown readout '" + s + "'");
}

namespace {

const std::set<std::string>& preset_names() {
  static const std::set<std::string> names{"gcn", "sgc", "gin", "graphsage"};
  return names;
}

Matrix activate(const Matrix& u, Activation a) {
  switch (a) {
    case Activation::relu:
      return u.cwiseMax(0.0);
    case Activation::tanh:
      return u.array().tanh().matrix();
    case Activation::identity:
      return u;
  }
  return u;
}

Matrix activation_derivative(const Matrix& u, Activation a) {
  switch (a) {
    case Activation::relu:
      return (u.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - u.array().tanh().square()).matrix();
    case Activation::identity:
      return Matrix::Ones(u.rows(), u.cols());
  }
  return Matrix::Ones(u.rows(), u.cols());
}

Matrix row_normalize(const Matrix& a) {
  Matrix out = a;
  for (Index r = 0; r < a.rows(); ++r) {
    const double n = a.row(r).norm();
    if (n > 0.0) out.row(r) /= n;
  }
  return out;
}

}  // namespace

void GnnModel::enforce_preset() {
  if (preset.empty()) return;
  if (!preset_names().count(preset)) throw InvalidArgument("unknown preset '" + preset + "'");
  for (auto& layer : layers) {
    if (preset == "gcn") {
      require(layer.order() == 1, "gcn layers have K = 1");
      layer.h[0].setZero();
    } else if (preset == "sgc") {
      for (Index k = 0; k < layer.order(); ++k) layer.h[k].setZero();
    } else if (preset == "gin") {
      require(layer.order() == 1, "gin layers have K = 1");
      layer.h[0] = (1.0 + gin_eps) * layer.h[1];
    } else {
      require(layer.order() == 1, "graphsage layers have K = 1");
    }
  }
}

void project_gradient(const GnnModel& model, GnnGradient& grad) {
  if (model.preset.empty()) return;
  for (auto& g : grad.h) {
    if (model.preset == "gcn") {
      g[0].setZero();
    } else if (model.preset == "sgc") {
      for (size_t k = 0; k + 1 < g.size(); ++k) g[k].setZero();
    } else if (model.preset == "gin") {
      g[1] += (1.0 + model.gin_eps) * g[0];
      g[0].setZero();
    }
  }
}

GnnModel gnn_init(const GnnInitSpec& spec) {
  const Index layers = static_cast<Index>(spec.features.size()) - 1;
  require(layers >= 1, "a model needs at least one layer");
  require(static_cast<Index>(spec.orders.size()) == layers, "one order per layer is required");
  require(spec.activations.empty() || static_cast<Index>(spec.activations.size()) == layers,
          "one activation per layer is required");
  for (const Index f : spec.features) require(f >= 1, "feature dimensions must be positive");
  Rng rng(spec.seed);
  GnnModel m;
  for (Index l = 0; l < layers; ++l) {
    require(spec.orders[l] >= 0, "orders must be nonnegative");
    GnnLayer layer;
    layer.activation = spec.activations.empty() ? Activation::relu : spec.activations[l];
    const double sc = spec.scale / std::sqrt(static_cast<double>(spec.features[l] * (spec.orders[l] + 1)));
    for (Index k = 0; k <= spec.orders[l]; ++k) layer.h.push_back(sc * rng.normal_matrix(spec.features[l], spec.features[l + 1]));
    m.layers.push_back(std::move(layer));
  }
  m.readout = spec.readout;
  const Index fl = spec.features.back();
  if (spec.readout != Readout::none) {
    require(spec.readout_dim >= 1, "readout dimension must be positive");
    Index rows = fl;
    if (spec.readout == Readout::concat_linear) {
      require(spec.node_count >= 1, "concat readout needs the node count");
      rows = spec.node_count * fl;
    }
    m.theta = (spec.scale / std::sqrt(static_cast<double>(rows))) * rng.normal_matrix(rows, spec.readout_dim);
  }
  return m;
}

GnnModel gnn_preset(const std::string& name, GnnInitSpec spec, double gin_eps) {
  if (!preset_names().count(name)) throw InvalidArgument("unknown preset '" + name + "'");
  if (name != "sgc")
    for (auto& k : spec.orders) k = 1;
  GnnModel m = gnn_init(spec);
  m.preset = name;
  m.gin_eps = gin_eps;
  m.enforce_preset();
  return m;
}

ShiftOperator preset_shift(const std::string& name, const Graph& g) {
  if (name == "gcn" || name == "sgc") return augmented_normalized_adjacency(g);
  if (name == "gin") {
    SparseMatrix a = g.adjacency();
    for (Index r = 0; r < a.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(a, r); it; ++it) it.valueRef() = 1.0;
    return ShiftOperator::custom(a);
  }
  if (name == "graphsage") return gso(g, GsoKind::adjacency);
  throw InvalidArgument("unknown preset '" + name + "'");
}

GnnForward gnn_forward(const GnnModel& model, const ShiftOperator& s, const Matrix& x0) {
  require(!model.layers.empty(), "model has no layers");
  if (x0.rows() != s.size()) throw InvalidArgument("input has " + std::to_string(x0.rows()) + " rows, expected N");
  GnnForward f;
  f.x.push_back(x0);
  const bool sage = model.preset == "graphsage";
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const GnnLayer& layer = model.layers[l];
    const Matrix& xin = f.x.back();
    if (xin.cols() != layer.in_features())
      throw InvalidArgument("layer " + std::to_string(l) + " expects " + std::to_string(layer.in_features()) +
                            " features, got " + std::to_string(xin.cols()));
    std::vector<Matrix> z{xin};
    for (Index k = 1; k <= layer.order(); ++k) z.push_back(s.apply(z.back()));
    Matrix u = Matrix::Zero(xin.rows(), layer.out_features());
    for (Index k = 0; k <= layer.order(); ++k) u += z[k] * layer.h[k];
    if (!u.allFinite()) throw NumericError("non-finite activation input at layer " + std::to_string(l));
    Matrix a = activate(u, layer.activation);
    f.shifted.push_back(std::move(z));
    f.pre.push_back(u);
    f.x.push_back(sage ? row_normalize(a) : a);
    f.act.push_back(std::move(a));
  }
  const Matrix& xl = f.x.back();
  switch (model.readout) {
    case Readout::none:
      f.output = xl;
      break;
    case Readout::per_node_linear:
      require(model.theta.rows() == xl.cols(), "readout shape does not match the last layer");
      f.output = xl * model.theta;
      break;
    case Readout::concat_linear: {
      require(model.theta.rows() == xl.size(), "readout shape does not match N F_L");
      const Eigen::Map<const Vector> v(xl.data(), xl.size());
      f.output = v.transpose() * model.theta;
      break;
    }
  }
  return f;
}

double gnn_loss(const GnnModel& model, const ShiftOperator& s, const std::vector<GnnSample>& data, GnnLoss loss,
                GnnGradient* grad) {
  require(!data.empty(), "dataset is empty");
  if (grad) {
    grad->h.clear();
    for (const auto& layer : model.layers) {
      std::vector<Matrix> g;
      for (const auto& h : layer.h) g.push_back(Matrix::Zero(h.rows(), h.cols()));
      grad->h.push_back(std::move(g));
    }
    grad->theta = Matrix::Zero(model.theta.rows(), model.theta.cols());
  }
  const double inv_m = 1.0 / static_cast<double>(data.size());
  double total = 0.0;
  for (const auto& sample : data) {
    const GnnForward f = gnn_forward(model, s, sample.x);
    const Matrix& out = f.output;
    std::vector<Index> rows = sample.mask;
    if (rows.empty() || model.readout == Readout::concat_linear) {
      rows.resize(out.rows());
      for (Index i = 0; i < out.rows(); ++i) rows[i] = i;
    }
    Matrix d_out = Matrix::Zero(out.rows(), out.cols());
    double l = 0.0;
    if (loss == GnnLoss::mse) {
      require(sample.target.rows() == out.rows() && sample.target.cols() == out.cols(), "target shape does not match the output");
      const double cnt = static_cast<double>(rows.size() * out.cols());
      for (const Index r : rows) {
        const auto e = (out.row(r) - sample.target.row(r)).eval();
        l += e.squaredNorm() / cnt;
        d_out.row(r) = 2.0 * e / cnt;
      }
    } else {
      require(static_cast<Index>(sample.labels.size()) == out.rows(), "one label per node is required");
      const double cnt = static_cast<double>(rows.size());
      for (const Index r : rows) {
        const int y = sample.labels[r];
        require(y >= 0 && y < out.cols(), "label out of range");
        const double mx = out.row(r).maxCoeff();
        const Eigen::RowVectorXd ex = (out.row(r).array() - mx).exp().matrix();
        const double z = ex.sum();
        l += (std::log(z) + mx - out(r, y)) / cnt;
        Eigen::RowVectorXd p = ex / z;
        p[y] -= 1.0;
        d_out.row(r) = p / cnt;
      }
    }
    if (!std::isfinite(l)) throw NumericError("loss is not finite");
    total += l * inv_m;
    if (!grad) continue;

    d_out *= inv_m;
    Matrix dx;
    const Matrix& xl = f.x.back();
    switch (model.readout) {
      case Readout::none:
        dx = d_out;
        break;
      case Readout::per_node_linear:
        grad->theta += xl.transpose() * d_out;
        dx = d_out * model.theta.transpose();
        break;
      case Readout::concat_linear: {
        const Eigen::Map<const Vector> v(xl.data(), xl.size());
        grad->theta += v * d_out;
        const Vector dv = model.theta * d_out.transpose();
        dx = Eigen::Map<const Matrix>(dv.data(), xl.rows(), xl.cols());
        break;
      }
    }
    for (Index li = static_cast<Index>(model.layers.size()) - 1; li >= 0; --li) {
      const GnnLayer& layer = model.layers[li];
      if (model.preset == "graphsage") {
        const Matrix& a = f.act[li];
        for (Index r = 0; r < a.rows(); ++r) {
          const double n = a.row(r).norm();
          if (n > 0.0) {
            const Eigen::RowVectorXd xh = a.row(r) / n;
            dx.row(r) = (dx.row(r) - xh * xh.dot(dx.row(r))) / n;
          } else {
            dx.row(r).setZero();
          }
        }
      }
      const Matrix du = dx.cwiseProduct(activation_derivative(f.pre[li], layer.activation));
      for (Index k = 0; k <= layer.order(); ++k) grad->h[li][k] += f.shifted[li][k].transpose() * du;
      if (li == 0) break;
      Matrix b = du * layer.h[layer.order()].transpose();
      for (Index k = layer.order() - 1; k >= 0; --k) b = s.apply_transpose(b) + du * layer.h[k].transpose();
      dx = std::move(b);
    }
  }
  return total;
}

GnnTrainResult gnn_train(GnnModel model, const ShiftOperator& s, const std::vector<GnnSample>& data, GnnLoss loss,
                         double step, Index epochs) {
  require(step >= 0.0, "step size must be nonnegative");
  require(epochs >= 0, "epochs must be nonnegative");
  model.enforce_preset();
  GnnTrainResult res;
  GnnGradient g;
  for (Index e = 0; e < epochs; ++e) {
    const double l = gnn_loss(model, s, data, loss, &g);
    res.loss_trace.push_back(l);
    if (step == 0.0) continue;
    project_gradient(model, g);
    for (size_t li = 0; li < model.layers.size(); ++li)
      for (size_t k = 0; k < model.layers[li].h.size(); ++k) model.layers[li].h[k] -= step * g.h[li][k];
    if (model.theta.size()) model.theta -= step * g.theta;
    model.enforce_preset();
  }
  res.loss_trace.push_back(gnn_loss(model, s, data, loss));
  res.model = std::move(model);
  return res;
}

}  // namespace graphfilt
