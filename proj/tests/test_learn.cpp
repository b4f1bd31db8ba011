#include "graphfilt/conv_filter.hpp"
#include "graphfilt/learn.hpp"
#include "graphfilt/spectral.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

using namespace graphfilt;

namespace {

struct LmsData {
  Matrix x, y;
};

LmsData planted_stream(const ShiftOperator& s, const Vector& h, Index t, Rng& rng) {
  LmsData d{rng.normal_matrix(s.size(), t), Matrix(s.size(), t)};
  for (Index c = 0; c < t; ++c) d.y.col(c) = apply(ConvFilter(h), s, Vector(d.x.col(c)));
  return d;
}

double max_tap_error(const Matrix& taps, const Vector& h) {
  return (taps.colwise() - h).colwise().norm().maxCoeff();
}

// Visits every trainable scalar of a model with a callback receiving a reference to it.
template <class F>
void for_each_param(GnnModel& m, F f) {
  for (auto& layer : m.layers)
    for (auto& h : layer.h)
      for (Index i = 0; i < h.size(); ++i) f(h.data()[i]);
  for (Index i = 0; i < m.theta.size(); ++i) f(m.theta.data()[i]);
}

std::vector<double> flat_gradient(const GnnGradient& g) {
  std::vector<double> out;
  for (const auto& layer : g.h)
    for (const auto& h : layer)
      for (Index i = 0; i < h.size(); ++i) out.push_back(h.data()[i]);
  for (Index i = 0; i < g.theta.size(); ++i) out.push_back(g.theta.data()[i]);
  return out;
}

double gradient_check(GnnModel model, const ShiftOperator& s, const std::vector<GnnSample>& data, GnnLoss loss) {
  GnnGradient g;
  gnn_loss(model, s, data, loss, &g);
  const std::vector<double> analytic = flat_gradient(g);
  std::vector<double> numeric;
  const double eps = 1e-6;
  GnnModel probe = model;
  for_each_param(probe, [&](double& p) {
    const double keep = p;
    p = keep + eps;
    const double up = gnn_loss(probe, s, data, loss);
    p = keep - eps;
    const double down = gnn_loss(probe, s, data, loss);
    p = keep;
    numeric.push_back((up - down) / (2.0 * eps));
  });
  REQUIRE(numeric.size() == analytic.size());
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < numeric.size(); ++i) {
    num += (numeric[i] - analytic[i]) * (numeric[i] - analytic[i]);
    den += analytic[i] * analytic[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("diffusion LMS fixed point and planted recovery") {
  Rng rng(41);
  const Graph g = oracle::random_graph(20, 0.2, rng);
  const ShiftOperator s = gso(g, GsoKind::normalized_adjacency);
  const Vector h = rng.normal_vector(3);
  const LmsConfig cfg = default_lms_config(g, 0.05);
  for (Index i = 0; i < 20; ++i) CHECK(cfg.combination.col(i).sum() == doctest::Approx(1.0).epsilon(1e-14));

  const LmsData short_run = planted_stream(s, h, 50, rng);
  const Matrix start = h * Eigen::RowVectorXd::Ones(20);
  const LmsResult fixed = lms_diffusion(s, short_run.x, short_run.y, 2, cfg, start, h);
  CHECK(max_tap_error(fixed.taps, h) <= 1e-12);
  for (const double m : fixed.msd) CHECK(m <= 1e-24);
  const LmsResult one = lms_diffusion(s, short_run.x.leftCols(1), short_run.y.leftCols(1), 2, cfg, start);
  CHECK((one.taps - start).cwiseAbs().maxCoeff() <= 1e-14 * h.cwiseAbs().maxCoeff());

  const LmsData run = planted_stream(s, h, 5000, rng);
  const LmsResult r = lms_diffusion(s, run.x, run.y, 2, cfg, std::nullopt, h);
  CHECK(max_tap_error(r.taps, h) <= 1e-3);
  CHECK(r.msd.size() == 5000);
  CHECK(r.msd.back() < r.msd.front());

  LmsConfig lag = cfg;
  lag.time_lagged = true;
  CHECK_NOTHROW(lms_diffusion(s, run.x.leftCols(100), run.y.leftCols(100), 2, lag));

  const LmsConfig huge = default_lms_config(g, 1e3);
  CHECK_THROWS_AS(lms_diffusion(s, run.x.leftCols(200), run.y.leftCols(200), 2, huge), NumericError);

  LmsConfig bad = cfg;
  bad.combination(0, 0) += 0.1;
  CHECK_THROWS_AS(lms_diffusion(s, run.x.leftCols(5), run.y.leftCols(5), 2, bad), InvalidArgument);
}

TEST_CASE("sparse system identification") {
  Rng rng(42);
  const ShiftOperator s = gso(oracle::random_graph(20, 0.2, rng), GsoKind::normalized_adjacency);
  std::vector<Index> all(20);
  for (Index i = 0; i < 20; ++i) all[i] = i;
  const Vector h = rng.normal_vector(4);
  const Matrix x = rng.normal_vector(20);
  const Matrix y = apply(ConvFilter(h), s, Vector(x.col(0)));

  const auto exact = system_identify(s, x, y, all, 3, 0.0);
  CHECK((exact.taps - h).norm() <= 1e-8);
  for (size_t i = 1; i < exact.objective_trace.size(); ++i)
    CHECK(exact.objective_trace[i] <= exact.objective_trace[i - 1] + 1e-10 * std::max(1.0, exact.objective_trace[i - 1]));

  CHECK(system_identify(s, x, y, all, 3, 1e8).taps.norm() == 0.0);
  CHECK_THROWS_AS(system_identify(s, x, y, {}, 3, 0.1), InvalidArgument);

  int good = 0;
  for (int t = 0; t < 20; ++t) {
    const Vector ht = rng.normal_vector(3);
    const Matrix xs = rng.normal_matrix(20, 3);
    Matrix ys(20, 3);
    for (Index c = 0; c < 3; ++c) ys.col(c) = apply(ConvFilter(ht), s, Vector(xs.col(c)));
    std::vector<Index> obs;
    for (Index i = 0; i < 20; ++i)
      if (rng.bernoulli(0.8)) obs.push_back(i);
    const auto r = system_identify(s, xs, ys, obs, 6, 1e-3);
    for (size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-10 * std::max(1.0, r.objective_trace[i - 1]));
    const bool trailing = r.taps.tail(4).cwiseAbs().maxCoeff() < 1e-4;
    const bool leading = (r.taps.head(3) - ht).cwiseAbs().maxCoeff() <= 1e-2;
    good += trailing && leading;
  }
  CHECK(good == 20);

  Vector w(4);
  w << 1, 2, 3, 4;
  SysIdOptions opts;
  opts.weights = w;
  const auto weighted = system_identify(s, x, y, all, 3, 0.01, opts);
  CHECK(weighted.objective_trace.back() ==
        doctest::Approx(system_identify_objective(s, x, y, all, weighted.taps, 0.01, w)).epsilon(1e-12));
}

TEST_CASE("lifted operator and proximal map") {
  Rng rng(43);
  const ShiftOperator s = gso(oracle::random_graph(12, 0.3, rng), GsoKind::normalized_adjacency);
  const SpectralBasis basis = eigendecompose(s);
  const LiftedOperator op(basis, 3);
  const Vector x = rng.normal_vector(12), h = rng.normal_vector(4);
  const Vector spec = op.inverse() * apply(ConvFilter(h), s, x);
  CHECK(oracle::rel_err(op.apply(x * h.transpose()), spec) <= 1e-10);

  const Matrix z = rng.normal_matrix(12, 4);
  const Vector r = rng.normal_vector(12);
  CHECK(std::abs(op.apply(z).dot(r) - (z.array() * op.adjoint(r).array()).sum()) <= 1e-10 * z.norm() * r.norm());

  const Matrix v = rng.normal_matrix(12, 4);
  Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector shrunk = (svd.singularValues().array() - 0.7).max(0.0).matrix();
  const Matrix nuc = svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
  CHECK((prox_nuclear_group(v, 0.7, 0.0) - nuc).norm() <= 1e-9);
  Matrix grp = v;
  for (Index i = 0; i < 12; ++i) grp.row(i) *= std::max(0.0, 1.0 - 0.9 / v.row(i).norm());
  CHECK((prox_nuclear_group(v, 0.0, 0.9) - grp).norm() <= 1e-9);

  const Vector y = rng.normal_vector(12);
  const Vector ys = op.inverse() * y;
  for (int t = 0; t < 100; ++t) {
    const Matrix z1 = rng.normal_matrix(12, 4), z2 = rng.normal_matrix(12, 4);
    const double th = rng.uniform();
    const double lhs = lifted_objective(op, ys, th * z1 + (1 - th) * z2, 0.3, 0.2);
    const double rhs = th * lifted_objective(op, ys, z1, 0.3, 0.2) + (1 - th) * lifted_objective(op, ys, z2, 0.3, 0.2);
    CHECK(lhs <= rhs + 1e-9);
  }
}

TEST_CASE("blind deconvolution deterministic cases") {
  Rng rng(44);
  const ShiftOperator s = gso(oracle::random_graph(15, 0.3, rng), GsoKind::normalized_adjacency);
  const SpectralBasis basis = eigendecompose(s);
  const Vector y = rng.normal_vector(15);

  const LiftedSolution ls = blind_deconvolve(basis, y, 0, 0.0, 0.0);
  const Vector oracle_z = basis.real_inverse().colPivHouseholderQr().solve(basis.real_inverse() * y);
  CHECK((ls.z.col(0) - oracle_z).norm() <= 1e-6 * y.norm());

  const LiftedSolution zero = blind_deconvolve(basis, Vector::Zero(15), 3, 0.1, 0.1);
  CHECK(zero.z.norm() == 0.0);

  const LiftedSolution r = blind_deconvolve(basis, y, 3, 0.05, 0.05);
  for (size_t i = 10; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-9 * std::max(1.0, r.objective_trace[i - 1]));
  Eigen::JacobiSVD<Matrix> svd(r.z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix best = svd.singularValues()[0] * svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
  CHECK((r.x_hat * r.h_hat.transpose() - best).norm() <= 1e-9 * std::max(1.0, best.norm()));
}

TEST_CASE("graph network forward pass") {
  Rng rng(45);
  const Graph g = oracle::random_graph(12, 0.3, rng);
  const ShiftOperator s = gso(g, GsoKind::normalized_adjacency);
  GnnInitSpec spec;
  spec.features = {1, 1};
  spec.orders = {3};
  spec.activations = {Activation::identity};
  GnnModel m = gnn_init(spec);
  Vector taps(4);
  for (Index k = 0; k < 4; ++k) taps[k] = m.layers[0].h[k](0, 0);
  const Vector x = rng.normal_vector(12);
  CHECK((gnn_forward(m, s, x).output.col(0) - apply(ConvFilter(taps), s, x)).cwiseAbs().maxCoeff() <= 1e-12);

  GnnInitSpec deep;
  deep.features = {3, 4, 2};
  deep.orders = {2, 1};
  GnnModel z = gnn_init(deep);
  for (auto& layer : z.layers)
    for (auto& h : layer.h) h.setZero();
  CHECK(gnn_forward(z, s, rng.normal_matrix(12, 3)).output.norm() == 0.0);
  CHECK_THROWS_AS(gnn_forward(z, s, rng.normal_matrix(12, 2)), InvalidArgument);
  CHECK_THROWS_AS(gnn_forward(z, s, rng.normal_matrix(11, 3)), InvalidArgument);
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(46);
  const Index n = 8;
  const ShiftOperator s = gso(oracle::random_graph(n, 0.4, rng), GsoKind::normalized_adjacency);

  GnnInitSpec spec;
  spec.features = {2, 3, 2};
  spec.orders = {2, 1};
  spec.activations = {Activation::tanh, Activation::identity};
  spec.seed = 5;
  std::vector<GnnSample> reg(2);
  for (auto& smp : reg) {
    smp.x = rng.normal_matrix(n, 2);
    smp.target = rng.normal_matrix(n, 2);
  }
  CHECK(gradient_check(gnn_init(spec), s, reg, GnnLoss::mse) <= 1e-5);

  spec.readout = Readout::per_node_linear;
  spec.readout_dim = 3;
  std::vector<GnnSample> cls(2);
  for (auto& smp : cls) {
    smp.x = rng.normal_matrix(n, 2);
    for (Index i = 0; i < n; ++i) smp.labels.push_back(static_cast<int>(rng.uniform_index(3)));
    smp.mask = {0, 2, 3, 6};
  }
  CHECK(gradient_check(gnn_init(spec), s, cls, GnnLoss::cross_entropy_masked) <= 1e-5);

  spec.readout = Readout::concat_linear;
  spec.node_count = n;
  spec.readout_dim = 2;
  std::vector<GnnSample> graph_level(3);
  for (auto& smp : graph_level) {
    smp.x = rng.normal_matrix(n, 2);
    smp.target = rng.normal_matrix(1, 2);
  }
  CHECK(gradient_check(gnn_init(spec), s, graph_level, GnnLoss::mse) <= 1e-5);

  GnnInitSpec sage;
  sage.features = {2, 3};
  sage.orders = {1};
  sage.activations = {Activation::tanh};
  const GnnModel sm = gnn_preset("graphsage", sage);
  std::vector<GnnSample> sd(1);
  sd[0].x = rng.normal_matrix(n, 2);
  sd[0].target = rng.normal_matrix(n, 3);
  CHECK(gradient_check(sm, s, sd, GnnLoss::mse) <= 1e-5);
}

TEST_CASE("single linear layer training reaches the least-squares taps") {
  Rng rng(47);
  const Index n = 10;
  const ShiftOperator s = gso(oracle::random_graph(n, 0.3, rng), GsoKind::normalized_adjacency);
  const Matrix b = rng.normal_matrix(n, n);
  const NonspectralResult ls = design_nonspectral(b, s, 2);

  std::vector<GnnSample> data(n);
  for (Index i = 0; i < n; ++i) {
    data[i].x = Matrix::Identity(n, n).col(i);
    data[i].target = b.col(i);
  }
  GnnInitSpec spec;
  spec.features = {1, 1};
  spec.orders = {2};
  spec.activations = {Activation::identity};
  const GnnModel m0 = gnn_init(spec);

  Matrix gram(3, 3);
  std::vector<Matrix> pw{Matrix::Identity(n, n), s.dense(), s.dense() * s.dense()};
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) gram(a, c) = (pw[a].array() * pw[c].array()).sum();
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff();
  const double step = static_cast<double>(n * n) / (2.0 * lmax);
  const GnnTrainResult tr = gnn_train(m0, s, data, GnnLoss::mse, step, 20000);

  const double oracle_loss = ls.residual * ls.residual / static_cast<double>(n * n);
  CHECK(std::abs(tr.loss_trace.back() - oracle_loss) <= 1e-4 * std::max(1.0, oracle_loss));
  Vector learned(3);
  for (Index k = 0; k < 3; ++k) learned[k] = tr.model.layers[0].h[k](0, 0);
  CHECK((learned - ls.filter.taps()).norm() <= 1e-4 * ls.filter.taps().norm());
  CHECK(tr.loss_trace.back() < tr.loss_trace.front());

  const GnnTrainResult frozen = gnn_train(m0, s, data, GnnLoss::mse, 0.0, 5);
  for (Index k = 0; k < 3; ++k) CHECK((frozen.model.layers[0].h[k] - m0.layers[0].h[k]).norm() == 0.0);
}

TEST_CASE("training decreases the loss on a planted two-layer fixture") {
  Rng rng(49);
  const Index n = 15;
  const ShiftOperator s = gso(oracle::random_graph(n, 0.3, rng), GsoKind::normalized_adjacency);
  GnnInitSpec spec;
  spec.features = {2, 4, 1};
  spec.orders = {2, 2};
  spec.activations = {Activation::tanh, Activation::identity};
  spec.seed = 3;
  GnnInitSpec teacher_spec = spec;
  teacher_spec.seed = 4;
  const GnnModel teacher = gnn_init(teacher_spec);
  std::vector<GnnSample> data(20);
  for (auto& smp : data) {
    smp.x = rng.normal_matrix(n, 2);
    smp.target = gnn_forward(teacher, s, smp.x).output;
  }
  const GnnTrainResult tr = gnn_train(gnn_init(spec), s, data, GnnLoss::mse, 0.05, 300);
  CHECK(tr.loss_trace.back() <= 0.9 * tr.loss_trace.front());

  std::vector<GnnSample> cls(1);
  cls[0].x = rng.normal_matrix(n, 2);
  for (Index i = 0; i < n; ++i) cls[0].labels.push_back(cls[0].x(i, 0) > 0.0 ? 1 : 0);
  for (Index i = 0; i < n; i += 2) cls[0].mask.push_back(i);
  spec.features = {2, 4};
  spec.orders = {1};
  spec.activations = {Activation::tanh};
  spec.readout = Readout::per_node_linear;
  spec.readout_dim = 2;
  const GnnTrainResult tc = gnn_train(gnn_init(spec), s, cls, GnnLoss::cross_entropy_masked, 0.1, 300);
  CHECK(tc.loss_trace.back() <= 0.9 * tc.loss_trace.front());
}

TEST_CASE("architecture presets") {
  Rng rng(48);
  const Graph g = oracle::random_graph(10, 0.3, rng);
  GnnInitSpec spec;
  spec.features = {2, 3};
  spec.orders = {1};
  spec.activations = {Activation::identity};
  const Matrix x = rng.normal_matrix(10, 2);

  const GnnModel gcn = gnn_preset("gcn", spec);
  const ShiftOperator sg = preset_shift("gcn", g);
  Matrix a = oracle::dense_adjacency(g) + Matrix::Identity(10, 10);
  const Vector dinv = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  const Matrix printed = dinv.asDiagonal() * a * dinv.asDiagonal();
  CHECK((sg.dense() - printed).norm() <= 1e-12);
  CHECK(gcn.layers[0].h[0].norm() == 0.0);
  CHECK((gnn_forward(gcn, sg, x).output - printed * x * gcn.layers[0].h[1]).norm() <= 1e-12);

  GnnInitSpec sgc_spec = spec;
  sgc_spec.orders = {3};
  const GnnModel sgc = gnn_preset("sgc", sgc_spec);
  const Matrix s3 = printed * printed * printed;
  CHECK((gnn_forward(sgc, sg, x).output - s3 * x * sgc.layers[0].h[3]).norm() <= 1e-12);

  spec.activations = {Activation::tanh};
  GnnModel gin = gnn_preset("gin", spec, 0.0);
  CHECK((gin.layers[0].h[0] - gin.layers[0].h[1]).norm() == 0.0);
  const ShiftOperator sgin = preset_shift("gin", g);
  std::vector<GnnSample> data(1);
  data[0].x = x;
  data[0].target = rng.normal_matrix(10, 3);
  GnnGradient grad;
  gnn_loss(gin, sgin, data, GnnLoss::mse, &grad);
  project_gradient(gin, grad);
  CHECK(grad.h[0][0].norm() == 0.0);
  const double eps = 1e-6;
  double worst = 0.0;
  for (Index i = 0; i < gin.layers[0].h[1].size(); ++i) {
    GnnModel up = gin, down = gin;
    up.layers[0].h[1].data()[i] += eps;
    down.layers[0].h[1].data()[i] -= eps;
    up.enforce_preset();
    down.enforce_preset();
    const double fd = (gnn_loss(up, sgin, data, GnnLoss::mse) - gnn_loss(down, sgin, data, GnnLoss::mse)) / (2 * eps);
    worst = std::max(worst, std::abs(fd - grad.h[0][1].data()[i]) / std::max(1e-8, grad.h[0][1].norm()));
  }
  CHECK(worst <= 1e-5);

  const GnnTrainResult tr = gnn_train(gin, sgin, data, GnnLoss::mse, 1e-3, 5);
  CHECK((tr.model.layers[0].h[0] - tr.model.layers[0].h[1]).norm() == 0.0);
  CHECK_THROWS_AS(gnn_preset("transformer", spec), InvalidArgument);
}
