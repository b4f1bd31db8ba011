#include "graphfilt/conv_filter.hpp"
#include "graphfilt/rational_filter.hpp"
#include "graphfilt/regularized.hpp"
#include "graphfilt/spectral.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

using namespace graphfilt;

namespace {

Matrix sobolev_oracle(const Matrix& l, double gamma, double eps, double beta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  Vector resp(l.rows());
  for (Index i = 0; i < l.rows(); ++i)
    resp[i] = 1.0 / (1.0 + gamma * std::pow(std::max(0.0, es.eigenvalues()[i]) + eps, beta));
  return es.eigenvectors() * resp.asDiagonal() * es.eigenvectors().transpose();
}

Graph two_communities(Index half, Rng& rng) {
  std::vector<Edge> e;
  for (Index b = 0; b < 2; ++b)
    for (Index i = 0; i < half; ++i)
      for (Index j = i + 1; j < half; ++j)
        if (j == i + 1 || rng.bernoulli(0.6)) e.push_back({b * half + i, b * half + j, 1.0});
  e.push_back({half - 1, half, 0.2});
  return Graph::from_edge_list(e, false, 2 * half);
}

void check_monotone_after_five(const AdmmResult& r) {
  const auto& t = r.objective_trace;
  for (size_t i = 6; i < t.size(); ++i) CHECK(t[i] <= t[i - 1] + 1e-10 * std::max(1.0, std::abs(t[i - 1])));
}

}  // namespace

TEST_CASE("incidence matrix and difference operators") {
  Rng rng(21);
  for (int t = 0; t < 5; ++t) {
    const Graph g = oracle::random_graph(15, 0.3, rng);
    const Matrix d = incidence_matrix(g);
    const Matrix l = oracle::dense_laplacian(g);
    CHECK(d.rows() == 15);
    CHECK(d.cols() == static_cast<Index>(g.edges().size()));
    CHECK((d * d.transpose() - l).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((d.transpose() * Vector::Ones(15)).norm() <= 1e-12);

    CHECK((Matrix(graph_difference_operator(g, 1)) - d.transpose()).norm() == 0.0);
    CHECK((Matrix(graph_difference_operator(g, 2)) - l).norm() <= 1e-12);
    CHECK((Matrix(graph_difference_operator(g, 3)) - d.transpose() * l).norm() <= 1e-10);
    CHECK((Matrix(graph_difference_operator(g, 4)) - l * l).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(graph_difference_operator(path_graph(4), 0), InvalidArgument);
}

TEST_CASE("Tikhonov and Sobolev smoothing") {
  Rng rng(22);
  const Graph g = oracle::random_graph(20, 0.2, rng);
  const ShiftOperator l = gso(g, GsoKind::laplacian);
  const Vector x = rng.normal_vector(20);
  CHECK((smooth_denoise(l, x, 0.0) - x).norm() == 0.0);

  Vector den(1);
  den << 0.7;
  const Vector viaRational = apply(RationalFilter(Vector::Ones(1), den), l, x).y;
  CHECK(oracle::rel_err(smooth_denoise(l, x, 0.7), viaRational) <= 1e-9);

  const Matrix ld = l.dense();
  CHECK(oracle::rel_err(smooth_denoise(l, x, 0.7), sobolev_oracle(ld, 0.7, 0.0, 1.0) * x) <= 1e-9);
  CHECK(oracle::rel_err(smooth_denoise(l, x, 0.3, 0.5, 2.0), sobolev_oracle(ld, 0.3, 0.5, 2.0) * x) <= 1e-9);
  CHECK(oracle::rel_err(smooth_denoise(l, x, 0.3, 0.1, 1.5), sobolev_oracle(ld, 0.3, 0.1, 1.5) * x) <= 1e-9);

  const ShiftOperator kl = gso(complete_graph(8), GsoKind::laplacian);
  const Vector xk = rng.normal_vector(8);
  CHECK((smooth_denoise(kl, xk, 1e6) - Vector::Constant(8, xk.mean())).norm() <= 1e-3 * xk.norm());

  const Vector x2 = rng.normal_vector(20);
  const double a = 1.7, b = -0.4;
  CHECK(oracle::rel_err(smooth_denoise(l, a * x + b * x2, 2.0),
                        a * smooth_denoise(l, x, 2.0) + b * smooth_denoise(l, x2, 2.0)) <= 1e-9);
  for (double gamma : {0.01, 1.0, 100.0}) CHECK(smooth_denoise(l, x, gamma, 0.2, 1.5).norm() <= x.norm() + 1e-9);

  CHECK_THROWS_AS(smooth_denoise(l, x, -1.0), InvalidArgument);
  CHECK_THROWS_AS(smooth_denoise(l, x, 1.0, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("directed TV2 smoothing on a cycle matches the DFT smoother") {
  const Index n = 16;
  const ShiftOperator s = gso(cycle_graph(n), GsoKind::adjacency);
  Rng rng(23);
  const Vector x = rng.normal_vector(n);
  CHECK((tv2_directed_denoise(s, x, 0.0) - x).norm() == 0.0);
  const double gamma = 2.5;
  Vector ref = Vector::Zero(n);
  using C = std::complex<double>;
  for (Index k = 0; k < n; ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    C xk = 0.0;
    for (Index t = 0; t < n; ++t) xk += x[t] * std::polar(1.0, -w * static_cast<double>(t));
    const double g = 1.0 / (1.0 + gamma * std::norm(C(1.0) - std::polar(1.0, -w)));
    for (Index t = 0; t < n; ++t) ref[t] += (g * xk * std::polar(1.0, w * static_cast<double>(t))).real() / n;
  }
  CHECK(oracle::rel_err(tv2_directed_denoise(s, x, gamma), ref) <= 1e-10);

  const Vector c = Vector::Constant(n, 3.0);
  CHECK((tv2_directed_denoise(s, c, 50.0) - c).norm() <= 1e-10);

  const ShiftOperator sd = gso(oracle::random_graph(12, 0.3, rng, true), GsoKind::adjacency);
  const Vector xd = rng.normal_vector(12);
  const Matrix shat = sd.dense() / spectral_radius(sd);
  const Matrix diff = Matrix::Identity(12, 12) - shat;
  const Vector direct = (Matrix::Identity(12, 12) + 0.8 * diff.transpose() * diff).ldlt().solve(xd);
  CHECK(oracle::rel_err(tv2_directed_denoise(sd, xd, 0.8), direct) <= 1e-9);
}

TEST_CASE("trend filtering") {
  Rng rng(24);
  const Graph g = two_communities(6, rng);
  const Vector c = Vector::Constant(12, -1.5);
  for (Index k = 1; k <= 3; ++k) {
    const auto r = trend_filter(g, c, 5.0, k);
    CHECK((r.y - c).norm() <= 1e-6);
  }
  const Vector x = rng.normal_vector(12);
  CHECK((trend_filter(g, x, 0.0, 1).y - x).norm() <= 1e-12);

  Vector blocks(12);
  blocks << Vector::Constant(6, 1.0), Vector::Constant(6, -1.0);
  const Vector noisy = blocks + 0.1 * rng.normal_vector(12);
  for (Index k = 1; k <= 3; ++k) {
    const double gamma = 0.4;
    const auto r = trend_filter(g, noisy, gamma, k);
    CHECK(r.converged);
    const Matrix d = graph_difference_operator(g, k);
    const Vector y_star = oracle::l1_dual_solve(d, noisy, gamma);
    const double f_star = oracle::l1_objective(d, noisy, y_star, gamma);
    CHECK(oracle::l1_objective(d, noisy, r.y, gamma) - f_star <= 1e-6 * std::max(1.0, f_star));
    CHECK((r.y - y_star).norm() <= 1e-4);
    check_monotone_after_five(r);
  }

  const auto r1 = trend_filter(g, noisy, 0.4, 1);
  for (Index i = 0; i < 6; ++i) CHECK(r1.y[i] > 0.0);
  for (Index i = 6; i < 12; ++i) CHECK(r1.y[i] < 0.0);

  AdmmOptions tight;
  tight.max_iter = 2;
  const auto unconverged = trend_filter(g, noisy, 0.4, 2, tight);
  CHECK_FALSE(unconverged.converged);
  CHECK(unconverged.y.size() == 12);
}

TEST_CASE("l1 shift denoising") {
  Rng rng(25);
  for (int t = 0; t < 5; ++t) {
    const ShiftOperator s = gso(oracle::random_graph(10, 0.3, rng, t % 2 == 1), GsoKind::normalized_adjacency);
    const Vector x = rng.normal_vector(10);
    CHECK((tv1_denoise(s, x, 0.0).y - x).norm() <= 1e-12);
    const double gamma = 0.5;
    const auto r = tv1_denoise(s, x, gamma);
    const Matrix d = Matrix::Identity(10, 10) - s.dense();
    const Vector y_star = oracle::l1_dual_solve(d, x, gamma);
    const double f_star = oracle::l1_objective(d, x, y_star, gamma);
    CHECK(std::abs(oracle::l1_objective(d, x, r.y, gamma) - f_star) <= 1e-6 * std::max(1.0, f_star));
    check_monotone_after_five(r);
  }
  const ShiftOperator cyc = gso(cycle_graph(9), GsoKind::adjacency);
  const Vector c = Vector::Constant(9, 2.0);
  CHECK((tv1_denoise(cyc, c, 3.0).y - c).norm() <= 1e-6);
}

TEST_CASE("Wiener filtering") {
  Rng rng(26);
  const ShiftOperator l = gso(oracle::random_graph(20, 0.2, rng), GsoKind::laplacian);
  const SpectralBasis basis = eigendecompose(l);
  const Vector x = rng.normal_vector(20);
  const Vector ones = Vector::Ones(20), zeros = Vector::Zero(20);
  CHECK((wiener_denoise(basis, ones, zeros, x) - x).norm() <= 1e-12);
  CHECK(wiener_denoise(basis, zeros, ones, x).norm() <= 1e-12);
  CHECK((wiener_denoise(basis, ones, ones, x) - 0.5 * x).norm() <= 1e-12);
  CHECK(wiener_response(zeros, zeros).norm() == 0.0);
  CHECK_THROWS_AS(wiener_response(ones, Vector::Ones(3)), InvalidArgument);
}

TEST_CASE("Wiener filter beats low-order convolutions on a stationary ensemble") {
  Rng rng(27);
  const Index n = 20;
  const ShiftOperator l = gso(oracle::random_graph(n, 0.2, rng), GsoKind::laplacian);
  const SpectralBasis basis = eigendecompose(l);
  const Vector& lam = basis.real_eigenvalues();
  const Matrix& v = basis.real_eigenvectors();
  Vector sd(n), sn = Vector::Constant(n, 0.5);
  for (Index i = 0; i < n; ++i) sd[i] = (i >= n / 3 && i < 2 * n / 3) ? 2.0 : 0.05;
  const Vector target = wiener_response(sd, sn);

  std::vector<ConvFilter> sweep;
  for (Index k = 0; k <= 3; ++k) {
    const ConvFilter fit = design_ls_universal(lam, target, k);
    sweep.push_back(fit);
    sweep.push_back(ConvFilter(0.8 * fit.taps()));
    sweep.push_back(ConvFilter(1.2 * fit.taps()));
  }
  double mse_w = 0.0;
  std::vector<double> mse_c(sweep.size(), 0.0);
  for (int t = 0; t < 500; ++t) {
    const Vector sig = v * sd.cwiseSqrt().cwiseProduct(rng.normal_vector(n));
    const Vector obs = sig + v * sn.cwiseSqrt().cwiseProduct(rng.normal_vector(n));
    mse_w += (wiener_denoise(basis, sd, sn, obs) - sig).squaredNorm();
    for (size_t f = 0; f < sweep.size(); ++f) mse_c[f] += (apply(sweep[f], l, obs) - sig).squaredNorm();
  }
  for (const double m : mse_c) CHECK(mse_w <= m);
}
