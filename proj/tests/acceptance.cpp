// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any line fails.
#include "graphfilt/apps.hpp"
#include "graphfilt/conv_filter.hpp"
#include "graphfilt/distsim.hpp"
#include "graphfilt/filterbank.hpp"
#include "graphfilt/learn.hpp"
#include "graphfilt/rational_filter.hpp"
#include "graphfilt/regularized.hpp"
#include "graphfilt/spectral.hpp"
#include "graphfilt/structured_filters.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

using namespace graphfilt;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("Criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void run(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

Graph random_bipartite(Index half, double p, Rng& rng) {
  std::vector<Edge> e;
  for (Index i = 0; i < half; ++i) {
    e.push_back({i, half + i, rng.uniform(0.5, 1.5)});
    if (i + 1 < half) e.push_back({i + 1, half + i, rng.uniform(0.5, 1.5)});
    for (Index j = 0; j < half; ++j)
      if (j != i && j + 1 != i && rng.bernoulli(p)) e.push_back({i, half + j, rng.uniform(0.5, 1.5)});
  }
  return Graph::from_edge_list(e, false, 2 * half);
}

SpectralKernel cos_kernel() {
  return SpectralKernel::custom([](double l) { return std::cos(std::numbers::pi * l / 4.0); }, "cos");
}
SpectralKernel sin_kernel() {
  return SpectralKernel::custom([](double l) { return std::sin(std::numbers::pi * l / 4.0); }, "sin");
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

bool monotone_after_five(const AdmmResult& r) {
  const auto& t = r.objective_trace;
  for (size_t i = 6; i < t.size(); ++i)
    if (t[i] > t[i - 1] + 1e-10 * std::max(1.0, std::abs(t[i - 1]))) return false;
  return true;
}

template <class F>
void for_each_param(GnnModel& m, F f) {
  for (auto& layer : m.layers)
    for (auto& h : layer.h)
      for (Index i = 0; i < h.size(); ++i) f(h.data()[i]);
  for (Index i = 0; i < m.theta.size(); ++i) f(m.theta.data()[i]);
}

double gradient_error(GnnModel model, const ShiftOperator& s, const std::vector<GnnSample>& data, GnnLoss loss) {
  GnnGradient g;
  gnn_loss(model, s, data, loss, &g);
  std::vector<double> analytic;
  for (const auto& layer : g.h)
    for (const auto& h : layer)
      for (Index i = 0; i < h.size(); ++i) analytic.push_back(h.data()[i]);
  for (Index i = 0; i < g.theta.size(); ++i) analytic.push_back(g.theta.data()[i]);
  std::vector<double> numeric;
  const double eps = 1e-6;
  for_each_param(model, [&](double& p) {
    const double keep = p;
    p = keep + eps;
    const double up = gnn_loss(model, s, data, loss);
    p = keep - eps;
    const double down = gnn_loss(model, s, data, loss);
    p = keep;
    numeric.push_back((up - down) / (2.0 * eps));
  });
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < numeric.size(); ++i) {
    num += (numeric[i] - analytic[i]) * (numeric[i] - analytic[i]);
    den += analytic[i] * analytic[i];
  }
  return std::sqrt(num / den);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GRAPHFILT_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();

  run(1, [] {
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const Index n = 5 + rng.uniform_index(46);
      const Graph g = oracle::random_graph(n, rng.uniform(0.05, 0.4), rng, t % 3 == 0);
      const GsoKind kind = t % 3 == 0 ? (t % 2 ? GsoKind::laplacian : GsoKind::adjacency)
                                      : (t % 2 ? GsoKind::normalized_laplacian : GsoKind::normalized_adjacency);
      const ShiftOperator s = gso(g, kind);
      const Vector h = rng.normal_vector(1 + rng.uniform_index(9)), x = rng.normal_vector(n);
      worst = std::max(worst, rel(apply(ConvFilter(h), s, x), oracle::poly(h, s.dense()) * x));
    }
    report(1, worst <= 1e-10, fmt("max relative error %.2e over 200 triples (tol 1e-10)", worst));
  });

  run(2, [] {
    Rng rng(102);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Index n = 10 + rng.uniform_index(31);
      const GsoKind kind = t % 3 == 0 ? GsoKind::laplacian : (t % 3 == 1 ? GsoKind::normalized_laplacian : GsoKind::adjacency);
      const ShiftOperator s = gso(oracle::random_graph(n, 0.2, rng), kind);
      const SpectralBasis b = eigendecompose(s);
      const ConvFilter f(rng.normal_vector(1 + rng.uniform_index(6)));
      const Vector x = rng.normal_vector(n);
      const Vector lhs = gft_real(b, apply(f, s, x));
      const Vector rhs = frequency_response(f, b.real_eigenvalues()).cwiseProduct(gft_real(b, x));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff()));
    }
    report(2, worst <= 1e-8, fmt("max spectral mismatch %.2e relative to max(1, |GFT|) over 100 trials (tol 1e-8)", worst));
  });

  run(3, [] {
    Rng rng(103);
    double shared = 0.0;
    for (int t = 0; t < 20; ++t) {
      const ShiftOperator s = gso(oracle::random_graph(20, 0.25, rng), t % 2 ? GsoKind::laplacian : GsoKind::normalized_adjacency);
      const Vector x = rng.normal_vector(20);
      const auto perm = oracle::random_perm(20, rng);
      const ShiftOperator ps = permute(s, perm);
      const Vector px = permute_signal(x, perm);
      auto dev = [&](const Vector& a, const Vector& b) { return rel(a, permute_signal(b, perm)); };

      const ConvFilter conv(rng.normal_vector(4));
      shared = std::max(shared, dev(apply(conv, ps, px), apply(conv, s, x)));
      const Vector a = 0.2 * rng.normal_vector(1).cwiseAbs();
      const RationalFilter rat(rng.normal_vector(3), t % 2 ? a : Vector(a * 0.5));
      RationalSolveOptions ro;
      ro.solver = RationalSolver::dense;
      shared = std::max(shared, dev(apply(rat, ps, px, ro).y, apply(rat, s, x, ro).y));
      VolterraFilter vf({2, 2});
      vf.set({1, 0}, rng.normal());
      vf.set({2, 1}, rng.normal());
      vf.set({1, 1}, rng.normal());
      shared = std::max(shared, dev(apply(vf, ps, px), apply(vf, s, x)));
      const MedianFilter mf({1, 2, 2});
      shared = std::max(shared, dev(apply(mf, ps, px), apply(mf, s, x)));

      GnnInitSpec spec;
      spec.features = {1, 4, 2};
      spec.orders = {2, 2};
      spec.activations = {Activation::relu, Activation::tanh};
      spec.seed = static_cast<std::uint64_t>(t);
      const GnnModel m = gnn_init(spec);
      const Matrix fo = gnn_forward(m, ps, Matrix(px)).output;
      const Matrix ref = permute_rows(gnn_forward(m, s, Matrix(x)).output, perm);
      shared = std::max(shared, (fo - ref).norm() / std::max(1e-300, ref.norm()));
    }
    const ShiftOperator s = gso(oracle::random_graph(12, 0.3, rng), GsoKind::adjacency);
    const NodeVaryingFilter nv(rng.normal_matrix(3, 12));
    const Vector x = rng.normal_vector(12);
    double counter = 0.0;
    for (int t = 0; t < 20 && counter <= 1e-3; ++t) {
      const auto perm = oracle::random_perm(12, rng);
      counter = std::max(counter, (apply(nv, permute(s, perm), permute_signal(x, perm)) -
                                   permute_signal(apply(nv, s, x), perm)).norm());
    }
    report(3, shared <= 1e-9 && counter > 1e-3,
           fmt("shared-parameter deviation %.2e (tol 1e-9); node-varying counterexample %.2e (> 1e-3)", shared,
               counter));
  });

  run(4, [] {
    Rng rng(104);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const Index n = 3 + rng.uniform_index(30);
      const Index k = rng.uniform_index(n);
      const Vector h = rng.normal_vector(k + 1), x = rng.normal_vector(n);
      const Vector y = apply(ConvFilter(h), gso(cycle_graph(n), GsoKind::adjacency), x);
      Vector c = Vector::Zero(n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= k; ++j) c[i] += h[j] * x[((i - j) % n + n) % n];
      worst = std::max(worst, (y - c).cwiseAbs().maxCoeff());
    }
    report(4, worst <= 1e-12, fmt("max deviation from circular convolution %.2e (tol 1e-12)", worst));
  });

  run(5, [] {
    Rng rng(105);
    const GsoKind kinds[] = {GsoKind::adjacency, GsoKind::laplacian, GsoKind::normalized_adjacency,
                             GsoKind::normalized_laplacian};
    auto residual = [&](Index n, GsoKind kind) {
      const ShiftOperator s = gso(oracle::random_graph(n, 0.35, rng), kind);
      const SpectralBasis b = eigendecompose(s);
      const Matrix bm = b.operator_matrix(rng.normal_vector(n));
      const auto r = design_exact_match(bm, b, n - 1);
      return (dense_polynomial(r.filter.taps(), s.dense()) - bm).norm() / bm.norm();
    };
    double worst = 0.0;
    for (Index n = 6; n <= 11; ++n)
      for (GsoKind kind : kinds)
        for (int t = 0; t < 5; ++t) worst = std::max(worst, residual(n, kind));
    std::string beyond;
    for (Index n : {13, 16}) {
      double w = 0.0;
      for (GsoKind kind : kinds) w = std::max(w, residual(n, kind));
      beyond += fmt(" N=%.0f: %.1e;", n, w);
    }
    int flagged = 0;
    const SpectralBasis b = eigendecompose(gso(oracle::random_graph(10, 0.4, rng), GsoKind::laplacian));
    Matrix off = Matrix::Zero(10, 10);
    off(0, 1) = 1.0;
    try {
      design_exact_match(off, b, 9);
    } catch (const InvalidArgument&) {
      ++flagged;
    }
    const SpectralBasis kb = eigendecompose(gso(complete_graph(5), GsoKind::laplacian));
    Vector kbeta(5);
    kbeta << 1, 2, 3, 2, 2;
    try {
      design_exact_match(kb.operator_matrix(kbeta), kb, 4);
    } catch (const InvalidArgument&) {
      ++flagged;
    }
    if (!design_exact_match(b.operator_matrix(rng.normal_vector(10)), b, 3).warnings.empty()) ++flagged;
    report(5, worst <= 1e-6 && flagged == 3,
           fmt("max residual %.2e x ||B||_F for N=6..11, K=N-1, four GSO kinds (tol 1e-6); %.0f of 3 counterexamples "
               "reported; monomial conditioning beyond:",
               worst, flagged) +
               beyond);
  });

  run(6, [] {
    Rng rng(106);
    const ShiftOperator l = gso(oracle::random_graph(40, 0.15, rng), GsoKind::normalized_laplacian);
    const SpectralBasis b = eigendecompose(l);
    const Vector target = (-b.real_eigenvalues().array()).exp().matrix();
    const Vector x = rng.normal_vector(40);
    auto sup = [&](Index k) {
      const auto f = design_chebyshev([](double t) { return std::exp(-t); }, 2.0, k);
      return (frequency_response(f, b.real_eigenvalues()) - target).cwiseAbs().maxCoeff();
    };
    const auto f10 = design_chebyshev([](double t) { return std::exp(-t); }, 2.0, 10);
    const double out = (apply(f10, l, x) - b.filter(target, x)).norm() / x.norm();
    const double e5 = sup(5), e10 = sup(10), e20 = sup(20);
    report(6, e10 <= 1e-6 && out <= 1e-6 && 10.0 * e20 <= e5,
           fmt("K=10 sup error %.2e, output error %.2e (tol 1e-6); K=5 %.2e vs K=20 %.2e", e10, out, e5, e20));
  });

  run(7, [] {
    Rng rng(107);
    double cg = 0.0, tik = 0.0;
    for (int t = 0; t < 10; ++t) {
      const ShiftOperator l = gso(oracle::random_graph(30, 0.15, rng), GsoKind::laplacian);
      const Vector x = rng.normal_vector(30);
      const RationalFilter f(rng.normal_vector(3), rng.normal_vector(2).cwiseAbs() * 0.3);
      RationalSolveOptions dense;
      dense.solver = RationalSolver::dense;
      cg = std::max(cg, rel(apply(f, l, x).y, apply(f, l, x, dense).y));
      const double gamma = rng.uniform(0.1, 5.0);
      Vector one(1), den(1);
      one << 1.0;
      den << gamma;
      tik = std::max(tik, rel(smooth_denoise(l, x, gamma), apply(RationalFilter(one, den), l, x, dense).y));
    }
    report(7, cg <= 1e-8 && tik <= 1e-9, fmt("CG vs dense %.2e (tol 1e-8); Tikhonov vs rational %.2e (tol 1e-9)", cg, tik));
  });

  run(8, [] {
    Rng rng(108);
    const Graph g = two_communities(6, rng);
    const ShiftOperator l = gso(g, GsoKind::laplacian);
    const Vector x = rng.normal_vector(12);
    const bool identity = smooth_denoise(l, x, 0.0) == x && trend_filter(g, x, 0.0, 2).y == x &&
                          tv1_denoise(gso(g, GsoKind::normalized_adjacency), x, 0.0).y == x;

    const Graph dense = oracle::random_graph(20, 0.6, rng);
    const ShiftOperator ld = gso(dense, GsoKind::laplacian);
    const double lambda2 = eigendecompose(ld).real_eigenvalues()[1];
    const Vector xd = rng.normal_vector(20);
    const double to_mean = (smooth_denoise(ld, xd, 1e6) - Vector::Constant(20, xd.mean())).norm() / xd.norm();

    Vector blocks(12);
    blocks << Vector::Constant(6, 1.0), Vector::Constant(6, -1.0);
    const Vector noisy = blocks + 0.1 * rng.normal_vector(12);
    bool monotone = true;
    double gap = 0.0;
    for (Index k = 1; k <= 3; ++k) {
      const auto r = trend_filter(g, noisy, 0.4, k);
      monotone = monotone && monotone_after_five(r);
      const Matrix d = graph_difference_operator(g, k);
      const double f_star = oracle::l1_objective(d, noisy, oracle::l1_dual_solve(d, noisy, 0.4), 0.4);
      gap = std::max(gap, (oracle::l1_objective(d, noisy, r.y, 0.4) - f_star) / std::max(1.0, f_star));
    }
    for (int t = 0; t < 3; ++t) {
      const ShiftOperator s = gso(oracle::random_graph(10, 0.3, rng, t == 1), GsoKind::normalized_adjacency);
      const Vector y = rng.normal_vector(10);
      const auto r = tv1_denoise(s, y, 0.5);
      monotone = monotone && monotone_after_five(r);
      const Matrix d = Matrix::Identity(10, 10) - s.dense();
      const double f_star = oracle::l1_objective(d, y, oracle::l1_dual_solve(d, y, 0.5), 0.5);
      gap = std::max(gap, std::abs(oracle::l1_objective(d, y, r.y, 0.5) - f_star) / std::max(1.0, f_star));
    }
    report(8, identity && lambda2 >= 1.0 && to_mean <= 1e-3 && monotone && gap <= 1e-6,
           std::string("gamma=0 identity ") + (identity ? "exact" : "inexact") +
               fmt("; lambda2 %.2f, distance to mean %.2e x ||x|| (tol 1e-3); oracle gap %.2e (tol 1e-6)", lambda2,
                   to_mean, gap) +
               (monotone ? "; objectives monotone" : "; objectives NOT monotone"));
  });

  run(9, [] {
    Rng rng(109);
    double parseval = 0.0, pr_frame = 0.0, pr_bip = 0.0, q_orth = 0.0, pr_gen = 0.0;
    for (Index m : {2, 4, 7}) parseval = std::max(parseval, check_parseval(design_tight_frame(m, 0.0, 2.0, TightFrameKind::half_cosine_translates), 0.0, 2.0, 5000));
    for (int t = 0; t < 5; ++t) {
      const SpectralBasis basis = eigendecompose(gso(oracle::random_graph(25, 0.2, rng), GsoKind::laplacian));
      const double hi = basis.real_eigenvalues().maxCoeff();
      for (auto kind : {TightFrameKind::half_cosine_translates, TightFrameKind::sgwt_warped}) {
        const FilterBank bank = design_tight_frame(5, 0.0, hi, kind);
        const Vector x = rng.normal_vector(25);
        pr_frame = std::max(pr_frame, rel(synthesize(bank, basis, analyze(bank, basis, x)), x));
      }
    }
    for (int t = 0; t < 20; ++t) {
      const TwoChannelBank b = bipartite_two_channel(random_bipartite(5 + rng.uniform_index(10), 0.3, rng), cos_kernel(), sin_kernel());
      const Vector x = rng.normal_vector(b.basis.size());
      pr_bip = std::max(pr_bip, rel(synthesize(b.bank, b.basis, analyze(b.bank, b.basis, x)), x));
    }
    for (int t = 0; t < 5; ++t) {
      const Index n = 10 + rng.uniform_index(21);
      const Graph g = oracle::random_graph(n, 0.25, rng);
      const auto perm = oracle::random_perm(n, rng);
      std::vector<int> part(n);
      for (Index i = 0; i < n; ++i) part[perm[i]] = i < n / 2 ? 0 : 1;
      const Matrix l = oracle::dense_laplacian(g);
      const TwoChannelBank b = generalized_two_channel(g, l, cos_kernel(), sin_kernel(), part);
      Matrix q = Matrix::Zero(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k)
          if (part[i] == part[k]) q(i, k) = l(i, k);
      Matrix gram = b.basis.real_eigenvectors().transpose() * q * b.basis.real_eigenvectors();
      gram.diagonal().setZero();
      q_orth = std::max(q_orth, gram.cwiseAbs().maxCoeff());
      const Vector x = rng.normal_vector(n);
      pr_gen = std::max(pr_gen, rel(synthesize(b.bank, b.basis, analyze(b.bank, b.basis, x)), x));
    }
    report(9, parseval <= 1e-12 && pr_frame <= 1e-8 && pr_bip <= 1e-6 && q_orth <= 1e-9 && pr_gen <= 1e-6,
           fmt("Parseval %.1e, frame PR %.1e, bipartite PR %.1e, ", parseval, pr_frame, pr_bip) +
               fmt("generalized Q-orthogonality %.1e / PR %.1e", q_orth, pr_gen));
  });

  run(10, [] {
    Rng rng(110);
    double kn = 0.0, general = 0.0;
    for (Index n : {3, 5, 10, 20}) {
      const ShiftOperator l = gso(complete_graph(n), GsoKind::laplacian);
      Vector h(2);
      h << 1.0, -1.0 / static_cast<double>(n);
      const Vector x = rng.normal_vector(n);
      kn = std::max(kn, (apply(ConvFilter(h), l, x) - Vector::Constant(n, x.mean())).cwiseAbs().maxCoeff());
    }
    for (int t = 0; t < 20; ++t) {
      const ShiftOperator l = gso(oracle::random_graph(8 + rng.uniform_index(12), 0.3, rng), GsoKind::laplacian);
      const ConvFilter f = design_consensus(eigendecompose(l), 40);
      const Vector x = rng.normal_vector(l.size());
      general = std::max(general, (apply(f, l, x) - Vector::Constant(l.size(), x.mean())).cwiseAbs().maxCoeff());
    }
    report(10, kn <= 1e-12 && general <= 1e-6, fmt("complete graphs %.2e (tol 1e-12); general graphs %.2e (tol 1e-6)", kn, general));
  });

  run(11, [] {
    Rng rng(111);
    const ShiftOperator s = gso(oracle::random_graph(20, 0.2, rng), GsoKind::laplacian);
    const Vector x = rng.normal_vector(20);
    Vector h(3);
    h << 1.0, -0.3, 0.02;
    const ConvFilter f(h);
    double worst = 0.0;
    for (double p : {0.9, 0.95, 0.99}) {
      const auto dev = monte_carlo_deviation(f, NetworkModel{s, p, 0.0, 1100}, x, 1000);
      const double mean = std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(dev.size());
      worst = std::max(worst, mean / link_loss_bound(f, s, p, x.norm()));
    }
    report(11, worst <= 1.1, fmt("worst empirical / bound ratio %.3f over p in {0.9, 0.95, 0.99} (tol 1.1)", worst));
  });

  run(12, [] {
    Rng rng(112);
    const Graph g = oracle::random_graph(20, 0.2, rng);
    const ShiftOperator s = gso(g, GsoKind::normalized_adjacency);
    const Vector h = rng.normal_vector(3);
    const LmsConfig cfg = default_lms_config(g, 0.05);
    auto stream = [&](Index t, Matrix& xs, Matrix& ys) {
      xs = rng.normal_matrix(20, t);
      ys.resize(20, t);
      for (Index c = 0; c < t; ++c) ys.col(c) = apply(ConvFilter(h), s, Vector(xs.col(c)));
    };
    Matrix xs, ys;
    stream(5000, xs, ys);
    const LmsResult r = lms_diffusion(s, xs, ys, 2, cfg);
    const double err = (r.taps.colwise() - h).colwise().norm().maxCoeff();
    const Matrix start = h * Eigen::RowVectorXd::Ones(20);
    const LmsResult fixed = lms_diffusion(s, xs.leftCols(50), ys.leftCols(50), 2, cfg, start);
    const double drift = (fixed.taps - start).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff();
    report(12, err <= 1e-3 && drift <= 1e-14,
           fmt("max node tap error %.2e (tol 1e-3); fixed-point drift %.1e (rounding)", err, drift));
  });

  run(13, [] {
    Rng rng(113);
    const Index n = 8;
    const ShiftOperator s = gso(oracle::random_graph(n, 0.4, rng), GsoKind::normalized_adjacency);
    GnnInitSpec spec;
    spec.features = {2, 3, 2};
    spec.orders = {2, 1};
    spec.activations = {Activation::tanh, Activation::identity};
    spec.seed = 7;
    std::vector<GnnSample> reg(2);
    for (auto& smp : reg) {
      smp.x = rng.normal_matrix(n, 2);
      smp.target = rng.normal_matrix(n, 2);
    }
    double grad = gradient_error(gnn_init(spec), s, reg, GnnLoss::mse);
    spec.readout = Readout::per_node_linear;
    spec.readout_dim = 3;
    std::vector<GnnSample> cls(2);
    for (auto& smp : cls) {
      smp.x = rng.normal_matrix(n, 2);
      for (Index i = 0; i < n; ++i) smp.labels.push_back(static_cast<int>(rng.uniform_index(3)));
      smp.mask = {0, 2, 3, 6};
    }
    grad = std::max(grad, gradient_error(gnn_init(spec), s, cls, GnnLoss::cross_entropy_masked));

    const Index m = 10;
    const ShiftOperator sl = gso(oracle::random_graph(m, 0.3, rng), GsoKind::normalized_adjacency);
    const Matrix b = rng.normal_matrix(m, m);
    const NonspectralResult ls = design_nonspectral(b, sl, 2);
    std::vector<GnnSample> data(m);
    for (Index i = 0; i < m; ++i) {
      data[i].x = Matrix::Identity(m, m).col(i);
      data[i].target = b.col(i);
    }
    GnnInitSpec lin;
    lin.features = {1, 1};
    lin.orders = {2};
    lin.activations = {Activation::identity};
    Matrix gram(3, 3);
    const std::vector<Matrix> pw{Matrix::Identity(m, m), sl.dense(), sl.dense() * sl.dense()};
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) gram(a, c) = (pw[a].array() * pw[c].array()).sum();
    const double step = static_cast<double>(m * m) / (2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff());
    const GnnTrainResult tr = gnn_train(gnn_init(lin), sl, data, GnnLoss::mse, step, 20000);
    const double oracle_loss = ls.residual * ls.residual / static_cast<double>(m * m);
    const double gap = std::abs(tr.loss_trace.back() - oracle_loss) / std::max(1.0, oracle_loss);
    report(13, grad <= 1e-5 && gap <= 1e-4,
           fmt("gradient relative error %.2e (tol 1e-5); LS objective gap %.2e (tol 1e-4)", grad, gap));
  });

  run(14, [] {
    int hits = 0;
    double mean = 0.0;
    for (int t = 0; t < 50; ++t) {
      Rng rng(1400 + t);
      const ShiftOperator s = gso(oracle::random_graph(20, 0.2, rng), GsoKind::normalized_adjacency);
      const SpectralBasis b = eigendecompose(s);
      Vector x = Vector::Zero(20);
      const auto perm = oracle::random_perm(20, rng);
      for (int i = 0; i < 3; ++i) x[perm[i]] = rng.normal();
      const Vector h = rng.normal_vector(4);
      const Vector y = apply(ConvFilter(h), s, x);
      const auto r = blind_deconvolve(b, y, 3, 0.01 * y.norm(), 0.01 * y.norm());
      const Matrix zt = x * h.transpose();
      const Matrix ze = r.x_hat * r.h_hat.transpose();
      const double c = std::abs((zt.array() * ze.array()).sum()) / std::max(1e-300, zt.norm() * ze.norm());
      mean += c / 50.0;
      hits += c >= 0.95;
    }
    const double rate = hits / 50.0;
    const std::string detail = fmt("%.0f/50 trials with cosine >= 0.95 (%.0f%%; target 80%%, floor 60%%); mean cosine %.3f",
                                   hits, 100.0 * rate, mean);
    if (rate >= 0.8) report(14, true, detail);
    else if (rate >= 0.6) report(14, true, detail + " [soft: below target, above floor]");
    else report(14, false, detail);
  });

  run(15, [] {
    std::vector<double> acc;
    const std::vector<Index> sizes{50, 50};
    std::vector<int> truth(100);
    for (Index i = 0; i < 100; ++i) truth[i] = i < 50 ? 0 : 1;
    for (int seed = 0; seed < 20; ++seed) {
      Rng rng(1500 + seed);
      const Graph g = stochastic_block_model(sizes, 0.5, 0.05, rng);
      std::vector<Index> labeled;
      bool both = false;
      while (!both) {
        const auto perm = oracle::random_perm(100, rng);
        labeled.assign(perm.begin(), perm.begin() + 10);
        both = std::any_of(labeled.begin(), labeled.end(), [](Index i) { return i < 50; }) &&
               std::any_of(labeled.begin(), labeled.end(), [](Index i) { return i >= 50; });
      }
      const SslResult r = ssl_label_propagate(make_label_problem(truth, labeled, 2), gso(g, GsoKind::normalized_adjacency));
      Index hit = 0;
      for (Index i = 0; i < 100; ++i) hit += r.predicted[i] == truth[i];
      acc.push_back(hit / 100.0);
    }
    std::vector<double> ari;
    for (int seed = 0; seed < 10; ++seed) {
      Rng rng(1600 + seed);
      const Graph g = stochastic_block_model({50, 50, 50, 50}, 0.3, 0.02, rng);
      ari.push_back(adjusted_rand_index(spectral_cluster(g, 4, ClusterMode::exact, seed).labels,
                                        spectral_cluster(g, 4, ClusterMode::filtered, seed).labels));
    }
    Rng rng(1700);
    const ShiftOperator l = gso(oracle::random_graph(40, 0.15, rng), GsoKind::laplacian);
    const SpectralBasis basis = eigendecompose(l);
    const Vector& lam = basis.real_eigenvalues();
    const DetectorSpec det{SpectralKernel::parametric("indicator", {0.5 * (lam[19] + lam[20]), 1e300}),
                           AnomalyStatistic::l2_norm, 1.0};
    const Vector smooth = bandlimit_project_real(basis, rng.normal_vector(40), 20);
    double energy_err = 0.0;
    for (int t = 0; t < 20; ++t) {
      Vector spike = Vector::Zero(40);
      spike[rng.uniform_index(40)] = 1.0 + rng.uniform();
      const double e = (basis.real_inverse() * spike).tail(20).squaredNorm();
      const double stat = anomaly_detect(det, basis, smooth + spike).statistic;
      energy_err = std::max(energy_err, std::abs(stat * stat - e) / e);
    }
    const double ssl = oracle::median(acc), clu = oracle::median(ari);
    report(15, ssl >= 0.9 && clu >= 0.9 && energy_err <= 0.05,
           fmt("SSL median accuracy %.3f (>= 0.9); clustering median ARI %.3f (>= 0.9); anomaly energy error %.2e (<= 5%%)",
               ssl, clu, energy_err));
  });

  run(16, [] {
    const fs::path dir = fs::temp_directory_path() / "graphfilt_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "g.edges") << "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n0 3\n1 4 0.5\n";
    std::ofstream(dir / "scenario.json")
        << R"({"graph_file": ")" << (dir / "g.edges").string()
        << R"(", "gso": "laplacian", "keep_prob": 0.85, "quant_step": 0.01, "seed": 5, "trials": 50,
              "filter": {"kind": "conv", "taps": [1.0, -0.3, 0.02]}})";
    const std::vector<std::string> commands{
        "graph generate --model sbm --n 60 --blocks 3 --p-in 0.4 --p-out 0.05 --seed 11",
        "sim run --scenario \"" + (dir / "scenario.json").string() + "\"",
        "filter design --kind chebyshev --target heat --K 10",
        "learn lms -i \"" + (dir / "g.edges").string() + "\" --gso normalized_adjacency --taps 1,0.5,-0.2 --T 300 --mu 0.05 --seed 3",
        "apps cluster -i \"" + (dir / "g.edges").string() + "\" --k 2 --mode filtered --seed 4"};
    bool ok = true;
    Index files = 0;
    for (size_t c = 0; c < commands.size(); ++c) {
      const fs::path a = dir / ("a" + std::to_string(c)), b = dir / ("b" + std::to_string(c));
      ok = ok && run_cli("-o \"" + a.string() + "\" " + commands[c]) == 0;
      ok = ok && run_cli("-o \"" + b.string() + "\" " + commands[c]) == 0;
      if (!ok) break;
      for (const auto& entry : fs::directory_iterator(a)) {
        ++files;
        ok = ok && read_text(entry.path()) == read_text(b / entry.path().filename());
      }
    }
    report(16, ok && files > 0, fmt("%.0f output files compared across %.0f commands", files, commands.size()) +
                                    (ok ? ", all byte-identical" : ", mismatch or failed run"));
  });

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed; %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
