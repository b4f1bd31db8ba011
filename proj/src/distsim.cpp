#include "graphfilt/distsim.hpp"

#include "graphfilt/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <thread>

namespace graphfilt {

namespace {

struct Link {
  Index i, j;  // i < j
};

std::vector<Link> undirected_links(const SparseMatrix& m) {
  std::vector<Link> links;
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      const Index c = it.col();
      if (c == r || it.value() == 0.0) continue;
      const Index a = std::min(r, c), b = std::max(r, c);
      links.push_back({a, b});
    }
  std::sort(links.begin(), links.end(), [](const Link& x, const Link& y) { return x.i != y.i ? x.i < y.i : x.j < y.j; });
  links.erase(std::unique(links.begin(), links.end(), [](const Link& x, const Link& y) { return x.i == y.i && x.j == y.j; }),
              links.end());
  return links;
}

// Shift operator realized on the surviving links. Laplacians get their
// diagonal recomputed from the surviving off-diagonal weights.
SparseMatrix realize(const ShiftOperator& s, const std::vector<char>& keep, const std::vector<Link>& links) {
  const SparseMatrix& m = s.matrix();
  std::vector<Triplet> t;
  const bool lap = s.kind() == GsoKind::laplacian;
  Vector diag_adjust = Vector::Zero(m.rows());
  auto kept = [&](Index a, Index b) {
    const Index lo = std::min(a, b), hi = std::max(a, b);
    const auto it = std::lower_bound(links.begin(), links.end(), Link{lo, hi},
                                     [](const Link& x, const Link& y) { return x.i != y.i ? x.i < y.i : x.j < y.j; });
    return keep[it - links.begin()] != 0;
  };
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r) continue;
      if (kept(r, it.col()))
        t.emplace_back(r, it.col(), it.value());
      else if (lap)
        diag_adjust[r] += it.value();  // off-diagonal is -w; dropping it lowers the degree by w
    }
  }
  for (Index r = 0; r < m.rows(); ++r) {
    const double d = m.coeff(r, r) + diag_adjust[r];
    if (d != 0.0) t.emplace_back(r, r, d);
  }
  SparseMatrix out(m.rows(), m.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Index off_diagonal_nonzeros(const SparseMatrix& m) {
  Index c = 0;
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      if (it.col() != r && it.value() != 0.0) ++c;
  return c;
}

std::vector<Matrix> dense_powers(const ShiftOperator& s, Index k) {
  std::vector<Matrix> p{Matrix::Identity(s.size(), s.size())};
  const Matrix d = s.dense();
  for (Index j = 1; j <= k; ++j) p.push_back(d * p.back());
  return p;
}

}  // namespace

Vector quantize(const Vector& v, double step) {
  if (step <= 0.0) return v;
  return v.unaryExpr([step](double a) { return step * std::round(a / step); });
}

SimTrace simulate_filter(const ConvFilter& f, const NetworkModel& net, const Vector& x) {
  require(net.keep_prob > 0.0 && net.keep_prob <= 1.0, "keep probability must lie in (0, 1]");
  require(net.quant_step >= 0.0, "quantizer step must be nonnegative");
  if (x.size() != net.s.size()) throw InvalidArgument("signal length does not match shift operator size");
  const std::vector<Link> links = undirected_links(net.s.matrix());
  const Rng root(net.seed);
  const bool cheb = f.basis() == PolyBasis::chebyshev;
  const Vector& c = f.taps();
  const double gamma = f.lambda_max() / 2.0;

  SimTrace trace;
  Vector y = cheb ? Vector((0.5 * c[0]) * x) : Vector(c[0] * x);
  Vector z = x, prev = x;
  for (Index k = 1; k < c.size(); ++k) {
    RoundRecord rec;
    SparseMatrix realized;
    const SparseMatrix* sk = &net.s.matrix();
    if (net.keep_prob < 1.0) {
      Rng rng = root.split(static_cast<std::uint64_t>(k));
      std::vector<char> keep(links.size());
      for (size_t e = 0; e < links.size(); ++e) keep[e] = rng.bernoulli(net.keep_prob) ? 1 : 0;
      realized = realize(net.s, keep, links);
      sk = &realized;
      for (size_t e = 0; e < links.size(); ++e)
        if (keep[e]) rec.edges.emplace_back(links[e].i, links[e].j);
    } else {
      for (const auto& l : links) rec.edges.emplace_back(l.i, l.j);
    }
    rec.messages = off_diagonal_nonzeros(*sk);
    const Vector sent = quantize(z, net.quant_step);
    if (!cheb) {
      z = *sk * sent;
      y += c[k] * z;
    } else if (k == 1) {
      z = (*sk * sent) / gamma - x;
      y += c[1] * z;
    } else {
      Vector next = (2.0 / gamma) * (*sk * sent) - 2.0 * z - prev;
      prev = std::move(z);
      z = std::move(next);
      y += c[k] * z;
    }
    if (!z.allFinite()) throw NumericError("non-finite state in round " + std::to_string(k));
    rec.state = z;
    trace.rounds.push_back(std::move(rec));
  }
  trace.y = std::move(y);
  return trace;
}

std::vector<double> monte_carlo_deviation(const ConvFilter& f, const NetworkModel& net, const Vector& x, Index trials,
                                          unsigned threads) {
  require(trials >= 0, "trial count must be nonnegative");
  const Vector ref = apply(f, net.s, x);
  std::vector<double> out(static_cast<size_t>(trials));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<Index>(threads, std::max<Index>(trials, 1)));
  const Rng seeds(net.seed);
  auto work = [&](unsigned w) {
    for (Index t = w; t < trials; t += threads) {
      NetworkModel run = net;
      run.seed = seeds.split(static_cast<std::uint64_t>(t)).next();
      out[t] = (simulate_filter(f, run, x).y - ref).squaredNorm();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& th : pool) th.join();
  return out;
}

double link_loss_bound(const ConvFilter& f, const ShiftOperator& s, double keep_prob, double x_norm) {
  require(keep_prob > 0.0 && keep_prob <= 1.0, "keep probability must lie in (0, 1]");
  const SpectralBasis basis = eigendecompose(s);
  require(basis.is_real(), "link-loss bound needs a real spectrum");
  const Vector& lam = basis.real_eigenvalues();
  const double c = lipschitz_constant(f, lam.minCoeff(), lam.maxCoeff());
  double alpha = 2.0;
  if (s.kind() != GsoKind::laplacian) {
    alpha = 0.0;
    const SparseMatrix& m = s.matrix();
    for (Index r = 0; r < m.outerSize(); ++r) {
      double deg = 0.0;
      for (SparseMatrix::InnerIterator it(m, r); it; ++it)
        if (it.col() != r && it.value() != 0.0) deg += 1.0;
      alpha = std::max(alpha, deg);
    }
  }
  return alpha * static_cast<double>(s.size()) * c * c * (1.0 - keep_prob) * x_norm * x_norm;
}

Matrix quantization_mse_matrix(const ShiftOperator& s, Index k, double step) {
  require(k >= 0, "order must be nonnegative");
  require(step >= 0.0, "quantizer step must be nonnegative");
  const auto p = dense_powers(s, k);
  Matrix gram = Matrix::Zero(k + 1, k + 1);
  for (Index a = 1; a <= k; ++a)
    for (Index b = a; b <= k; ++b) gram(a, b) = gram(b, a) = p[a].cwiseProduct(p[b]).sum();
  Matrix g = Matrix::Zero(k + 1, k + 1);
  for (Index a = 1; a <= k; ++a)
    for (Index b = 1; b <= k; ++b)
      for (Index kappa = 0; kappa < std::min(a, b); ++kappa) g(a, b) += gram(a - kappa, b - kappa);
  return (step * step / 12.0) * g;
}

double quantization_mse(const ConvFilter& f, const ShiftOperator& s, double step) {
  const ConvFilter m = f.to_monomial();
  const Vector& h = m.taps();
  return h.dot(quantization_mse_matrix(s, m.order(), step) * h);
}

double quantization_deviation_bound(const ConvFilter& f, const ShiftOperator& s, double step) {
  const ConvFilter m = f.to_monomial();
  const Vector& h = m.taps();
  const Index k = m.order();
  const auto p = dense_powers(s, k);
  double total = 0.0;
  for (Index kappa = 0; kappa < k; ++kappa) {
    Matrix t = Matrix::Zero(s.size(), s.size());
    for (Index j = kappa + 1; j <= k; ++j) t += h[j] * p[j - kappa];
    total += t.jacobiSvd().singularValues()(0);
  }
  return total * 0.5 * step * std::sqrt(static_cast<double>(s.size()));
}

RobustDesign robust_quantized_design(const std::function<double(double)>& target, double lo, double hi, Index k,
                                     const ShiftOperator& s, double step, double cap, Index grid_size) {
  require(step > 0.0, "quantizer step must be positive");
  require(cap > 0.0, "MSE cap must be positive");
  require(lo < hi && grid_size >= k + 1, "need an interval and at least K+1 grid points");
  const Vector grid = Vector::LinSpaced(grid_size, lo, hi);
  Vector beta(grid_size);
  for (Index i = 0; i < grid_size; ++i) beta[i] = target(grid[i]);
  const Matrix phi = vandermonde(grid, k);
  const Matrix ata = phi.transpose() * phi;
  const Vector atb = phi.transpose() * beta;
  const Matrix g = quantization_mse_matrix(s, k, step);

  auto solve = [&](double mu) -> Vector { return (ata + mu * g).ldlt().solve(atb); };
  auto mse = [&](const Vector& h) { return h.dot(g * h); };

  RobustDesign d;
  Vector h = ConvFilter(design_ls_universal(grid, beta, k)).taps();
  if (mse(h) > cap) {
    d.constraint_active = true;
    double mu_lo = 0.0, mu_hi = 1.0;
    bool found = false;
    for (int i = 0; i < 400; ++i) {
      if (mse(solve(mu_hi)) <= cap) {
        found = true;
        break;
      }
      mu_hi *= 4.0;
      if (!std::isfinite(mu_hi)) break;
    }
    if (found) {
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (mu_lo + mu_hi);
        if (mse(solve(mid)) <= cap)
          mu_hi = mid;
        else
          mu_lo = mid;
        if (mu_hi - mu_lo <= 1e-14 * mu_hi) break;
      }
      h = solve(mu_hi);
      d.multiplier = mu_hi;
    } else {
      // Restrict to the null space of G.
      Eigen::SelfAdjointEigenSolver<Matrix> es(g);
      const double gmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      std::vector<Index> cols;
      for (Index i = 0; i < g.rows(); ++i)
        if (std::abs(es.eigenvalues()[i]) <= 1e-14 * gmax) cols.push_back(i);
      Matrix basis(g.rows(), static_cast<Index>(cols.size()));
      for (size_t i = 0; i < cols.size(); ++i) basis.col(static_cast<Index>(i)) = es.eigenvectors().col(cols[i]);
      h = cols.empty() ? Vector(Vector::Zero(k + 1))
                       : Vector(basis * (phi * basis).completeOrthogonalDecomposition().solve(beta));
      d.multiplier = std::numeric_limits<double>::infinity();
    }
  }
  d.filter = ConvFilter(h);
  d.mse_q = mse(h);
  d.ls_error = (phi * h - beta).squaredNorm();
  return d;
}

ConvFilter design_consensus(const SpectralBasis& laplacian_basis, Index order_cap) {
  require(laplacian_basis.is_real(), "consensus design needs a real Laplacian spectrum");
  const Vector& lam = laplacian_basis.real_eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const auto groups = eigenvalue_groups(lam);
  std::vector<double> nonzero;
  Index zero_mult = 0;
  for (const auto& grp : groups) {
    const double l = lam[grp.front()];
    if (std::abs(l) <= 1e-9 * scale)
      zero_mult += static_cast<Index>(grp.size());
    else
      nonzero.push_back(l);
  }
  if (zero_mult != 1)
    throw InvalidArgument("graph is not connected (eigenvalue 0 has multiplicity " + std::to_string(zero_mult) + ")");
  const Index d = static_cast<Index>(nonzero.size());
  if (d > order_cap)
    throw InvalidArgument("consensus needs order " + std::to_string(d) + " but the cap is " + std::to_string(order_cap));
  Vector taps = Vector::Zero(d + 1);
  taps[0] = 1.0;
  for (Index j = 0; j < d; ++j) {
    // multiply by (1 - lambda / lambda_j)
    for (Index p = j + 1; p >= 1; --p) taps[p] -= taps[p - 1] / nonzero[j];
  }
  return ConvFilter(taps);
}

}  // namespace graphfilt
