#include "graphfilt/regularized.hpp"

#include "graphfilt/rational_filter.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace graphfilt {

namespace {

SparseMatrix laplacian_matrix(const Graph& g) {
  require(!g.directed(), "graph difference operators need an undirected graph");
  const SparseMatrix& a = g.adjacency();
  SparseMatrix l = -a;
  const Vector deg = a * Vector::Ones(a.cols());
  for (Index i = 0; i < deg.size(); ++i) l.coeffRef(i, i) += deg[i];
  l.makeCompressed();
  return l;
}

double binomial(Index n, Index k) {
  double r = 1.0;
  for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

double l1_objective(const SparseMatrix& d, const Vector& x, const Vector& y, double gamma) {
  return (x - y).squaredNorm() + gamma * (d * y).lpNorm<1>();
}

Vector spectral_smooth(const ShiftOperator& l, const Vector& x, double gamma, double eps, double beta) {
  if (l.size() > 2000) throw InvalidArgument("spectral smoothing is limited to N <= 2000");
  const SpectralBasis basis = eigendecompose(l);
  const Vector& lam = basis.real_eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  Vector resp(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    double mu = lam[i] + eps;
    if (mu < 0.0) {
      if (mu < -1e-10 * scale && std::floor(beta) != beta)
        throw NumericError("L + eps I is indefinite; a fractional power is undefined");
      if (mu >= -1e-10 * scale) mu = 0.0;
    }
    const double den = 1.0 + gamma * std::pow(mu, beta);
    if (!(den > 0.0)) throw NumericError("I + gamma (L + eps I)^beta is not positive definite");
    resp[i] = 1.0 / den;
  }
  return basis.filter(resp, x);
}

}  // namespace

SparseMatrix incidence_matrix(const Graph& g) {
  require(!g.directed(), "incidence matrix needs an undirected graph");
  const auto& edges = g.edges();
  std::vector<Triplet> t;
  t.reserve(2 * edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    const double w = std::sqrt(edges[e].weight);
    const Index lo = std::min(edges[e].src, edges[e].dst);
    const Index hi = std::max(edges[e].src, edges[e].dst);
    t.emplace_back(lo, static_cast<Index>(e), w);
    t.emplace_back(hi, static_cast<Index>(e), -w);
  }
  SparseMatrix d(g.node_count(), static_cast<Index>(edges.size()));
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

SparseMatrix graph_difference_operator(const Graph& g, Index k) {
  require(k >= 1, "difference order K must be at least 1");
  const SparseMatrix l = laplacian_matrix(g);
  SparseMatrix lp(g.node_count(), g.node_count());
  lp.setIdentity();
  for (Index i = 0; i < k / 2; ++i) lp = SparseMatrix(lp * l);
  if (k % 2 == 0) return lp;
  const SparseMatrix dt = SparseMatrix(incidence_matrix(g).transpose());
  return SparseMatrix(dt * lp);
}

Vector smooth_denoise(const ShiftOperator& l, const Vector& x, double gamma, double eps, double beta) {
  require(gamma >= 0.0, "gamma must be nonnegative");
  require(beta > 0.0, "beta must be positive");
  require(eps >= 0.0, "eps must be nonnegative");
  require(l.symmetric(), "smoothing needs a symmetric operator");
  if (x.size() != l.size()) throw InvalidArgument("signal length does not match shift operator size");
  if (gamma == 0.0) return x;
  if (std::floor(beta) == beta && beta <= 64) {
    const Index b = static_cast<Index>(beta);
    const double c0 = 1.0 + gamma * std::pow(eps, static_cast<double>(b));
    Vector den(b);
    for (Index p = 1; p <= b; ++p) den[p - 1] = gamma * binomial(b, p) * std::pow(eps, static_cast<double>(b - p)) / c0;
    try {
      return apply(RationalFilter(Vector::Constant(1, 1.0 / c0), den), l, x).y;
    } catch (const NumericError&) {
      // Not certified positive definite on the Gershgorin interval; use the spectrum.
    }
  }
  return spectral_smooth(l, x, gamma, eps, beta);
}

Vector tv2_directed_denoise(const ShiftOperator& s, const Vector& x, double gamma) {
  require(gamma >= 0.0, "gamma must be nonnegative");
  if (x.size() != s.size()) throw InvalidArgument("signal length does not match shift operator size");
  if (gamma == 0.0) return x;
  const double rho = spectral_radius(s);
  const Index n = s.size();
  Eigen::SparseMatrix<double> shat = s.matrix();
  if (rho > 0.0) shat /= rho;
  Eigen::SparseMatrix<double> eye(n, n);
  eye.setIdentity();
  const Eigen::SparseMatrix<double> diff = eye - shat;
  const Eigen::SparseMatrix<double> m = eye + gamma * Eigen::SparseMatrix<double>(diff.transpose() * diff);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw NumericError("factorization of the directed smoothing operator failed");
  Vector y = ldlt.solve(x);
  if (!y.allFinite()) throw NumericError("directed smoothing produced non-finite output");
  return y;
}

AdmmResult l1_denoise(const SparseMatrix& d, const Vector& x, double gamma, const AdmmOptions& opts) {
  require(gamma >= 0.0, "gamma must be nonnegative");
  require(d.cols() == x.size(), "difference operator does not match the signal length");
  require(opts.relaxation > 0.0 && opts.relaxation < 2.0, "relaxation must lie in (0, 2)");
  AdmmResult res;
  if (gamma == 0.0) {
    res.y = x;
    res.converged = true;
    res.objective_trace.push_back(0.0);
    return res;
  }
  const double rho = opts.rho > 0.0 ? opts.rho : gamma;
  const Index n = x.size();
  const Eigen::SparseMatrix<double> dc = d;
  Eigen::SparseMatrix<double> sys = rho * Eigen::SparseMatrix<double>(dc.transpose() * dc);
  for (Index i = 0; i < n; ++i) sys.coeffRef(i, i) += 2.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys);
  if (ldlt.info() != Eigen::Success) throw NumericError("ADMM system factorization failed");

  const double scale = std::max(1.0, x.norm());
  Vector y = x;
  Vector z = dc * y;
  Vector u = Vector::Zero(z.size());
  Vector best = y;
  double best_obj = l1_objective(d, x, y, gamma);
  for (Index it = 0; it < opts.max_iter; ++it) {
    y = ldlt.solve(2.0 * x + rho * (dc.transpose() * (z - u)));
    const Vector dy = dc * y;
    const Vector dyr = opts.relaxation * dy + (1.0 - opts.relaxation) * z;
    const Vector z_old = z;
    z = soft_threshold(dyr + u, gamma / rho);
    u += dyr - z;
    res.primal_residual = (dy - z).norm();
    res.dual_residual = rho * (dc.transpose() * (z - z_old)).norm();
    if (!y.allFinite()) throw NumericError("ADMM iterates became non-finite");
    const double obj = l1_objective(d, x, y, gamma);
    if (obj < best_obj) {
      best_obj = obj;
      best = y;
    }
    res.objective_trace.push_back(best_obj);
    res.iterations = it + 1;
    if (std::max(res.primal_residual, res.dual_residual) < opts.tol * scale) {
      res.converged = true;
      break;
    }
  }
  res.y = best;
  return res;
}

AdmmResult trend_filter(const Graph& g, const Vector& x, double gamma, Index k, const AdmmOptions& opts) {
  if (x.size() != g.node_count()) throw InvalidArgument("signal length does not match the graph");
  return l1_denoise(graph_difference_operator(g, k), x, gamma, opts);
}

AdmmResult tv1_denoise(const ShiftOperator& s, const Vector& x, double gamma, const AdmmOptions& opts) {
  if (x.size() != s.size()) throw InvalidArgument("signal length does not match shift operator size");
  SparseMatrix d(s.size(), s.size());
  d.setIdentity();
  d -= s.matrix();
  d.prune(0.0);
  return l1_denoise(d, x, gamma, opts);
}

Vector wiener_response(const Vector& signal_psd, const Vector& noise_psd) {
  require(signal_psd.size() == noise_psd.size(), "PSD lengths differ");
  Vector h(signal_psd.size());
  for (Index i = 0; i < h.size(); ++i) {
    const double a = signal_psd[i], b = noise_psd[i];
    require(a >= 0.0 && b >= 0.0 && std::isfinite(a) && std::isfinite(b), "PSD values must be finite and nonnegative");
    h[i] = a + b > 0.0 ? a / (a + b) : 0.0;
  }
  return h;
}

Vector wiener_denoise(const SpectralBasis& basis, const Vector& signal_psd, const Vector& noise_psd, const Vector& x) {
  require(basis.symmetric_source(), "Wiener filtering needs a symmetric basis");
  require(signal_psd.size() == basis.size() && x.size() == basis.size(), "PSD or signal length mismatch");
  return basis.filter(wiener_response(signal_psd, noise_psd), x);
}

}  // namespace graphfilt
