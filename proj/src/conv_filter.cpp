#include "graphfilt/conv_filter.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <sstream>

namespace graphfilt {

namespace {

template <typename Sig>
Sig shift_and_sum(const Vector& taps, const ShiftOperator& s, const Sig& x) {
  Sig y = taps[0] * x;
  Sig z = x;
  for (Index k = 1; k < taps.size(); ++k) {
    z = s.matrix() * z;
    if (!z.allFinite()) throw NumericError("non-finite intermediate signal at hop " + std::to_string(k));
    y += taps[k] * z;
  }
  return y;
}

template <typename Sig>
Sig chebyshev_recursion(const Vector& c, double lambda_max, const ShiftOperator& s, const Sig& x) {
  const double gamma = lambda_max / 2.0;
  Sig y = (0.5 * c[0]) * x;
  if (c.size() == 1) return y;
  Sig prev = x;
  Sig cur = (s.matrix() * x) / gamma - x;
  y += c[1] * cur;
  for (Index k = 2; k < c.size(); ++k) {
    Sig next = (2.0 / gamma) * (s.matrix() * cur) - 2.0 * cur - prev;
    if (!next.allFinite()) throw NumericError("non-finite intermediate signal at hop " + std::to_string(k));
    y += c[k] * next;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return y;
}

template <typename Sig>
Sig apply_any(const ConvFilter& f, const ShiftOperator& s, const Sig& x) {
  if (x.rows() != s.size())
    throw InvalidArgument("signal length " + std::to_string(x.rows()) + " does not match shift operator size " +
                          std::to_string(s.size()));
  if (f.basis() == PolyBasis::chebyshev) return chebyshev_recursion(f.taps(), f.lambda_max(), s, x);
  return shift_and_sum(f.taps(), s, x);
}

template <typename T>
T eval_response(const ConvFilter& f, T lambda) {
  const Vector& c = f.taps();
  if (f.basis() == PolyBasis::monomial) {
    T acc = c[c.size() - 1];
    for (Index k = c.size() - 2; k >= 0; --k) acc = acc * lambda + c[k];
    return acc;
  }
  const double gamma = f.lambda_max() / 2.0;
  const T u = (lambda - gamma) / gamma;
  T t0 = T(1.0), t1 = u;
  T acc = 0.5 * c[0] * t0;
  if (c.size() > 1) acc += c[1] * t1;
  for (Index k = 2; k < c.size(); ++k) {
    T t2 = 2.0 * u * t1 - t0;
    acc += c[k] * t2;
    t0 = t1;
    t1 = t2;
  }
  return acc;
}

Vector solve_scaled_ls(const Matrix& a, const Vector& b, const char* what) {
  Vector scale = a.colwise().norm().transpose();
  for (Index j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) scale[j] = 1.0;
  const Matrix as = a * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Matrix> qr(as);
  if (qr.rank() < as.cols()) throw NumericError(std::string(what) + ": rank-deficient design matrix");
  return qr.solve(b).cwiseQuotient(scale);
}

}  // namespace

ConvFilter::ConvFilter(Vector taps) : taps_(std::move(taps)) {
  require(taps_.size() >= 1, "filter needs at least one tap");
  require(taps_.allFinite(), "filter taps must be finite");
}

ConvFilter ConvFilter::chebyshev(Vector coeffs, double lambda_max) {
  require(lambda_max > 0.0 && std::isfinite(lambda_max), "Chebyshev filter needs lambda_max > 0");
  ConvFilter f(std::move(coeffs));
  f.basis_ = PolyBasis::chebyshev;
  f.lambda_max_ = lambda_max;
  return f;
}

double ConvFilter::response(double lambda) const { return eval_response(*this, lambda); }

std::complex<double> ConvFilter::response(std::complex<double> lambda) const { return eval_response(*this, lambda); }

double ConvFilter::derivative(double lambda) const {
  const Vector& c = taps_;
  if (basis_ == PolyBasis::monomial) {
    double acc = 0.0;
    for (Index k = c.size() - 1; k >= 1; --k) acc = acc * lambda + static_cast<double>(k) * c[k];
    return acc;
  }
  // T_k'(u) = k U_{k-1}(u); du/dlambda = 1/gamma.
  const double gamma = lambda_max_ / 2.0;
  const double u = (lambda - gamma) / gamma;
  double u0 = 1.0, u1 = 2.0 * u;
  double acc = 0.0;
  for (Index k = 1; k < c.size(); ++k) {
    const double uk_minus_1 = (k == 1) ? u0 : u1;
    acc += c[k] * static_cast<double>(k) * uk_minus_1;
    if (k >= 2) {
      const double u2 = 2.0 * u * u1 - u0;
      u0 = u1;
      u1 = u2;
    }
  }
  return acc / gamma;
}

ConvFilter ConvFilter::to_monomial() const {
  if (basis_ == PolyBasis::monomial) return *this;
  if (order() > 10)
    throw InvalidArgument("monomial conversion of Chebyshev filters is limited to order <= 10");
  const Index k = order();
  const double gamma = lambda_max_ / 2.0;
  // Polynomials in lambda for T_k((lambda - gamma)/gamma).
  std::vector<Vector> t(static_cast<std::size_t>(k + 1), Vector::Zero(k + 1));
  t[0][0] = 1.0;
  if (k >= 1) {
    t[1][0] = -1.0;
    t[1][1] = 1.0 / gamma;
  }
  for (Index j = 2; j <= k; ++j) {
    Vector next = Vector::Zero(k + 1);
    for (Index p = 0; p <= k; ++p) {
      next[p] += -2.0 * t[j - 1][p] - t[j - 2][p];
      if (p + 1 <= k) next[p + 1] += (2.0 / gamma) * t[j - 1][p];
    }
    t[j] = next;
  }
  Vector taps = 0.5 * taps_[0] * t[0];
  for (Index j = 1; j <= k; ++j) taps += taps_[j] * t[j];
  return ConvFilter(taps);
}

Vector apply(const ConvFilter& f, const ShiftOperator& s, const Vector& x) { return apply_any(f, s, x); }
Matrix apply(const ConvFilter& f, const ShiftOperator& s, const Matrix& x) { return apply_any(f, s, x); }

Vector frequency_response(const ConvFilter& f, const Vector& lambdas) {
  Vector out(lambdas.size());
  for (Index i = 0; i < lambdas.size(); ++i) out[i] = f.response(lambdas[i]);
  return out;
}

CVector frequency_response(const ConvFilter& f, const CVector& lambdas) {
  CVector out(lambdas.size());
  for (Index i = 0; i < lambdas.size(); ++i) out[i] = f.response(lambdas[i]);
  return out;
}

ExactMatchResult design_exact_match(const Matrix& b, const SpectralBasis& basis, Index k) {
  require(basis.is_real(), "exact operator match needs a real spectral basis");
  const Index n = basis.size();
  require(b.rows() == n && b.cols() == n, "target operator size does not match the spectral basis");
  require(k >= 0, "filter order must be nonnegative");
  const Matrix& v = basis.real_eigenvectors();
  const Matrix& vinv = basis.real_inverse();
  const Vector& lam = basis.real_eigenvalues();
  const Matrix s = v * lam.asDiagonal() * vinv;

  const double bnorm = b.norm();
  const double comm = (s * b - b * s).norm();
  if (comm > 1e-8 * std::max(1.0, s.norm()) * std::max(bnorm, 1e-300)) {
    std::ostringstream os;
    os << "target does not commute with the shift operator (||SB - BS||_F = " << comm << ")";
    throw InvalidArgument(os.str());
  }

  const Matrix bt = vinv * b * v;
  const auto groups = eigenvalue_groups(lam);
  const double tol = 1e-6 * std::max(bnorm, 1e-300);
  Vector mu(static_cast<Index>(groups.size())), beta(static_cast<Index>(groups.size()));
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    double sum = 0.0;
    for (Index i : g) sum += bt(i, i);
    const double mean = sum / static_cast<double>(g.size());
    for (Index i : g)
      for (Index j : g) {
        const double expected = (i == j) ? mean : 0.0;
        if (std::abs(bt(i, j) - expected) > tol) {
          std::ostringstream os;
          os << "equal eigenvalues carry different target responses: lambda_" << i << " = " << lam[i]
             << " (beta " << bt(i, i) << ") vs lambda_" << j << " = " << lam[j] << " (beta " << bt(j, j) << ")";
          throw InvalidArgument(os.str());
        }
      }
    mu[static_cast<Index>(gi)] = lam[g.front()];
    beta[static_cast<Index>(gi)] = mean;
  }

  ExactMatchResult res;
  const Index d = mu.size();
  res.distinct_eigenvalues = d;
  if (k < d - 1)
    res.warnings.push_back("order " + std::to_string(k) + " is below the " + std::to_string(d) +
                           " distinct eigenvalues minus one; the match is a least-squares approximation");
  else if (k < d)
    res.warnings.push_back("order " + std::to_string(k) + " < " + std::to_string(d) +
                           " distinct eigenvalues; using the minimal interpolating degree");

  const Matrix vm = vandermonde(mu, k);
  Vector scale = vm.colwise().norm().transpose();
  for (Index j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) scale[j] = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(vm * scale.cwiseInverse().asDiagonal());
  Vector h = cod.solve(beta).cwiseQuotient(scale);
  double best = (vm * h - beta).norm();
  for (int it = 0; it < 4; ++it) {
    const Vector trial = h + cod.solve(beta - vm * h).cwiseQuotient(scale);
    const double r = (vm * trial - beta).norm();
    if (!(r < best)) break;
    h = trial;
    best = r;
  }
  res.filter = ConvFilter(h);
  const Vector resp = frequency_response(res.filter, lam);
  res.relative_residual = (basis.operator_matrix(resp) - b).norm() / std::max(bnorm, 1e-300);
  return res;
}

ConvFilter design_ls_universal(const Vector& lambdas, const Vector& targets, Index k) {
  require(k >= 0, "filter order must be nonnegative");
  require(lambdas.size() == targets.size(), "grid and target lengths differ");
  require(lambdas.size() >= k + 1, "need at least K+1 grid points");
  require(targets.allFinite() && lambdas.allFinite(), "grid and targets must be finite");
  return ConvFilter(solve_scaled_ls(vandermonde(lambdas, k), targets, "universal design"));
}

ConvFilter design_ls_universal(const std::function<double(double)>& target, double lo, double hi, Index k,
                               Index grid_size) {
  require(lo < hi, "interval must satisfy lo < hi");
  require(grid_size >= k + 1 && grid_size >= 2, "grid size must be at least K+1");
  Vector grid = Vector::LinSpaced(grid_size, lo, hi);
  Vector t(grid_size);
  for (Index g = 0; g < grid_size; ++g) t[g] = target(grid[g]);
  return design_ls_universal(grid, t, k);
}

ConvFilter design_chebyshev(const std::function<double(double)>& target, double lambda_max, Index k,
                            Index quad_points) {
  require(lambda_max > 0.0, "Chebyshev design needs lambda_max > 0");
  require(k >= 0, "filter order must be nonnegative");
  require(quad_points >= 2, "need at least two quadrature points");
  const double gamma = lambda_max / 2.0;
  const double pi = std::numbers::pi;
  Vector theta = Vector::LinSpaced(quad_points, 0.0, pi);
  Vector samples(quad_points);
  for (Index j = 0; j < quad_points; ++j) {
    samples[j] = target(gamma * (std::cos(theta[j]) + 1.0));
    if (!std::isfinite(samples[j]))
      throw InvalidArgument("target response is not finite at lambda = " + std::to_string(gamma * (std::cos(theta[j]) + 1.0)));
  }
  const double h = pi / static_cast<double>(quad_points - 1);
  Vector c(k + 1);
  for (Index m = 0; m <= k; ++m) {
    double acc = 0.0;
    for (Index j = 0; j < quad_points; ++j) {
      const double w = (j == 0 || j == quad_points - 1) ? 0.5 : 1.0;
      acc += w * std::cos(static_cast<double>(m) * theta[j]) * samples[j];
    }
    c[m] = (2.0 / pi) * h * acc;
  }
  return ConvFilter::chebyshev(c, lambda_max);
}

Matrix dense_polynomial(const Vector& taps, const Matrix& s) {
  Matrix acc = Matrix::Zero(s.rows(), s.cols());
  Matrix p = Matrix::Identity(s.rows(), s.cols());
  for (Index k = 0; k < taps.size(); ++k) {
    acc += taps[k] * p;
    p = p * s;
  }
  return acc;
}

NonspectralResult design_nonspectral(const Matrix& b, const ShiftOperator& s, Index k) {
  const Index n = s.size();
  require(b.rows() == n && b.cols() == n, "target operator size does not match the shift operator");
  require(k >= 0, "filter order must be nonnegative");
  const Matrix sd = s.dense();
  Matrix theta(n * n, k + 1);
  Matrix p = Matrix::Identity(n, n);
  for (Index j = 0; j <= k; ++j) {
    theta.col(j) = Eigen::Map<const Vector>(p.data(), n * n);
    p = p * sd;
  }
  const Vector vb = Eigen::Map<const Vector>(b.data(), n * n);
  Vector scale = theta.colwise().norm().transpose();
  for (Index j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) scale[j] = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(theta * scale.cwiseInverse().asDiagonal());
  const Vector h = cod.solve(vb).cwiseQuotient(scale);
  NonspectralResult r{ConvFilter(h), (theta * h - vb).norm()};
  return r;
}

double integral_lipschitz_constant(const ConvFilter& f, double lo, double hi, Index grid_size) {
  require(lo <= hi && grid_size >= 2, "invalid interval or grid");
  double best = 0.0;
  const Vector grid = Vector::LinSpaced(grid_size, lo, hi);
  for (Index g = 0; g < grid_size; ++g) best = std::max(best, std::abs(grid[g] * f.derivative(grid[g])));
  return best;
}

double lipschitz_constant(const ConvFilter& f, double lo, double hi, Index grid_size) {
  require(lo <= hi && grid_size >= 2, "invalid interval or grid");
  double best = 0.0;
  const Vector grid = Vector::LinSpaced(grid_size, lo, hi);
  for (Index g = 0; g < grid_size; ++g) best = std::max(best, std::abs(f.derivative(grid[g])));
  return best;
}

double stability_bound(double c, double eps, Index n, double x_norm) {
  require(eps >= 0.0, "perturbation size must be nonnegative");
  return eps * (1.0 + 8.0 * std::sqrt(static_cast<double>(n))) * c * x_norm;
}

}  // namespace graphfilt
