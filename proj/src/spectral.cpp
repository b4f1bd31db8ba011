#include "graphfilt/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace graphfilt {

namespace {

constexpr double kTieTol = 1e-12;

void require_real(bool real) {
  if (!real) throw InvalidArgument("operation needs a real spectral basis");
}

template <typename T>
T permute_columns(const T& m, const std::vector<Index>& order) {
  T out(m.rows(), m.cols());
  for (std::size_t c = 0; c < order.size(); ++c) out.col(static_cast<Index>(c)) = m.col(order[c]);
  return out;
}

template <typename T>
T permute_rows_by(const T& m, const std::vector<Index>& order) {
  T out(m.rows(), m.cols());
  for (std::size_t r = 0; r < order.size(); ++r) out.row(static_cast<Index>(r)) = m.row(order[r]);
  return out;
}

}  // namespace

SpectralBasis SpectralBasis::from_real(Matrix vectors, Vector values, Matrix inverse, bool symmetric_source) {
  require(vectors.rows() == vectors.cols() && vectors.cols() == values.size() &&
              inverse.rows() == vectors.rows() && inverse.cols() == vectors.cols(),
          "inconsistent spectral basis dimensions");
  SpectralBasis b;
  b.symmetric_ = symmetric_source;
  b.real_ = true;
  b.rvalues_ = std::move(values);
  b.rvectors_ = std::move(vectors);
  b.rinverse_ = std::move(inverse);
  b.values_ = b.rvalues_.cast<std::complex<double>>();
  b.vectors_ = b.rvectors_.cast<std::complex<double>>();
  b.inverse_ = b.rinverse_.cast<std::complex<double>>();
  return b;
}

SpectralBasis SpectralBasis::from_complex(CMatrix vectors, CVector values, CMatrix inverse) {
  require(vectors.rows() == vectors.cols() && vectors.cols() == values.size() &&
              inverse.rows() == vectors.rows() && inverse.cols() == vectors.cols(),
          "inconsistent spectral basis dimensions");
  SpectralBasis b;
  b.values_ = std::move(values);
  b.vectors_ = std::move(vectors);
  b.inverse_ = std::move(inverse);
  return b;
}

const Vector& SpectralBasis::real_eigenvalues() const {
  require_real(real_);
  return rvalues_;
}
const Matrix& SpectralBasis::real_eigenvectors() const {
  require_real(real_);
  return rvectors_;
}
const Matrix& SpectralBasis::real_inverse() const {
  require_real(real_);
  return rinverse_;
}

Vector SpectralBasis::filter(const Vector& response, const Vector& x) const {
  require_real(real_);
  require(response.size() == size() && x.size() == size(), "dimension mismatch in spectral filtering");
  return rvectors_ * response.cwiseProduct(rinverse_ * x);
}

Matrix SpectralBasis::filter(const Vector& response, const Matrix& x) const {
  require_real(real_);
  require(response.size() == size() && x.rows() == size(), "dimension mismatch in spectral filtering");
  return rvectors_ * (response.asDiagonal() * (rinverse_ * x));
}

Matrix SpectralBasis::operator_matrix(const Vector& response) const {
  require_real(real_);
  require(response.size() == size(), "response length mismatch");
  return rvectors_ * response.asDiagonal() * rinverse_;
}

std::complex<double> dominant_eigenvalue(const CVector& values) {
  require(values.size() > 0, "empty spectrum");
  std::complex<double> best = values[0];
  for (Index i = 1; i < values.size(); ++i) {
    const auto& v = values[i];
    const double da = std::abs(v), db = std::abs(best);
    if (da > db + kTieTol) {
      best = v;
    } else if (std::abs(da - db) <= kTieTol) {
      if (v.real() > best.real() + kTieTol ||
          (std::abs(v.real() - best.real()) <= kTieTol && v.imag() < best.imag() - kTieTol))
        best = v;
    }
  }
  return best;
}

std::vector<Index> directed_frequency_order(const CVector& values) {
  const std::complex<double> top = dominant_eigenvalue(values);
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double da = std::abs(top - values[a]), db = std::abs(top - values[b]);
    if (std::abs(da - db) > kTieTol) return da < db;
    if (std::abs(values[a].real() - values[b].real()) > kTieTol) return values[a].real() > values[b].real();
    if (std::abs(values[a].imag() - values[b].imag()) > kTieTol) return values[a].imag() < values[b].imag();
    return false;
  });
  return order;
}

std::vector<Index> directed_frequency_order(const SpectralBasis& basis) {
  return directed_frequency_order(basis.eigenvalues());
}

SpectralBasis eigendecompose(const Matrix& s, const EigenOptions& opts) {
  require(s.rows() == s.cols(), "shift operator must be square");
  const Index n = s.rows();
  require(n >= 1, "empty shift operator");
  require(s.allFinite(), "shift operator has non-finite entries");
  const double scale = std::max(s.norm(), 1e-300);
  const bool symmetric = (s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12;

  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
    Matrix v = es.eigenvectors();
    Vector lam = es.eigenvalues();
    Matrix vt = v.transpose();
    const double resid = (s - v * lam.asDiagonal() * vt).norm();
    if (resid > opts.residual_tol * scale)
      throw NumericError("eigendecomposition residual " + std::to_string(resid) + " above tolerance");
    return SpectralBasis::from_real(std::move(v), std::move(lam), std::move(vt), true);
  }

  if (n > opts.nonsymmetric_cap)
    throw InvalidArgument("non-symmetric eigendecomposition limited to N <= " + std::to_string(opts.nonsymmetric_cap));
  Eigen::EigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
  CVector lam = es.eigenvalues();
  CMatrix v = es.eigenvectors();

  const bool real_spectrum = lam.imag().cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff()) &&
                             v.imag().cwiseAbs().maxCoeff() <= 1e-12;
  if (real_spectrum) {
    Vector rl = lam.real();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return rl[a] < rl[b]; });
    Matrix rv = permute_columns(Matrix(v.real()), order);
    Vector sl(n);
    for (Index i = 0; i < n; ++i) sl[i] = rl[order[i]];
    Eigen::FullPivLU<Matrix> lu(rv);
    if (!lu.isInvertible()) throw NumericError("shift operator is not diagonalizable (singular eigenvector matrix)");
    Matrix inv = lu.inverse();
    const double resid = (s - rv * sl.asDiagonal() * inv).norm();
    if (resid > opts.residual_tol * scale)
      throw NumericError("shift operator is not diagonalizable within tolerance (residual " + std::to_string(resid) + ")");
    return SpectralBasis::from_real(std::move(rv), std::move(sl), std::move(inv), false);
  }

  const std::vector<Index> order = directed_frequency_order(lam);
  CMatrix sv = permute_columns(v, order);
  CVector sl(n);
  for (Index i = 0; i < n; ++i) sl[i] = lam[order[i]];
  Eigen::FullPivLU<CMatrix> lu(sv);
  if (!lu.isInvertible()) throw NumericError("shift operator is not diagonalizable (singular eigenvector matrix)");
  CMatrix inv = lu.inverse();
  const double resid = (s.cast<std::complex<double>>() - sv * sl.asDiagonal() * inv).norm();
  if (resid > opts.residual_tol * scale)
    throw NumericError("shift operator is not diagonalizable within tolerance (residual " + std::to_string(resid) + ")");
  return SpectralBasis::from_complex(std::move(sv), std::move(sl), std::move(inv));
}

SpectralBasis eigendecompose(const ShiftOperator& s, const EigenOptions& opts) {
  if (!s.symmetric() && s.size() > opts.nonsymmetric_cap)
    throw InvalidArgument("non-symmetric eigendecomposition limited to N <= " + std::to_string(opts.nonsymmetric_cap));
  return eigendecompose(s.dense(), opts);
}

CVector gft(const SpectralBasis& basis, const CVector& x, bool inverse) {
  if (x.size() != basis.size()) throw InvalidArgument("signal length does not match spectral basis");
  return inverse ? CVector(basis.eigenvectors() * x) : CVector(basis.inverse() * x);
}

CVector gft(const SpectralBasis& basis, const Vector& x, bool inverse) {
  return gft(basis, CVector(x.cast<std::complex<double>>()), inverse);
}

Vector gft_real(const SpectralBasis& basis, const Vector& x, bool inverse) {
  if (x.size() != basis.size()) throw InvalidArgument("signal length does not match spectral basis");
  return inverse ? Vector(basis.real_eigenvectors() * x) : Vector(basis.real_inverse() * x);
}

double tv2(const ShiftOperator& laplacian, const Vector& x) {
  if (laplacian.kind() != GsoKind::laplacian) throw InvalidArgument("tv2 needs a laplacian shift operator");
  if (!laplacian.symmetric()) throw InvalidArgument("tv2 needs a symmetric laplacian");
  return std::max(0.0, x.dot(laplacian.apply(x)));
}

double spectral_radius(const ShiftOperator& s) {
  const Matrix d = s.dense();
  if (s.symmetric()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::EigenSolver<Matrix> es(d, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double tv1(const ShiftOperator& adjacency, const Vector& x) {
  if (adjacency.kind() != GsoKind::adjacency && adjacency.kind() != GsoKind::normalized_adjacency &&
      adjacency.kind() != GsoKind::custom)
    throw InvalidArgument("tv1 needs an adjacency-type shift operator");
  const double rho = spectral_radius(adjacency);
  if (!(rho > 0.0)) throw InvalidArgument("tv1 undefined for a nilpotent or zero shift operator (lambda_max = 0)");
  return (x - adjacency.apply(x) / rho).lpNorm<1>();
}

CVector bandlimit_project(const SpectralBasis& basis, const Vector& x, Index k) {
  if (k < 1 || k > basis.size()) throw InvalidArgument("bandwidth K must lie in [1, N]");
  if (x.size() != basis.size()) throw InvalidArgument("signal length does not match spectral basis");
  const CVector xt = basis.inverse().topRows(k) * x.cast<std::complex<double>>();
  return basis.eigenvectors().leftCols(k) * xt;
}

Vector bandlimit_project_real(const SpectralBasis& basis, const Vector& x, Index k) {
  if (k < 1 || k > basis.size()) throw InvalidArgument("bandwidth K must lie in [1, N]");
  if (x.size() != basis.size()) throw InvalidArgument("signal length does not match spectral basis");
  const Vector xt = basis.real_inverse().topRows(k) * x;
  return basis.real_eigenvectors().leftCols(k) * xt;
}

Matrix vandermonde(const Vector& lambdas, Index k) {
  require(k >= 0, "polynomial order must be nonnegative");
  Matrix v(lambdas.size(), k + 1);
  for (Index g = 0; g < lambdas.size(); ++g) {
    double p = 1.0;
    for (Index j = 0; j <= k; ++j) {
      v(g, j) = p;
      p *= lambdas[g];
    }
  }
  return v;
}

double estimate_lambda_max(const ShiftOperator& s, Index steps, double tol) {
  const Index n = s.size();
  require(n >= 1, "empty shift operator");
  // Deterministic, non-degenerate start vector.
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.37 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();
  double est = 0.0;
  for (Index it = 0; it < steps; ++it) {
    const Vector w = s.apply(v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (it > 0 && std::abs(next - est) <= tol * next) {
      est = next;
      break;
    }
    est = next;
  }
  return 1.01 * est;
}

std::vector<std::vector<Index>> eigenvalue_groups(const Vector& values, double rel_tol) {
  const Index n = values.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] < values[b]; });
  const double tol = rel_tol * std::max(1.0, n > 0 ? values.cwiseAbs().maxCoeff() : 1.0);
  std::vector<std::vector<Index>> groups;
  for (Index idx : order) {
    if (!groups.empty() && std::abs(values[idx] - values[groups.back().back()]) <= tol)
      groups.back().push_back(idx);
    else
      groups.push_back({idx});
  }
  return groups;
}

}  // namespace graphfilt
