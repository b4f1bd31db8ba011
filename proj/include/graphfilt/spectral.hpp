#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/graph.hpp"

#include <complex>
#include <vector>

namespace graphfilt {

// Eigendecomposition S = V diag(lambda) V^{-1} of a shift operator.
//
// Symmetric sources carry an orthonormal real V with ascending eigenvalues.
// Non-symmetric sources with a real spectrum are kept real and sorted
// ascending; a genuinely complex spectrum is ordered by increasing distance
// from the dominant eigenvalue (see directed_frequency_order).
class SpectralBasis {
 public:
  SpectralBasis() = default;

  static SpectralBasis from_real(Matrix vectors, Vector values, Matrix inverse, bool symmetric_source);
  static SpectralBasis from_complex(CMatrix vectors, CVector values, CMatrix inverse);

  Index size() const { return values_.size(); }
  bool symmetric_source() const { return symmetric_; }
  bool is_real() const { return real_; }

  const CVector& eigenvalues() const { return values_; }
  const CMatrix& eigenvectors() const { return vectors_; }
  const CMatrix& inverse() const { return inverse_; }

  // Real views; throw unless is_real().
  const Vector& real_eigenvalues() const;
  const Matrix& real_eigenvectors() const;
  const Matrix& real_inverse() const;

  /// V diag(response) V^{-1} x for a real basis.
  Vector filter(const Vector& response, const Vector& x) const;
  Matrix filter(const Vector& response, const Matrix& x) const;
  /// Dense V diag(response) V^{-1}.
  Matrix operator_matrix(const Vector& response) const;

 private:
  bool symmetric_ = false;
  bool real_ = false;
  CVector values_;
  CMatrix vectors_;
  CMatrix inverse_;
  Vector rvalues_;
  Matrix rvectors_;
  Matrix rinverse_;
};

struct EigenOptions {
  Index nonsymmetric_cap = 2000;
  double residual_tol = 1e-8;
};

SpectralBasis eigendecompose(const ShiftOperator& s, const EigenOptions& opts = {});
SpectralBasis eigendecompose(const Matrix& s, const EigenOptions& opts = {});

/// Forward (V^{-1} x) or inverse (V x) graph Fourier transform.
CVector gft(const SpectralBasis& basis, const CVector& x, bool inverse = false);
CVector gft(const SpectralBasis& basis, const Vector& x, bool inverse = false);
Vector gft_real(const SpectralBasis& basis, const Vector& x, bool inverse = false);

/// Laplacian quadratic form x^T L x.
double tv2(const ShiftOperator& laplacian, const Vector& x);

/// ||x - A x / |lambda_max| ||_1 for an adjacency-type operator.
double tv1(const ShiftOperator& adjacency, const Vector& x);

/// Eigenvalue of largest modulus (ties: larger real part, then smaller imaginary part).
std::complex<double> dominant_eigenvalue(const CVector& values);
double spectral_radius(const ShiftOperator& s);

/// Projection onto the first K basis vectors in frequency order.
CVector bandlimit_project(const SpectralBasis& basis, const Vector& x, Index k);
Vector bandlimit_project_real(const SpectralBasis& basis, const Vector& x, Index k);

/// Indices sorted by increasing |lambda_max - lambda_i|; ties by descending Re then ascending Im.
std::vector<Index> directed_frequency_order(const SpectralBasis& basis);
std::vector<Index> directed_frequency_order(const CVector& values);

/// G x (K+1) matrix with entries lambda_g^k.
Matrix vandermonde(const Vector& lambdas, Index k);

/// Largest eigenvalue magnitude by power iteration, inflated by 1%.
double estimate_lambda_max(const ShiftOperator& s, Index steps = 100, double tol = 1e-6);

/// Groups of (numerically) equal eigenvalues, as index lists into `values`.
std::vector<std::vector<Index>> eigenvalue_groups(const Vector& values, double rel_tol = 1e-8);

}  // namespace graphfilt
