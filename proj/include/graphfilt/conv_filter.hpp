#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/spectral.hpp"

#include <functional>
#include <string>
#include <vector>

namespace graphfilt {

enum class PolyBasis { monomial, chebyshev };

// Polynomial graph filter H(S) = sum_k h_k S^k.
//
// Chebyshev filters store the coefficients c_0..c_K of the shifted expansion
// c_0/2 + sum_k c_k T_k((lambda - gamma)/gamma), gamma = lambda_max/2, and are
// applied with the three-term recursion.
class ConvFilter {
 public:
  ConvFilter() : taps_(Vector::Ones(1)) {}
  explicit ConvFilter(Vector taps);
  static ConvFilter chebyshev(Vector coeffs, double lambda_max);

  const Vector& taps() const { return taps_; }
  Index order() const { return taps_.size() - 1; }
  PolyBasis basis() const { return basis_; }
  double lambda_max() const { return lambda_max_; }

  double response(double lambda) const;
  std::complex<double> response(std::complex<double> lambda) const;
  /// d/dlambda of the frequency response.
  double derivative(double lambda) const;

  /// Monomial taps; Chebyshev filters convert only up to order 10.
  ConvFilter to_monomial() const;

 private:
  Vector taps_;
  PolyBasis basis_ = PolyBasis::monomial;
  double lambda_max_ = 0.0;
};

Vector apply(const ConvFilter& f, const ShiftOperator& s, const Vector& x);
Matrix apply(const ConvFilter& f, const ShiftOperator& s, const Matrix& x);

Vector frequency_response(const ConvFilter& f, const Vector& lambdas);
CVector frequency_response(const ConvFilter& f, const CVector& lambdas);

struct ExactMatchResult {
  ConvFilter filter;
  double relative_residual = 0.0;
  Index distinct_eigenvalues = 0;
  std::vector<std::string> warnings;
};

/// Taps reproducing an operator B that shares the eigenbasis of S.
ExactMatchResult design_exact_match(const Matrix& b, const SpectralBasis& basis, Index k);

/// Least-squares fit of a target response on a uniform grid over [lo, hi].
ConvFilter design_ls_universal(const std::function<double(double)>& target, double lo, double hi, Index k,
                               Index grid_size);
ConvFilter design_ls_universal(const Vector& lambdas, const Vector& targets, Index k);

/// Truncated shifted-Chebyshev expansion on [0, lambda_max], trapezoid quadrature.
ConvFilter design_chebyshev(const std::function<double(double)>& target, double lambda_max, Index k,
                            Index quad_points = 500);

struct NonspectralResult {
  ConvFilter filter;
  double residual = 0.0;  ///< ||B - H(S)||_F
};

/// Frobenius-optimal taps for an arbitrary operator B.
NonspectralResult design_nonspectral(const Matrix& b, const ShiftOperator& s, Index k);

/// max over a uniform grid of |lambda h'(lambda)|.
double integral_lipschitz_constant(const ConvFilter& f, double lo, double hi, Index grid_size = 1000);
/// max over a uniform grid of |h'(lambda)|.
double lipschitz_constant(const ConvFilter& f, double lo, double hi, Index grid_size = 1000);

/// First-order output deviation bound eps (1 + 8 sqrt(N)) C ||x||.
double stability_bound(double c, double eps, Index n, double x_norm);

/// Dense sum_k h_k S^k for monomial taps (oracle-scale helper).
Matrix dense_polynomial(const Vector& taps, const Matrix& s);

}  // namespace graphfilt
