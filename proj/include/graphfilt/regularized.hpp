#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/spectral.hpp"

#include <vector>

namespace graphfilt {

/// Oriented incidence matrix (N x |E|): +sqrt(w) at the smaller endpoint, -sqrt(w) at the larger.
SparseMatrix incidence_matrix(const Graph& g);

/// Order-K difference operator applied to y in the trend filter:
/// K = 1 gives Delta^T, K = 2 gives L, K = 3 gives Delta^T L, and so on.
SparseMatrix graph_difference_operator(const Graph& g, Index k);

/// y = (I + gamma (L + eps I)^beta)^{-1} x for a symmetric positive semidefinite shift operator.
Vector smooth_denoise(const ShiftOperator& l, const Vector& x, double gamma, double eps = 0.0, double beta = 1.0);

/// y = (I + gamma (I - S)^T (I - S))^{-1} x with S scaled by its spectral radius.
Vector tv2_directed_denoise(const ShiftOperator& s, const Vector& x, double gamma);

struct AdmmOptions {
  double rho = 0.0;  ///< 0 selects rho = gamma
  double relaxation = 1.6;
  Index max_iter = 10000;
  double tol = 1e-8;
};

struct AdmmResult {
  Vector y;
  Index iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Objective of the returned estimate after each iteration.
  std::vector<double> objective_trace;
};

/// min ||x - y||^2 + gamma ||D y||_1 by over-relaxed ADMM on z = D y.
AdmmResult l1_denoise(const SparseMatrix& d, const Vector& x, double gamma, const AdmmOptions& opts = {});

/// Graph trend filtering with the order-K difference operator.
AdmmResult trend_filter(const Graph& g, const Vector& x, double gamma, Index k, const AdmmOptions& opts = {});

/// min ||x - y||^2 + gamma ||y - S y||_1.
AdmmResult tv1_denoise(const ShiftOperator& s, const Vector& x, double gamma, const AdmmOptions& opts = {});

/// Per-eigenvalue response signal_psd / (signal_psd + noise_psd), 0/0 read as 0.
Vector wiener_response(const Vector& signal_psd, const Vector& noise_psd);
Vector wiener_denoise(const SpectralBasis& basis, const Vector& signal_psd, const Vector& noise_psd, const Vector& x);

}  // namespace graphfilt
