#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/conv_filter.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/spectral.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace graphfilt {

struct NetworkModel {
  ShiftOperator s;
  double keep_prob = 1.0;   ///< per-round, per-edge survival probability p
  double quant_step = 0.0;  ///< mid-tread quantizer step; 0 disables quantization
  std::uint64_t seed = 0;
};

struct RoundRecord {
  std::vector<std::pair<Index, Index>> edges;  ///< surviving undirected links (i < j)
  Index messages = 0;                          ///< directed messages sent this round
  Vector state;                                ///< z^(k) after the round
};

struct SimTrace {
  std::vector<RoundRecord> rounds;
  Vector y;
};

/// Round-by-round execution of a convolutional filter over an impaired network.
SimTrace simulate_filter(const ConvFilter& f, const NetworkModel& net, const Vector& x);

/// Mid-tread quantizer step * round(v / step).
Vector quantize(const Vector& v, double step);

/// ||H(S_hat) x - H(S) x||^2 for `trials` seeds derived from net.seed; ordered by trial index.
std::vector<double> monte_carlo_deviation(const ConvFilter& f, const NetworkModel& net, const Vector& x, Index trials,
                                          unsigned threads = 0);

/// First-order link-loss bound alpha N C^2 (1 - p) ||x||^2, alpha = 2 for Laplacians, max degree otherwise.
double link_loss_bound(const ConvFilter& f, const ShiftOperator& s, double keep_prob, double x_norm);

/// G with MSE_Q(h) = h^T G h for iid uniform per-hop quantization noise of variance step^2 / 12.
Matrix quantization_mse_matrix(const ShiftOperator& s, Index k, double step);
double quantization_mse(const ConvFilter& f, const ShiftOperator& s, double step);
/// Worst-case ||eps_q|| <= sum_kappa ||T_kappa||_2 (step / 2) sqrt(N).
double quantization_deviation_bound(const ConvFilter& f, const ShiftOperator& s, double step);

struct RobustDesign {
  ConvFilter filter;
  double mse_q = 0.0;
  double ls_error = 0.0;        ///< sum over the grid of (h(lambda) - beta(lambda))^2
  bool constraint_active = false;
  double multiplier = 0.0;
};

/// Grid least squares subject to MSE_Q(h) <= cap, by bisection on the Lagrange multiplier.
RobustDesign robust_quantized_design(const std::function<double(double)>& target, double lo, double hi, Index k,
                                     const ShiftOperator& s, double step, double cap, Index grid_size = 200);

/// Taps of h(lambda) = prod_j (1 - lambda / lambda_j) over the distinct nonzero Laplacian eigenvalues.
ConvFilter design_consensus(const SpectralBasis& laplacian_basis, Index order_cap);

}  // namespace graphfilt
