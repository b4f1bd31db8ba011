#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/conv_filter.hpp"
#include "graphfilt/filterbank.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/random.hpp"
#include "graphfilt/rational_filter.hpp"
#include "graphfilt/spectral.hpp"

#include <string>
#include <vector>

namespace graphfilt {

// ---- anomaly detection ----

enum class AnomalyStatistic { l2_norm, max_gft_coeff };

struct DetectorSpec {
  SpectralKernel filter;
  AnomalyStatistic statistic = AnomalyStatistic::l2_norm;
  double threshold = 1.0;
};

struct Detection {
  bool anomalous = false;  ///< true selects H1
  double statistic = 0.0;
};

Detection anomaly_detect(const DetectorSpec& det, const SpectralBasis& basis, const Vector& x);
/// Polynomial kernels only; max_gft_coeff still needs the spectrum and decomposes S.
Detection anomaly_detect(const DetectorSpec& det, const ShiftOperator& s, const Vector& x);

// ---- semi-supervised classification ----

struct LabelProblem {
  Matrix labels;            ///< N x C, one-hot on labeled rows, zero elsewhere
  std::vector<char> mask;   ///< 1 = labeled
};

/// One-hot label matrix for the nodes in `labeled`.
LabelProblem make_label_problem(const std::vector<int>& classes, const std::vector<Index>& labeled, Index c);

enum class SslFamily { conv, rational };

struct SslOptions {
  SslFamily family = SslFamily::conv;
  Index k = 3;        ///< conv order
  Index p = 1, q = 1; ///< rational orders
  double gamma = 1e-3;
};

struct SslResult {
  std::vector<int> predicted;
  Matrix scores;
  ConvFilter conv;
  RationalFilter rational;
};

SslResult ssl_label_propagate(const LabelProblem& problem, const ShiftOperator& s, const SslOptions& opts = {});

// ---- spectral clustering ----

enum class ClusterMode { exact, filtered };

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
  bool converged = false;
};

KMeansResult kmeans(const Matrix& points, Index k, Rng& rng, Index restarts = 10, Index max_iter = 300, double tol = 1e-9);

struct ClusterResult {
  std::vector<int> labels;
  Matrix embedding;                 ///< row-normalized spectral embedding
  std::vector<Index> zero_rows;     ///< rows that could not be normalized
  double cutoff = 0.0;              ///< filtered mode: estimated lambda_k
  Index random_signals = 0;
};

ClusterResult spectral_cluster(const Graph& g, Index k, ClusterMode mode, std::uint64_t seed = 0,
                               Index chebyshev_order = 60);

/// Jackson damping factors g_0..g_M.
Vector jackson_coefficients(Index m);
/// Damped Chebyshev approximation of the indicator of [0, cutoff] on [0, lambda_max].
ConvFilter chebyshev_step(double cutoff, double lambda_max, Index m);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// Stochastic block model with the given block sizes.
Graph stochastic_block_model(const std::vector<Index>& sizes, double p_in, double p_out, Rng& rng);

}  // namespace graphfilt
