#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/conv_filter.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace graphfilt {

// Frequency-domain kernel h(lambda).
//
// Parametric families:
//   half_cosine  params {center, width, lo, hi}
//   sgwt         params {channel, M, lo, hi}   (channel 0 is the scaling function)
//   indicator    params {a, b}                 1 on [a, b), 0 elsewhere
class SpectralKernel {
 public:
  enum class Kind { polynomial, tabulated, parametric, custom };

  SpectralKernel() : SpectralKernel(ConvFilter()) {}
  explicit SpectralKernel(ConvFilter f, std::string label = "");
  /// Linear interpolation through (lambdas, values), constant beyond the ends.
  static SpectralKernel tabulated(Vector lambdas, Vector values, std::string label = "");
  static SpectralKernel parametric(std::string family, std::vector<double> params, std::string label = "");
  static SpectralKernel custom(std::function<double(double)> fn, std::string label = "");

  double operator()(double lambda) const;
  Vector operator()(const Vector& lambdas) const;

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const ConvFilter& polynomial() const { return poly_; }
  const Vector& table_lambdas() const { return tab_x_; }
  const Vector& table_values() const { return tab_y_; }
  const std::string& family() const { return family_; }
  const std::vector<double>& params() const { return params_; }

 private:
  Kind kind_ = Kind::polynomial;
  std::string label_;
  ConvFilter poly_;
  Vector tab_x_, tab_y_;
  std::string family_;
  std::vector<double> params_;
  std::function<double(double)> fn_;
};

struct FilterBank {
  std::vector<SpectralKernel> analysis;
  std::optional<std::vector<SpectralKernel>> synthesis;
  std::optional<std::vector<std::vector<Index>>> sampling_sets;

  Index channels() const { return static_cast<Index>(analysis.size()); }
  /// Output length of each channel for a graph with n nodes.
  std::vector<Index> channel_sizes(Index n) const;
  /// True when the sampling sets partition the n nodes.
  bool critically_sampled(Index n) const;
};

/// Concatenated channel outputs [R_1 H_1 x; ...; R_M H_M x] evaluated on the spectrum.
Vector analyze(const FilterBank& bank, const SpectralBasis& basis, const Vector& x);
/// Graph-independent variant; every kernel must be polynomial.
Vector analyze(const FilterBank& bank, const ShiftOperator& s, const Vector& x);

Vector synthesize(const FilterBank& bank, const SpectralBasis& basis, const Vector& alpha);
Vector synthesize(const FilterBank& bank, const ShiftOperator& s, const Vector& alpha);

/// max |sum_m h_m(lambda)^2 - 1| over the given points.
double check_parseval(const FilterBank& bank, const Vector& lambdas);
double check_parseval(const FilterBank& bank, double lo, double hi, Index grid_size = 1000);

enum class TightFrameKind { half_cosine_translates, sgwt_warped };

FilterBank design_tight_frame(Index m, double lo, double hi, TightFrameKind kind);

/// Unnormalized SGWT channels: scaling function (channel 0) and g(t_j lambda).
double sgwt_raw_kernel(Index channel, Index m, double lo, double hi, double lambda);
/// Geometric wavelet scales t_1 > ... > t_{M-1}.
std::vector<double> sgwt_scales(Index m, double lo, double hi);

struct TwoChannelBank {
  FilterBank bank;
  SpectralBasis basis;
  std::vector<Index> part1, part2;
  double pr_residual = 0.0;  ///< ||T - I||_F of the end-to-end reconstruction operator
  bool pr_ok = true;
};

/// Critically sampled two-channel bank on a bipartite graph; synthesis solved per eigenvalue.
TwoChannelBank bipartite_two_channel(const Graph& g, const SpectralKernel& h1, const SpectralKernel& h2);
TwoChannelBank bipartite_two_channel(const SpectralBasis& basis_ln, const std::vector<int>& coloring,
                                     const SpectralKernel& h1, const SpectralKernel& h2);

/// Generalized bank: S_bar v = lambda Q v with Q = blockdiag(S_bar[V1,V1], S_bar[V2,V2]).
TwoChannelBank generalized_two_channel(const Graph& g, const Matrix& s_bar, const SpectralKernel& h1,
                                       const SpectralKernel& h2,
                                       std::optional<std::vector<int>> partition = std::nullopt);

/// Greedy balanced max-cut 2-coloring in BFS order.
std::vector<int> greedy_partition(const Graph& g);

/// Dense end-to-end operator sum_m G_m R_m^T R_m H_m.
Matrix reconstruction_operator(const FilterBank& bank, const SpectralBasis& basis);

}  // namespace graphfilt
