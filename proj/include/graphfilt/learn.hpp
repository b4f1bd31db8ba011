#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace graphfilt {

// ---- adapt-then-combine diffusion LMS ----

struct LmsConfig {
  Vector step_sizes;    ///< mu_i per node
  Matrix combination;   ///< c(l, i): weight node i gives to node l; columns sum to 1
  bool time_lagged = false;
  double divergence_threshold = 1e9;
};

/// Uniform weights over closed neighborhoods, equal step sizes.
LmsConfig default_lms_config(const Graph& g, double mu);

struct LmsResult {
  Matrix taps;                    ///< (K+1) x N, column i is h_i
  std::vector<double> msd;        ///< mean_i ||h_i - h_true||^2 per round (if h_true given)
  std::vector<double> mse;        ///< mean a-priori squared error per round
};

/// x and y hold one round per column (N x T).
LmsResult lms_diffusion(const ShiftOperator& s, const Matrix& x, const Matrix& y, Index k, const LmsConfig& cfg,
                        std::optional<Matrix> initial = std::nullopt, std::optional<Vector> h_true = std::nullopt);

// ---- sparse system identification ----

struct SysIdOptions {
  std::optional<Vector> weights;  ///< omega; default omega_k = k + 1
  Index max_iter = 20000;
  double tol = 1e-12;
  bool warm_start = true;
};

struct SysIdResult {
  Vector taps;
  std::vector<double> objective_trace;
  Index iterations = 0;
  bool converged = false;
};

/// min ||M (y - H(h, S) x)||^2 + gamma ||diag(omega) h||_1 by monotone FISTA.
/// x and y may hold several observation pairs as columns; `observed` lists the masked-in nodes.
SysIdResult system_identify(const ShiftOperator& s, const Matrix& x, const Matrix& y, const std::vector<Index>& observed,
                            Index k, double gamma, const SysIdOptions& opts = {});

double system_identify_objective(const ShiftOperator& s, const Matrix& x, const Matrix& y,
                                 const std::vector<Index>& observed, const Vector& h, double gamma, const Vector& weights);

// ---- lifted blind deconvolution ----

// Linear map A(Z) = sum_k Lambda^k V^{-1} z_k on N x (K+1) matrices.
class LiftedOperator {
 public:
  LiftedOperator(const SpectralBasis& basis, Index k);

  Vector apply(const Matrix& z) const;
  Matrix adjoint(const Vector& r) const;
  /// Squared operator norm by power iteration.
  double norm_squared() const;
  Index rows() const { return powers_.rows(); }
  Index order() const { return powers_.cols() - 1; }
  const Matrix& inverse() const { return vinv_; }
  const Matrix& vectors() const { return v_; }

 private:
  Matrix v_, vinv_;
  Matrix powers_;  ///< lambda_i^k
};

struct BlindOptions {
  Index max_iter = 3000;
  double tol = 1e-10;
  Index prox_iter = 200;
  double prox_tol = 1e-12;
};

struct LiftedSolution {
  Matrix z;
  std::vector<double> objective_trace;
  Vector x_hat, h_hat;
  Index iterations = 0;
  bool converged = false;
};

/// Objective ||V^{-1} y - A(Z)||^2 + gamma1 ||Z||_* + gamma2 ||Z||_{2,1}.
double lifted_objective(const LiftedOperator& op, const Vector& y_spec, const Matrix& z, double gamma1, double gamma2);

/// Proximal operator of t (gamma1 ||.||_* + gamma2 ||.||_{2,1}) via Dykstra-type splitting.
Matrix prox_nuclear_group(const Matrix& v, double t1, double t2, Index iters = 200, double tol = 1e-12);

LiftedSolution blind_deconvolve(const SpectralBasis& basis, const Vector& y, Index k, double gamma1, double gamma2,
                                const BlindOptions& opts = {});

// ---- graph convolutional networks ----

enum class Activation { relu, tanh, identity };
enum class Readout { none, concat_linear, per_node_linear };
enum class GnnLoss { mse, cross_entropy_masked };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);
std::string to_string(Readout r);
Readout readout_from_string(const std::string& s);

struct GnnLayer {
  std::vector<Matrix> h;  ///< H_0..H_K, each F_in x F_out
  Activation activation = Activation::relu;

  Index order() const { return static_cast<Index>(h.size()) - 1; }
  Index in_features() const { return h.front().rows(); }
  Index out_features() const { return h.front().cols(); }
};

struct GnnModel {
  std::vector<GnnLayer> layers;
  Readout readout = Readout::none;
  Matrix theta;            ///< concat_linear: (N F_L) x C; per_node_linear: F_L x C
  std::string preset;      ///< "", gcn, sgc, gin, graphsage
  double gin_eps = 0.0;

  /// Re-imposes the preset's zero masks and ties.
  void enforce_preset();
};

struct GnnGradient;
/// Maps raw gradients onto the preset's free parameters (masked taps get 0, tied taps are summed).
void project_gradient(const GnnModel& model, GnnGradient& grad);

struct GnnInitSpec {
  std::vector<Index> features;   ///< F_0..F_L
  std::vector<Index> orders;     ///< K_1..K_L
  std::vector<Activation> activations;
  Readout readout = Readout::none;
  Index readout_dim = 0;
  Index node_count = 0;          ///< needed by concat_linear
  std::uint64_t seed = 0;
  double scale = 0.5;
};

GnnModel gnn_init(const GnnInitSpec& spec);

/// Model for a named preset; `orders` entries are forced to the preset's K where it has one.
GnnModel gnn_preset(const std::string& name, GnnInitSpec spec, double gin_eps = 0.0);

/// Shift operator a preset expects: gcn uses the augmented normalization, gin the binary adjacency.
ShiftOperator preset_shift(const std::string& name, const Graph& g);

struct GnnForward {
  std::vector<Matrix> x;                       ///< X_0..X_L (after activation/normalization)
  std::vector<std::vector<Matrix>> shifted;    ///< per layer S^k X_{l-1}
  std::vector<Matrix> pre;                     ///< per layer U = sum_k S^k X H_k
  std::vector<Matrix> act;                     ///< per layer sigma(U) before row normalization
  Matrix output;
};

GnnForward gnn_forward(const GnnModel& model, const ShiftOperator& s, const Matrix& x0);

struct GnnSample {
  Matrix x;                  ///< N x F_0
  Matrix target;             ///< mse target (output shape)
  std::vector<int> labels;   ///< class per node (cross entropy)
  std::vector<Index> mask;   ///< rows that enter the loss; empty means all
};

struct GnnGradient {
  std::vector<std::vector<Matrix>> h;
  Matrix theta;
};

double gnn_loss(const GnnModel& model, const ShiftOperator& s, const std::vector<GnnSample>& data, GnnLoss loss,
                GnnGradient* grad = nullptr);

struct GnnTrainResult {
  GnnModel model;
  std::vector<double> loss_trace;  ///< loss before each epoch's update, then the final loss
};

GnnTrainResult gnn_train(GnnModel model, const ShiftOperator& s, const std::vector<GnnSample>& data, GnnLoss loss,
                         double step, Index epochs);

}  // namespace graphfilt
