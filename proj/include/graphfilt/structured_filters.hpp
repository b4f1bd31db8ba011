#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/spectral.hpp"

#include <map>
#include <string>
#include <vector>

namespace graphfilt {

// y = sum_k diag(h_k) S^k x; row k of coeffs is h_k.
class NodeVaryingFilter {
 public:
  NodeVaryingFilter() = default;
  explicit NodeVaryingFilter(Matrix coeffs);

  const Matrix& coeffs() const { return coeffs_; }
  Index order() const { return coeffs_.rows() - 1; }
  Index node_count() const { return coeffs_.cols(); }

 private:
  Matrix coeffs_;
};

// y = sum_k H_k S^k x with H_0 diagonal and supp(H_k) inside supp(S) plus the diagonal.
class EdgeVaryingFilter {
 public:
  EdgeVaryingFilter() = default;
  EdgeVaryingFilter(std::vector<SparseMatrix> mats, const ShiftOperator& s);

  const std::vector<SparseMatrix>& mats() const { return mats_; }
  Index order() const { return static_cast<Index>(mats_.size()) - 1; }

 private:
  std::vector<SparseMatrix> mats_;
};

Vector apply(const NodeVaryingFilter& f, const ShiftOperator& s, const Vector& x);
Vector apply(const EdgeVaryingFilter& f, const ShiftOperator& s, const Vector& x);

Matrix dense_operator(const NodeVaryingFilter& f, const Matrix& s);
Matrix dense_operator(const EdgeVaryingFilter& f, const Matrix& s);

struct NodeVaryingExactResult {
  NodeVaryingFilter filter;
  double residual = 0.0;  ///< ||H - B||_F
  std::vector<Index> borderline_nodes;
  std::vector<std::string> warnings;
};

/// Per-node interpolation of the spectral ratios of B; needs a real basis.
NodeVaryingExactResult design_node_varying_exact(const Matrix& b, const SpectralBasis& basis, Index k);

struct VaryingLsInfo {
  double residual = 0.0;  ///< ||Y - H(X)||_F
  bool rank_deficient = false;
  bool underdetermined = false;
  std::vector<std::string> warnings;
};

struct NodeVaryingLsResult {
  NodeVaryingFilter filter;
  VaryingLsInfo info;
};

struct EdgeVaryingLsResult {
  EdgeVaryingFilter filter;
  VaryingLsInfo info;
};

/// Least squares on input/output columns (X, Y); pass X = I, Y = B to match an operator.
NodeVaryingLsResult design_node_varying_ls(const Matrix& x, const Matrix& y, const ShiftOperator& s, Index k);
EdgeVaryingLsResult design_edge_varying_ls(const Matrix& x, const Matrix& y, const ShiftOperator& s, Index k);

// Volterra filter with a sparse table over multi-indices (l_0..l_K), l_j <= caps[j].
class VolterraFilter {
 public:
  using MultiIndex = std::vector<int>;

  VolterraFilter() = default;
  explicit VolterraFilter(std::vector<int> caps);

  void set(const MultiIndex& l, double h);
  double get(const MultiIndex& l) const;

  Index shift_order() const { return static_cast<Index>(caps_.size()) - 1; }
  const std::vector<int>& caps() const { return caps_; }
  const std::map<MultiIndex, double>& table() const { return table_; }
  /// prod_j (L_j + 1); throws when a dense enumeration would exceed 1e6 entries.
  Index dense_size() const;

 private:
  std::vector<int> caps_;
  std::map<MultiIndex, double> table_;
};

Vector apply(const VolterraFilter& f, const ShiftOperator& s, const Vector& x);

// Median of h_k copies of [S^k x]_i per node; even counts give the midpoint of the middle pair.
class MedianFilter {
 public:
  MedianFilter() : reps_{1} {}
  explicit MedianFilter(std::vector<int> replications);

  const std::vector<int>& replications() const { return reps_; }
  Index order() const { return static_cast<Index>(reps_.size()) - 1; }

 private:
  std::vector<int> reps_;
};

Vector apply(const MedianFilter& f, const ShiftOperator& s, const Vector& x);

// y = sum_q sum_k h_qk S_q^k x; coeffs is Q x (K+1).
class MultiGsoFilter {
 public:
  MultiGsoFilter() = default;
  MultiGsoFilter(std::vector<ShiftOperator> gsos, Matrix coeffs);

  const std::vector<ShiftOperator>& gsos() const { return gsos_; }
  const Matrix& coeffs() const { return coeffs_; }
  Index order() const { return coeffs_.cols() - 1; }

 private:
  std::vector<ShiftOperator> gsos_;
  Matrix coeffs_;
};

Vector apply(const MultiGsoFilter& f, const Vector& x);

struct MultiGsoDesign {
  MultiGsoFilter filter;
  std::vector<double> group_norms;
  double fit_error = 0.0;  ///< ||Y - H(X)||_F
};

/// Block-ridge design for two GSOs: (1/2mu)||e||^2 + ||h_1||^2/(2 alpha) + ||h_2||^2/(2 (1 - alpha)).
MultiGsoDesign design_multi_gso_group(const Matrix& x, const Matrix& y, const std::vector<ShiftOperator>& gsos,
                                      Index k, double mu, double alpha);

}  // namespace graphfilt
