#include "graphfilt/filterbank.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace graphfilt {

namespace {

constexpr double kSplineX1 = 1.0;
constexpr double kSplineX2 = 2.0;

double sgwt_mother(double x) {
  if (x < kSplineX1) return x * x;  // x1^-2 x^2 with x1 = 1
  if (x > kSplineX2) return kSplineX2 * kSplineX2 / (x * x);
  return -5.0 + 11.0 * x - 6.0 * x * x + x * x * x;
}

double sgwt_peak_x() { return (12.0 - std::sqrt(12.0)) / 6.0; }

double sgwt_lmin(double lo, double hi) { return lo > 0.0 ? lo : hi / 20.0; }

double half_cosine(const std::vector<double>& p, double lambda) {
  const double c = p[0], d = p[1];
  const double l = std::clamp(lambda, p[2], p[3]);
  const double t = (l - c) / d;
  if (std::abs(t) > 1.0) return 0.0;
  return std::cos(0.5 * std::numbers::pi * t);
}

double sgwt_normalized(const std::vector<double>& p, double lambda) {
  const Index ch = static_cast<Index>(p[0]), m = static_cast<Index>(p[1]);
  const double l = std::clamp(lambda, p[2], p[3]);
  double total = 0.0, mine = 0.0;
  for (Index j = 0; j < m; ++j) {
    const double r = sgwt_raw_kernel(j, m, p[2], p[3], l);
    total += r * r;
    if (j == ch) mine = r;
  }
  return total > 0.0 ? mine / std::sqrt(total) : (ch == 0 ? 1.0 : 0.0);
}

Vector channel_output(const SpectralKernel& k, const SpectralBasis& basis, const Vector& x) {
  return basis.filter(k(basis.real_eigenvalues()), x);
}

const std::vector<SpectralKernel>& synthesis_kernels(const FilterBank& bank) {
  return bank.synthesis ? *bank.synthesis : bank.analysis;
}

void check_bank(const FilterBank& bank, Index n) {
  require(!bank.analysis.empty(), "filter bank has no channels");
  if (bank.synthesis) require(bank.synthesis->size() == bank.analysis.size(), "synthesis and analysis channel counts differ");
  if (bank.sampling_sets) {
    require(bank.sampling_sets->size() == bank.analysis.size(), "one sampling set per channel is required");
    for (const auto& set : *bank.sampling_sets)
      for (const Index i : set) require(i >= 0 && i < n, "sampling set index out of range");
  }
}

template <class ChannelFn>
Vector analyze_impl(const FilterBank& bank, Index n, const ChannelFn& channel) {
  check_bank(bank, n);
  const auto sizes = bank.channel_sizes(n);
  Index total = 0;
  for (const Index s : sizes) total += s;
  Vector alpha(total);
  Index off = 0;
  for (Index m = 0; m < bank.channels(); ++m) {
    const Vector y = channel(bank.analysis[m]);
    if (bank.sampling_sets) {
      const auto& set = (*bank.sampling_sets)[m];
      for (size_t i = 0; i < set.size(); ++i) alpha[off + static_cast<Index>(i)] = y[set[i]];
    } else {
      alpha.segment(off, n) = y;
    }
    off += sizes[m];
  }
  return alpha;
}

template <class ChannelFn>
Vector synthesize_impl(const FilterBank& bank, Index n, const Vector& alpha, const ChannelFn& channel) {
  check_bank(bank, n);
  const auto sizes = bank.channel_sizes(n);
  Index total = 0;
  for (const Index s : sizes) total += s;
  if (alpha.size() != total)
    throw InvalidArgument("coefficient vector has length " + std::to_string(alpha.size()) + ", expected " +
                          std::to_string(total));
  const auto& syn = synthesis_kernels(bank);
  Vector x = Vector::Zero(n);
  Index off = 0;
  for (Index m = 0; m < bank.channels(); ++m) {
    Vector up = Vector::Zero(n);
    if (bank.sampling_sets) {
      const auto& set = (*bank.sampling_sets)[m];
      for (size_t i = 0; i < set.size(); ++i) up[set[i]] = alpha[off + static_cast<Index>(i)];
    } else {
      up = alpha.segment(off, n);
    }
    x += channel(syn[m], up);
    off += sizes[m];
  }
  return x;
}

}  // namespace

SpectralKernel::SpectralKernel(ConvFilter f, std::string label)
    : kind_(Kind::polynomial), label_(std::move(label)), poly_(std::move(f)) {}

SpectralKernel SpectralKernel::tabulated(Vector lambdas, Vector values, std::string label) {
  require(lambdas.size() == values.size() && lambdas.size() >= 1, "tabulated kernel needs matching non-empty tables");
  require(lambdas.allFinite() && values.allFinite(), "tabulated kernel entries must be finite");
  for (Index i = 1; i < lambdas.size(); ++i) require(lambdas[i] >= lambdas[i - 1], "tabulated lambdas must be sorted");
  SpectralKernel k;
  k.kind_ = Kind::tabulated;
  k.label_ = std::move(label);
  k.tab_x_ = std::move(lambdas);
  k.tab_y_ = std::move(values);
  return k;
}

SpectralKernel SpectralKernel::parametric(std::string family, std::vector<double> params, std::string label) {
  if (family == "half_cosine") {
    require(params.size() == 4 && params[1] > 0.0 && params[2] <= params[3], "half_cosine needs {center, width>0, lo, hi}");
  } else if (family == "sgwt") {
    require(params.size() == 4 && params[1] >= 2 && params[0] >= 0 && params[0] < params[1] && params[2] < params[3] &&
                params[3] > 0.0 && params[2] >= 0.0,
            "sgwt needs {channel, M>=2, lo>=0, hi>lo}");
  } else if (family == "indicator") {
    require(params.size() == 2 && params[0] <= params[1], "indicator needs {a, b} with a <= b");
  } else {
    throw InvalidArgument("unknown kernel family '" + family + "'");
  }
  SpectralKernel k;
  k.kind_ = Kind::parametric;
  k.label_ = std::move(label);
  k.family_ = std::move(family);
  k.params_ = std::move(params);
  return k;
}

SpectralKernel SpectralKernel::custom(std::function<double(double)> fn, std::string label) {
  require(static_cast<bool>(fn), "custom kernel needs a callable");
  SpectralKernel k;
  k.kind_ = Kind::custom;
  k.label_ = std::move(label);
  k.fn_ = std::move(fn);
  return k;
}

double SpectralKernel::operator()(double lambda) const {
  switch (kind_) {
    case Kind::polynomial:
      return poly_.response(lambda);
    case Kind::tabulated: {
      const Index n = tab_x_.size();
      if (lambda <= tab_x_[0]) return tab_y_[0];
      if (lambda >= tab_x_[n - 1]) return tab_y_[n - 1];
      const double* begin = tab_x_.data();
      const Index hi = std::upper_bound(begin, begin + n, lambda) - begin;
      const Index lo = hi - 1;
      const double dx = tab_x_[hi] - tab_x_[lo];
      if (dx <= 0.0) return tab_y_[lo];
      const double t = (lambda - tab_x_[lo]) / dx;
      if (t == 0.0) return tab_y_[lo];
      return (1.0 - t) * tab_y_[lo] + t * tab_y_[hi];
    }
    case Kind::parametric:
      if (family_ == "half_cosine") return half_cosine(params_, lambda);
      if (family_ == "sgwt") return sgwt_normalized(params_, lambda);
      return lambda >= params_[0] && lambda < params_[1] ? 1.0 : 0.0;
    case Kind::custom:
      return fn_(lambda);
  }
  return 0.0;
}

Vector SpectralKernel::operator()(const Vector& lambdas) const {
  Vector out(lambdas.size());
  for (Index i = 0; i < lambdas.size(); ++i) out[i] = (*this)(lambdas[i]);
  if (!out.allFinite()) throw NumericError("kernel '" + label_ + "' is not finite on the spectrum");
  return out;
}

std::vector<Index> FilterBank::channel_sizes(Index n) const {
  std::vector<Index> s(analysis.size(), n);
  if (sampling_sets)
    for (size_t m = 0; m < s.size() && m < sampling_sets->size(); ++m) s[m] = static_cast<Index>((*sampling_sets)[m].size());
  return s;
}

bool FilterBank::critically_sampled(Index n) const {
  if (!sampling_sets) return false;
  std::vector<int> seen(n, 0);
  Index total = 0;
  for (const auto& set : *sampling_sets) {
    for (const Index i : set) {
      if (i < 0 || i >= n || seen[i]++) return false;
      ++total;
    }
  }
  return total == n;
}

Vector analyze(const FilterBank& bank, const SpectralBasis& basis, const Vector& x) {
  require(x.size() == basis.size(), "signal length does not match the basis");
  return analyze_impl(bank, basis.size(), [&](const SpectralKernel& k) { return channel_output(k, basis, x); });
}

Vector analyze(const FilterBank& bank, const ShiftOperator& s, const Vector& x) {
  require(x.size() == s.size(), "signal length does not match shift operator size");
  return analyze_impl(bank, s.size(), [&](const SpectralKernel& k) {
    if (k.kind() != SpectralKernel::Kind::polynomial)
      throw InvalidArgument("graph-independent analysis needs polynomial kernels");
    return apply(k.polynomial(), s, x);
  });
}

Vector synthesize(const FilterBank& bank, const SpectralBasis& basis, const Vector& alpha) {
  return synthesize_impl(bank, basis.size(), alpha,
                         [&](const SpectralKernel& k, const Vector& up) { return channel_output(k, basis, up); });
}

Vector synthesize(const FilterBank& bank, const ShiftOperator& s, const Vector& alpha) {
  return synthesize_impl(bank, s.size(), alpha, [&](const SpectralKernel& k, const Vector& up) {
    if (k.kind() != SpectralKernel::Kind::polynomial)
      throw InvalidArgument("graph-independent synthesis needs polynomial kernels");
    return apply(k.polynomial(), s, up);
  });
}

double check_parseval(const FilterBank& bank, const Vector& lambdas) {
  Vector total = Vector::Zero(lambdas.size());
  for (const auto& k : bank.analysis) total += k(lambdas).cwiseAbs2();
  return lambdas.size() == 0 ? 0.0 : (total.array() - 1.0).abs().maxCoeff();
}

double check_parseval(const FilterBank& bank, double lo, double hi, Index grid_size) {
  require(lo <= hi && grid_size >= 2, "invalid interval");
  return check_parseval(bank, Vector::LinSpaced(grid_size, lo, hi));
}

std::vector<double> sgwt_scales(Index m, double lo, double hi) {
  require(m >= 2, "an SGWT bank needs at least two channels");
  require(hi > 0.0 && lo >= 0.0 && lo < hi, "invalid interval");
  const Index j = m - 1;
  const double tmax = kSplineX2 / sgwt_lmin(lo, hi);
  const double tmin = kSplineX1 / hi;
  std::vector<double> t(j);
  if (j == 1) {
    t[0] = std::sqrt(tmax * tmin);
    return t;
  }
  for (Index i = 0; i < j; ++i)
    t[i] = std::exp(std::log(tmax) + (std::log(tmin) - std::log(tmax)) * static_cast<double>(i) / static_cast<double>(j - 1));
  return t;
}

double sgwt_raw_kernel(Index channel, Index m, double lo, double hi, double lambda) {
  require(channel >= 0 && channel < m, "channel out of range");
  if (channel == 0) {
    const double gamma = sgwt_mother(sgwt_peak_x());
    const double r = lambda / (0.6 * sgwt_lmin(lo, hi));
    return gamma * std::exp(-r * r * r * r);
  }
  const double t = sgwt_scales(m, lo, hi)[channel - 1];
  return sgwt_mother(t * std::max(lambda, 0.0));
}

FilterBank design_tight_frame(Index m, double lo, double hi, TightFrameKind kind) {
  require(m >= 2, "a tight frame needs at least two channels");
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "invalid interval");
  FilterBank bank;
  if (kind == TightFrameKind::half_cosine_translates) {
    const double d = (hi - lo) / static_cast<double>(m - 1);
    for (Index i = 0; i < m; ++i)
      bank.analysis.push_back(SpectralKernel::parametric("half_cosine", {lo + i * d, d, lo, hi},
                                                         "half_cosine_" + std::to_string(i)));
  } else {
    require(lo >= 0.0, "SGWT frames need a nonnegative interval");
    for (Index i = 0; i < m; ++i)
      bank.analysis.push_back(SpectralKernel::parametric(
          "sgwt", {static_cast<double>(i), static_cast<double>(m), lo, hi}, i == 0 ? "scaling" : "wavelet_" + std::to_string(i)));
  }
  return bank;
}

Matrix reconstruction_operator(const FilterBank& bank, const SpectralBasis& basis) {
  const Index n = basis.size();
  check_bank(bank, n);
  const Vector& lam = basis.real_eigenvalues();
  const auto& syn = synthesis_kernels(bank);
  Matrix t = Matrix::Zero(n, n);
  for (Index m = 0; m < bank.channels(); ++m) {
    Vector mask = Vector::Ones(n);
    if (bank.sampling_sets) {
      mask.setZero();
      for (const Index i : (*bank.sampling_sets)[m]) mask[i] = 1.0;
    }
    t += basis.operator_matrix(syn[m](lam)) * mask.asDiagonal() * basis.operator_matrix(bank.analysis[m](lam));
  }
  return t;
}

namespace {

TwoChannelBank assemble_two_channel(SpectralBasis basis, const std::vector<int>& coloring, const SpectralKernel& h1,
                                    const SpectralKernel& h2) {
  const Index n = basis.size();
  require(static_cast<Index>(coloring.size()) == n, "partition length does not match the graph");
  TwoChannelBank out;
  for (Index i = 0; i < n; ++i) {
    require(coloring[i] == 0 || coloring[i] == 1, "partition labels must be 0 or 1");
    (coloring[i] == 0 ? out.part1 : out.part2).push_back(i);
  }
  const Vector& lam = basis.real_eigenvalues();
  Vector g1(n), g2(n);
  for (Index i = 0; i < n; ++i) {
    const double l = lam[i];
    const double a1 = h1(l), a2 = h2(l), b1 = h1(2.0 - l), b2 = h2(2.0 - l);
    const double det = a1 * b2 + a2 * b1;
    const double scale = std::max({1.0, std::abs(a1 * b2), std::abs(a2 * b1)});
    if (std::abs(det) <= 1e-12 * scale)
      throw NumericError("perfect-reconstruction system is singular at lambda = " + std::to_string(l));
    g1[i] = 2.0 * b2 / det;
    g2[i] = 2.0 * b1 / det;
  }
  out.bank.analysis = {h1, h2};
  out.bank.synthesis = std::vector<SpectralKernel>{SpectralKernel::tabulated(lam, g1, "synthesis_1"),
                                                   SpectralKernel::tabulated(lam, g2, "synthesis_2")};
  out.bank.sampling_sets = std::vector<std::vector<Index>>{out.part1, out.part2};
  out.basis = std::move(basis);
  out.pr_residual = (reconstruction_operator(out.bank, out.basis) - Matrix::Identity(n, n)).norm();
  out.pr_ok = out.pr_residual <= 1e-6;
  return out;
}

}  // namespace

TwoChannelBank bipartite_two_channel(const SpectralBasis& basis_ln, const std::vector<int>& coloring,
                                     const SpectralKernel& h1, const SpectralKernel& h2) {
  require(basis_ln.is_real() && basis_ln.symmetric_source(), "bipartite bank needs the normalized Laplacian basis");
  return assemble_two_channel(basis_ln, coloring, h1, h2);
}

TwoChannelBank bipartite_two_channel(const Graph& g, const SpectralKernel& h1, const SpectralKernel& h2) {
  require(!g.directed(), "bipartite bank needs an undirected graph");
  const auto coloring = two_coloring(g);
  if (!coloring) throw InvalidArgument("graph is not bipartite");
  return assemble_two_channel(eigendecompose(gso(g, GsoKind::normalized_laplacian)), *coloring, h1, h2);
}

std::vector<int> greedy_partition(const Graph& g) {
  const Index n = g.node_count();
  const auto nbrs = g.undirected_neighbors();
  std::vector<int> color(n, -1);
  Index count[2] = {0, 0};
  for (Index root = 0; root < n; ++root) {
    if (color[root] >= 0) continue;
    std::deque<Index> queue{root};
    std::vector<char> queued(n, 0);
    queued[root] = 1;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      double cut[2] = {0.0, 0.0};  // weight gained by choosing color c
      for (const Index u : nbrs[v]) {
        if (color[u] < 0) {
          if (!queued[u]) {
            queued[u] = 1;
            queue.push_back(u);
          }
          continue;
        }
        const double w = g.weight(u, v) + g.weight(v, u);
        cut[1 - color[u]] += w;
      }
      int c;
      if (cut[0] != cut[1])
        c = cut[0] > cut[1] ? 0 : 1;
      else
        c = count[0] <= count[1] ? 0 : 1;
      color[v] = c;
      ++count[c];
    }
  }
  return color;
}

TwoChannelBank generalized_two_channel(const Graph& g, const Matrix& s_bar, const SpectralKernel& h1,
                                       const SpectralKernel& h2, std::optional<std::vector<int>> partition) {
  const Index n = g.node_count();
  require(s_bar.rows() == n && s_bar.cols() == n, "S_bar must be N x N");
  require(s_bar.allFinite(), "S_bar must be finite");
  require((s_bar - s_bar.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, s_bar.cwiseAbs().maxCoeff()),
          "S_bar must be symmetric");
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && s_bar(i, j) != 0.0 && !g.has_edge(i, j) && !g.has_edge(j, i))
        throw InvalidArgument("S_bar entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is off the graph support");
  const std::vector<int> part = partition ? *partition : greedy_partition(g);
  require(static_cast<Index>(part.size()) == n, "partition length does not match the graph");

  Matrix q = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (part[i] == part[j]) q(i, j) = s_bar(i, j);
  Eigen::LLT<Matrix> llt(q);
  if (llt.info() != Eigen::Success) throw NumericError("Q = blockdiag(S_bar[V1,V1], S_bar[V2,V2]) is not positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(s_bar, q);
  if (ges.info() != Eigen::Success) throw NumericError("generalized eigendecomposition failed");
  const Matrix v = ges.eigenvectors();
  SpectralBasis basis = SpectralBasis::from_real(v, ges.eigenvalues(), v.transpose() * q, false);
  return assemble_two_channel(std::move(basis), part, h1, h2);
}

}  // namespace graphfilt
