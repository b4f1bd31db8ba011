#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/graph.hpp"

#include <functional>

namespace graphfilt {

// Rational graph filter with response q(lambda) / p(lambda), where
// q(lambda) = sum_q b_q lambda^q and p(lambda) = 1 + sum_p a_p lambda^p.
class RationalFilter {
 public:
  RationalFilter() : num_(Vector::Ones(1)) {}
  RationalFilter(Vector numerator, Vector denominator);

  const Vector& numerator() const { return num_; }    ///< b_0..b_Q
  const Vector& denominator() const { return den_; }  ///< a_1..a_P (leading 1 implicit)

  double num_at(double lambda) const;
  double den_at(double lambda) const;
  double response(double lambda) const { return num_at(lambda) / den_at(lambda); }

 private:
  Vector num_;
  Vector den_;
};

struct StabilityReport {
  bool stable = true;
  double min_abs_denominator = 1.0;
  double at_lambda = 0.0;
};

StabilityReport check_stability(const RationalFilter& f, double lo, double hi, Index grid_size = 1000,
                                double margin = 1e-6);

enum class RationalSolver { cg, dense };

struct RationalSolveOptions {
  RationalSolver solver = RationalSolver::cg;
  double tol = 1e-12;
  Index max_iter = 2000;
};

struct RationalApplyResult {
  Vector y;
  Index iterations = 0;
  double relative_residual = 0.0;  ///< ||P(S)y - Q(S)x|| / ||Q(S)x||
};

/// Solves P(S) y = Q(S) x. The CG path needs a symmetric S and a positive
/// denominator over the Gershgorin interval; it uses a Jacobi preconditioner.
RationalApplyResult apply(const RationalFilter& f, const ShiftOperator& s, const Vector& x,
                          const RationalSolveOptions& opts = {});

struct RationalDesign {
  RationalFilter filter;
  bool stable = true;
  double min_abs_denominator = 1.0;
  double objective = 0.0;           ///< sum_g (beta_g - q/p)^2
  double modified_objective = 0.0;  ///< sum_g (beta_g p - q)^2
  Index iterations = 0;
};

/// Linearized (Prony-type) least squares on beta p - q; stability reported, not enforced.
RationalDesign design_prony(const Vector& lambdas, const Vector& targets, Index p, Index q, double margin = 1e-6);

/// Alternating weighted least squares with the denominator projected so that
/// min_g p(lambda_g) >= margin after every update.
RationalDesign design_constrained(const Vector& lambdas, const Vector& targets, Index p, Index q,
                                  double margin = 1e-6, Index max_iter = 100, double rel_tol = 1e-8);

/// Sum of (beta_g - q(lambda_g)/p(lambda_g))^2.
double rational_fit_error(const RationalFilter& f, const Vector& lambdas, const Vector& targets);

/// Dense P(S)^{-1} Q(S) (oracle-scale helper).
Matrix dense_rational(const RationalFilter& f, const Matrix& s);

}  // namespace graphfilt
