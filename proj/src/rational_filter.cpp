#include "graphfilt/rational_filter.hpp"

#include "graphfilt/conv_filter.hpp"
#include "graphfilt/spectral.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace graphfilt {

namespace {

double horner(const Vector& c, double x) {
  double acc = 0.0;
  for (Index k = c.size() - 1; k >= 0; --k) acc = acc * x + c[k];
  return acc;
}

Vector column_scaled_cod_solve(const Matrix& a, const Vector& b, bool* rank_deficient = nullptr) {
  Vector scale = a.colwise().norm().transpose();
  for (Index j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) scale[j] = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a * scale.cwiseInverse().asDiagonal());
  if (rank_deficient) *rank_deficient = cod.rank() < a.cols();
  return cod.solve(b).cwiseQuotient(scale);
}

// Denominator polynomial 1 + sum a_p S^p applied to a vector.
Vector apply_denominator(const Vector& a, const ShiftOperator& s, const Vector& v) {
  Vector taps(a.size() + 1);
  taps[0] = 1.0;
  taps.tail(a.size()) = a;
  return apply(ConvFilter(taps), s, v);
}

std::pair<double, double> gershgorin_interval(const SparseMatrix& m) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Index r = 0; r < m.outerSize(); ++r) {
    double diag = 0.0, radius = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r)
        diag = it.value();
      else
        radius += std::abs(it.value());
    }
    lo = std::min(lo, diag - radius);
    hi = std::max(hi, diag + radius);
  }
  return {lo, hi};
}

Vector denominator_diagonal(const Vector& a, const SparseMatrix& s) {
  const Index n = s.rows();
  Vector d = Vector::Ones(n);
  SparseMatrix p = s;
  for (Index k = 0; k < a.size(); ++k) {
    if (k > 0) p = SparseMatrix(p * s);
    d += a[k] * p.diagonal();
  }
  return d;
}

}  // namespace

RationalFilter::RationalFilter(Vector numerator, Vector denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  require(num_.size() >= 1, "rational filter needs at least one numerator coefficient");
  require(num_.allFinite() && den_.allFinite(), "rational filter coefficients must be finite");
}

double RationalFilter::num_at(double lambda) const { return horner(num_, lambda); }

double RationalFilter::den_at(double lambda) const {
  double acc = 0.0;
  for (Index k = den_.size() - 1; k >= 0; --k) acc = acc * lambda + den_[k];
  return 1.0 + acc * lambda;
}

StabilityReport check_stability(const RationalFilter& f, double lo, double hi, Index grid_size, double margin) {
  require(lo <= hi && grid_size >= 1, "invalid interval");
  StabilityReport r;
  r.min_abs_denominator = std::numeric_limits<double>::infinity();
  const Vector grid = grid_size == 1 ? Vector(Vector::Constant(1, lo)) : Vector(Vector::LinSpaced(grid_size, lo, hi));
  for (Index g = 0; g < grid.size(); ++g) {
    const double v = std::abs(f.den_at(grid[g]));
    if (v < r.min_abs_denominator) {
      r.min_abs_denominator = v;
      r.at_lambda = grid[g];
    }
  }
  r.stable = r.min_abs_denominator >= margin;
  return r;
}

Matrix dense_rational(const RationalFilter& f, const Matrix& s) {
  Vector ptaps(f.denominator().size() + 1);
  ptaps[0] = 1.0;
  ptaps.tail(f.denominator().size()) = f.denominator();
  const Matrix p = dense_polynomial(ptaps, s);
  const Matrix q = dense_polynomial(f.numerator(), s);
  return p.partialPivLu().solve(q);
}

RationalApplyResult apply(const RationalFilter& f, const ShiftOperator& s, const Vector& x,
                          const RationalSolveOptions& opts) {
  if (x.size() != s.size()) throw InvalidArgument("signal length does not match shift operator size");
  RationalApplyResult res;
  const Vector rhs = apply(ConvFilter(f.numerator()), s, x);
  const Vector& a = f.denominator();
  if (a.size() == 0) {
    res.y = rhs;
    return res;
  }
  const double rnorm = rhs.norm();
  if (rnorm == 0.0) {
    res.y = Vector::Zero(x.size());
    return res;
  }

  if (opts.solver == RationalSolver::dense) {
    Vector ptaps(a.size() + 1);
    ptaps[0] = 1.0;
    ptaps.tail(a.size()) = a;
    const Matrix p = dense_polynomial(ptaps, s.dense());
    Eigen::FullPivLU<Matrix> lu(p);
    if (!lu.isInvertible()) throw NumericError("denominator operator P(S) is singular");
    res.y = lu.solve(rhs);
    res.relative_residual = (p * res.y - rhs).norm() / rnorm;
    return res;
  }

  if (!s.symmetric()) throw InvalidArgument("conjugate gradient needs a symmetric shift operator; use the dense solver");
  const auto [lo, hi] = gershgorin_interval(s.matrix());
  double min_p = std::numeric_limits<double>::infinity();
  for (const double l : Vector::LinSpaced(2001, lo, hi)) min_p = std::min(min_p, f.den_at(l));
  if (!(min_p > 0.0))
    throw NumericError("P(S) is not certified positive definite over the Gershgorin interval [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]");

  const Vector jacobi = denominator_diagonal(a, s.matrix()).cwiseInverse();
  Vector y = Vector::Zero(x.size());
  Vector r = rhs;
  Vector z = jacobi.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  Index it = 0;
  for (; it < opts.max_iter; ++it) {
    if (r.norm() <= opts.tol * rnorm) break;
    const Vector ap = apply_denominator(a, s, p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw NumericError("P(S) is indefinite (conjugate gradient curvature <= 0)");
    const double alpha = rz / pap;
    y += alpha * p;
    r -= alpha * ap;
    z = jacobi.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  res.y = y;
  res.iterations = it;
  res.relative_residual = (apply_denominator(a, s, y) - rhs).norm() / rnorm;
  if (res.relative_residual > std::max(opts.tol, 1e-14) * 10.0 && it >= opts.max_iter)
    throw NumericError("conjugate gradient did not converge in " + std::to_string(opts.max_iter) + " iterations");
  return res;
}

double rational_fit_error(const RationalFilter& f, const Vector& lambdas, const Vector& targets) {
  require(lambdas.size() == targets.size(), "grid and target lengths differ");
  double acc = 0.0;
  for (Index g = 0; g < lambdas.size(); ++g) {
    const double e = targets[g] - f.response(lambdas[g]);
    acc += e * e;
  }
  return acc;
}

namespace {

double modified_error(const RationalFilter& f, const Vector& lambdas, const Vector& targets) {
  double acc = 0.0;
  for (Index g = 0; g < lambdas.size(); ++g) {
    const double e = targets[g] * f.den_at(lambdas[g]) - f.num_at(lambdas[g]);
    acc += e * e;
  }
  return acc;
}

RationalDesign finish(RationalFilter f, const Vector& lambdas, const Vector& targets, double margin, Index iters) {
  RationalDesign d;
  const StabilityReport sr = check_stability(f, lambdas.minCoeff(), lambdas.maxCoeff(), 1000, margin);
  double min_at_samples = std::numeric_limits<double>::infinity();
  for (Index g = 0; g < lambdas.size(); ++g) min_at_samples = std::min(min_at_samples, std::abs(f.den_at(lambdas[g])));
  d.min_abs_denominator = std::min(sr.min_abs_denominator, min_at_samples);
  d.stable = d.min_abs_denominator >= margin;
  d.objective = rational_fit_error(f, lambdas, targets);
  d.modified_objective = modified_error(f, lambdas, targets);
  d.iterations = iters;
  d.filter = std::move(f);
  return d;
}

void check_design_inputs(const Vector& lambdas, const Vector& targets, Index p, Index q) {
  require(lambdas.size() == targets.size(), "grid and target lengths differ");
  require(p >= 0 && q >= 0, "orders must be nonnegative");
  require(lambdas.size() >= p + q + 1, "need at least P+Q+1 samples");
  require(lambdas.allFinite() && targets.allFinite(), "samples must be finite");
}

}  // namespace

RationalDesign design_prony(const Vector& lambdas, const Vector& targets, Index p, Index q, double margin) {
  check_design_inputs(lambdas, targets, p, q);
  const Index g = lambdas.size();
  Matrix a(g, p + q + 1);
  for (Index i = 0; i < g; ++i) {
    double lp = 1.0;
    for (Index k = 0; k <= std::max(p, q); ++k) {
      if (k >= 1 && k <= p) a(i, k - 1) = targets[i] * lp;
      if (k <= q) a(i, p + k) = -lp;
      lp *= lambdas[i];
    }
  }
  const Vector sol = column_scaled_cod_solve(a, -targets);
  return finish(RationalFilter(sol.tail(q + 1), sol.head(p)), lambdas, targets, margin, 1);
}

RationalDesign design_constrained(const Vector& lambdas, const Vector& targets, Index p, Index q, double margin,
                                  Index max_iter, double rel_tol) {
  check_design_inputs(lambdas, targets, p, q);
  require(margin > 0.0 && margin <= 1.0, "stability margin must lie in (0, 1]");
  const Index g = lambdas.size();
  // The projection checks the samples and a dense grid spanning them.
  Vector check_grid(g + 1000);
  check_grid << lambdas, Vector::LinSpaced(1000, lambdas.minCoeff(), lambdas.maxCoeff());

  auto project = [&](const Vector& a) -> Vector {
    if (a.size() == 0) return a;
    double s = 1.0;
    for (Index i = 0; i < check_grid.size(); ++i) {
      const double r = RationalFilter(Vector::Ones(1), a).den_at(check_grid[i]) - 1.0;
      if (r < 0.0) s = std::min(s, (1.0 - margin) / (-r));
    }
    return std::max(0.0, s) * a;
  };
  auto denominators = [&](const Vector& a) {
    Vector d(g);
    const RationalFilter tmp(Vector::Ones(1), a);
    for (Index i = 0; i < g; ++i) d[i] = tmp.den_at(lambdas[i]);
    return d;
  };
  auto solve_numerator = [&](const Vector& pd) {
    Matrix m(g, q + 1);
    for (Index i = 0; i < g; ++i) {
      double lp = 1.0;
      for (Index k = 0; k <= q; ++k) {
        m(i, k) = lp / pd[i];
        lp *= lambdas[i];
      }
    }
    return column_scaled_cod_solve(m, targets);
  };
  auto solve_denominator = [&](const Vector& b, const Vector& prev) {
    Matrix m(g, p);
    Vector rhs(g);
    const RationalFilter num(b, Vector());
    for (Index i = 0; i < g; ++i) {
      double lp = lambdas[i];
      for (Index k = 0; k < p; ++k) {
        m(i, k) = targets[i] * lp / prev[i];
        lp *= lambdas[i];
      }
      rhs[i] = (num.num_at(lambdas[i]) - targets[i]) / prev[i];
    }
    return column_scaled_cod_solve(m, rhs);
  };

  Vector best_a = Vector::Zero(p);
  Vector best_b = solve_numerator(Vector::Ones(g));
  double best_obj = rational_fit_error(RationalFilter(best_b, best_a), lambdas, targets);
  Index total_iters = 0;

  std::vector<Vector> starts{Vector::Zero(p)};
  if (p > 0) starts.push_back(project(design_prony(lambdas, targets, p, q, margin).filter.denominator()));

  for (const Vector& start : starts) {
    Vector a = start;
    Vector b = solve_numerator(denominators(a));
    double obj = rational_fit_error(RationalFilter(b, a), lambdas, targets);
    if (obj < best_obj) {
      best_obj = obj;
      best_a = a;
      best_b = b;
    }
    for (Index it = 0; it < max_iter && p > 0; ++it) {
      ++total_iters;
      a = project(solve_denominator(b, denominators(a)));
      b = solve_numerator(denominators(a));
      const double next = rational_fit_error(RationalFilter(b, a), lambdas, targets);
      if (next < best_obj) {
        best_obj = next;
        best_a = a;
        best_b = b;
      }
      const bool done = std::abs(obj - next) <= rel_tol * std::max(obj, 1e-300);
      obj = next;
      if (done) break;
    }
  }
  return finish(RationalFilter(best_b, best_a), lambdas, targets, margin, total_iters);
}

}  // namespace graphfilt
