#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mem/error.hpp"
#include "mem/lbfgs.hpp"
#include "mem/operators.hpp"
#include "mem/prior.hpp"

namespace mem {

/// The fidelity part alpha * g*(-z/alpha) of the dual objective, supplied as
/// value/gradient callbacks. `modulus` is its strong-convexity constant; the
/// ε-certificate of a solve is grad_norm^2 / (2 * modulus).
struct FidelityConjugate {
  std::function<double(std::span<const double>)> value;
  std::function<Vector(std::span<const double>)> gradient;
  double modulus = 0.0;
};

/// ||z||^2/(2 alpha) - <b, z>, the conjugate term for g = ½||b - ·||².
inline FidelityConjugate quadratic_fidelity(Vector b, double alpha) {
  auto shared_b = std::make_shared<const Vector>(std::move(b));
  FidelityConjugate f;
  f.value = [shared_b, alpha](std::span<const double> z) {
    double zz = 0.0, bz = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      zz += z[i] * z[i];
      bz += (*shared_b)[i] * z[i];
    }
    return zz / (2.0 * alpha) - bz;
  };
  f.gradient = [shared_b, alpha](std::span<const double> z) {
    Vector g(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) g[i] = z[i] / alpha - (*shared_b)[i];
    return g;
  };
  f.modulus = 1.0 / alpha;
  return f;
}

/// min_z  alpha g*(-z/alpha) + L_prior(C^T z). With no custom fidelity the
/// quadratic one built from (b, alpha) is used.
struct DualProblem {
  std::shared_ptr<const EmpiricalPrior> prior;
  LinearOperator op;
  Vector b;
  double alpha = 1.0;
  std::optional<FidelityConjugate> custom_fidelity;

  DualProblem(std::shared_ptr<const EmpiricalPrior> prior_, LinearOperator op_, Vector b_, double alpha_)
      : prior(std::move(prior_)), op(std::move(op_)), b(std::move(b_)), alpha(alpha_) {
    validate();
    fidelity_ = quadratic_fidelity(b, alpha);
  }

  DualProblem(std::shared_ptr<const EmpiricalPrior> prior_, LinearOperator op_, Vector b_, double alpha_,
              FidelityConjugate custom)
      : DualProblem(std::move(prior_), std::move(op_), std::move(b_), alpha_) {
    custom_fidelity = std::move(custom);
  }

  const FidelityConjugate& fidelity() const { return custom_fidelity ? *custom_fidelity : fidelity_; }
  std::size_t m() const { return op.rows(); }
  std::size_t d() const { return op.cols(); }

 private:
  void validate() const {
    if (!prior) detail::fail(ErrorCode::InvalidArgument, "dual problem needs a prior");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) detail::fail(ErrorCode::InvalidArgument, "alpha must be > 0");
    if (op.cols() != prior->dim()) detail::fail(ErrorCode::DimensionMismatch, "operator input dim != prior dim");
    if (b.size() != op.rows()) detail::fail(ErrorCode::DimensionMismatch, "b length != operator output dim");
    for (double v : b)
      if (!std::isfinite(v)) detail::fail(ErrorCode::NonFiniteInput, "b is not finite");
  }

  FidelityConjugate fidelity_;
};

struct SolverConfig {
  std::size_t memory = 10;
  double grad_tol = 1e-9;
  std::size_t max_iter = 500;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;

  lbfgs::Options to_options() const {
    lbfgs::Options o;
    o.memory = memory;
    o.grad_tol = grad_tol;
    o.max_iter = max_iter;
    o.c1 = wolfe_c1;
    o.c2 = wolfe_c2;
    return o;
  }
};

struct DualSolveResult {
  Vector z_bar;
  double grad_norm = 0.0;
  double epsilon_cert = 0.0;  ///< phi(z_bar) - min phi <= epsilon_cert
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = false;
  lbfgs::Status status = lbfgs::Status::MaxIterations;
  std::vector<lbfgs::Iteration> trace;
};

namespace detail {
inline void check_dual_point(const DualProblem& p, std::span<const double> z) {
  if (z.size() != p.m()) fail(ErrorCode::DimensionMismatch, "dual point length != m");
  for (double v : z)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "dual point is not finite");
}

// phi(z) and its gradient from a single lmgf evaluation.
inline double dual_value_and_gradient(const DualProblem& p, std::span<const double> z, std::span<double> grad) {
  check_dual_point(p, z);
  const auto& fid = p.fidelity();
  const Vector ctz = p.op.apply_adjoint(z);
  const LmgfEval eval = p.prior->lmgf_eval(ctz);
  const Vector lifted = p.op.apply(eval.gradient);
  const Vector fg = fid.gradient(z);
  for (std::size_t i = 0; i < z.size(); ++i) grad[i] = fg[i] + lifted[i];
  return fid.value(z) + eval.value;
}
}  // namespace detail

inline double dual_objective(const DualProblem& p, std::span<const double> z) {
  detail::check_dual_point(p, z);
  return p.fidelity().value(z) + p.prior->lmgf(p.op.apply_adjoint(z));
}

/// z/alpha - b + C grad L(C^T z) for the quadratic fidelity.
inline Vector dual_gradient(const DualProblem& p, std::span<const double> z) {
  Vector g(z.size());
  detail::dual_value_and_gradient(p, z, g);
  return g;
}

/// Minimizes the dual from z0 = 0 by L-BFGS. A line-search failure is not
/// thrown; it comes back as converged = false with the best iterate.
inline DualSolveResult solve_dual(const DualProblem& p, const SolverConfig& cfg = {}) {
  auto eval = [&p](std::span<const double> z, std::span<double> g) { return detail::dual_value_and_gradient(p, z, g); };
  lbfgs::Result r = lbfgs::minimize(eval, Vector(p.m(), 0.0), cfg.to_options());
  DualSolveResult out;
  out.z_bar = std::move(r.x);
  out.grad_norm = r.grad_norm;
  out.epsilon_cert = p.custom_fidelity ? out.grad_norm * out.grad_norm / (2.0 * p.fidelity().modulus)
                                       : p.alpha * out.grad_norm * out.grad_norm / 2.0;
  out.iterations = r.iterations;
  out.objective = r.objective;
  out.status = r.status;
  out.converged = r.status == lbfgs::Status::Converged;
  out.trace = std::move(r.trace);
  return out;
}

/// sqrt(2 alpha epsilon): how far an epsilon-minimizer of a 1/alpha-strongly
/// convex function can be from the true minimizer.
inline double epsilon_distance_bound(double alpha, double epsilon) {
  if (alpha < 0.0 || epsilon < 0.0) detail::fail(ErrorCode::NegativeInput, "alpha and epsilon must be non-negative");
  if (alpha == 0.0) detail::fail(ErrorCode::NegativeInput, "alpha must be > 0");
  return std::sqrt(2.0 * alpha * epsilon);
}

inline std::string to_string(lbfgs::Status s) {
  switch (s) {
    case lbfgs::Status::Converged: return "converged";
    case lbfgs::Status::MaxIterations: return "max_iterations";
    case lbfgs::Status::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

}  // namespace mem
