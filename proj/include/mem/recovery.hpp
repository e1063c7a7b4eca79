#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mem/error.hpp"
#include "mem/io.hpp"
#include "mem/operators.hpp"
#include "mem/prior.hpp"

namespace mem {

/// Primal MEM estimate and the optimal measure behind it: x_bar is the
/// weights-average of the prior's samples.
struct RecoveredSolution {
  Vector x_bar;
  Vector weights;
  std::size_t support_size = 0;
};

namespace detail {
inline std::size_t count_support(std::span<const double> w) {
  std::size_t k = 0;
  for (double v : w) k += v > 0.0 ? 1 : 0;
  return k;
}
}  // namespace detail

/// x_bar = grad L(C^T z_bar) with the Gibbs weights at C^T z_bar.
inline RecoveredSolution recover_primal(const EmpiricalPrior& prior, const LinearOperator& op,
                                        std::span<const double> z_bar) {
  for (double v : z_bar)
    if (!std::isfinite(v)) detail::fail(ErrorCode::NonFiniteInput, "z_bar is not finite");
  LmgfEval eval = prior.lmgf_eval(op.apply_adjoint(z_bar));
  RecoveredSolution sol;
  sol.x_bar = std::move(eval.gradient);
  sol.weights = std::move(eval.weights);
  sol.support_size = detail::count_support(sol.weights);
  return sol;
}

/// Zeroes weights below tau, renormalizes the survivors and recomputes x_bar
/// from them. tau = 0 returns the input unchanged.
inline RecoveredSolution threshold_measure(const EmpiricalPrior& prior, const RecoveredSolution& sol, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) detail::fail(ErrorCode::InvalidArgument, "threshold must be in [0, 1)");
  if (sol.weights.size() != prior.size()) detail::fail(ErrorCode::DimensionMismatch, "weights length != prior size");
  if (tau == 0.0) return sol;
  Vector w(sol.weights.size(), 0.0);
  double kept = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (sol.weights[i] >= tau) {
      w[i] = sol.weights[i];
      kept += w[i];
    }
  }
  if (kept == 0.0) detail::fail(ErrorCode::EmptySupport, "every weight is below the threshold");
  for (auto& v : w) v /= kept;
  RecoveredSolution out;
  out.x_bar = prior.combine(w);
  out.support_size = detail::count_support(w);
  out.weights = std::move(w);
  return out;
}

/// Pixels >= 1 - gamma go to 1, pixels <= gamma go to 0.
inline Vector pixel_mask(std::span<const double> x, double gamma) {
  if (!(gamma >= 0.0 && gamma < 0.5)) detail::fail(ErrorCode::InvalidGamma, "gamma must be in [0, 0.5)");
  Vector out(x.begin(), x.end());
  for (auto& v : out) {
    if (v >= 1.0 - gamma) {
      v = 1.0;
    } else if (v <= gamma) {
      v = 0.0;
    }
  }
  return out;
}

/// KL(Q || mu_n) for Q = sum_i w_i delta_{X_i} against the uniform weights.
inline double kl_to_prior(std::span<const double> weights) {
  const auto n = static_cast<double>(weights.size());
  double kl = 0.0;
  for (double w : weights)
    if (w > 0.0) kl += w * std::log(n * w);
  return std::max(kl, 0.0);
}

inline double kl_to_prior(const RecoveredSolution& sol) { return kl_to_prior(sol.weights); }

inline double relative_error(std::span<const double> x, std::span<const double> x_ref) {
  if (x.size() != x_ref.size()) detail::fail(ErrorCode::DimensionMismatch, "relative_error: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - x_ref[i]) * (x[i] - x_ref[i]);
    den += x_ref[i] * x_ref[i];
  }
  if (den == 0.0) detail::fail(ErrorCode::ZeroReference, "reference vector is zero");
  return std::sqrt(num) / std::sqrt(den);
}

/// CSV with header `index,weight`; `index` maps row i to a caller-supplied
/// id (e.g. the dataset row it was drawn from).
inline std::string weights_csv(std::span<const double> weights, std::span<const std::size_t> ids = {}) {
  std::string out = "index,weight\n";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out += std::to_string(ids.empty() ? i : ids[i]);
    out += ',';
    out += io::format_double(weights[i]);
    out += '\n';
  }
  return out;
}

}  // namespace mem
