#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mem/dataset.hpp"
#include "mem/error.hpp"
#include "mem/operators.hpp"
#include "mem/parallel.hpp"
#include "mem/prior.hpp"
#include "mem/recovery.hpp"
#include "mem/rng.hpp"
#include "mem/solver.hpp"

namespace mem {

// ---------------------------------------------------------------------------
// Explicit constants
// ---------------------------------------------------------------------------

struct ProblemConstants {
  double rho_hat = 0.0;           ///< 2 alpha (||b|| + ||C|| |X|)
  double rho0 = 0.0;              ///< max{rho_hat, rho_hat^2/(2 alpha) + ||b|| rho_hat + rho_hat ||C|| |X|}
  double K_hat = 0.0;             ///< per-coordinate Hessian bound on B(ball_radius_used)
  double K = 0.0;                 ///< d * K_hat, Lipschitz constant of grad L on that ball
  double ball_radius_used = 0.0;  ///< ||C|| (rho0 + sqrt(2 alpha epsilon))

  // Inputs, kept for reporting.
  double alpha = 0.0;
  double norm_b = 0.0;
  double op_norm = 0.0;
  double radius = 0.0;
  double epsilon = 0.0;
  std::size_t d = 0;
};

/// Constants from their scalar inputs. K_hat may be +inf when the exponent
/// overflows; it is an upper bound either way.
inline ProblemConstants compute_constants(double alpha, double norm_b, double op_norm, double radius, std::size_t d,
                                          double epsilon) {
  if (!(alpha > 0.0)) detail::fail(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (norm_b < 0.0 || radius < 0.0 || epsilon < 0.0) detail::fail(ErrorCode::NegativeInput, "negative constant input");
  if (!(op_norm > 0.0)) detail::fail(ErrorCode::InvalidRank, "||C|| = 0: operator is rank deficient");
  ProblemConstants c;
  c.alpha = alpha;
  c.norm_b = norm_b;
  c.op_norm = op_norm;
  c.radius = radius;
  c.epsilon = epsilon;
  c.d = d;
  c.rho_hat = 2.0 * alpha * (norm_b + op_norm * radius);
  c.rho0 = std::max(c.rho_hat, c.rho_hat * c.rho_hat / (2.0 * alpha) + norm_b * c.rho_hat + c.rho_hat * op_norm * radius);
  c.ball_radius_used = op_norm * (c.rho0 + std::sqrt(2.0 * alpha * epsilon));
  const double t = c.ball_radius_used * radius;
  c.K_hat = radius * std::exp(4.0 * t) + radius * radius * std::exp(2.0 * t);
  c.K = static_cast<double>(d) * c.K_hat;
  return c;
}

inline double vector_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// ||C|| to 1e-12 relative (exact for the identity).
inline double operator_norm(const LinearOperator& op) {
  if (op.kind() == LinearOperator::Kind::Identity) return 1.0;
  return spectral_norm(op, 1e-12).value;
}

/// Constants of a dual problem; epsilon defaults to the certificate implied
/// by a solve stopped exactly at grad_tol.
inline ProblemConstants compute_constants(const DualProblem& p, double epsilon) {
  return compute_constants(p.alpha, vector_norm(p.b), operator_norm(p.op), p.prior->radius(), p.d(), epsilon);
}

inline ProblemConstants compute_constants(const DualProblem& p, const SolverConfig& cfg = {}) {
  return compute_constants(p, p.alpha * cfg.grad_tol * cfg.grad_tol / 2.0);
}

// ---------------------------------------------------------------------------
// Sup-distance between log-MGFs on a dual ball
// ---------------------------------------------------------------------------

/// Uniform point in the Euclidean ball of radius rho in R^m.
inline Vector sample_ball(std::size_t m, double rho, Rng& rng) {
  Vector z(m);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (auto& v : z) {
      v = rng.normal();
      sq += v * v;
    }
  } while (sq == 0.0);
  const double r = rho * std::pow(rng.uniform(), 1.0 / static_cast<double>(m)) / std::sqrt(sq);
  for (auto& v : z) v *= r;
  return z;
}

/// max over `samples` uniform points z in B_rho of |L_nu(C^T z) - L_mu(C^T z)|.
/// A lower bound on the true maximum; with a fixed seed the estimate is
/// non-decreasing in `samples`.
inline double epi_distance_estimate(const EmpiricalPrior& nu, const EmpiricalPrior& mu, const LinearOperator& op,
                                    double rho, std::size_t samples, std::uint64_t seed) {
  if (!(rho > 0.0)) detail::fail(ErrorCode::InvalidArgument, "rho must be > 0");
  if (samples == 0) detail::fail(ErrorCode::InvalidArgument, "samples must be >= 1");
  if (nu.dim() != op.cols() || mu.dim() != op.cols()) detail::fail(ErrorCode::DimensionMismatch, "prior dim != d");
  Rng rng(seed);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector ctz = op.apply_adjoint(sample_ball(op.rows(), rho, rng));
    best = std::max(best, std::abs(nu.lmgf(ctz) - mu.lmgf(ctz)));
  }
  return best;
}

/// Upper bound on max_{z in B_rho} |L_nu(C^T z) - L_mu(C^T z)| for m <= 4:
/// the maximum over a uniform grid on [-rho, rho]^m (points within one
/// covering radius of the ball) plus Lipschitz padding. The difference is
/// ||C|| (|X_nu| + |X_mu|)-Lipschitz in z and every point of the ball lies
/// within h sqrt(m)/2 of a grid node.
inline double epi_distance_grid_upper(const EmpiricalPrior& nu, const EmpiricalPrior& mu, const LinearOperator& op,
                                      double rho, std::size_t points_per_axis) {
  const std::size_t m = op.rows();
  if (m == 0 || m > 4) detail::fail(ErrorCode::DimensionTooLarge, "grid estimate supports 1 <= m <= 4");
  if (!(rho > 0.0)) detail::fail(ErrorCode::InvalidArgument, "rho must be > 0");
  if (points_per_axis < 2) detail::fail(ErrorCode::InvalidArgument, "need at least 2 grid points per axis");
  const double h = 2.0 * rho / static_cast<double>(points_per_axis - 1);
  const double cover = h * std::sqrt(static_cast<double>(m)) / 2.0;
  const double lipschitz = operator_norm(op) * (nu.radius() + mu.radius());
  std::size_t total = 1;
  for (std::size_t k = 0; k < m; ++k) total *= points_per_axis;
  double best = 0.0;
  Vector z(m);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      z[k] = -rho + h * static_cast<double>(rest % points_per_axis);
      rest /= points_per_axis;
      sq += z[k] * z[k];
    }
    if (std::sqrt(sq) > rho + cover) continue;
    const Vector ctz = op.apply_adjoint(z);
    best = std::max(best, std::abs(nu.lmgf(ctz) - mu.lmgf(ctz)));
  }
  return best + lipschitz * cover;
}

// ---------------------------------------------------------------------------
// MGF bounds
// ---------------------------------------------------------------------------

struct MgfBoundsReport {
  double rho = 0.0;
  double op_norm = 0.0;
  double radius = 0.0;
  double log_lower = 0.0;  ///< -rho ||C|| |X|
  double log_upper = 0.0;  ///< +rho ||C|| |X|
  std::size_t trials = 0;
  std::size_t violations = 0;
  double min_margin_lower = std::numeric_limits<double>::infinity();  ///< min of log M - log_lower
  double min_margin_upper = std::numeric_limits<double>::infinity();  ///< min of log_upper - log M
  double mean_log_mgf = 0.0;
};

/// Samples z in B_rho and checks exp(-rho||C|||X|) <= M(C^T z) <= exp(rho||C|||X|),
/// comparing logarithms so nothing overflows. The first probe is z = 0.
/// Violations are counted, not thrown; any violation is a bug.
inline MgfBoundsReport mgf_bounds_check(const EmpiricalPrior& prior, const LinearOperator& op, double rho,
                                        std::size_t trials, std::uint64_t seed) {
  if (!(rho > 0.0)) detail::fail(ErrorCode::InvalidArgument, "rho must be > 0");
  if (trials == 0) detail::fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  MgfBoundsReport rep;
  rep.rho = rho;
  rep.op_norm = operator_norm(op);
  rep.radius = prior.radius();
  rep.log_upper = rho * rep.op_norm * rep.radius;
  rep.log_lower = -rep.log_upper;
  rep.trials = trials;
  // Rounding allowance for lmgf itself and for the iterative ||C|| estimate.
  const double slack = 1e-12 * (1.0 + rep.log_upper);
  Rng rng(seed);
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector z = t == 0 ? Vector(op.rows(), 0.0) : sample_ball(op.rows(), rho, rng);
    const double l = prior.lmgf(op.apply_adjoint(z));
    sum += l;
    const double lo = l - rep.log_lower;
    const double hi = rep.log_upper - l;
    rep.min_margin_lower = std::min(rep.min_margin_lower, lo);
    rep.min_margin_upper = std::min(rep.min_margin_upper, hi);
    if (lo < -slack || hi < -slack) ++rep.violations;
  }
  rep.mean_log_mgf = sum / static_cast<double>(trials);
  return rep;
}

// ---------------------------------------------------------------------------
// Primal error bound
// ---------------------------------------------------------------------------

/// D/(alpha s) + 2 sqrt(2)/(sqrt(alpha) s) sqrt(D) + (K ||C|| sqrt(2 alpha) + 2/(sqrt(alpha) s)) sqrt(eps),
/// s = sigma_min(C). The epsilon term is dropped (not inf * 0) when eps = 0.
inline double primal_error_bound_value(double alpha, double sigma_min_c, double op_norm, double K, double epsilon,
                                       double d_rho) {
  if (!(sigma_min_c > 0.0)) detail::fail(ErrorCode::RankDeficient, "sigma_min(C) must be > 0");
  if (epsilon < 0.0 || d_rho < 0.0) detail::fail(ErrorCode::NegativeInput, "epsilon and D must be >= 0");
  const double sa = std::sqrt(alpha);
  double bound = d_rho / (alpha * sigma_min_c) + 2.0 * std::sqrt(2.0) / (sa * sigma_min_c) * std::sqrt(d_rho);
  if (epsilon > 0.0) bound += (K * op_norm * std::sqrt(2.0 * alpha) + 2.0 / (sa * sigma_min_c)) * std::sqrt(epsilon);
  return bound;
}

/// Right-hand side of the error bound for ||x_bar(nu, eps) - x_bar(mu)||,
/// where mu is the prior of `p`. Constants use |X| = max of both radii.
inline double primal_error_bound(const DualProblem& p, const EmpiricalPrior& nu, double epsilon, double d_rho) {
  double s = 0.0;
  try {
    s = sigma_min(p.op, 1e-12);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidRank) detail::fail(ErrorCode::RankDeficient, e.what());
    throw;
  }
  const double radius = std::max(p.prior->radius(), nu.radius());
  const ProblemConstants c = compute_constants(p.alpha, vector_norm(p.b), operator_norm(p.op), radius, p.d(), epsilon);
  return primal_error_bound_value(p.alpha, s, c.op_norm, c.K, epsilon, d_rho);
}

// ---------------------------------------------------------------------------
// Convergence-rate experiment
// ---------------------------------------------------------------------------

struct RateRecord {
  std::size_t n = 0;
  std::size_t trial = 0;
  double rel_error = 0.0;
  double epsilon_cert = 0.0;
  double wall_time = 0.0;  ///< seconds
  bool converged = false;
};

struct RateTable {
  std::vector<RateRecord> records;  ///< grid-major, trial-minor
  std::size_t reference_n = 0;
  Vector reference_x;
  double reference_epsilon = 0.0;

  /// Mean rel_error per distinct n, in grid order.
  std::vector<std::pair<std::size_t, double>> mean_by_n() const {
    std::vector<std::pair<std::size_t, double>> out;
    std::vector<std::size_t> counts;
    for (const auto& r : records) {
      if (out.empty() || out.back().first != r.n) {
        out.emplace_back(r.n, 0.0);
        counts.push_back(0);
      }
      out.back().second += r.rel_error;
      ++counts.back();
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].second /= static_cast<double>(counts[i]);
    return out;
  }
};

/// `points` sample sizes spaced linearly on [lo, hi], rounded to nearest.
inline std::vector<std::size_t> linear_grid(std::size_t lo, std::size_t hi, std::size_t points) {
  if (points == 0 || lo == 0 || lo > hi) detail::fail(ErrorCode::InvalidArgument, "grid needs 1 <= lo <= hi, points >= 1");
  if (points == 1) return {lo};
  std::vector<std::size_t> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(points - 1);
    grid[k] = static_cast<std::size_t>(std::llround(static_cast<double>(lo) + t * static_cast<double>(hi - lo)));
  }
  return grid;
}

struct RateExperimentOptions {
  SolverConfig solver;
  EmpiricalPrior::Precision precision = EmpiricalPrior::Precision::Float64;
};

/// For each grid size n and trial t: draw n rows without replacement with
/// seed derive_seed(seed, n, t), solve the dual, and record the relative
/// error of the recovered image against the full-data solution. Cells run
/// in parallel; records do not depend on scheduling (wall_time aside).
inline RateTable rate_experiment(const SampleMatrix& data, std::span<const double> b, const LinearOperator& op,
                                 double alpha, std::span<const std::size_t> n_grid, std::size_t trials,
                                 std::uint64_t seed, const RateExperimentOptions& options = {}) {
  if (trials == 0) detail::fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (n_grid.empty()) detail::fail(ErrorCode::InvalidArgument, "empty sample-size grid");
  for (std::size_t n : n_grid)
    if (n > data.rows()) detail::fail(ErrorCode::SampleTooLarge, "grid size " + std::to_string(n) + " exceeds data");
  const Vector b_vec(b.begin(), b.end());

  RateTable table;
  table.reference_n = data.rows();
  {
    auto full = std::make_shared<const EmpiricalPrior>(data, options.precision);
    const DualProblem ref_problem(full, op, b_vec, alpha);
    const DualSolveResult ref = solve_dual(ref_problem, options.solver);
    table.reference_x = recover_primal(*full, op, ref.z_bar).x_bar;
    table.reference_epsilon = ref.epsilon_cert;
  }

  table.records.resize(n_grid.size() * trials);
  parallel::for_each_index(table.records.size(), [&](std::size_t cell) {
    const std::size_t n = n_grid[cell / trials];
    const std::size_t trial = cell % trials;
    const auto start = std::chrono::steady_clock::now();
    auto prior = std::make_shared<const EmpiricalPrior>(subsample(data, n, derive_seed(seed, n, trial)), options.precision);
    const DualProblem problem(prior, op, b_vec, alpha);
    const DualSolveResult res = solve_dual(problem, options.solver);
    const Vector x = recover_primal(*prior, op, res.z_bar).x_bar;
    RateRecord& rec = table.records[cell];
    rec.n = n;
    rec.trial = trial;
    rec.rel_error = relative_error(x, table.reference_x);
    rec.epsilon_cert = res.epsilon_cert;
    rec.converged = res.converged;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return table;
}

/// CSV `n,trial,rel_error,epsilon_cert,wall_time_s`. With include_timing
/// false the timing column is written as 0 so the file is reproducible.
inline std::string rate_table_csv(const RateTable& table, bool include_timing) {
  std::string out = "n,trial,rel_error,epsilon_cert,wall_time_s\n";
  for (const auto& r : table.records) {
    out += std::to_string(r.n) + "," + std::to_string(r.trial) + "," + io::format_double(r.rel_error) + "," +
           io::format_double(r.epsilon_cert) + "," + (include_timing ? io::format_double(r.wall_time) : "0") + "\n";
  }
  return out;
}

/// Spearman rank correlation (average ranks for ties).
inline double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) detail::fail(ErrorCode::InvalidArgument, "spearman needs two equal-length series");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace mem
