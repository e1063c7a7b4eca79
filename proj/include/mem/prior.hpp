#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "mem/dataset.hpp"
#include "mem/error.hpp"
#include "mem/parallel.hpp"

namespace mem {

/// Log-moment generating function of the empirical prior at one point,
/// together with its gradient and the Gibbs (softmax) weights that produce it.
struct LmgfEval {
  double value = 0.0;
  Vector gradient;  ///< sum_i weights[i] * X_i
  Vector weights;   ///< on the simplex
};

/// Uniform atomic measure (1/n) sum_i delta_{X_i} on samples in [0,1]^d.
class EmpiricalPrior {
 public:
  enum class Precision { Float64, Float32 };

  static constexpr std::size_t kChunkRows = 256;
  static constexpr double kWeightFlush = 1e-300;

  explicit EmpiricalPrior(const SampleMatrix& samples, Precision precision = Precision::Float64)
      : n_(samples.rows()), d_(samples.dim()), precision_(precision) {
    if (n_ == 0) detail::fail(ErrorCode::InvalidArgument, "empirical prior needs at least one sample");
    if (precision == Precision::Float64) {
      storage_ = std::vector<double>(samples.values().begin(), samples.values().end());
    } else {
      storage_ = std::vector<float>(samples.values().begin(), samples.values().end());
    }
    std::visit([&](const auto& s) { radius_ = compute_radius(s); }, storage_);
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  Precision precision() const { return precision_; }
  /// |X| = max_i ||X_i||_2.
  double radius() const { return radius_; }

  double at(std::size_t i, std::size_t j) const {
    return std::visit([&](const auto& s) { return static_cast<double>(s[i * d_ + j]); }, storage_);
  }

  Vector sample(std::size_t i) const {
    Vector out(d_);
    for (std::size_t j = 0; j < d_; ++j) out[j] = at(i, j);
    return out;
  }

  /// log( (1/n) sum_i exp<y, X_i> ), shifted by the max score so nothing
  /// overflows.
  double lmgf(std::span<const double> y) const {
    check_input(y);
    const Vector scores = compute_scores(y);
    const double top = *std::max_element(scores.begin(), scores.end());
    return top + std::log(sum_shifted_exp(scores, top)) - std::log(static_cast<double>(n_));
  }

  LmgfEval lmgf_eval(std::span<const double> y) const {
    check_input(y);
    LmgfEval out;
    const Vector scores = compute_scores(y);
    const double top = *std::max_element(scores.begin(), scores.end());
    const double total = sum_shifted_exp(scores, top);
    out.value = top + std::log(total) - std::log(static_cast<double>(n_));
    out.weights.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double w = std::exp(scores[i] - top) / total;
      out.weights[i] = w < kWeightFlush ? 0.0 : w;
    }
    out.gradient = combine(out.weights);
    return out;
  }

  /// sum_i weights[i] * X_i with the same fixed chunked reduction as lmgf_eval.
  Vector combine(std::span<const double> weights) const {
    if (weights.size() != n_) detail::fail(ErrorCode::DimensionMismatch, "weights length != n");
    const std::size_t chunks = chunk_count();
    std::vector<Vector> partial(chunks);
    std::visit(
        [&](const auto& s) {
          parallel::for_each_index(chunks, [&](std::size_t c) {
            Vector acc(d_, 0.0);
            const std::size_t end = std::min(n_, (c + 1) * kChunkRows);
            for (std::size_t i = c * kChunkRows; i < end; ++i) {
              const double w = weights[i];
              if (w == 0.0) continue;
              const auto* row = s.data() + i * d_;
              for (std::size_t j = 0; j < d_; ++j) acc[j] += w * static_cast<double>(row[j]);
            }
            partial[c] = std::move(acc);
          });
        },
        storage_);
    return parallel::pairwise_reduce(partial, [](Vector& a, const Vector& b) {
      for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
    });
  }

  /// exp(lmgf(y)); refuses when some <y, X_i> exceeds 700.
  double mgf(std::span<const double> y) const {
    check_input(y);
    const Vector scores = compute_scores(y);
    const double top = *std::max_element(scores.begin(), scores.end());
    if (top > 700.0) detail::fail(ErrorCode::OverflowRisk, "max <y, X_i> exceeds 700");
    return std::exp(top + std::log(sum_shifted_exp(scores, top)) - std::log(static_cast<double>(n_)));
  }

  /// Covariance of X under the Gibbs weights at y (the Hessian of lmgf).
  /// Diagnostic only: d <= 64.
  Eigen::MatrixXd lmgf_hessian(std::span<const double> y) const {
    if (d_ > 64) detail::fail(ErrorCode::DimensionTooLarge, "lmgf_hessian is limited to d <= 64");
    const LmgfEval eval = lmgf_eval(y);
    const auto d = static_cast<Eigen::Index>(d_);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd x(d);
    for (std::size_t i = 0; i < n_; ++i) {
      if (eval.weights[i] == 0.0) continue;
      for (std::size_t j = 0; j < d_; ++j) x(static_cast<Eigen::Index>(j)) = at(i, j);
      second.noalias() += eval.weights[i] * (x * x.transpose());
    }
    const Eigen::Map<const Eigen::VectorXd> g(eval.gradient.data(), d);
    Eigen::MatrixXd h = second - g * g.transpose();
    return 0.5 * (h + h.transpose());
  }

 private:
  template <typename Storage>
  double compute_radius(const Storage& s) const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < d_; ++j) sq += static_cast<double>(s[i * d_ + j]) * static_cast<double>(s[i * d_ + j]);
      best = std::max(best, sq);
    }
    return std::sqrt(best);
  }

  void check_input(std::span<const double> y) const {
    if (y.size() != d_) detail::fail(ErrorCode::DimensionMismatch, "lmgf argument length != d");
    for (double v : y)
      if (!std::isfinite(v)) detail::fail(ErrorCode::NonFiniteInput, "lmgf argument is not finite");
  }

  std::size_t chunk_count() const { return (n_ + kChunkRows - 1) / kChunkRows; }

  Vector compute_scores(std::span<const double> y) const {
    Vector scores(n_);
    std::visit(
        [&](const auto& s) {
          parallel::for_each_index(chunk_count(), [&](std::size_t c) {
            const std::size_t end = std::min(n_, (c + 1) * kChunkRows);
            for (std::size_t i = c * kChunkRows; i < end; ++i) {
              const auto* row = s.data() + i * d_;
              double acc = 0.0;
              for (std::size_t j = 0; j < d_; ++j) acc += y[j] * static_cast<double>(row[j]);
              scores[i] = acc;
            }
          });
        },
        storage_);
    return scores;
  }

  double sum_shifted_exp(const Vector& scores, double top) const {
    std::vector<double> partial(chunk_count());
    for (std::size_t c = 0; c < partial.size(); ++c) {
      const std::size_t end = std::min(n_, (c + 1) * kChunkRows);
      double acc = 0.0;
      for (std::size_t i = c * kChunkRows; i < end; ++i) acc += std::exp(scores[i] - top);
      partial[c] = acc;
    }
    return parallel::pairwise_reduce(partial, [](double& a, double b) { a += b; });
  }

  std::size_t n_;
  std::size_t d_;
  Precision precision_;
  std::variant<std::vector<double>, std::vector<float>> storage_;
  double radius_ = 0.0;
};

}  // namespace mem
