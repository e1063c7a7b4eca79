#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mem/error.hpp"
#include "mem/io.hpp"
#include "mem/rng.hpp"

namespace mem {

using Vector = std::vector<double>;

/// The forward map C : R^d -> R^m of the inverse problem b = Cx + noise.
/// Immutable; copies share the payload.
class LinearOperator {
 public:
  enum class Kind { Identity, Dense, SeparableBlur };

  static LinearOperator identity(std::size_t d) { return LinearOperator(Kind::Identity, d, d, IdentityPayload{}); }

  static LinearOperator dense(Eigen::MatrixXd matrix) {
    const auto m = static_cast<std::size_t>(matrix.rows());
    const auto d = static_cast<std::size_t>(matrix.cols());
    return LinearOperator(Kind::Dense, m, d, std::make_shared<const Eigen::MatrixXd>(std::move(matrix)));
  }

  /// Same 1-D kernel applied along rows then columns of a rows x cols image,
  /// zero padding outside the image. Kernel length must be odd; its middle
  /// tap is centred on the output pixel.
  static LinearOperator separable_blur(std::vector<double> kernel, std::size_t rows, std::size_t cols) {
    if (kernel.empty() || kernel.size() % 2 == 0)
      detail::fail(ErrorCode::InvalidArgument, "blur kernel length must be odd");
    for (double k : kernel)
      if (!std::isfinite(k)) detail::fail(ErrorCode::NonFiniteInput, "blur kernel has non-finite tap");
    auto payload = std::make_shared<const BlurPayload>(BlurPayload{std::move(kernel), rows, cols});
    return LinearOperator(Kind::SeparableBlur, rows * cols, rows * cols, std::move(payload));
  }

  Kind kind() const { return kind_; }
  std::size_t rows() const { return m_; }  ///< m
  std::size_t cols() const { return d_; }  ///< d

  Vector apply(std::span<const double> x) const {
    if (x.size() != d_) detail::fail(ErrorCode::DimensionMismatch, "apply: input length != d");
    switch (kind_) {
      case Kind::Identity:
        return Vector(x.begin(), x.end());
      case Kind::Dense: {
        const auto& a = *std::get<DensePayload>(payload_);
        Vector y(m_);
        Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(m_)) =
            a * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(d_));
        return y;
      }
      case Kind::SeparableBlur: {
        const auto& blur = *std::get<BlurPayload_>(payload_);
        return blur_pass(blur, blur_pass(blur, x, Axis::Row, false), Axis::Col, false);
      }
    }
    return {};
  }

  Vector apply_adjoint(std::span<const double> z) const {
    if (z.size() != m_) detail::fail(ErrorCode::DimensionMismatch, "apply_adjoint: input length != m");
    switch (kind_) {
      case Kind::Identity:
        return Vector(z.begin(), z.end());
      case Kind::Dense: {
        const auto& a = *std::get<DensePayload>(payload_);
        Vector x(d_);
        Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(d_)) =
            a.transpose() * Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(m_));
        return x;
      }
      case Kind::SeparableBlur: {
        const auto& blur = *std::get<BlurPayload_>(payload_);
        return blur_pass(blur, blur_pass(blur, z, Axis::Col, true), Axis::Row, true);
      }
    }
    return {};
  }

  /// Materializes C column by column.
  Eigen::MatrixXd to_dense() const {
    if (kind_ == Kind::Dense) return *std::get<DensePayload>(payload_);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(d_));
    Vector e(d_, 0.0);
    for (std::size_t j = 0; j < d_; ++j) {
      e[j] = 1.0;
      const Vector col = apply(e);
      for (std::size_t i = 0; i < m_; ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
      e[j] = 0.0;
    }
    return out;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Identity: return "identity";
      case Kind::Dense: return "dense";
      case Kind::SeparableBlur: return "separable-blur";
    }
    return "unknown";
  }

  std::span<const double> blur_kernel() const {
    if (kind_ != Kind::SeparableBlur) return {};
    return std::get<BlurPayload_>(payload_)->kernel;
  }

 private:
  struct IdentityPayload {};
  struct BlurPayload {
    std::vector<double> kernel;
    std::size_t rows;
    std::size_t cols;
  };
  using DensePayload = std::shared_ptr<const Eigen::MatrixXd>;
  using BlurPayload_ = std::shared_ptr<const BlurPayload>;
  using Payload = std::variant<IdentityPayload, DensePayload, BlurPayload_>;

  enum class Axis { Row, Col };

  LinearOperator(Kind kind, std::size_t m, std::size_t d, Payload payload)
      : kind_(kind), m_(m), d_(d), payload_(std::move(payload)) {}

  // Forward: out[p] = sum_t k[t] * in[p + (t - c)] along the axis.
  // Adjoint scatters with the same taps.
  static Vector blur_pass(const BlurPayload& blur, std::span<const double> in, Axis axis, bool adjoint) {
    const auto& k = blur.kernel;
    const auto c = static_cast<std::ptrdiff_t>(k.size() / 2);
    const auto rows = static_cast<std::ptrdiff_t>(blur.rows);
    const auto cols = static_cast<std::ptrdiff_t>(blur.cols);
    Vector out(in.size(), 0.0);
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
      for (std::ptrdiff_t q = 0; q < cols; ++q) {
        const std::ptrdiff_t here = r * cols + q;
        for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(k.size()); ++t) {
          const std::ptrdiff_t rr = axis == Axis::Col ? r + t - c : r;
          const std::ptrdiff_t qq = axis == Axis::Row ? q + t - c : q;
          if (rr < 0 || rr >= rows || qq < 0 || qq >= cols) continue;
          const std::ptrdiff_t there = rr * cols + qq;
          if (adjoint) {
            out[static_cast<std::size_t>(there)] += k[static_cast<std::size_t>(t)] * in[static_cast<std::size_t>(here)];
          } else {
            out[static_cast<std::size_t>(here)] += k[static_cast<std::size_t>(t)] * in[static_cast<std::size_t>(there)];
          }
        }
      }
    }
    return out;
  }

  Kind kind_;
  std::size_t m_;
  std::size_t d_;
  Payload payload_;
};

/// Loads a dense operator from a row-major CSV matrix file.
inline LinearOperator load_dense_operator_csv(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  std::size_t rows = 0;
  std::size_t cols = 0;
  const auto values = io::parse_csv_matrix({reinterpret_cast<const char*>(bytes.data()), bytes.size()}, rows, cols);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
  return LinearOperator::dense(std::move(a));
}

struct NormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// ||C|| by power iteration on C^T C, stopping once the relative change of
/// the Rayleigh quotient drops below tol. A non-converged run still returns
/// its best estimate with converged = false.
inline NormEstimate spectral_norm(const LinearOperator& op, double tol, std::size_t max_iter = 10000) {
  if (!(tol > 0.0)) detail::fail(ErrorCode::InvalidArgument, "spectral_norm: tol must be > 0");
  const std::size_t d = op.cols();
  if (d == 0) return {0.0, 0, true};
  Rng rng(0x5EED5EEDull);
  Vector v(d);
  for (auto& vi : v) vi = 1.0 + 0.1 * rng.uniform();
  auto normalize = [](Vector& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    s = std::sqrt(s);
    if (s > 0.0)
      for (auto& x : u) x /= s;
    return s;
  };
  normalize(v);
  double lambda = -1.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Vector w = op.apply_adjoint(op.apply(v));
    double next = 0.0;
    for (std::size_t i = 0; i < d; ++i) next += v[i] * w[i];
    if (normalize(w) == 0.0) return {0.0, it, true};
    v = std::move(w);
    if (lambda >= 0.0 && std::abs(next - lambda) <= tol * std::abs(next)) return {std::sqrt(std::max(next, 0.0)), it, true};
    lambda = next;
  }
  return {std::sqrt(std::max(lambda, 0.0)), max_iter, false};
}

namespace detail {
// Smallest eigenvalue of C^T C by inverse iteration, each solve by CG.
inline double sigma_min_inverse_iteration(const LinearOperator& op, double tol, std::size_t max_iter) {
  const std::size_t d = op.cols();
  auto gram = [&](const Vector& x) { return op.apply_adjoint(op.apply(x)); };
  auto dot = [](const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  Rng rng(0xC0FFEEull);
  Vector v(d);
  for (auto& vi : v) vi = rng.uniform() - 0.5;
  double nv = std::sqrt(dot(v, v));
  for (auto& vi : v) vi /= nv;
  double lambda = -1.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    // Solve (C^T C) w = v.
    Vector w(d, 0.0), r = v, p = v;
    double rr = dot(r, r);
    for (std::size_t k = 0; k < 10 * d && std::sqrt(rr) > 1e-14; ++k) {
      Vector ap = gram(p);
      const double pap = dot(p, ap);
      if (pap <= 0.0) fail(ErrorCode::InvalidRank, "C^T C is singular");
      const double step = rr / pap;
      for (std::size_t i = 0; i < d; ++i) {
        w[i] += step * p[i];
        r[i] -= step * ap[i];
      }
      const double rr_next = dot(r, r);
      for (std::size_t i = 0; i < d; ++i) p[i] = r[i] + (rr_next / rr) * p[i];
      rr = rr_next;
    }
    const double nw = std::sqrt(dot(w, w));
    if (!(nw > 0.0) || !std::isfinite(nw)) fail(ErrorCode::InvalidRank, "inverse iteration diverged");
    for (auto& wi : w) wi /= nw;
    const double next = dot(w, gram(w));
    v = std::move(w);
    if (lambda >= 0.0 && std::abs(next - lambda) <= tol * std::abs(next)) return std::sqrt(std::max(next, 0.0));
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}
}  // namespace detail

/// Smallest singular value of C (m >= d). Dense SVD up to `dense_limit`
/// columns, inverse iteration beyond. Throws InvalidRank when the estimate is
/// below tol, i.e. rank(C) < d for practical purposes.
inline double sigma_min(const LinearOperator& op, double tol, std::size_t dense_limit = 2048) {
  if (!(tol > 0.0)) detail::fail(ErrorCode::InvalidArgument, "sigma_min: tol must be > 0");
  if (op.rows() < op.cols())
    detail::fail(ErrorCode::InvalidRank, "m < d: C cannot have full column rank");
  double s = 0.0;
  if (op.kind() == LinearOperator::Kind::Identity) {
    s = 1.0;
  } else if (op.cols() <= dense_limit) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(op.to_dense());
    s = svd.singularValues().minCoeff();
  } else {
    s = detail::sigma_min_inverse_iteration(op, 1e-12, 10000);
  }
  if (s < tol) detail::fail(ErrorCode::InvalidRank, "sigma_min(C) = " + io::format_double(s) + " below tolerance");
  return s;
}

}  // namespace mem
