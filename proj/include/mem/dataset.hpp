#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mem/error.hpp"
#include "mem/io.hpp"
#include "mem/rng.hpp"

namespace mem {

using Vector = std::vector<double>;

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Raw IDX image tensor: n_total images of rows x cols unsigned bytes.
struct ImageSet {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;          // count * rows * cols, row-major
  std::optional<std::vector<std::uint8_t>> labels;
  std::size_t trailing_bytes = 0;            // payload beyond what the header promised

  std::size_t dim() const { return rows * cols; }
  std::span<const std::uint8_t> image(std::size_t i) const { return {pixels.data() + i * dim(), dim()}; }
};

/// n x d row-major matrix of intensities in [0,1]; each row is one sample.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(std::size_t n, std::size_t d, std::vector<double> values) : n_(n), d_(d), values_(std::move(values)) {
    if (values_.size() != n_ * d_) detail::fail(ErrorCode::DimensionMismatch, "sample buffer size != n*d");
    for (double v : values_)
      if (!(v >= 0.0 && v <= 1.0)) detail::fail(ErrorCode::InvalidArgument, "sample entry outside [0,1]");
  }

  std::size_t rows() const { return n_; }
  std::size_t dim() const { return d_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * d_, d_}; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> values_;
};

namespace detail {
inline std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}
inline void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
}  // namespace detail

/// Parses an uncompressed IDX3 unsigned-byte tensor. Extra payload is
/// tolerated and counted in ImageSet::trailing_bytes.
inline ImageSet parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) detail::fail(ErrorCode::Truncated, "IDX header shorter than magic number");
  const std::uint32_t magic = detail::read_be32(bytes, 0);
  if (magic != kIdxImageMagic) detail::fail(ErrorCode::MagicMismatch, "expected IDX magic 0x00000803");
  if (bytes.size() < 16) detail::fail(ErrorCode::Truncated, "IDX header shorter than 16 bytes");
  ImageSet set;
  set.count = detail::read_be32(bytes, 4);
  set.rows = detail::read_be32(bytes, 8);
  set.cols = detail::read_be32(bytes, 12);
  const std::size_t payload = set.count * set.rows * set.cols;
  const std::size_t available = bytes.size() - 16;
  if (available < payload)
    detail::fail(ErrorCode::Truncated,
                 "IDX payload has " + std::to_string(available) + " bytes, header promises " + std::to_string(payload));
  set.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  set.trailing_bytes = available - payload;
  return set;
}

inline std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) detail::fail(ErrorCode::Truncated, "IDX header shorter than magic number");
  if (detail::read_be32(bytes, 0) != kIdxLabelMagic) detail::fail(ErrorCode::MagicMismatch, "expected IDX magic 0x00000801");
  if (bytes.size() < 8) detail::fail(ErrorCode::Truncated, "IDX label header shorter than 8 bytes");
  const std::size_t count = detail::read_be32(bytes, 4);
  if (bytes.size() - 8 < count) detail::fail(ErrorCode::Truncated, "IDX label payload shorter than header");
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

/// Inverse of parse_idx (labels are not part of the image file).
inline std::vector<std::uint8_t> serialize_idx(const ImageSet& set) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + set.pixels.size());
  detail::write_be32(out, kIdxImageMagic);
  detail::write_be32(out, static_cast<std::uint32_t>(set.count));
  detail::write_be32(out, static_cast<std::uint32_t>(set.rows));
  detail::write_be32(out, static_cast<std::uint32_t>(set.cols));
  out.insert(out.end(), set.pixels.begin(), set.pixels.end());
  return out;
}

inline std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  detail::write_be32(out, kIdxLabelMagic);
  detail::write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

/// Reads an IDX image file, gzip-compressed or not.
inline ImageSet load_idx_file(const std::filesystem::path& path) { return parse_idx(io::maybe_gunzip(io::read_file(path))); }

inline std::vector<std::uint8_t> load_idx_labels_file(const std::filesystem::path& path) {
  return parse_idx_labels(io::maybe_gunzip(io::read_file(path)));
}

inline SampleMatrix normalize(const ImageSet& set) {
  std::vector<double> values(set.pixels.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(set.pixels[i]) / 255.0;
  return SampleMatrix(set.count, set.dim(), std::move(values));
}

/// Indices of an n-subset of [0, total) drawn uniformly without replacement
/// by partial Fisher-Yates. Order is the draw order.
inline std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t n, std::uint64_t seed) {
  if (n > total) detail::fail(ErrorCode::SampleTooLarge, std::to_string(n) + " > " + std::to_string(total));
  if (n == 0) detail::fail(ErrorCode::InvalidArgument, "subsample size must be >= 1");
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

inline SampleMatrix select_rows(const SampleMatrix& data, std::span<const std::size_t> indices) {
  const std::size_t d = data.dim();
  std::vector<double> values(indices.size() * d);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= data.rows()) detail::fail(ErrorCode::InvalidArgument, "row index out of range");
    auto src = data.row(indices[k]);
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
  return SampleMatrix(indices.size(), d, std::move(values));
}

inline SampleMatrix subsample(const SampleMatrix& data, std::size_t n, std::uint64_t seed) {
  const auto idx = subsample_indices(data.rows(), n, seed);
  return select_rows(data, idx);
}

/// argmin_i ||X_i - b||_2, ties resolved to the smallest index.
inline std::size_t nearest_neighbor(const SampleMatrix& data, std::span<const double> b) {
  if (data.rows() == 0) detail::fail(ErrorCode::InvalidArgument, "empty sample matrix");
  if (b.size() != data.dim()) detail::fail(ErrorCode::DimensionMismatch, "query length != sample dimension");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto x = data.row(i);
    double dist = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double diff = x[j] - b[j];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

}  // namespace mem
