#pragma once

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mem/error.hpp"

namespace mem::io {

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::fail(ErrorCode::Io, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) detail::fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) detail::fail(ErrorCode::Io, "short write to " + path.string());
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

inline bool is_gzip(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

/// Inflates a gzip container; other input is returned unchanged.
inline Bytes maybe_gunzip(Bytes bytes) {
  if (!is_gzip(bytes)) return bytes;
  z_stream stream{};
  if (inflateInit2(&stream, 16 + MAX_WBITS) != Z_OK) detail::fail(ErrorCode::Io, "inflateInit2 failed");
  stream.next_in = bytes.data();
  stream.avail_in = static_cast<uInt>(bytes.size());
  Bytes out;
  std::uint8_t buffer[1 << 16];
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    stream.next_out = buffer;
    stream.avail_out = sizeof(buffer);
    status = inflate(&stream, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      inflateEnd(&stream);
      detail::fail(ErrorCode::Truncated, "corrupt or truncated gzip stream");
    }
    out.insert(out.end(), buffer, buffer + (sizeof(buffer) - stream.avail_out));
    if (status == Z_OK && stream.avail_in == 0 && stream.avail_out != 0) {
      inflateEnd(&stream);
      detail::fail(ErrorCode::Truncated, "gzip stream ended early");
    }
  }
  inflateEnd(&stream);
  return out;
}

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

/// Shortest decimal that round-trips the double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// PGM (binary P5, maxval <= 255)
// ---------------------------------------------------------------------------

struct GrayImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;  // row-major, in [0,1]
};

inline std::uint8_t quantize(double x) {
  const double scaled = std::round(255.0 * x);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

inline Bytes encode_pgm(std::span<const double> pixels, std::size_t rows, std::size_t cols) {
  if (pixels.size() != rows * cols) detail::fail(ErrorCode::DimensionMismatch, "pgm geometry does not match pixel count");
  const std::string header = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + pixels.size());
  for (double x : pixels) out.push_back(quantize(x));
  return out;
}

inline void write_pgm(const std::filesystem::path& path, std::span<const double> pixels, std::size_t rows,
                      std::size_t cols) {
  write_file(path, encode_pgm(pixels, rows, cols));
}

inline GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space();
    std::size_t v = 0;
    const auto* first = reinterpret_cast<const char*>(bytes.data()) + pos;
    const auto* last = reinterpret_cast<const char*>(bytes.data()) + bytes.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{}) detail::fail(ErrorCode::Parse, "malformed PGM header");
    pos += static_cast<std::size_t>(ptr - first);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') detail::fail(ErrorCode::MagicMismatch, "not a binary PGM (P5)");
  pos = 2;
  GrayImage img;
  img.cols = read_uint();
  img.rows = read_uint();
  const std::size_t maxval = read_uint();
  if (maxval == 0 || maxval > 255) detail::fail(ErrorCode::Parse, "unsupported PGM maxval");
  ++pos;  // single whitespace before raster
  const std::size_t count = img.rows * img.cols;
  if (bytes.size() < pos + count) detail::fail(ErrorCode::Truncated, "PGM raster shorter than header");
  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) img.pixels[i] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
  return img;
}

inline GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Parses a row-major numeric CSV (comma-separated decimals, one row per
/// line, blank lines ignored). Returns the values and the column count.
inline std::vector<double> parse_csv_matrix(std::string_view text, std::size_t& rows, std::size_t& cols) {
  std::vector<double> values;
  rows = 0;
  cols = 0;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line_start = line_end + 1;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t count = 0;
    std::size_t field_start = 0;
    while (field_start <= line.size()) {
      std::size_t field_end = line.find(',', field_start);
      if (field_end == std::string_view::npos) field_end = line.size();
      std::string_view field = line.substr(field_start, field_end - field_start);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size())
        detail::fail(ErrorCode::Parse, "bad CSV number '" + std::string(field) + "'");
      values.push_back(v);
      ++count;
      field_start = field_end + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      detail::fail(ErrorCode::Parse, "ragged CSV row " + std::to_string(rows + 1));
    }
    ++rows;
  }
  if (rows == 0) detail::fail(ErrorCode::Parse, "empty CSV matrix");
  return values;
}

}  // namespace mem::io
