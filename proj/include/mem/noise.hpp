#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "mem/error.hpp"
#include "mem/operators.hpp"
#include "mem/rng.hpp"

namespace mem {

struct NoiseSpec {
  enum class Kind { Gaussian, SaltPepper };
  Kind kind = Kind::Gaussian;
  double level = 0.10;  ///< relative sigma (gaussian) or per-outcome probability (salt-pepper)
  std::uint64_t seed = 0;
  bool raw_sigma = false;  ///< gaussian only: per-pixel sigma = level * ||x|| instead of level * ||x|| / sqrt(d)
};

/// Per-pixel standard deviation used by add_gaussian.
inline double gaussian_pixel_sigma(std::span<const double> x, double sigma_rel, bool raw_sigma = false) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double norm = std::sqrt(sq);
  if (raw_sigma || x.empty()) return sigma_rel * norm;
  return sigma_rel * norm / std::sqrt(static_cast<double>(x.size()));
}

/// b = x + eta with eta_i ~ N(0, sigma_px^2) i.i.d.; no clamping.
inline Vector add_gaussian(std::span<const double> x, double sigma_rel, std::uint64_t seed, bool raw_sigma = false) {
  if (!(sigma_rel >= 0.0)) detail::fail(ErrorCode::NegativeInput, "sigma_rel must be >= 0");
  const double sigma = gaussian_pixel_sigma(x, sigma_rel, raw_sigma);
  Vector b(x.begin(), x.end());
  if (sigma == 0.0) return b;
  Rng rng(seed);
  for (auto& v : b) v += sigma * rng.normal();
  return b;
}

/// Each pixel independently: set to 1 with probability p, to 0 with
/// probability p, unchanged otherwise. One uniform draw per pixel.
inline Vector add_salt_pepper(std::span<const double> x, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 0.5)) detail::fail(ErrorCode::InvalidProbability, "salt-pepper probability must be in [0, 0.5]");
  Vector b(x.begin(), x.end());
  if (p == 0.0) return b;
  Rng rng(seed);
  for (auto& v : b) {
    const double u = rng.uniform();
    if (u < p) {
      v = 1.0;
    } else if (u < 2.0 * p) {
      v = 0.0;
    }
  }
  return b;
}

inline Vector apply_noise(std::span<const double> x, const NoiseSpec& spec) {
  if (spec.kind == NoiseSpec::Kind::Gaussian) return add_gaussian(x, spec.level, spec.seed, spec.raw_sigma);
  return add_salt_pepper(x, spec.level, spec.seed);
}

inline std::string to_string(NoiseSpec::Kind k) { return k == NoiseSpec::Kind::Gaussian ? "gaussian" : "salt-pepper"; }

}  // namespace mem
