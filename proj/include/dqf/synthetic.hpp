#pragma once

#include <cstdint>

#include "dqf/core.hpp"

namespace dqf {

struct MixtureParams {
  std::size_t count = 10000;
  std::size_t dim = 16;
  std::size_t clusters = 1;
  /// Standard deviation of cluster centers around the origin; points have
  /// unit variance around their center.
  double center_spread = 3.0;
  std::uint64_t seed = 1;
};

/// Seeded isotropic Gaussian mixture. One cluster gives a standard normal
/// cloud at the origin.
VectorDataset gaussian_mixture(const MixtureParams& params);

}  // namespace dqf
