#pragma once

#include <cstdint>
#include <string>

#include "relucirc/dataset.hpp"

namespace relucirc {

enum class Tier { kDataI = 1, kDataII = 2, kDataIII = 3 };

std::string tier_name(Tier tier);
/// Accepts "DataI", "I", "1" (case-insensitive) and so on.
Tier parse_tier(const std::string& text);

struct SyntheticSpec {
  Tier tier = Tier::kDataI;
  std::size_t samples_per_class = 100;  // points per band
  double noise_std = 0.15;
  std::uint64_t seed = 0;
};

/// Nested 2D band datasets.
///
/// Four Gaussian blobs are drawn from one seeded stream, always in this order:
///   negative at (0,-1), positive at (0,+1), positive at (0,-2.2), negative at (0,+2.2).
/// DataI keeps the first two, DataII the first three, DataIII all four. Each
/// tier is shifted along y so its nominal mean is the origin. Noise is
/// isotropic with std `noise_std`, redrawn beyond 3 std.
///
/// With equal seeds the DataI sample mapped by nesting_offset(kDataI, kDataII)
/// reproduces the first 2*samples_per_class points of DataII (up to one
/// rounding of the shift), and likewise for DataII into DataIII.
Dataset gen_synthetic(const SyntheticSpec& spec);

/// Translation taking tier `from` coordinates into tier `to` coordinates.
Vector nesting_offset(Tier from, Tier to);

}  // namespace relucirc
