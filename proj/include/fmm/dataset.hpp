#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fmm/types.hpp"

namespace fmm {

enum class BodyDistribution { cube, sphere_surface, cluster };

BodyDistribution parse_distribution(std::string_view name);
std::string_view distribution_name(BodyDistribution d);

/// xorshift64* (Marsaglia/Vigna): x ^= x>>12; x ^= x<<25; x ^= x>>27;
/// return x * 2685821657736338717. The state is initialized by one round of
/// splitmix64 so that small seeds decorrelate; every draw sequence is fully
/// determined by the seed.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  Real uniform01();
  /// Uniform double in [lo, hi).
  Real uniform(Real lo, Real hi);

 private:
  std::uint64_t state_;
};

/// Deterministic body sets. cube: uniform positions in [0,1]^3.
/// sphere-surface: uniform on the unit sphere centered at the origin
/// (adaptive-tree stressor). cluster: 8 Gaussian-like blobs with centers in
/// [0,1]^3 (load-imbalance stressor). Charges uniform in [-1,1], shifted to
/// zero mean. Potentials are zero.
std::vector<Body> generate_bodies(BodyDistribution dist, std::int64_t n, std::uint64_t seed);

}  // namespace fmm
