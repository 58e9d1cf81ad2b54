#include "fmm/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fmm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Xorshift64Star::Xorshift64Star(std::uint64_t seed) : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;  // xorshift state must be nonzero
}

std::uint64_t Xorshift64Star::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 2685821657736338717ULL;
}

Real Xorshift64Star::uniform01() {
  return static_cast<Real>(next() >> 11) * 0x1.0p-53;
}

Real Xorshift64Star::uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform01(); }

BodyDistribution parse_distribution(std::string_view name) {
  if (name == "cube") return BodyDistribution::cube;
  if (name == "sphere-surface") return BodyDistribution::sphere_surface;
  if (name == "cluster") return BodyDistribution::cluster;
  throw std::invalid_argument("unknown distribution name: " + std::string(name));
}

std::string_view distribution_name(BodyDistribution d) {
  switch (d) {
    case BodyDistribution::cube: return "cube";
    case BodyDistribution::sphere_surface: return "sphere-surface";
    case BodyDistribution::cluster: return "cluster";
  }
  return "?";
}

namespace {

Vec3 sphere_surface_point(Xorshift64Star& rng) {
  // Rejection from the cube onto the unit sphere; uses only arithmetic and
  // sqrt so the sequence is reproducible bit-for-bit across platforms.
  for (;;) {
    const Vec3 v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const Real r2 = v.squaredNorm();
    if (r2 > 1.0 || r2 < 1e-8) continue;
    return v / std::sqrt(r2);
  }
}

// Irwin-Hall approximation of a standard normal: sum of 12 uniforms minus 6.
Real pseudo_normal(Xorshift64Star& rng) {
  Real s = 0.0;
  for (int k = 0; k < 12; ++k) s += rng.uniform01();
  return s - 6.0;
}

}  // namespace

std::vector<Body> generate_bodies(BodyDistribution dist, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("body count must be >= 1");
  Xorshift64Star rng(seed);

  constexpr int kClusterCount = 8;
  constexpr Real kClusterSigma = 0.03;
  std::vector<Vec3> blob_centers;
  if (dist == BodyDistribution::cluster) {
    blob_centers.reserve(kClusterCount);
    for (int k = 0; k < kClusterCount; ++k) {
      blob_centers.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
    }
  }

  std::vector<Body> bodies(static_cast<std::size_t>(n));
  for (Body& b : bodies) {
    switch (dist) {
      case BodyDistribution::cube:
        b.position = Vec3(rng.uniform01(), rng.uniform01(), rng.uniform01());
        break;
      case BodyDistribution::sphere_surface:
        b.position = sphere_surface_point(rng);
        break;
      case BodyDistribution::cluster: {
        const Vec3& c = blob_centers[rng.next() % kClusterCount];
        b.position = c + kClusterSigma * Vec3(pseudo_normal(rng), pseudo_normal(rng),
                                              pseudo_normal(rng));
        break;
      }
    }
    b.charge = rng.uniform(-1.0, 1.0);
  }

  Real mean = 0.0;
  for (const Body& b : bodies) mean += b.charge;
  mean /= static_cast<Real>(n);
  for (Body& b : bodies) b.charge -= mean;
  return bodies;
}

}  // namespace fmm
