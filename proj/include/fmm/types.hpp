#pragma once

#include <cstdint>
#include <Eigen/Dense>

namespace fmm {

using Real = double;
using Vec3 = Eigen::Matrix<Real, 3, 1>;
using CoeffVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using PotentialVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// A point source: position, charge, and the accumulated potential.
struct Body {
  Vec3 position = Vec3::Zero();
  Real charge = 0.0;
  Real potential = 0.0;
};

/// Cubic bounding domain: [center - half_side, center + half_side]^3.
struct Domain {
  Vec3 center = Vec3::Zero();
  Real half_side = 0.0;

  bool contains(const Vec3& p) const {
    return (p - center).cwiseAbs().maxCoeff() <= half_side;
  }
};

}  // namespace fmm
