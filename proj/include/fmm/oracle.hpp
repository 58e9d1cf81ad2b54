#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fmm/types.hpp"

namespace fmm {

/// Relative error metrics between a computed and a reference potential vector.
/// When the reference is all-zero the norms are reported unnormalized and
/// `absolute` is set.
struct ErrorReport {
  Real rel_l2 = 0.0;
  Real rel_linf = 0.0;
  std::int64_t n = 0;
  bool absolute = false;
};

/// O(N^2) ground truth: phi_i = sum_{j != i} q_j / |x_i - x_j|, coincident
/// pairs skipped. Accumulated in extended precision.
std::vector<Real> direct_sum(std::span<const Body> bodies);

/// Error metrics of `a` against reference `b`; throws on length mismatch.
ErrorReport compare(std::span<const Real> a, std::span<const Real> b);

}  // namespace fmm
