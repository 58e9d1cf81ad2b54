#include "fmm/multi_index.hpp"

#include <cassert>
#include <cmath>

namespace fmm {

MultiIndexSet::MultiIndexSet(int max_degree) : max_degree_(max_degree) {
  assert(max_degree >= 0);
  const int total = static_cast<int>(n_coef(max_degree + 1));
  exps_.reserve(total);
  degree_.reserve(total);
  factorial_.reserve(total);
  pred_index_.reserve(total);
  pred_axis_.reserve(total);
  for (int n = 0; n <= max_degree; ++n) {
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; b <= n - a; ++b) {
        const int c = n - a - b;
        exps_.push_back({a, b, c});
        degree_.push_back(n);
        Real fact = 1.0;
        for (int k = 2; k <= a; ++k) fact *= k;
        for (int k = 2; k <= b; ++k) fact *= k;
        for (int k = 2; k <= c; ++k) fact *= k;
        factorial_.push_back(fact);
        if (n == 0) {
          pred_index_.push_back(-1);
          pred_axis_.push_back(-1);
        } else {
          const int axis = a > 0 ? 0 : (b > 0 ? 1 : 2);
          const int pa = a - (axis == 0);
          const int pb = b - (axis == 1);
          const int pc = c - (axis == 2);
          pred_index_.push_back(index_of(pa, pb, pc));
          pred_axis_.push_back(axis);
        }
      }
    }
  }
  assert(static_cast<int>(exps_.size()) == total);
}

void MultiIndexSet::powers_over_factorial(const Vec3& v, std::span<Real> out) const {
  out[0] = 1.0;
  for (int i = 1; i < size(); ++i) {
    const int axis = pred_axis_[i];
    out[i] = out[pred_index_[i]] * v[axis] / exps_[i][axis];
  }
}

void MultiIndexSet::powers(const Vec3& v, std::span<Real> out) const {
  out[0] = 1.0;
  for (int i = 1; i < size(); ++i) {
    out[i] = out[pred_index_[i]] * v[pred_axis_[i]];
  }
}

void MultiIndexSet::laplace_derivatives(const Vec3& r, std::span<Real> out) const {
  const Real r2 = r.squaredNorm();
  assert(r2 > 0.0);
  const Real inv_r2 = 1.0 / r2;
  out[0] = 1.0 / std::sqrt(r2);
  // Degree-ascending recurrence for T_g = (1/g!) d^g (1/|r|):
  //   n*r^2*T_g = -(2n-1) sum_d r_d T_{g-e_d} - (n-1) sum_d T_{g-2e_d},  n = |g|.
  for (int i = 1; i < size(); ++i) {
    const auto& e = exps_[i];
    const int n = degree_[i];
    Real s1 = 0.0;
    Real s2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      if (e[d] >= 1) {
        std::array<int, 3> g{e[0], e[1], e[2]};
        --g[d];
        s1 += r[d] * out[index_of(g[0], g[1], g[2])];
      }
      if (e[d] >= 2) {
        std::array<int, 3> g{e[0], e[1], e[2]};
        g[d] -= 2;
        s2 += out[index_of(g[0], g[1], g[2])];
      }
    }
    out[i] = -((2 * n - 1) * s1 + (n - 1) * s2) * inv_r2 / n;
  }
}

}  // namespace fmm
