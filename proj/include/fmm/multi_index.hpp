#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fmm/types.hpp"

namespace fmm {

/// Number of 3-variate multi-indices with total degree <= p-1, i.e. the
/// length of an expansion of order p: p(p+1)(p+2)/6.
constexpr std::int64_t n_coef(std::int64_t p) { return p * (p + 1) * (p + 2) / 6; }

/// Enumeration of all multi-indices (a,b,c) with a+b+c <= max_degree, ordered
/// by ascending total degree, then lexicographically on (a,b,c). Index 0 is
/// (0,0,0). The ordering is part of every on-disk and in-memory coefficient
/// layout, so it is fixed here once.
class MultiIndexSet {
 public:
  explicit MultiIndexSet(int max_degree);

  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(exps_.size()); }

  const std::array<int, 3>& exponents(int i) const { return exps_[i]; }
  int degree(int i) const { return degree_[i]; }
  Real factorial(int i) const { return factorial_[i]; }

  /// Linear index of (a,b,c); closed form, no search.
  int index_of(int a, int b, int c) const {
    const int n = a + b + c;
    return static_cast<int>(n_coef(n)) + a * (n + 1) - a * (a - 1) / 2 + b;
  }

  /// Fills out[i] = v^alpha_i / alpha_i! for every index in the set.
  void powers_over_factorial(const Vec3& v, std::span<Real> out) const;
  /// Fills out[i] = v^alpha_i (plain monomials).
  void powers(const Vec3& v, std::span<Real> out) const;

  /// Fills out[i] = (1/alpha_i!) \partial^{alpha_i} (1/|r|), the normalized
  /// derivative table of the Laplace kernel, by a degree-ascending recurrence.
  void laplace_derivatives(const Vec3& r, std::span<Real> out) const;

 private:
  int max_degree_;
  std::vector<std::array<int, 3>> exps_;
  std::vector<int> degree_;
  std::vector<Real> factorial_;
  // Predecessor links for the power recurrences: index of alpha - e_axis.
  std::vector<int> pred_index_;
  std::vector<int> pred_axis_;
};

}  // namespace fmm
