#include "fmm/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace fmm {

std::vector<Real> direct_sum(std::span<const Body> bodies) {
  const std::size_t n = bodies.size();
  std::vector<Real> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    const Vec3 xi = bodies[i].position;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Real r2 = (xi - bodies[j].position).squaredNorm();
      if (r2 == 0.0) continue;
      acc += static_cast<long double>(bodies[j].charge) / std::sqrt(static_cast<long double>(r2));
    }
    phi[i] = static_cast<Real>(acc);
  }
  return phi;
}

ErrorReport compare(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  ErrorReport rep;
  rep.n = static_cast<std::int64_t>(a.size());
  long double diff2 = 0.0L, ref2 = 0.0L;
  Real diff_inf = 0.0, ref_inf = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real d = a[i] - b[i];
    diff2 += static_cast<long double>(d) * d;
    ref2 += static_cast<long double>(b[i]) * b[i];
    diff_inf = std::max(diff_inf, std::abs(d));
    ref_inf = std::max(ref_inf, std::abs(b[i]));
  }
  if (ref2 == 0.0L) {
    rep.absolute = true;
    rep.rel_l2 = static_cast<Real>(std::sqrt(diff2));
    rep.rel_linf = diff_inf;
  } else {
    rep.rel_l2 = static_cast<Real>(std::sqrt(diff2 / ref2));
    rep.rel_linf = diff_inf / ref_inf;
  }
  return rep;
}

}  // namespace fmm
