#include "fmm/kernels.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace fmm {
namespace {

// Per-thread scratch sized to the current order; avoids per-call allocation
// in the interaction loops.
std::vector<Real>& scratch(std::size_t n) {
  thread_local std::vector<Real> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace

KernelCounters& kernel_counters() {
  static KernelCounters counters;
  return counters;
}

KernelTables::KernelTables(int order) : order_(order), idx_(order - 1) {
  if (order < 1) throw std::invalid_argument("expansion order must be >= 1");
  const int n = idx_.size();
  const int max_deg = order - 1;

  // M2L: one term per (alpha, beta) with |alpha + beta| <= p-1.
  for (int ia = 0; ia < n; ++ia) {
    const auto& a = idx_.exponents(ia);
    const int da = idx_.degree(ia);
    for (int ib = 0; ib < n; ++ib) {
      const int db = idx_.degree(ib);
      if (da + db > max_deg) continue;
      const auto& b = idx_.exponents(ib);
      const int ig = idx_.index_of(a[0] + b[0], a[1] + b[1], a[2] + b[2]);
      const Real k = idx_.factorial(ig) / idx_.factorial(ib);
      const Real sign_b = (db % 2 == 0) ? 1.0 : -1.0;
      const Real sign_a = (da % 2 == 0) ? 1.0 : -1.0;
      m2l_terms_.push_back({ia, ib, ig, sign_b * k, sign_a * k});
    }
  }

  // M2M: parent_b += child_a * d^{b-a}/(b-a)! over a <= b componentwise.
  for (int ib = 0; ib < n; ++ib) {
    const auto& b = idx_.exponents(ib);
    for (int ax = 0; ax <= b[0]; ++ax) {
      for (int ay = 0; ay <= b[1]; ++ay) {
        for (int az = 0; az <= b[2]; ++az) {
          const int ia = idx_.index_of(ax, ay, az);
          const int is = idx_.index_of(b[0] - ax, b[1] - ay, b[2] - az);
          m2m_terms_.push_back({ia, is, ib, 1.0});
        }
      }
    }
  }

  // L2L: child_a += parent_{a+d} * ((a+d)!/a!) * d^d/d! over |a+d| <= p-1.
  for (int ia = 0; ia < n; ++ia) {
    const auto& a = idx_.exponents(ia);
    const int da = idx_.degree(ia);
    for (int is = 0; is < n; ++is) {
      if (da + idx_.degree(is) > max_deg) continue;
      const auto& s = idx_.exponents(is);
      const int ip = idx_.index_of(a[0] + s[0], a[1] + s[1], a[2] + s[2]);
      l2l_terms_.push_back({ip, is, ia, idx_.factorial(ip) / idx_.factorial(ia)});
    }
  }

  eval_weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    eval_weights_[i] = (idx_.degree(i) % 2 == 0 ? 1.0 : -1.0) * idx_.factorial(i);
  }
}

void p2m(const KernelTables& kt, std::span<const Body> bodies, const Vec3& center, CoeffVec& M) {
  const int n = kt.coef_count();
  assert(M.size() == n);
  auto& u = scratch(n);
  for (const Body& body : bodies) {
    kt.indices().powers_over_factorial(body.position - center, std::span(u.data(), n));
    for (int i = 0; i < n; ++i) M[i] += body.charge * u[i];
  }
}

void m2m(const KernelTables& kt, const CoeffVec& child_m, const Vec3& shift, CoeffVec& parent_m) {
  const int n = kt.coef_count();
  assert(child_m.size() == n && parent_m.size() == n);
  auto& u = scratch(n);
  kt.indices().powers_over_factorial(shift, std::span(u.data(), n));
  for (const auto& t : kt.m2m_terms()) {
    parent_m[t.dst] += child_m[t.src] * u[t.shift];
  }
}

void m2l(const KernelTables& kt, const CoeffVec& source_m, const Vec3& displacement,
         CoeffVec& target_l) {
  if (displacement.squaredNorm() == 0.0) {
    throw std::invalid_argument("singular M2L displacement");
  }
  const int n = kt.coef_count();
  assert(source_m.size() == n && target_l.size() == n);
  auto& d = scratch(n);
  kt.indices().laplace_derivatives(displacement, std::span(d.data(), n));
  for (const auto& t : kt.m2l_terms()) {
    target_l[t.l] += t.w_fwd * source_m[t.m] * d[t.d];
  }
  kernel_counters().m2l_calls.fetch_add(1, std::memory_order_relaxed);
}

void m2l_mutual(const KernelTables& kt, const CoeffVec& source_m, const CoeffVec& target_m,
                const Vec3& displacement, CoeffVec& target_l, CoeffVec& source_l) {
  if (displacement.squaredNorm() == 0.0) {
    throw std::invalid_argument("singular M2L displacement");
  }
  const int n = kt.coef_count();
  auto& d = scratch(n);
  kt.indices().laplace_derivatives(displacement, std::span(d.data(), n));
  for (const auto& t : kt.m2l_terms()) {
    target_l[t.l] += t.w_fwd * source_m[t.m] * d[t.d];
    source_l[t.l] += t.w_rev * target_m[t.m] * d[t.d];
  }
  kernel_counters().m2l_calls.fetch_add(2, std::memory_order_relaxed);
}

void l2l(const KernelTables& kt, const CoeffVec& parent_l, const Vec3& shift, CoeffVec& child_l) {
  const int n = kt.coef_count();
  assert(parent_l.size() == n && child_l.size() == n);
  auto& u = scratch(n);
  kt.indices().powers_over_factorial(shift, std::span(u.data(), n));
  for (const auto& t : kt.l2l_terms()) {
    child_l[t.dst] += parent_l[t.src] * t.w * u[t.shift];
  }
}

void l2p(const KernelTables& kt, const CoeffVec& L, const Vec3& center, std::span<Body> bodies) {
  const int n = kt.coef_count();
  assert(L.size() == n);
  auto& m = scratch(n);
  for (Body& body : bodies) {
    kt.indices().powers(body.position - center, std::span(m.data(), n));
    Real phi = 0.0;
    for (int i = 0; i < n; ++i) phi += L[i] * m[i];
    body.potential += phi;
  }
}

void p2p(std::span<Body> targets, std::span<Body> sources, bool mutual) {
  const bool self = targets.data() == sources.data() && targets.size() == sources.size();
  std::uint64_t evals = 0;
  if (self && mutual) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Body& bi = targets[i];
      Real phi_i = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        Body& bj = targets[j];
        const Real r2 = (bi.position - bj.position).squaredNorm();
        if (r2 == 0.0) continue;
        ++evals;
        const Real inv_r = 1.0 / std::sqrt(r2);
        phi_i += bj.charge * inv_r;
        bj.potential += bi.charge * inv_r;
      }
      bi.potential += phi_i;
    }
  } else if (mutual) {
    for (Body& bi : targets) {
      Real phi_i = 0.0;
      for (Body& bj : sources) {
        const Real r2 = (bi.position - bj.position).squaredNorm();
        if (r2 == 0.0) continue;
        ++evals;
        const Real inv_r = 1.0 / std::sqrt(r2);
        phi_i += bj.charge * inv_r;
        bj.potential += bi.charge * inv_r;
      }
      bi.potential += phi_i;
    }
  } else {
    for (Body& bi : targets) {
      Real phi_i = 0.0;
      for (const Body& bj : sources) {
        const Real r2 = (bi.position - bj.position).squaredNorm();
        if (r2 == 0.0) continue;
        ++evals;
        phi_i += bj.charge / std::sqrt(r2);
      }
      bi.potential += phi_i;
    }
  }
  kernel_counters().p2p_calls.fetch_add(1, std::memory_order_relaxed);
  kernel_counters().p2p_evals.fetch_add(evals, std::memory_order_relaxed);
}

Real evaluate_multipole(const KernelTables& kt, const CoeffVec& M, const Vec3& x,
                        const Vec3& center) {
  const Vec3 r = x - center;
  if (r.squaredNorm() == 0.0) throw std::invalid_argument("singular evaluation point");
  const int n = kt.coef_count();
  auto& d = scratch(n);
  kt.indices().laplace_derivatives(r, std::span(d.data(), n));
  const auto w = kt.eval_weights();
  Real phi = 0.0;
  for (int i = 0; i < n; ++i) phi += w[i] * M[i] * d[i];
  return phi;
}

CoeffVec m2p_flip(const KernelTables& kt, const CoeffVec& M) {
  CoeffVec out = M;
  for (int i = 0; i < kt.coef_count(); ++i) {
    if (kt.indices().degree(i) % 2 != 0) out[i] = -out[i];
  }
  return out;
}

}  // namespace fmm
