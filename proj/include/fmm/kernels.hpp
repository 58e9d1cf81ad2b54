#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "fmm/multi_index.hpp"
#include "fmm/types.hpp"

namespace fmm {

/// Precomputed index/weight tables for order-p Cartesian Taylor kernels.
///
/// Conventions (fixed across the code base):
///   multipole moments   M_a = sum_j q_j (y_j - c)^a / a!
///   local coefficients  L_b with  phi(x) ~= sum_b L_b (x - c)^b
///   derivative table    D_g(R) = (1/g!) d^g (1/|R|)
/// The multipole-to-local translation with displacement R = source center
/// minus target center is then
///   L_b += sum_a (-1)^{|b|} ((a+b)!/b!) M_a D_{a+b}(R),   |a+b| <= p-1,
/// and the reverse direction of the same pair reuses the same D table with
/// the sign taken on |a| instead of |b| (odd-term flip under R -> -R).
class KernelTables {
 public:
  explicit KernelTables(int order);

  int order() const { return order_; }
  int coef_count() const { return idx_.size(); }
  const MultiIndexSet& indices() const { return idx_; }

  struct M2LTerm {
    std::int32_t m, l, d;
    Real w_fwd, w_rev;
  };
  struct ShiftTerm {
    std::int32_t src, shift, dst;
    Real w;
  };

  std::span<const M2LTerm> m2l_terms() const { return m2l_terms_; }
  std::span<const ShiftTerm> m2m_terms() const { return m2m_terms_; }
  std::span<const ShiftTerm> l2l_terms() const { return l2l_terms_; }
  /// (-1)^{|a|} a!, the weight turning M_a D_a into the far-field evaluation.
  std::span<const Real> eval_weights() const { return eval_weights_; }

 private:
  int order_;
  MultiIndexSet idx_;
  std::vector<M2LTerm> m2l_terms_;
  std::vector<ShiftTerm> m2m_terms_;
  std::vector<ShiftTerm> l2l_terms_;
  std::vector<Real> eval_weights_;
};

/// Global kernel-invocation counters (relaxed atomics, updated once per call).
struct KernelCounters {
  std::atomic<std::uint64_t> p2p_calls{0};
  std::atomic<std::uint64_t> p2p_evals{0};
  std::atomic<std::uint64_t> m2l_calls{0};
  void reset() {
    p2p_calls = 0;
    p2p_evals = 0;
    m2l_calls = 0;
  }
};
KernelCounters& kernel_counters();

/// P2M: accumulate the moments of a leaf's bodies about `center` into M.
void p2m(const KernelTables& kt, std::span<const Body> bodies, const Vec3& center, CoeffVec& M);

/// M2M: accumulate a child expansion shifted by d = child center - parent
/// center into the parent expansion. Exact for the retained degrees.
void m2m(const KernelTables& kt, const CoeffVec& child_m, const Vec3& shift, CoeffVec& parent_m);

/// M2L: accumulate the local expansion induced by a source multipole at
/// displacement R = source center - target center. |R| = 0 is rejected.
void m2l(const KernelTables& kt, const CoeffVec& source_m, const Vec3& displacement,
         CoeffVec& target_l);

/// Mutual M2L: both directions of a pair from one derivative table.
void m2l_mutual(const KernelTables& kt, const CoeffVec& source_m, const CoeffVec& target_m,
                const Vec3& displacement, CoeffVec& target_l, CoeffVec& source_l);

/// L2L: accumulate the parent local expansion re-centered by d = child center
/// - parent center into the child expansion. Exact (polynomial identity).
void l2l(const KernelTables& kt, const CoeffVec& parent_l, const Vec3& shift, CoeffVec& child_l);

/// L2P: evaluate the local polynomial at each body and accumulate potentials.
void l2p(const KernelTables& kt, const CoeffVec& L, const Vec3& center, std::span<Body> bodies);

/// P2P direct interaction. Non-mutual: targets gain sum_j q_j/|x_i - y_j|
/// with zero-distance pairs skipped. Mutual: sources are updated in the same
/// pass; a self pair (same range) iterates j < i. Counts each 1/r evaluation.
void p2p(std::span<Body> targets, std::span<Body> sources, bool mutual);

/// Far-field evaluation of a multipole expansion at point x.
Real evaluate_multipole(const KernelTables& kt, const CoeffVec& M, const Vec3& x,
                        const Vec3& center);

/// Negates the coefficients of odd-degree multi-indices (an involution); the
/// moment transform under target/source interchange.
CoeffVec m2p_flip(const KernelTables& kt, const CoeffVec& M);

}  // namespace fmm
