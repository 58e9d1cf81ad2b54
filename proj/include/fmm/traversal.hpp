#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fmm/kernels.hpp"
#include "fmm/tree.hpp"

namespace fmm {

/// A pending (target, source) cell pair of the dual traversal.
struct TraversalPair {
  std::int32_t target = 0;
  std::int32_t source = 0;
};

struct TraversalConfig {
  Real theta = 0.5;                 // opening parameter, in (0,1)
  std::size_t queue_threshold = 64; // Q: queue size at which pairs ship as tasks
  bool mutual = false;
};

/// Multipole acceptance criterion: true iff the circumscribed spheres satisfy
/// sqrt(3)*(r_t + r_s) < theta * |c_t - c_s|.
bool mac(const Cell& target, const Cell& source, Real theta);

/// Splits the larger-radius splittable cell of the pair (ties: target) and
/// returns its children paired with the other cell, roles preserved.
/// Throws if both cells are leaves.
std::vector<TraversalPair> split_pair(const TraversalPair& pair, const Tree& targets,
                                      const Tree& sources);

/// Post-order P2M/M2M sweep; the root multipole ends up representing every
/// body (its monopole equals the total charge).
void upward_pass(Tree& tree, const KernelTables& kt);

/// Pre-order L2L sweep followed by L2P at the leaves.
void downward_pass(Tree& tree, const KernelTables& kt);

namespace detail {

// Split side used by the traversal: the larger-radius splittable cell. Radius
// ties on one tree are broken by cell index, which makes the choice identical
// for (a,b) and (b,a); a role-based tie-break would give the two orders of a
// pair different refinement cuts, and the mutual-mode emission (once per
// unordered pair) could then never match the non-mutual emission.
inline bool split_target_side(const Tree& targets, const Tree& sources,
                              const TraversalPair& pr) {
  const Cell& t = targets.cells[pr.target];
  const Cell& s = sources.cells[pr.source];
  if (t.is_leaf()) return false;
  if (s.is_leaf()) return true;
  if (t.radius != s.radius) return t.radius > s.radius;
  if (&targets == &sources) return pr.target <= pr.source;
  return true;  // distinct trees never mirror a pair; default to the target
}

// Examines one pair: emits an interaction through the visitor or expands the
// pair through `push`. In mutual mode a same-tree self pair splits into child
// self pairs plus each unordered cross pair once.
template <class Visitor, class Push>
void process_pair(const Tree& targets, const Tree& sources, const TraversalPair& pr,
                  const TraversalConfig& cfg, Visitor& visit, Push&& push) {
  const Cell& ct = targets.cells[pr.target];
  const Cell& cs = sources.cells[pr.source];
  if (mac(ct, cs, cfg.theta)) {
    visit.m2l_pair(pr.target, pr.source);
    return;
  }
  if (ct.is_leaf() && cs.is_leaf()) {
    visit.p2p_pair(pr.target, pr.source);
    return;
  }
  const bool self = &targets == &sources && pr.target == pr.source;
  if (cfg.mutual && self) {
    for (std::int32_t i = 0; i < ct.child_count; ++i) {
      for (std::int32_t j = i; j < ct.child_count; ++j) {
        push(TraversalPair{ct.child_begin + i, ct.child_begin + j});
      }
    }
    return;
  }
  if (split_target_side(targets, sources, pr)) {
    for (std::int32_t i = 0; i < ct.child_count; ++i) {
      push(TraversalPair{ct.child_begin + i, pr.source});
    }
  } else {
    for (std::int32_t i = 0; i < cs.child_count; ++i) {
      push(TraversalPair{pr.target, cs.child_begin + i});
    }
  }
}

}  // namespace detail

/// Runs the complete (serial, FIFO) sub-traversal rooted at `root`,
/// delivering every admissible M2L pair and leaf-leaf P2P pair to the
/// visitor. This is the body of one super-task.
template <class Visitor>
void traverse_pair(const Tree& targets, const Tree& sources, TraversalPair root,
                   const TraversalConfig& cfg, Visitor& visit) {
  std::vector<TraversalPair> queue;
  queue.push_back(root);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const TraversalPair pr = queue[head];
    detail::process_pair(targets, sources, pr, cfg, visit,
                         [&](TraversalPair p) { queue.push_back(p); });
  }
}

/// Breadth-first dual tree traversal with a queue-size threshold. Pairs are
/// processed inline on the calling thread while the queue holds fewer than
/// cfg.queue_threshold pairs; the first time the queue reaches the threshold
/// every remaining pair is handed to `drain` (once) to be shipped as
/// super-tasks. If the queue empties first, `drain` is never called.
template <class Visitor, class DrainSink>
void dual_tree_traverse(const Tree& targets, const Tree& sources, const TraversalConfig& cfg,
                        Visitor& visit, DrainSink&& drain) {
  std::vector<TraversalPair> queue;
  queue.push_back(TraversalPair{0, 0});
  std::size_t head = 0;
  while (head < queue.size()) {
    if (queue.size() - head >= cfg.queue_threshold) {
      drain(std::span<const TraversalPair>(queue).subspan(head));
      return;
    }
    const TraversalPair pr = queue[head++];
    detail::process_pair(targets, sources, pr, cfg, visit,
                         [&](TraversalPair p) { queue.push_back(p); });
  }
}

/// Visitor that applies the kernels directly to the tree data. Concurrent use
/// is safe as long as the write footprints (target subtree; plus source
/// subtree in mutual mode) of simultaneously running callers are disjoint.
class KernelVisitor {
 public:
  KernelVisitor(Tree& targets, Tree& sources, const KernelTables& kt, bool mutual)
      : targets_(&targets), sources_(&sources), kt_(&kt), mutual_(mutual) {}

  void m2l_pair(std::int32_t t, std::int32_t s) const {
    Cell& ct = targets_->cells[t];
    Cell& cs = sources_->cells[s];
    const Vec3 displacement = cs.center - ct.center;
    if (mutual_) {
      m2l_mutual(*kt_, cs.multipole, ct.multipole, displacement, ct.local, cs.local);
    } else {
      m2l(*kt_, cs.multipole, displacement, ct.local);
    }
  }

  void p2p_pair(std::int32_t t, std::int32_t s) const {
    p2p(targets_->cell_bodies(targets_->cells[t]), sources_->cell_bodies(sources_->cells[s]),
        mutual_);
  }

 private:
  Tree* targets_;
  Tree* sources_;
  const KernelTables* kt_;
  bool mutual_;
};

}  // namespace fmm
