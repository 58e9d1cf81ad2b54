#include "fmm/traversal.hpp"

#include <cmath>
#include <stdexcept>

namespace fmm {

bool mac(const Cell& target, const Cell& source, Real theta) {
  const Real sqrt3 = std::sqrt(Real(3));
  const Real sum_r = sqrt3 * (target.radius + source.radius);
  const Real dist = (target.center - source.center).norm();
  return sum_r < theta * dist;
}

std::vector<TraversalPair> split_pair(const TraversalPair& pair, const Tree& targets,
                                      const Tree& sources) {
  const Cell& ct = targets.cells[pair.target];
  const Cell& cs = sources.cells[pair.source];
  if (ct.is_leaf() && cs.is_leaf()) throw std::invalid_argument("cannot split leaf pair");
  std::vector<TraversalPair> out;
  const bool split_target = !ct.is_leaf() && (cs.is_leaf() || ct.radius >= cs.radius);
  if (split_target) {
    out.reserve(ct.child_count);
    for (std::int32_t i = 0; i < ct.child_count; ++i) {
      out.push_back({ct.child_begin + i, pair.source});
    }
  } else {
    out.reserve(cs.child_count);
    for (std::int32_t i = 0; i < cs.child_count; ++i) {
      out.push_back({pair.target, cs.child_begin + i});
    }
  }
  return out;
}

void upward_pass(Tree& tree, const KernelTables& kt) {
  // Children follow their parent in the cell array, so a reverse sweep sees
  // every child's moments completed before its parent accumulates them.
  for (auto ci = static_cast<std::int64_t>(tree.cells.size()) - 1; ci >= 0; --ci) {
    Cell& cell = tree.cells[ci];
    if (cell.is_leaf()) {
      p2m(kt, tree.cell_bodies(cell), cell.center, cell.multipole);
    } else {
      for (std::int32_t k = 0; k < cell.child_count; ++k) {
        const Cell& child = tree.cells[cell.child_begin + k];
        m2m(kt, child.multipole, child.center - cell.center, cell.multipole);
      }
    }
  }
}

void downward_pass(Tree& tree, const KernelTables& kt) {
  for (std::size_t ci = 0; ci < tree.cells.size(); ++ci) {
    Cell& cell = tree.cells[ci];
    if (cell.parent >= 0) {
      const Cell& parent = tree.cells[cell.parent];
      l2l(kt, parent.local, cell.center - parent.center, cell.local);
    }
    if (cell.is_leaf()) {
      l2p(kt, cell.local, cell.center, tree.cell_bodies(cell));
    }
  }
}

}  // namespace fmm
