#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fmm/multi_index.hpp"
#include "fmm/types.hpp"

namespace fmm {

/// Deepest subdivision representable with 64-bit interleaved keys.
inline constexpr int kMaxTreeLevel = 21;

/// Absolute floor on the root half-side for degenerate (single-point) input.
inline constexpr Real kMinHalfSide = 0.5;

/// Octree node. Bodies of a cell occupy the contiguous index range
/// [body_begin, body_end) of the tree's reordered body array; children are
/// contiguous in the cell array starting at child_begin.
struct Cell {
  int level = 0;
  std::uint64_t morton_key = 0;
  Vec3 center = Vec3::Zero();
  Real radius = 0.0;  // half-side length
  std::int32_t body_begin = 0;
  std::int32_t body_end = 0;
  std::int32_t child_begin = 0;
  std::int32_t child_count = 0;
  std::int32_t parent = -1;
  CoeffVec multipole;
  CoeffVec local;

  bool is_leaf() const { return child_count == 0; }
  std::int32_t body_count() const { return body_end - body_begin; }
};

/// Adaptive cubic octree over a reordered body array. Cell 0 is the root;
/// cells are stored level-contiguously (breadth-first) with the children of
/// any cell contiguous.
struct Tree {
  Domain domain;
  std::vector<Cell> cells;
  std::vector<Body> bodies;
  int n_crit = 0;
  int order = 0;

  std::span<Body> cell_bodies(const Cell& c) {
    return std::span(bodies).subspan(c.body_begin, c.body_count());
  }
  std::span<const Body> cell_bodies(const Cell& c) const {
    return std::span(bodies).subspan(c.body_begin, c.body_count());
  }
  /// Index of the ancestor of cell `ci` at `level` (ci itself if already there).
  std::int32_t ancestor_at_level(std::int32_t ci, int level) const {
    while (cells[ci].level > level) ci = cells[ci].parent;
    return ci;
  }
};

/// Smallest axis-aligned cube (with a 1e-6 relative margin and a 0.5 absolute
/// half-side floor) centered at the midpoint of the per-axis extents.
Domain compute_bounds(std::span<const Body> bodies);

/// Interleaved (x lowest bit first) per-axis cell indices of `position` at
/// `level`; siblings share their parent's key as prefix.
std::uint64_t morton_key(const Vec3& position, const Domain& domain, int level);

/// Builds the octree: subdivides until every leaf holds at most n_crit bodies
/// (or kMaxTreeLevel is reached, where a leaf may stay oversized), reorders
/// bodies so each cell owns a contiguous range, and allocates zeroed
/// expansion coefficients of order p.
Tree build_tree(std::vector<Body> bodies, int n_crit, int p);

/// Potentials of the tree's bodies in body-array order.
std::vector<Real> potentials(const Tree& tree);

}  // namespace fmm
