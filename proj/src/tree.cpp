#include "fmm/tree.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <stdexcept>

namespace fmm {

Domain compute_bounds(std::span<const Body> bodies) {
  if (bodies.empty()) throw std::invalid_argument("empty input");
  Vec3 lo = bodies.front().position;
  Vec3 hi = lo;
  for (const Body& b : bodies) {
    lo = lo.cwiseMin(b.position);
    hi = hi.cwiseMax(b.position);
  }
  Domain d;
  d.center = 0.5 * (lo + hi);
  const Real extent_half = 0.5 * (hi - lo).maxCoeff();
  d.half_side = std::max(extent_half * (1.0 + 1e-6), kMinHalfSide);
  return d;
}

std::uint64_t morton_key(const Vec3& position, const Domain& domain, int level) {
  if (level < 0 || level > kMaxTreeLevel) throw std::invalid_argument("level overflow");
  const std::uint64_t cells_per_axis = std::uint64_t{1} << level;
  const Real inv_cell = static_cast<Real>(cells_per_axis) / (2.0 * domain.half_side);
  std::uint64_t key = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const Real offset = position[axis] - (domain.center[axis] - domain.half_side);
    auto idx = static_cast<std::int64_t>(std::floor(offset * inv_cell));
    idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(cells_per_axis) - 1);
    for (int bit = 0; bit < level; ++bit) {
      key |= ((static_cast<std::uint64_t>(idx) >> bit) & 1u) << (3 * bit + axis);
    }
  }
  return key;
}

namespace {

// Octant of a position relative to a cell center; coordinates exactly on a
// split plane go to the upper child.
int octant_of(const Vec3& p, const Vec3& center) {
  return (p.x() >= center.x() ? 1 : 0) | (p.y() >= center.y() ? 2 : 0) |
         (p.z() >= center.z() ? 4 : 0);
}

}  // namespace

Tree build_tree(std::vector<Body> bodies, int n_crit, int p) {
  if (bodies.empty()) throw std::invalid_argument("empty input");
  if (n_crit < 1) throw std::invalid_argument("n_crit must be >= 1");
  if (p < 1) throw std::invalid_argument("expansion order must be >= 1");

  Tree tree;
  tree.domain = compute_bounds(bodies);
  tree.bodies = std::move(bodies);
  tree.n_crit = n_crit;
  tree.order = p;

  Cell root;
  root.level = 0;
  root.morton_key = 0;
  root.center = tree.domain.center;
  root.radius = tree.domain.half_side;
  root.body_begin = 0;
  root.body_end = static_cast<std::int32_t>(tree.bodies.size());
  tree.cells.push_back(root);

  std::vector<Body> reorder_buf;
  for (std::size_t ci = 0; ci < tree.cells.size(); ++ci) {
    // Copy out the fields used below; pushing children may reallocate cells.
    const std::int32_t begin = tree.cells[ci].body_begin;
    const std::int32_t end = tree.cells[ci].body_end;
    const int level = tree.cells[ci].level;
    const Vec3 center = tree.cells[ci].center;
    const Real radius = tree.cells[ci].radius;
    if (end - begin <= n_crit || level >= kMaxTreeLevel) continue;

    // Stable counting sort of the cell's bodies by octant.
    std::array<std::int32_t, 8> count{};
    for (std::int32_t bi = begin; bi < end; ++bi) {
      ++count[octant_of(tree.bodies[bi].position, center)];
    }
    std::array<std::int32_t, 8> offset{};
    for (int o = 1; o < 8; ++o) offset[o] = offset[o - 1] + count[o - 1];
    reorder_buf.assign(tree.bodies.begin() + begin, tree.bodies.begin() + end);
    std::array<std::int32_t, 8> cursor = offset;
    for (const Body& b : reorder_buf) {
      tree.bodies[begin + cursor[octant_of(b.position, center)]++] = b;
    }

    tree.cells[ci].child_begin = static_cast<std::int32_t>(tree.cells.size());
    const Real child_radius = 0.5 * radius;
    for (int o = 0; o < 8; ++o) {
      if (count[o] == 0) continue;
      Cell child;
      child.level = level + 1;
      child.morton_key = (tree.cells[ci].morton_key << 3) | static_cast<std::uint64_t>(o);
      child.center =
          center + child_radius * Vec3(o & 1 ? 1.0 : -1.0, o & 2 ? 1.0 : -1.0, o & 4 ? 1.0 : -1.0);
      child.radius = child_radius;
      child.body_begin = begin + offset[o];
      child.body_end = begin + offset[o] + count[o];
      child.parent = static_cast<std::int32_t>(ci);
      tree.cells.push_back(child);
      ++tree.cells[ci].child_count;
    }
  }

  const auto coeffs = n_coef(p);
  for (Cell& c : tree.cells) {
    c.multipole = CoeffVec::Zero(coeffs);
    c.local = CoeffVec::Zero(coeffs);
  }
  return tree;
}

std::vector<Real> potentials(const Tree& tree) {
  std::vector<Real> out;
  out.reserve(tree.bodies.size());
  for (const Body& b : tree.bodies) out.push_back(b.potential);
  return out;
}

}  // namespace fmm
