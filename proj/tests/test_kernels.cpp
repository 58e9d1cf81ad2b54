#include <doctest.h>

#include <vector>

#include "fmm/dataset.hpp"
#include "fmm/kernels.hpp"
#include "test_support.hpp"

using namespace fmm;

namespace {

std::vector<Body> random_bodies(Xorshift64Star& rng, int n, const Vec3& center, Real spread) {
  std::vector<Body> bodies(n);
  for (Body& b : bodies) {
    b.position = center + spread * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                        rng.uniform(-1, 1));
    b.charge = rng.uniform(-1, 1);
  }
  return bodies;
}

}  // namespace

TEST_CASE("p2m: single body at center yields a pure monopole") {
  KernelTables kt(5);
  std::vector<Body> bodies(1);
  bodies[0].position = Vec3(0.25, -0.5, 1.0);
  bodies[0].charge = 2.0;
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  p2m(kt, bodies, bodies[0].position, M);
  CHECK(M[0] == 2.0);
  CHECK(M.tail(M.size() - 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("p2m: symmetric +q/-q pair has zero monopole and dipole 2q*offset") {
  KernelTables kt(3);
  const Vec3 center(0.0, 0.0, 0.0);
  const Vec3 offset(0.1, 0.2, -0.3);
  std::vector<Body> bodies(2);
  bodies[0] = {center + offset, +1.0, 0.0};
  bodies[1] = {center - offset, -1.0, 0.0};
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  p2m(kt, bodies, center, M);
  CHECK(M[0] == doctest::Approx(0.0));
  CHECK(M[kt.indices().index_of(1, 0, 0)] == doctest::Approx(2.0 * offset.x()));
  CHECK(M[kt.indices().index_of(0, 1, 0)] == doctest::Approx(2.0 * offset.y()));
  CHECK(M[kt.indices().index_of(0, 0, 1)] == doctest::Approx(2.0 * offset.z()));
}

TEST_CASE("p2m + evaluate_multipole converges against the direct sum") {
  const int p = 4;
  KernelTables kt(p);
  Xorshift64Star rng(101);
  const Vec3 center(0.5, 0.5, 0.5);
  const Real radius = 0.5;
  auto bodies = random_bodies(rng, 50, center, radius);
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  p2m(kt, bodies, center, M);
  const Vec3 x = center + Vec3(10.0 * radius, 0, 0);
  const Real approx = evaluate_multipole(kt, M, x, center);
  const Real exact = test::potential_at(bodies, x);
  CHECK(std::abs(approx - exact) / std::abs(exact) <= std::pow(0.1, p));
}

TEST_CASE("m2m: zero shift is the identity") {
  KernelTables kt(5);
  Xorshift64Star rng(3);
  CoeffVec M(kt.coef_count());
  for (int i = 0; i < M.size(); ++i) M[i] = rng.uniform(-1, 1);
  CoeffVec parent = CoeffVec::Zero(kt.coef_count());
  m2m(kt, M, Vec3::Zero(), parent);
  CHECK((parent - M).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("m2m: monopole child becomes q d^b / b!") {
  KernelTables kt(4);
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  M[0] = 3.0;
  const Vec3 d(0.2, -0.4, 0.1);
  CoeffVec parent = CoeffVec::Zero(kt.coef_count());
  m2m(kt, M, d, parent);
  for (int i = 0; i < kt.coef_count(); ++i) {
    const auto& e = kt.indices().exponents(i);
    CHECK(parent[i] ==
          doctest::Approx(3.0 * test::power(d, e) / test::multi_factorial(e)).epsilon(1e-13));
  }
}

TEST_CASE("m2m equals p2m about the parent center (translation exactness)") {
  const int p = 5;
  KernelTables kt(p);
  Xorshift64Star rng(17);
  const Vec3 child_center(0.3, 0.1, -0.2);
  const Vec3 parent_center(0.0, 0.0, 0.0);
  auto bodies = random_bodies(rng, 40, child_center, 0.25);

  CoeffVec child_m = CoeffVec::Zero(kt.coef_count());
  p2m(kt, bodies, child_center, child_m);
  CoeffVec translated = CoeffVec::Zero(kt.coef_count());
  m2m(kt, child_m, child_center - parent_center, translated);

  CoeffVec direct = CoeffVec::Zero(kt.coef_count());
  p2m(kt, bodies, parent_center, direct);
  CHECK((translated - direct).norm() / direct.norm() <= 1e-12);
}

TEST_CASE("m2l: monopole at distance 2 gives L0 = q/2") {
  KernelTables kt(3);
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  M[0] = 5.0;
  CoeffVec L = CoeffVec::Zero(kt.coef_count());
  m2l(kt, M, Vec3(2.0, 0.0, 0.0), L);
  CHECK(L[0] == doctest::Approx(2.5));
}

TEST_CASE("m2l: p=1 reduces to the monopole approximation") {
  KernelTables kt(1);
  CoeffVec M(1);
  M[0] = -1.5;
  CoeffVec L = CoeffVec::Zero(1);
  const Vec3 R(1.0, 2.0, -2.0);  // |R| = 3
  m2l(kt, M, R, L);
  CHECK(L[0] == doctest::Approx(-0.5));
}

TEST_CASE("m2l rejects a zero displacement") {
  KernelTables kt(2);
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  CoeffVec L = CoeffVec::Zero(kt.coef_count());
  CHECK_THROWS_WITH_AS(m2l(kt, M, Vec3::Zero(), L), "singular M2L displacement",
                       std::invalid_argument);
}

TEST_CASE("m2l + l2p matches the direct sum for a well-separated pair") {
  const int p = 6;
  KernelTables kt(p);
  Xorshift64Star rng(23);
  const Real radius = 0.5;
  const Vec3 source_center(0.0, 0.0, 0.0);
  const Vec3 target_center(3.0 * 2.0 * radius, 0.0, 0.0);  // 3 diameters away
  auto sources = random_bodies(rng, 30, source_center, radius);
  auto targets = random_bodies(rng, 20, target_center, radius);
  for (Body& b : targets) b.potential = 0.0;

  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  p2m(kt, sources, source_center, M);
  CoeffVec L = CoeffVec::Zero(kt.coef_count());
  m2l(kt, M, source_center - target_center, L);
  l2p(kt, L, target_center, targets);

  const Real ratio = 2.0 * std::sqrt(3.0) * radius / (target_center - source_center).norm();
  Real max_rel = 0.0;
  for (const Body& b : targets) {
    const Real exact = test::potential_at(sources, b.position);
    max_rel = std::max(max_rel, std::abs(b.potential - exact) / std::abs(exact));
  }
  CHECK(max_rel <= std::pow(ratio, p) * 10.0);
}

TEST_CASE("m2l convergence: error decreases monotonically in p") {
  Xorshift64Star rng(29);
  const Real radius = 0.5;
  const Vec3 source_center(0.0, 0.0, 0.0);
  const Vec3 target_center(2.5, 0.9, -0.7);
  auto sources = random_bodies(rng, 25, source_center, radius);
  const Vec3 x = target_center + 0.3 * Vec3(0.5, -0.2, 0.4);
  const Real exact = test::potential_at(sources, x);

  Real prev = 1e30;
  for (int p : {2, 4, 6, 8}) {
    KernelTables kt(p);
    CoeffVec M = CoeffVec::Zero(kt.coef_count());
    p2m(kt, sources, source_center, M);
    CoeffVec L = CoeffVec::Zero(kt.coef_count());
    m2l(kt, M, source_center - target_center, L);
    std::vector<Real> powers(kt.coef_count());
    kt.indices().powers(x - target_center, powers);
    Real approx = 0.0;
    for (int i = 0; i < kt.coef_count(); ++i) approx += L[i] * powers[i];
    const Real err = std::abs(approx - exact) / std::abs(exact);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("m2l_mutual matches two one-directional translations") {
  const int p = 5;
  KernelTables kt(p);
  Xorshift64Star rng(31);
  CoeffVec Ms(kt.coef_count()), Mt(kt.coef_count());
  for (int i = 0; i < kt.coef_count(); ++i) {
    Ms[i] = rng.uniform(-1, 1);
    Mt[i] = rng.uniform(-1, 1);
  }
  const Vec3 R(1.7, -2.2, 0.4);
  CoeffVec Lt1 = CoeffVec::Zero(kt.coef_count()), Ls1 = CoeffVec::Zero(kt.coef_count());
  m2l_mutual(kt, Ms, Mt, R, Lt1, Ls1);

  CoeffVec Lt2 = CoeffVec::Zero(kt.coef_count()), Ls2 = CoeffVec::Zero(kt.coef_count());
  m2l(kt, Ms, R, Lt2);
  m2l(kt, Mt, -R, Ls2);
  CHECK((Lt1 - Lt2).cwiseAbs().maxCoeff() <= 1e-13 * Lt2.cwiseAbs().maxCoeff());
  CHECK((Ls1 - Ls2).cwiseAbs().maxCoeff() <= 1e-13 * Ls2.cwiseAbs().maxCoeff());
}

TEST_CASE("l2l: zero shift is the identity and constants are invariant") {
  KernelTables kt(4);
  Xorshift64Star rng(37);
  CoeffVec L(kt.coef_count());
  for (int i = 0; i < L.size(); ++i) L[i] = rng.uniform(-1, 1);
  CoeffVec child = CoeffVec::Zero(kt.coef_count());
  l2l(kt, L, Vec3::Zero(), child);
  CHECK((child - L).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  CoeffVec constant = CoeffVec::Zero(kt.coef_count());
  constant[0] = 4.2;
  CoeffVec shifted = CoeffVec::Zero(kt.coef_count());
  l2l(kt, constant, Vec3(0.3, -0.8, 0.5), shifted);
  CHECK(shifted[0] == doctest::Approx(4.2));
  CHECK(shifted.tail(shifted.size() - 1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("l2l: re-centered polynomial agrees with the parent polynomial") {
  const int p = 5;
  KernelTables kt(p);
  Xorshift64Star rng(41);
  CoeffVec parent(kt.coef_count());
  for (int i = 0; i < parent.size(); ++i) parent[i] = rng.uniform(-1, 1);
  const Vec3 shift(0.4, -0.1, 0.25);
  CoeffVec child = CoeffVec::Zero(kt.coef_count());
  l2l(kt, parent, shift, child);

  for (int k = 0; k < 20; ++k) {
    const Vec3 x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Real from_parent =
        test::horner_poly_eval(kt.indices(), std::span<const Real>(parent.data(),
                                                                   parent.size()), x);
    const Real from_child = test::horner_poly_eval(
        kt.indices(), std::span<const Real>(child.data(), child.size()), x - shift);
    CHECK(from_child == doctest::Approx(from_parent).epsilon(1e-12));
  }
}

TEST_CASE("l2p: constant local adds exactly L0; body at center gains only L0") {
  KernelTables kt(4);
  CoeffVec L = CoeffVec::Zero(kt.coef_count());
  L[0] = 2.5;
  const Vec3 center(0.1, 0.2, 0.3);
  std::vector<Body> bodies(3);
  bodies[0].position = center + Vec3(0.05, 0, 0);
  bodies[1].position = center - Vec3(0, 0.1, 0);
  bodies[2].position = center;
  l2p(kt, L, center, bodies);
  for (const Body& b : bodies) CHECK(b.potential == doctest::Approx(2.5));

  Xorshift64Star rng(43);
  for (int i = 1; i < L.size(); ++i) L[i] = rng.uniform(-1, 1);
  Body at_center;
  at_center.position = center;
  std::vector<Body> one{at_center};
  l2p(kt, L, center, one);
  CHECK(one[0].potential == doctest::Approx(L[0]));
}

TEST_CASE("l2p agrees with an independent polynomial evaluation") {
  const int p = 4;
  KernelTables kt(p);
  Xorshift64Star rng(47);
  CoeffVec L(kt.coef_count());
  for (int i = 0; i < L.size(); ++i) L[i] = rng.uniform(-1, 1);
  const Vec3 center(0.0, 0.5, -0.5);
  std::vector<Body> bodies(10);
  for (Body& b : bodies) {
    b.position = center + 0.5 * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  l2p(kt, L, center, bodies);
  for (const Body& b : bodies) {
    const Real expected = test::horner_poly_eval(
        kt.indices(), std::span<const Real>(L.data(), L.size()), b.position - center);
    CHECK(b.potential == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("p2p: two unit charges at distance 1; an isolated body stays zero") {
  std::vector<Body> pair(2);
  pair[0] = {Vec3(0, 0, 0), 1.0, 0.0};
  pair[1] = {Vec3(1, 0, 0), 1.0, 0.0};
  p2p(pair, pair, false);
  CHECK(pair[0].potential == doctest::Approx(1.0));
  CHECK(pair[1].potential == doctest::Approx(1.0));

  std::vector<Body> alone(1);
  alone[0] = {Vec3(0.5, 0.5, 0.5), 3.0, 0.0};
  p2p(alone, alone, false);
  CHECK(alone[0].potential == 0.0);
}

TEST_CASE("p2p: mutual and non-mutual self interaction agree") {
  Xorshift64Star rng(53);
  std::vector<Body> a(20);
  for (Body& b : a) {
    b.position = Vec3(rng.uniform01(), rng.uniform01(), rng.uniform01());
    b.charge = rng.uniform(-1, 1);
  }
  std::vector<Body> b = a;
  p2p(a, a, false);
  p2p(b, b, true);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].potential == doctest::Approx(a[i].potential).epsilon(1e-12));
  }
}

TEST_CASE("p2p skips coincident distinct bodies") {
  std::vector<Body> bodies(3);
  bodies[0] = {Vec3(0, 0, 0), 1.0, 0.0};
  bodies[1] = {Vec3(0, 0, 0), 2.0, 0.0};  // coincident with body 0
  bodies[2] = {Vec3(0, 0, 2), 4.0, 0.0};
  p2p(bodies, bodies, false);
  CHECK(bodies[0].potential == doctest::Approx(2.0));  // only the far body contributes
  CHECK(bodies[1].potential == doctest::Approx(2.0));
  CHECK(bodies[2].potential == doctest::Approx(1.5));
}

TEST_CASE("evaluate_multipole: monopole gives q/r, zero expansion gives zero") {
  KernelTables kt(6);
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  M[0] = 2.0;
  const Vec3 c(1.0, 1.0, 1.0);
  CHECK(evaluate_multipole(kt, M, c + Vec3(0, 4, 0), c) == doctest::Approx(0.5));
  CoeffVec zero = CoeffVec::Zero(kt.coef_count());
  CHECK(evaluate_multipole(kt, zero, c + Vec3(1, 2, 3), c) == 0.0);
  CHECK_THROWS_WITH_AS(evaluate_multipole(kt, M, c, c), "singular evaluation point",
                       std::invalid_argument);
}

TEST_CASE("evaluate_multipole at 5 radii meets the order-p bound") {
  const int p = 6;
  KernelTables kt(p);
  Xorshift64Star rng(59);
  const Vec3 center(0, 0, 0);
  const Real radius = 1.0;
  auto bodies = random_bodies(rng, 40, center, radius);
  CoeffVec M = CoeffVec::Zero(kt.coef_count());
  p2m(kt, bodies, center, M);
  const Vec3 x = center + Vec3(3.0, 4.0, 0.0);  // 5 radii
  const Real approx = evaluate_multipole(kt, M, x, center);
  const Real exact = test::potential_at(bodies, x);
  CHECK(std::abs(approx - exact) / std::abs(exact) <= std::pow(0.2, p) * 10.0);
}

TEST_CASE("m2p_flip negates odd degrees and is an involution") {
  KernelTables kt(5);
  Xorshift64Star rng(61);
  CoeffVec M(kt.coef_count());
  for (int i = 0; i < M.size(); ++i) M[i] = rng.uniform(-1, 1);

  CoeffVec monopole = CoeffVec::Zero(kt.coef_count());
  monopole[0] = 7.0;
  CHECK((m2p_flip(kt, monopole) - monopole).cwiseAbs().maxCoeff() == 0.0);

  CoeffVec dipole = CoeffVec::Zero(kt.coef_count());
  for (int i = 0; i < kt.coef_count(); ++i) {
    if (kt.indices().degree(i) == 1) dipole[i] = 1.0 + i;
  }
  CHECK((m2p_flip(kt, dipole) + dipole).cwiseAbs().maxCoeff() == 0.0);

  CHECK((m2p_flip(kt, m2p_flip(kt, M)) - M).cwiseAbs().maxCoeff() == 0.0);
}
