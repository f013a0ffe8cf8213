#include "doctest.h"
#include "reachctl/synth.hpp"
#include "support/fixtures.hpp"

#include <random>

using namespace reachctl;
using fixtures::vec;

namespace {

void check_piece(const AffineSystem& sys, const AffinePiece& p) {
  std::vector<Vec> u;
  for (const auto& v : p.region.v) u.push_back(p.control(v));
  CHECK(invariance_residual(sys, p.region, p.exit_facet, u) <= 1e-8);
  CHECK(check_no_equilibrium(sys, p.region, p.gain, p.offset));
}

bool has_vertex(const Simplex& s, const Vec& x) {
  for (const auto& v : s.v) {
    if ((v - x).norm() < 1e-9) return true;
  }
  return false;
}

Simplex tri(const Vec& a, const Vec& b, const Vec& c) { return make_simplex({a, b, c}); }

int facet_opposite(const Simplex& s, const Vec& v) {
  for (int i = 0; i <= s.n(); ++i) {
    if ((s.v[i] - v).norm() < 1e-12) return i;
  }
  return -1;
}

}  // namespace

TEST_CASE("affine interpolation of vertex controls") {
  Simplex s = tri(vec({0, 0}), vec({2, 0}), vec({0, 1}));
  VertexControls c{{vec({3}), vec({3}), vec({3})}, 0};
  auto [f0, g0] = affine_from_vertex_controls(s, c);
  CHECK(f0.norm() < 1e-12);
  CHECK(g0(0) == doctest::Approx(3));

  Mat k(2, 2);
  k << 1.5, -2, 0.25, 4;
  Vec d = vec({-1, 0.5});
  VertexControls lin;
  for (const auto& v : s.v) lin.u.push_back(k * v + d);
  auto [f1, g1] = affine_from_vertex_controls(s, lin);
  CHECK((f1 - k).norm() < 1e-10);
  CHECK((g1 - d).norm() < 1e-10);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    Points v;
    for (int i = 0; i < 4; ++i) v.push_back(vec({nd(rng), nd(rng), nd(rng)}));
    if (affine_dim(v) < 3) continue;
    Simplex r = make_simplex(v);
    VertexControls vc;
    for (int i = 0; i < 4; ++i) vc.u.push_back(vec({nd(rng), nd(rng)}));
    auto [f, g] = affine_from_vertex_controls(r, vc);
    for (int i = 0; i < 4; ++i) CHECK((f * r.v[i] + g - vc.u[i]).norm() < 1e-9);
  }
}

TEST_CASE("equilibrium exclusion") {
  Simplex s = tri(vec({0, 0}), vec({2, 0}), vec({0, 1}));
  AffineSystem spiral;
  spiral.A = Mat(2, 2);
  spiral.A << -1, 2, -2, -1;
  spiral.a = vec({-5, 0});
  spiral.B = Mat::Zero(2, 1);
  spiral.B(1, 0) = 1;
  // x* = -A^{-1} a is far from S.
  CHECK(check_no_equilibrium(spiral, s, Mat::Zero(1, 2), vec({0})));

  // Double integrator with u = 0 at the origin: f(0,0) = 0.
  auto di = fixtures::double_integrator();
  CHECK_FALSE(check_no_equilibrium(di, s, Mat::Zero(1, 2), vec({0})));
  // u = -x2 - 1: x2' < 0 everywhere on x2 = 0, no equilibrium.
  Mat gain(1, 2);
  gain << 0, -1;
  CHECK(check_no_equilibrium(di, s, gain, vec({-1})));

  // Singular closed loop: A_cl = [[0,1],[0,0]], b = (0,0), equilibria {x2 = 0}.
  CHECK_FALSE(check_no_equilibrium(di, s, Mat::Zero(1, 2), vec({0})));
  Simplex above = tri(vec({0, 1}), vec({2, 1}), vec({0, 2}));
  CHECK(check_no_equilibrium(di, above, Mat::Zero(1, 2), vec({0})));
}

TEST_CASE("vertex controls by LP") {
  auto di = fixtures::double_integrator();
  Simplex s = tri(vec({0, 0}), vec({2, 0}), vec({0, 1}));
  const int exit = facet_opposite(s, vec({0, 1}));
  VertexControls vc = vertex_controls_lp(di, s, exit);
  CHECK(invariance_residual(di, s, exit, vc.u) <= 1e-9);
  // At (0,0) the left facet normal is orthogonal to B and the drift vanishes,
  // so that facet is blocked with zero margin for every u.
  CHECK(vc.slack == doctest::Approx(0.0).epsilon(1e-12));

  Simplex up = tri(vec({0, 1}), vec({1, 1}), vec({0, 2}));
  const int e2 = facet_opposite(up, vec({0, 2}));
  VertexControls v2 = vertex_controls_lp(di, up, e2);
  CHECK(invariance_residual(di, up, e2, v2.u) <= 1e-9);
  // The left facet x1 = 0 has normal (-1, 0), so -h.f = x2 = 1 at (0,1) for
  // every u; the other margins reach the LP cap of 1.
  CHECK(v2.slack == doctest::Approx(1.0));

  // The right facet x1 = 1 is orthogonal to B and blocked, while the drift
  // x2 > 0 pushes across it.
  Simplex bad = tri(vec({0, 1}), vec({1, 1}), vec({1, 2}));
  const int e3 = facet_opposite(bad, vec({1, 2}));
  try {
    vertex_controls_lp(di, bad, e3);
    FAIL("expected Infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
    CHECK(e.detail() >= 0);
  }
}

TEST_CASE("constructive vertex controls") {
  auto di = fixtures::double_integrator();
  // Case v_i off O above w-: aim at an interior point.
  Simplex s = tri(vec({0, 1}), vec({2, 1}), vec({0, 2}));
  auto geom = compute_geometry(di, convex_hull(s.v));
  const int exit = facet_opposite(s, vec({0, 2}));
  VertexControls vc = vertex_controls_constructive(di, geom, s, exit);
  CHECK(invariance_residual(di, s, exit, vc.u) < 0);

  // Vertex in O with v0 within the exit facet's beta range: flow along B.
  Simplex o = tri(vec({0, 0}), vec({2, 0}), vec({0, 1}));
  auto og = compute_geometry(di, convex_hull(o.v));
  const int oe = facet_opposite(o, vec({0, 1}));
  VertexControls ov = vertex_controls_constructive(di, og, o, oe);
  CHECK(invariance_residual(di, o, oe, ov.u) <= 1e-12);
  // (0,0) is sent along p' - v0 = (0,-1): out through the exit facet.
  Vec f00 = di.field(vec({0, 0}), ov.u[facet_opposite(o, vec({0, 0}))]);
  CHECK(o.h[oe].dot(f00) > 0);
  auto [gain, offset] = affine_from_vertex_controls(o, ov);
  CHECK(check_no_equilibrium(di, o, gain, offset));
}

TEST_CASE("simplex synthesis: one piece, and the split when the exit facet lies in O") {
  auto di = fixtures::double_integrator();
  Simplex s = tri(vec({0, 0}), vec({2, 0}), vec({0, 1}));
  auto geom = compute_geometry(di, convex_hull(s.v));
  auto one = synth_simplex(di, geom, s, facet_opposite(s, vec({0, 1})));
  REQUIRE(one.size() == 1);
  check_piece(di, one[0]);

  auto pr = fixtures::split_simplex();
  Simplex sp = make_simplex(pr.p.vertices);
  auto sg = compute_geometry(pr.sys, pr.p);
  auto two = synth_simplex(pr.sys, sg, sp, facet_opposite(sp, vec({0, 1})));
  REQUIRE(two.size() == 2);
  for (const auto& p : two) check_piece(pr.sys, p);
  // The lower piece exits through F0, the upper through the shared facet.
  Points f0 = two[0].region.facet(two[0].exit_facet);
  for (const auto& x : f0) CHECK(std::abs(x(1)) < 1e-12);
  Points shared = two[1].region.facet(two[1].exit_facet);
  for (const auto& x : shared) CHECK(has_vertex(two[0].region, x));
  CHECK(simplex_volume(two[0].region.v) + simplex_volume(two[1].region.v) ==
        doctest::Approx(simplex_volume(sp.v)));
}


TEST_CASE("50 random reachable simplices: pieces satisfy both simplex conditions") {
  std::mt19937_64 rng(17);
  int done = 0, split = 0, constructive = 0;
  for (int guard = 0; done < 50 && guard < 5000; ++guard) {
    AffineSystem sys = done % 2 == 0 ? fixtures::double_integrator() : fixtures::tetra_partial().sys;
    auto pick = fixtures::random_reachable_simplex(sys, rng);
    if (!pick) continue;
    auto [s, exit] = *pick;
    auto geom = compute_geometry(sys, convex_hull(s.v));
    auto pieces = synth_simplex(sys, geom, s, exit);
    split += pieces.size() == 2;
    double vol = 0;
    for (const auto& p : pieces) {
      check_piece(sys, p);
      vol += simplex_volume(p.region.v);
    }
    CHECK(vol == doctest::Approx(simplex_volume(s.v)));
    // Two independent derivations of the vertex conditions.
    bool in_o = true;
    for (const auto& x : s.facet(exit)) in_o = in_o && geom.on_o(x, 1e-8);
    if (pieces.size() == 1 || !in_o) {
      VertexControls c = vertex_controls_constructive(sys, geom, s, exit);
      CHECK(invariance_residual(sys, s, exit, c.u) <= 1e-8);
      ++constructive;
    }
    ++done;
  }
  CHECK(done == 50);
  CHECK(constructive >= 40);
  MESSAGE("split simplices: " << split);
}

TEST_CASE("greedy ordering on the pentagon eps-reach set") {
  auto ex = fixtures::pentagon();
  auto geom = compute_geometry(ex.sys, ex.p);
  Polytope q = epsilon_cut(ex.sys, geom, ex.p, ex.f, 0.1).reach_eps;
  auto qg = compute_geometry(ex.sys, q);
  Triangulation t = basic_triangulation(q, select_vstar(q, ex.f, qg), ex.f);
  PathPlan plan = greedy_paths(ex.sys, t, qg);
  REQUIRE(plan.order.size() == 3);
  // Finishing order: the simplex on F, then the right one, then the bottom one.
  auto centroid_of = [&](int i) { return t.simplices[i].centroid(); };
  CHECK(centroid_of(plan.order[0])(1) > 1.0);
  CHECK(plan.next[plan.order[0]] == -1);
  CHECK(plan.next[plan.order[1]] == plan.order[0]);
  CHECK(plan.next[plan.order[2]] == plan.order[1]);
  CHECK(centroid_of(plan.order[2])(1) < 0.5);
  for (size_t k = 1; k < plan.levels.size(); ++k) CHECK(plan.levels[k] >= plan.levels[k - 1] - 1e-12);
  CHECK(plan.path_len[plan.order[2]] == 3);

  Polytope single = convex_hull({vec({0, 1}), vec({1, 1}), vec({0, 2})});
  Points sf{vec({0, 1}), vec({1, 1})};
  auto sg = compute_geometry(ex.sys, single);
  Triangulation one = basic_triangulation(single, select_vstar(single, sf, sg), sf);
  PathPlan p1 = greedy_paths(ex.sys, one, sg);
  CHECK(p1.path_len == std::vector<int>{1});
}

TEST_CASE("greedy ordering finishes on random reachable polygons") {
  std::mt19937_64 rng(29);
  int runs = 0;
  for (int k = 0; k < 200 && runs < 20; ++k) {
    auto pr = fixtures::random_di_instance(rng);
    auto geom = compute_geometry(pr.sys, pr.p);
    if (!analyze(pr.sys, geom, pr.p, pr.f).reachable) continue;
    Triangulation t = basic_triangulation(pr.p, select_vstar(pr.p, pr.f, geom), pr.f);
    PathPlan plan = greedy_paths(pr.sys, t, geom);
    CHECK(static_cast<int>(plan.order.size()) == t.size());
    for (size_t i = 1; i < plan.levels.size(); ++i) CHECK(plan.levels[i] >= plan.levels[i - 1] - 1e-9);
    ++runs;
  }
  CHECK(runs == 20);
}

TEST_CASE("polytope synthesis on the shipped fixtures") {
  auto box = fixtures::box_right();
  PWAController c = synth_polytope(box.sys, box.p, box.f);
  CHECK(c.pieces.size() == 2);
  for (const auto& p : c.pieces) check_piece(box.sys, p);

  auto ex = fixtures::pentagon();
  SynthOptions o;
  o.eps = 0.1;
  PWAController ce = synth_polytope(ex.sys, ex.p, ex.f, o);
  CHECK(ce.pieces.size() == 3);
  CHECK(ce.domain.size() == 1);

  auto left = fixtures::box_left();
  try {
    synth_polytope(left.sys, left.p, left.f);
    FAIL("expected NotReachable");
  } catch (const NotReachableError& e) {
    CHECK(e.code() == ErrorCode::NotReachable);
    CHECK_FALSE(e.analysis().reachable);
  }

  // Lookup is total on the domain and deterministic.
  std::mt19937_64 rng(4);
  for (const auto* ctl : {&c, &ce}) {
    for (int k = 0; k < 200; ++k) {
      const Polytope& d = ctl->domain.front();
      Vec x = fixtures::interior_point(d.vertices, rng);
      int a = ctl->lookup(x);
      CHECK(a >= 0);
      CHECK(a == ctl->lookup(x));
    }
  }
}

TEST_CASE("polytope synthesis through the partial-target constructions") {
  for (auto pr : {fixtures::partial_facet(), fixtures::far_target(), fixtures::tetra_partial(), fixtures::o_crossing()}) {
    PWAController c = synth_polytope(pr.sys, pr.p, pr.f);
    CHECK(c.pieces.size() >= 2);
    for (const auto& p : c.pieces) check_piece(pr.sys, p);
    std::mt19937_64 rng(8);
    for (int k = 0; k < 100; ++k) CHECK(c.covers(fixtures::interior_point(pr.p.vertices, rng)));
  }
}
