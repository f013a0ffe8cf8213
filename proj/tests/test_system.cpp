#include "doctest.h"
#include "reachctl/system.hpp"
#include "support/fixtures.hpp"

#include <random>

using namespace reachctl;
using fixtures::vec;

namespace {

AffineSystem random_system(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0, 1);
  AffineSystem s;
  s.A = Mat::NullaryExpr(n, n, [&] { return g(rng); });
  s.a = Vec::NullaryExpr(n, [&] { return g(rng); });
  s.B = Mat::NullaryExpr(n, n - 1, [&] { return g(rng); });
  return s;
}

// Distance from v to Im B.
double off_image(const Mat& b, const Vec& v) {
  Vec coef = b.colPivHouseholderQr().solve(v);
  return (b * coef - v).norm();
}

}  // namespace

TEST_CASE("double integrator assumptions") {
  auto pr = fixtures::box_right();
  AssumptionReport r = check_assumptions(pr.sys, pr.p, pr.f);
  CHECK(r.rank_b);
  CHECK(r.controllable);
  CHECK(r.o_outside);
  CHECK(r.target_facet);
  CHECK(r.all());

  AffineSystem full = pr.sys;
  full.B = Mat::Identity(2, 2);
  CHECK_FALSE(check_assumptions(full, pr.p, pr.f).rank_b);

  auto oc = fixtures::o_crossing();
  CHECK_FALSE(check_assumptions(oc.sys, oc.p, oc.f).o_outside);

  Points interior = {vec({1, 0.2}), vec({1, 0.8})};
  CHECK_FALSE(check_assumptions(pr.sys, pr.p, interior).target_facet);
}

TEST_CASE("beta and O for the double integrator") {
  auto pr = fixtures::box_right();
  SystemGeometry g = compute_geometry(pr.sys, pr.p);
  CHECK((g.beta - vec({-1, 0})).norm() < 1e-12);
  CHECK(std::abs(g.b_basis(0, 0)) < 1e-12);
  CHECK(std::abs(std::abs(g.b_basis(1, 0)) - 1.0) < 1e-12);
  // O = {x2 = 0}
  CHECK(std::abs(std::abs(g.o_plane.normal(1)) - 1.0) < 1e-12);
  CHECK(std::abs(g.o_plane.offset) < 1e-12);
  for (const auto& v : pr.p.vertices) CHECK(g.beta.dot(pr.sys.drift(v)) <= 1e-12);

  Polytope lower = convex_hull({vec({0, 0}), vec({2, 0}), vec({2, -1}), vec({0, -1})});
  CHECK((compute_geometry(pr.sys, lower).beta - vec({1, 0})).norm() < 1e-12);

  auto oc = fixtures::o_crossing();
  CHECK_THROWS_AS(compute_geometry(oc.sys, oc.p), Error);
  try {
    compute_geometry(oc.sys, oc.p);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SignAmbiguous);
  }

  AffineSystem degenerate = pr.sys;
  degenerate.A = Mat::Zero(2, 2);
  degenerate.a = vec({0, 1});
  try {
    compute_geometry(degenerate, pr.p);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateO);
  }
}

TEST_CASE("beta and O transform covariantly under rotations") {
  auto pr = fixtures::box_right();
  SystemGeometry g = compute_geometry(pr.sys, pr.p);
  double th = 0.7;
  Mat q(2, 2);
  q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  Vec r = vec({0.3, -1.2});
  AffineSystem s2{q * pr.sys.A * q.transpose(), q * pr.sys.a - q * pr.sys.A * q.transpose() * r, q * pr.sys.B};
  Points moved;
  for (const auto& v : pr.p.vertices) moved.push_back(q * v + r);
  SystemGeometry g2 = compute_geometry(s2, convex_hull(moved));
  CHECK((g2.beta - q * g.beta).norm() < 1e-9);
  // Image of the old O: normal q n, offset n.q^T r + offset.
  Vec n2 = q * g.o_plane.normal;
  double off2 = g.o_plane.offset + n2.dot(r);
  CHECK((g2.o_plane.normal - n2).norm() < 1e-9);
  CHECK(std::abs(g2.o_plane.offset - off2) < 1e-9);
}

TEST_CASE("O is exactly where the drift lies in Im B") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + trial % 3;
    AffineSystem s = random_system(rng, n);
    REQUIRE(matrix_rank(controllability_matrix(s)) == n);
    Vec beta = input_normal(s);
    CHECK((s.B.transpose() * beta).norm() < 1e-12);
    SystemGeometry geo = geometry_for_beta(s, beta);
    Vec nrm = geo.o_plane.normal;
    for (int k = 0; k < 5; ++k) {
      Vec x = Vec::NullaryExpr(n, [&] { return g(rng); });
      Vec on = x - geo.o_plane.eval(x) * nrm;
      CHECK(off_image(s.B, s.drift(on)) < 1e-9);
      Vec off = on + 0.5 * nrm;
      CHECK(off_image(s.B, s.drift(off)) > 1e-6);
    }
  }
}
