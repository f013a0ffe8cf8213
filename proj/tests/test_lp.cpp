#include "doctest.h"
#include "reachctl/lp.hpp"

#include <random>

using namespace reachctl;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v1(double a) { return Vec::Constant(1, a); }

LinearProgram square_lp(const Vec& c) {
  LinearProgram lp;
  lp.nvars = 2;
  lp.objective = c;
  lp.ineq = {{v2(-1, 0), 0}, {v2(0, -1), 0}, {v2(1, 0), 1}, {v2(0, 1), 1}};
  return lp;
}

}  // namespace

TEST_CASE("min x1 over the unit square") {
  auto out = solve(square_lp(v2(1, 0)));
  REQUIRE(out.optimal());
  CHECK(*out.value == doctest::Approx(0.0));
  CHECK((*out.x)(0) == doctest::Approx(0.0));
}

TEST_CASE("min -x1-x2 over a triangle sits on the hypotenuse") {
  LinearProgram lp;
  lp.nvars = 2;
  lp.objective = v2(-1, -1);
  lp.ineq = {{v2(-1, 0), 0}, {v2(0, -1), 0}, {v2(1, 1), 2}};
  auto out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(*out.value == doctest::Approx(-2.0));
  CHECK((*out.x).sum() == doctest::Approx(2.0));
}

TEST_CASE("infeasible and unbounded are reported") {
  LinearProgram lp;
  lp.nvars = 1;
  lp.objective = v1(1);
  lp.ineq = {{v1(1), -1}, {v1(-1), 0}};
  CHECK(solve(lp).status == LPStatus::Infeasible);
  lp.ineq = {{v1(1), 3}};
  CHECK(solve(lp).status == LPStatus::Unbounded);
}

TEST_CASE("equality constraints and free variables") {
  LinearProgram lp;
  lp.nvars = 2;
  lp.objective = v2(1, 0);
  lp.eq = {{v2(1, 1), -3}};
  lp.ineq = {{v2(0, 1), 5}};
  auto out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(*out.value == doctest::Approx(-8.0));
}

TEST_CASE("max slack feasibility in one dimension") {
  auto r = max_slack_feasibility({{v1(1), 1}, {v1(-1), 0}});
  CHECK(r.slack == doctest::Approx(0.5));
  CHECK(r.x(0) == doctest::Approx(0.5));
  r = max_slack_feasibility({{v1(1), 0}, {v1(-1), 0}});
  CHECK(r.slack == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.x(0) == doctest::Approx(0.0));
  r = max_slack_feasibility({{v1(1), -1}, {v1(-1), 0}});
  CHECK(r.slack < 0);
  r = max_slack_feasibility({{v1(-1), 0}});
  CHECK(r.slack == doctest::Approx(1.0));
}

TEST_CASE("random 2-D programs agree with constraint-pair enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp;
    lp.nvars = 2;
    lp.objective = v2(u(rng), u(rng));
    for (int i = 0; i < 5; ++i) lp.ineq.emplace_back(v2(u(rng), u(rng)), u(rng) + 0.3);
    // Box keeps every instance bounded.
    for (int i = 0; i < 2; ++i) {
      Vec e = Vec::Zero(2);
      e(i) = 1;
      lp.ineq.emplace_back(e, 10);
      lp.ineq.emplace_back(-e, 10);
    }
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < lp.ineq.size(); ++i) {
      for (size_t j = i + 1; j < lp.ineq.size(); ++j) {
        Eigen::Matrix2d m;
        m.row(0) = lp.ineq[i].first.transpose();
        m.row(1) = lp.ineq[j].first.transpose();
        if (std::abs(m.determinant()) < 1e-12) continue;
        Eigen::Vector2d x = m.inverse() * Eigen::Vector2d(lp.ineq[i].second, lp.ineq[j].second);
        bool ok = true;
        for (const auto& [g, h] : lp.ineq) ok = ok && g.dot(Vec(x)) <= h + 1e-9;
        if (ok) best = std::min(best, lp.objective.dot(Vec(x)));
      }
    }
    auto out = solve(lp);
    if (std::isinf(best)) {
      CHECK(out.status == LPStatus::Infeasible);
      continue;
    }
    REQUIRE(out.optimal());
    ++checked;
    CHECK(std::abs(*out.value - best) <= 1e-8 * std::max(1.0, std::abs(best)));
    for (const auto& [g, h] : lp.ineq) CHECK(g.dot(*out.x) <= h + 1e-8);
    // Weak duality spot check: no sampled feasible point beats the optimum.
    for (int s = 0; s < 50; ++s) {
      Vec x = v2(10 * u(rng), 10 * u(rng));
      bool ok = true;
      for (const auto& [g, h] : lp.ineq) ok = ok && g.dot(x) <= h;
      if (ok) CHECK(lp.objective.dot(x) >= *out.value - 1e-9);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("solve is deterministic") {
  LinearProgram lp = square_lp(v2(0.3, -0.7));
  auto a = solve(lp);
  auto b = solve(lp);
  CHECK(*a.value == *b.value);
  CHECK(*a.x == *b.x);
}
