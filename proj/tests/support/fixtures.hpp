#pragma once

#include "reachctl/reach.hpp"

#include <optional>
#include <random>

namespace fixtures {

using reachctl::AffineSystem;
using reachctl::Mat;
using reachctl::Points;
using reachctl::Polytope;
using reachctl::Vec;

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// x1' = x2 + a1, x2' = u + a2
inline AffineSystem double_integrator(double a1 = 0.0, double a2 = 0.0) {
  AffineSystem s;
  s.A = Mat::Zero(2, 2);
  s.A(0, 1) = 1.0;
  s.a = vec({a1, a2});
  s.B = Mat::Zero(2, 1);
  s.B(1, 0) = 1.0;
  return s;
}

struct Problem {
  AffineSystem sys;
  Polytope p;
  Points f;
};

// [0,2] x [0,1], target the right edge (reachable).
inline Problem box_right() {
  return {double_integrator(), reachctl::convex_hull({vec({0, 0}), vec({2, 0}), vec({2, 1}), vec({0, 1})}),
          {vec({2, 0}), vec({2, 1})}};
}

// Same box, target the left edge (total failure).
inline Problem box_left() {
  Problem p = box_right();
  p.f = {vec({0, 0}), vec({0, 1})};
  return p;
}

// Pentagon with an A- wedge right of x1 = 3 and A+ = {(0,0)}.
inline Problem pentagon() {
  return {double_integrator(),
          reachctl::convex_hull({vec({0, 0}), vec({4, 0}), vec({4, 1}), vec({3, 2}), vec({2, 2})}),
          {vec({2, 2}), vec({3, 2})}};
}

// Area of Reach(P, F) for pentagon: P ∩ {x1 < 3}.
inline double pentagon_reach_area() { return 4.0; }

// Quadrilateral with two partial targets, neither reachable alone.
inline Problem two_targets() {
  return {double_integrator(), reachctl::convex_hull({vec({0, 0}), vec({4, 0}), vec({4, 1}), vec({1, 2})}),
          {vec({4, 0}), vec({4, 1})}};
}
inline Points two_targets_second() { return {vec({0, 0}), vec({2, 0})}; }

// P straddles O = {x2 = 0}.
inline Problem o_crossing() {
  return {double_integrator(),
          reachctl::convex_hull({vec({-1, 1}), vec({1, -1}), vec({3, -1}), vec({3, 1})}),
          {vec({3, 0}), vec({3, 1})}};
}

// F a part of the bottom facet, v* off the facet containing F.
inline Problem partial_facet() {
  return {double_integrator(1.0, 0.0),
          reachctl::convex_hull({vec({0, 0.5}), vec({1, 0}), vec({3, 0}), vec({1.5, 1})}),
          {vec({2, 0}), vec({3, 0})}};
}

// P+ = {(0,0)} lies in the facet containing F, and no vertex of F is in P+.
inline Problem far_target() {
  return {double_integrator(1.0, 0.0), reachctl::convex_hull({vec({0, 0}), vec({2, 0}), vec({1, 1})}),
          {vec({1, 0}), vec({2, 0})}};
}

// 3-D: x1' = x2 + 1, x2' = u1, x3' = u2; F a triangle inside the bottom facet
// that contains the beta-max vertex of P.
inline Problem tetra_partial() {
  AffineSystem s;
  s.A = Mat::Zero(3, 3);
  s.A(0, 1) = 1.0;
  s.a = vec({1, 0, 0});
  s.B = Mat::Zero(3, 2);
  s.B(1, 0) = 1.0;
  s.B(2, 1) = 1.0;
  Vec v0 = vec({0, 0, 0}), v1 = vec({2, 0, 0}), v2 = vec({1, 1, 0}), v3 = vec({1, 0.5, 1});
  return {s, reachctl::convex_hull({v0, v1, v2, v3}), {v0, v1, Vec(0.5 * (v1 + v2))}};
}

// Simplex whose exit facet lies in O; needs the two-piece split.
inline Problem split_simplex() {
  return {double_integrator(), reachctl::convex_hull({vec({0, 1}), vec({1, 0}), vec({2, 0})}),
          {vec({1, 0}), vec({2, 0})}};
}

inline double monte_carlo_volume(const Polytope& p, int samples, std::uint64_t seed) {
  auto [lo, hi] = reachctl::bounding_box(p.vertices);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  int hits = 0;
  Vec x(p.ambient);
  for (int s = 0; s < samples; ++s) {
    for (int d = 0; d < p.ambient; ++d) x(d) = lo(d) + u(rng) * (hi(d) - lo(d));
    if (reachctl::contains(p, x, 0)) ++hits;
  }
  return (hi - lo).prod() * hits / samples;
}

// Random point in the relative interior of conv(pts) (Dirichlet weights).
inline Vec interior_point(const Points& pts, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vec x = Vec::Zero(pts.front().size());
  double s = 0;
  for (const auto& p : pts) {
    double w = e(rng) + 1e-3;
    x += w * p;
    s += w;
  }
  return x / s;
}

// Centers of a k x k grid over the bounding box that lie at least `margin` inside p.
inline Points grid_inside(const Polytope& p, int k, double margin) {
  auto [lo, hi] = reachctl::bounding_box(p.vertices);
  Points out;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      Vec x = vec({lo(0) + (i + 0.5) / k * (hi(0) - lo(0)), lo(1) + (j + 0.5) / k * (hi(1) - lo(1))});
      if (reachctl::violation(p, x) < -margin) out.push_back(x);
    }
  }
  return out;
}

}  // namespace fixtures

namespace fixtures {

// Random double-integrator polygon on one side of O with a random edge as
// target; half of the draws use an edge through the beta-minimal vertex so
// that reachable and unreachable verdicts both occur.
inline Problem random_di_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0, 4), uy(0, 2), u01(0, 1);
  Polytope p;
  do {
    Points pts;
    for (int i = 0; i < 6; ++i) {
      double y = u01(rng) < 0.3 ? 0.0 : uy(rng);
      pts.push_back(vec({ux(rng), y}));
    }
    p = reachctl::convex_hull(pts);
  } while (!p.full() || reachctl::volume(p) < 0.5);
  bool lower = u01(rng) < 0.5;
  if (lower) {
    Points flipped;
    for (const auto& v : p.vertices) flipped.push_back(vec({v(0), -v(1)}));
    p = reachctl::convex_hull(flipped);
  }
  AffineSystem sys = double_integrator();
  auto geom = reachctl::compute_geometry(sys, p);
  std::vector<Points> edges;
  for (const auto& h : p.halfspaces) {
    Points e;
    for (const auto& v : p.vertices) {
      if (std::abs(h.eval(v)) < 1e-9) e.push_back(v);
    }
    edges.push_back(e);
  }
  Vec vmin = reachctl::argmin_beta(geom, p.vertices);
  std::vector<int> through;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    for (const auto& v : edges[i]) {
      if ((v - vmin).norm() < 1e-12) through.push_back(i);
    }
  }
  int pick;
  if (u01(rng) < 0.5) {
    pick = through[static_cast<size_t>(u01(rng) * through.size()) % through.size()];
  } else {
    pick = static_cast<int>(u01(rng) * edges.size()) % static_cast<int>(edges.size());
  }
  return {sys, p, edges[pick]};
}

// Random simplex on one side of O with the first facet it can reach, or nothing.
inline std::optional<std::pair<reachctl::Simplex, int>> random_reachable_simplex(const AffineSystem& sys,
                                                                                 std::mt19937_64& rng) {
  const int n = sys.n();
  std::uniform_real_distribution<double> u(-2, 2);
  Points v;
  for (int i = 0; i <= n; ++i) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = u(rng);
    v.push_back(x);
  }
  if (reachctl::affine_dim(v) < n || reachctl::simplex_volume(v) < 0.05) return std::nullopt;
  Polytope p = reachctl::convex_hull(v);
  if (reachctl::o_crosses_interior(sys, p)) return std::nullopt;
  reachctl::Simplex s = reachctl::make_simplex(v);
  auto geom = reachctl::compute_geometry(sys, p);
  for (int j = 0; j <= n; ++j) {
    if (reachctl::analyze(sys, geom, p, s.facet(j)).reachable) return std::make_pair(s, j);
  }
  return std::nullopt;
}

}  // namespace fixtures
