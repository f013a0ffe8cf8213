#pragma once

#include "reachctl/system.hpp"

#include <optional>

namespace reachctl {

// Landmark sets and verdict for P -> F with constraint in P.
// Lower-dimensional sets are stored as (possibly lower-dimensional) polytopes;
// failure sets are stored as their closures.
struct ReachAnalysis {
  Vec v_minus;
  Vec v_plus;
  Polytope h_minus;
  Polytope h_plus;
  Polytope p_plus;
  bool b_minus_nonempty = false;
  Polytope b_minus;  // P ∩ B_{v-} ∩ O when nonempty
  Polytope a_minus;
  Polytope a_plus;
  bool condition_a = false;
  bool condition_b = false;
  bool reachable = false;
  bool ambiguous = false;  // some decision fell inside the tolerance band
  int target_facet = -1;   // index into P.halfspaces of the facet containing F
};

struct EpsilonCut {
  double eps = 0.0;
  Polytope a_eps_minus;
  Polytope a_eps_plus;
  Polytope reach_eps;
  bool no_failure_sets = false;
  // Cut planes; the Reach side is plane.eval(x) <= 0.
  std::optional<HalfSpace> minus_cut;
  std::optional<HalfSpace> plus_cut;
};

// Lexicographically first minimizer / maximizer of beta over the points.
Vec argmin_beta(const SystemGeometry& geom, const Points& pts, double tol = kTolGeom);
Vec argmax_beta(const SystemGeometry& geom, const Points& pts, double tol = kTolGeom);
// max_P beta - min_P beta
double beta_extent(const SystemGeometry& geom, const Polytope& p);
double default_eps(const SystemGeometry& geom, const Polytope& p);

// Throws AssumptionViolated if F is not an (n-1)-dimensional subset of a facet.
ReachAnalysis analyze(const AffineSystem& sys, const SystemGeometry& geom, const Polytope& p,
                      const Points& f, double tol = kTolGeom);

// Throws EpsTooLarge when the cut would remove part of F.
EpsilonCut epsilon_cut(const AffineSystem& sys, const SystemGeometry& geom, const Polytope& p,
                       const Points& f, double eps, double tol = kTolGeom);

struct ReachPair {
  std::optional<EpsilonCut> first;
  std::optional<EpsilonCut> second;
  bool covers = false;
  bool eps_too_large = false;
};

// Throws CommonHyperplane when F1 and F2 lie in one hyperplane.
ReachPair reach_eps_pair(const AffineSystem& sys, const SystemGeometry& geom, const Polytope& p,
                         const Points& f1, const Points& f2, double eps, double tol = kTolGeom);

// Volume of the union of convex pieces by inclusion-exclusion (at most a few pieces).
double union_volume(const std::vector<Polytope>& pieces);

}  // namespace reachctl
