#pragma once

#include "reachctl/geometry.hpp"

#include <string>
#include <vector>

namespace reachctl {

// x' = A x + a + B u
struct AffineSystem {
  Mat A;
  Vec a;
  Mat B;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  Vec drift(const Vec& x) const { return A * x + a; }
  Vec field(const Vec& x, const Vec& u) const { return A * x + a + B * u; }
};

struct AssumptionReport {
  bool rank_b = false;        // rank B = n - 1
  bool controllable = false;  // rank [B AB ... A^{n-1}B] = n
  bool o_outside = false;     // O does not meet int P
  bool target_facet = false;  // F is (n-1)-dimensional and lies in a facet of P
  std::vector<std::string> messages;

  bool all() const { return rank_b && controllable && o_outside && target_facet; }
};

// beta: unit normal of Im B, signed so beta.(Ax+a) <= 0 on the polytope.
// o_plane: {x : beta.(Ax+a) = 0}, normal beta^T A scaled to unit length, so
// o_plane.eval(x) <= 0 on the polytope as well.
struct SystemGeometry {
  Vec beta;
  Mat b_basis;
  Hyperplane o_plane;

  double level(const Vec& x) const { return beta.dot(x); }
  Hyperplane through(const Vec& x) const { return {beta, beta.dot(x)}; }
  bool on_o(const Vec& x, double tol = kTolGeom) const { return std::abs(o_plane.eval(x)) <= tol; }
};

void check_dimensions(const AffineSystem& sys);
int matrix_rank(const Mat& m, double rel_tol = 1e-9);
Mat controllability_matrix(const AffineSystem& sys);

// Unit left null vector of B with the first nonzero entry positive.
Vec input_normal(const AffineSystem& sys);
// Geometry for a fixed sign of beta, without consulting a polytope.
SystemGeometry geometry_for_beta(const AffineSystem& sys, const Vec& beta);

AssumptionReport check_assumptions(const AffineSystem& sys, const Polytope& p, const Points& f,
                                   double tol = kTolGeom);

// Throws AssumptionViolated (rank B), SignAmbiguous (O crosses int P) or
// DegenerateO (beta^T A = 0).
SystemGeometry compute_geometry(const AffineSystem& sys, const Polytope& p, double tol = kTolGeom);

// True when beta.(Ax+a) takes both signs on vert(P).
bool o_crosses_interior(const AffineSystem& sys, const Polytope& p, double tol = kTolGeom);

}  // namespace reachctl
