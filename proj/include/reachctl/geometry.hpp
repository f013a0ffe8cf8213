#pragma once

#include "reachctl/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace reachctl {

inline constexpr double kTolGeom = 1e-9;

// {x : normal . x <= offset}
struct HalfSpace {
  Vec normal;
  double offset = 0.0;

  double eval(const Vec& x) const { return normal.dot(x) - offset; }
};

// {x : normal . x == offset}
struct Hyperplane {
  Vec normal;
  double offset = 0.0;

  double eval(const Vec& x) const { return normal.dot(x) - offset; }
  HalfSpace below() const { return {normal, offset}; }
  HalfSpace above() const { return {-normal, -offset}; }
};

// Bounded convex set with both representations. Lower-dimensional sets keep
// their affine hull in `equalities`; `halfspaces` then hold the relative facets.
// The empty set has dim == -1 and no vertices.
struct Polytope {
  Points vertices;
  std::vector<HalfSpace> halfspaces;
  std::vector<Hyperplane> equalities;
  int dim = -1;
  int ambient = 0;

  bool empty() const { return dim < 0; }
  bool full() const { return dim == ambient && ambient > 0; }
  Vec centroid() const;
};

struct Face {
  Points vertices;
  HalfSpace supporting;
  int dim = -1;

  bool empty() const { return dim < 0; }
};

// Full-dimensional simplex; facet j omits vertex j. h[j] is the unit outward
// normal and c[j] the offset, so h[j].v[i] == c[j] for i != j.
struct Simplex {
  Points v;
  std::vector<Vec> h;
  std::vector<double> c;

  int n() const { return static_cast<int>(v.size()) - 1; }
  Points facet(int j) const;
  bool contains(const Vec& x, double tol = kTolGeom) const;
  double violation(const Vec& x) const;
  Vec centroid() const;
};

// Canonical vertex order: lexicographic, exact comparison.
bool lex_less(const Vec& a, const Vec& b);
// Sorts lexicographically and merges points closer than tol (max norm).
Points canonicalize(Points pts, double tol = kTolGeom);

// Affine dimension of a point set (-1 when empty).
int affine_dim(const Points& pts, double tol = kTolGeom);

Polytope empty_polytope(int ambient);
Polytope convex_hull(const Points& pts, double tol = kTolGeom);
// Throws DimensionDeficient (detail = affine dimension) unless full-dimensional.
const Polytope& require_full(const Polytope& p);

std::vector<HalfSpace> vrep_to_hrep(const Points& vertices, double tol = kTolGeom);
// Throws Unbounded when the constraints do not describe a bounded set.
Points hrep_to_vrep(const std::vector<HalfSpace>& hs, int n, double tol = kTolGeom);
Polytope from_halfspaces(const std::vector<HalfSpace>& hs, int n,
                         const std::vector<Hyperplane>& eqs = {},
                         double tol = kTolGeom);

// p intersected with extra constraints; p must be bounded (no LP check).
Polytope intersect(const Polytope& p, const std::vector<HalfSpace>& hs,
                   const std::vector<Hyperplane>& eqs = {}, double tol = kTolGeom);
Polytope intersect(const Polytope& p, const Polytope& q, double tol = kTolGeom);

// First element is the side normal.x <= offset. A side whose dimension drops
// below dim(p) is returned empty.
std::pair<Polytope, Polytope> split_by_hyperplane(const Polytope& p, const Hyperplane& h,
                                                  double tol = kTolGeom);

bool contains(const Polytope& p, const Vec& x, double tol = kTolGeom);
// Largest constraint violation (<= 0 inside).
double violation(const Polytope& p, const Vec& x);
bool subset_of(const Polytope& a, const Polytope& b, double tol = kTolGeom);

double volume(const Polytope& p);
// Volume relative to the affine hull (length, area, ...).
double relative_volume(const Polytope& p);
double simplex_volume(const Points& s);

Hyperplane hyperplane_through(const Points& pts, double tol = kTolGeom);
Hyperplane normalized(const Hyperplane& h);

std::vector<Face> faces_of(const Polytope& p, int d, double tol = kTolGeom);
Face common_face(const Polytope& p, const Polytope& q, double tol = kTolGeom);
Polytope face_polytope(const Face& f, double tol = kTolGeom);
Face make_face(const Points& pts, const Polytope& parent, double tol = kTolGeom);
// Facet of p containing all of f's vertices, if any.
std::optional<int> containing_facet(const Polytope& p, const Points& f, double tol = kTolGeom);

Simplex make_simplex(const Points& v, double tol = kTolGeom);

// Fan triangulation of a facet-dimensional face; vertices come from vert(f)
// and the anchor (lexicographically smallest vertex when none is given).
std::vector<Points> triangulate_face(const Face& f, const std::optional<Vec>& anchor = std::nullopt,
                                     double tol = kTolGeom);

// Pulling triangulation of a full-dimensional polytope: anchor first, then
// lexicographic order. Cells index into p.vertices.
std::vector<std::vector<int>> pulling_triangulation(const Polytope& p, int anchor,
                                                    double tol = kTolGeom);

// Triangulation of a planar (dim 1 or 2) point configuration embedded in R^n
// using every point, with constraint segments given as index pairs.
std::vector<std::vector<int>> constrained_triangulation(
    const Points& pts, const std::vector<std::pair<int, int>>& constraints,
    double tol = kTolGeom);

// Orthonormal basis (columns) of the affine hull directions and a base point.
std::pair<Mat, Vec> affine_basis(const Points& pts, double tol = kTolGeom);

std::pair<Vec, Vec> bounding_box(const Points& pts);

}  // namespace reachctl
