#pragma once

#include "reachctl/reach.hpp"

#include <vector>

namespace reachctl {

struct Adjacency {
  int i = 0;
  int j = 0;
  int facet_i = 0;  // facet of simplex i (index of the omitted vertex)
  int facet_j = 0;
};

// Simplices over a shared vertex pool. cells[k] holds sorted pool indices and
// simplices[k].v lists the same points in that order.
struct Triangulation {
  Points points;
  std::vector<std::vector<int>> cells;
  std::vector<Simplex> simplices;
  std::vector<Adjacency> adjacency;
  // Per simplex: a facet lying inside the target set, or -1.
  std::vector<int> target_facet;
  Points target;
  Vec vstar;

  int size() const { return static_cast<int>(simplices.size()); }
};

enum class PieceRole { Target, Feeder };

struct CoverPiece {
  Polytope poly;
  PieceRole role = PieceRole::Target;
  Points target;  // vertices of the set this piece is steered to
  int stage = 0;  // 0: reaches the original F; k: reaches a stage k-1 piece
};

struct Cover {
  std::vector<CoverPiece> pieces;
  bool passthrough = false;  // the construction did not apply; one piece = P
};

// Vertices of P in P+ that are off O, then those in F, each group in
// lexicographic order.
Points vstar_candidates(const Polytope& p, const Points& f, const SystemGeometry& geom,
                        double tol = kTolGeom);
// First candidate; throws NoQualifyingVertex when there is none.
Vec select_vstar(const Polytope& p, const Points& f, const SystemGeometry& geom,
                 double tol = kTolGeom);

// Adjacency and target tags from pool indices.
Triangulation assemble_triangulation(const Points& pool, std::vector<std::vector<int>> cells,
                                     const Points& target, const Vec& vstar, double tol = kTolGeom);

// Cone from v* over pulling triangulations of the facets not containing v*.
Triangulation basic_triangulation(const Polytope& p, const Vec& vstar, const Points& f,
                                  double tol = kTolGeom);

// As basic_triangulation, but the facet holding F is triangulated so that F is a
// union of simplex facets. Supports n <= 3. Throws VStarInFbar.
Triangulation triangulation_wrt_F(const Polytope& p, const Points& f, const Vec& vstar,
                                  double tol = kTolGeom);

// Pieces {P1 -> F, P2 -> F23, P3 -> F23} with F23 = P2 ∩ P3 on a hyperplane
// through v- and a vertex v* of F in P+. A full-facet F gives a passthrough.
Cover cover_wrt_F(const Polytope& p, const Points& f, const SystemGeometry& geom,
                  double tol = kTolGeom);

struct FarSplit {
  Polytope p1;       // contains F
  Polytope p2;       // steered to the interface
  Points interface;  // B_{v+} ∩ P
  bool passthrough = false;
};

// Split along the level set of beta through v+. Passthrough when a vertex of F
// is already in P+.
FarSplit split_far_case(const Polytope& p, const Points& f, const SystemGeometry& geom,
                        double tol = kTolGeom);

// Split along O and cover each side with eps-reach sets. Throws CoverIncomplete
// when the pieces miss part of P.
Cover cover_wrt_O(const AffineSystem& sys, const Polytope& p, const Points& f, double eps,
                  double tol = kTolGeom);

// Volume checks for tests and the pipeline.
bool valid_triangulation(const Triangulation& t, const Polytope& p, double tol = 1e-8);

}  // namespace reachctl
