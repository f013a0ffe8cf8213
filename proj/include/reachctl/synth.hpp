#pragma once

#include "reachctl/triangulate.hpp"

#include <optional>
#include <vector>

namespace reachctl {

// Facet indexing: facet j of a simplex omits vertex j, and `exit` names the
// facet the closed loop must leave through. The invariance conditions block
// every facet j with j != i and j != exit at vertex i.
struct VertexControls {
  std::vector<Vec> u;
  double slack = 0.0;  // min over blocked (i, j) of -h_j.(A v_i + a + B u_i)
};

struct AffinePiece {
  Simplex region;
  Mat gain;    // m x n
  Vec offset;  // m
  int exit_facet = 0;
  int path_len = 0;
  double slack = 0.0;
  double exit_margin = 0.0;  // min over exit-facet vertices of h_exit . f
  // Lexicographic lookup rank; smaller wins on overlaps.
  std::vector<int> priority;

  Vec control(const Vec& x) const { return gain * x + offset; }
};

// Max-slack LP per vertex. First asks for strict blocking plus outflow through
// the exit facet, then strict blocking alone. Throws Infeasible (detail =
// vertex index) when even the non-strict conditions fail.
VertexControls vertex_controls_lp(const AffineSystem& sys, const Simplex& s, int exit,
                                  const Tolerances& tol = {});

// Case-by-case construction of vertex controls. Throws CaseViolation.
VertexControls vertex_controls_constructive(const AffineSystem& sys, const SystemGeometry& geom,
                                            const Simplex& s, int exit, double tol = kTolGeom);

// Largest invariance residual max h_j.(A v_i + a + B u_i) over blocked pairs.
double invariance_residual(const AffineSystem& sys, const Simplex& s, int exit,
                           const std::vector<Vec>& u);

// [F g] with F v_i + g = u_i. Throws SingularVertexMatrix.
std::pair<Mat, Vec> affine_from_vertex_controls(const Simplex& s, const VertexControls& vc);

// True when the closed loop has no equilibrium in S.
bool check_no_equilibrium(const AffineSystem& sys, const Simplex& s, const Mat& gain,
                          const Vec& offset, double tol = kTolGeom);

// One piece, or two when the exit facet lies in O and v0 is above it in beta.
// Throws SynthesisFailed with the failing condition in the message.
std::vector<AffinePiece> synth_simplex(const AffineSystem& sys, const SystemGeometry& geom,
                                       const Simplex& s, int exit, const Tolerances& tol = {});

struct PathPlan {
  std::vector<int> order;      // simplices in the order they were finished
  std::vector<int> exit_facet; // per simplex
  std::vector<int> next;       // per simplex: next simplex, -1 for the target
  std::vector<int> path_len;   // per simplex
  std::vector<double> levels;  // beta.w' at each step
};

// Greedy ordering by the lowest beta level on the exit facet, ties broken by
// the number of exit vertices at that level, then by indices. Throws Stuck.
PathPlan greedy_paths(const AffineSystem& sys, const Triangulation& t, const SystemGeometry& geom,
                      double tol = kTolGeom);

struct PWAController {
  int n = 0;
  int m = 0;
  std::vector<AffinePiece> pieces;
  std::vector<Polytope> domain;  // leaf polytopes the pieces triangulate
  Polytope region;               // input polytope; leaving it is a failure
  Points target;

  // Index of the winning piece containing x, or -1.
  int lookup(const Vec& x, double tol = kTolGeom) const;
  bool covers(const Vec& x, double tol = kTolGeom) const;
};

struct SynthOptions {
  std::optional<double> eps;  // default: default_eps on the input polytope
  int max_halvings = 6;
  int max_depth = 8;
  Tolerances tol;
};

class NotReachableError : public Error {
 public:
  NotReachableError(const std::string& what, ReachAnalysis analysis)
      : Error(ErrorCode::NotReachable, what), analysis_(std::move(analysis)) {}
  const ReachAnalysis& analysis() const { return analysis_; }

 private:
  ReachAnalysis analysis_;
};

// Full pipeline: cover along O when needed, eps-cut failure sets, pick the
// construction for F, triangulate, order, synthesize.
PWAController synth_polytope(const AffineSystem& sys, const Polytope& p, const Points& f,
                             const SynthOptions& opt = {});

}  // namespace reachctl
