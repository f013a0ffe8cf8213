#include "reachctl/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reachctl {

namespace {

int index_of(const Points& pool, const Vec& x) {
  int best = -1;
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
    double e = (pool[i] - x).lpNorm<Eigen::Infinity>();
    if (e < d) {
      d = e;
      best = i;
    }
  }
  if (best < 0 || d > 1e-7) throw Error(ErrorCode::Degenerate, "point is not in the vertex pool");
  return best;
}

Points vertex_pool(const Polytope& p, const Points& f, double tol) {
  Points all = p.vertices;
  all.insert(all.end(), f.begin(), f.end());
  return canonicalize(all, tol);
}

std::vector<int> on_facet(const Points& pool, const HalfSpace& h, double tol) {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
    if (std::abs(h.eval(pool[i])) <= 10 * tol) ids.push_back(i);
  }
  return ids;
}

bool in_set(const Polytope& s, const Vec& x, double tol) { return violation(s, x) <= 10 * tol; }

double level_top(const SystemGeometry& geom, const Polytope& p) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& v : p.vertices) top = std::max(top, geom.level(v));
  return top;
}

// Subsets of size k from [0, m), lexicographic.
template <class Fn>
void combinations(int m, int k, Fn&& fn) {
  if (k == 0) {
    fn(std::vector<int>{});
    return;
  }
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (idx.back() >= m) return;
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Points vstar_candidates(const Polytope& p, const Points& f, const SystemGeometry& geom, double tol) {
  require_full(p);
  const double top = level_top(geom, p);
  Polytope fp = convex_hull(f, tol);
  Points off_o;
  Points in_f;
  for (const auto& v : canonicalize(p.vertices, tol)) {
    if (geom.level(v) < top - 10 * tol) continue;
    if (std::abs(geom.o_plane.eval(v)) > 10 * tol) {
      off_o.push_back(v);
    } else if (in_set(fp, v, tol)) {
      in_f.push_back(v);
    }
  }
  off_o.insert(off_o.end(), in_f.begin(), in_f.end());
  return off_o;
}

Vec select_vstar(const Polytope& p, const Points& f, const SystemGeometry& geom, double tol) {
  Points c = vstar_candidates(p, f, geom, tol);
  if (c.empty()) throw Error(ErrorCode::NoQualifyingVertex, "every vertex of P+ lies in O and outside F");
  return c.front();
}

Triangulation assemble_triangulation(const Points& pool, std::vector<std::vector<int>> cells,
                                     const Points& target, const Vec& vstar, double tol) {
  for (auto& c : cells) std::sort(c.begin(), c.end());
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  Triangulation t;
  t.points = pool;
  t.cells = cells;
  t.target = target;
  t.vstar = vstar;
  Polytope fp = target.empty() ? empty_polytope(static_cast<int>(vstar.size())) : convex_hull(target, tol);
  for (const auto& c : cells) {
    Points v;
    for (int i : c) v.push_back(pool[i]);
    t.simplices.push_back(make_simplex(v, tol));
    int tf = -1;
    if (!fp.empty()) {
      for (int j = 0; j < static_cast<int>(c.size()) && tf < 0; ++j) {
        bool all = true;
        for (int i = 0; i < static_cast<int>(c.size()); ++i) {
          if (i != j && !in_set(fp, v[i], tol)) all = false;
        }
        if (all) tf = j;
      }
    }
    t.target_facet.push_back(tf);
  }
  const int k = static_cast<int>(cells.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      std::vector<int> shared;
      std::set_intersection(cells[i].begin(), cells[i].end(), cells[j].begin(), cells[j].end(),
                            std::back_inserter(shared));
      if (shared.size() + 1 != cells[i].size()) continue;
      Adjacency a{i, j, 0, 0};
      for (int q = 0; q < static_cast<int>(cells[i].size()); ++q) {
        if (!std::binary_search(shared.begin(), shared.end(), cells[i][q])) a.facet_i = q;
        if (!std::binary_search(shared.begin(), shared.end(), cells[j][q])) a.facet_j = q;
      }
      t.adjacency.push_back(a);
    }
  }
  return t;
}

Triangulation basic_triangulation(const Polytope& p, const Vec& vstar, const Points& f, double tol) {
  require_full(p);
  Points pool = vertex_pool(p, f, tol);
  const int vid = index_of(pool, vstar);
  std::vector<std::vector<int>> cells;
  for (const auto& h : p.halfspaces) {
    if (std::abs(h.eval(vstar)) <= 10 * tol) continue;
    Face fc;
    for (int i : on_facet(pool, h, tol)) fc.vertices.push_back(pool[i]);
    fc.supporting = h;
    fc.dim = p.ambient - 1;
    for (const auto& cell : triangulate_face(fc, std::nullopt, tol)) {
      std::vector<int> ids{vid};
      for (const auto& x : cell) ids.push_back(index_of(pool, x));
      cells.push_back(ids);
    }
  }
  return assemble_triangulation(pool, cells, f, pool[vid], tol);
}

Triangulation triangulation_wrt_F(const Polytope& p, const Points& f, const Vec& vstar, double tol) {
  require_full(p);
  const int n = p.ambient;
  if (n > 3) throw Error(ErrorCode::Degenerate, "triangulation with respect to F supports n <= 3");
  auto fi = containing_facet(p, f, tol);
  if (!fi) throw Error(ErrorCode::AssumptionViolated, "target does not lie in a facet of P");
  if (std::abs(p.halfspaces[*fi].eval(vstar)) <= 10 * tol) {
    throw Error(ErrorCode::VStarInFbar, "v* lies in the facet containing F");
  }
  Polytope fp = convex_hull(f, tol);
  Points pool = vertex_pool(p, fp.vertices, tol);
  const int vid = index_of(pool, vstar);
  std::vector<std::vector<int>> cells;
  std::vector<std::vector<int>> fbar_cells;
  for (int hi = 0; hi < static_cast<int>(p.halfspaces.size()); ++hi) {
    const HalfSpace& h = p.halfspaces[hi];
    if (std::abs(h.eval(vstar)) <= 10 * tol) continue;
    std::vector<int> ids = on_facet(pool, h, tol);
    Points local;
    for (int i : ids) local.push_back(pool[i]);
    std::vector<std::pair<int, int>> constraints;
    if (hi == *fi && n == 3) {
      for (const auto& e : fp.halfspaces) {
        std::vector<int> ends;
        for (int k = 0; k < static_cast<int>(local.size()); ++k) {
          if (std::abs(e.eval(local[k])) <= 10 * tol && in_set(fp, local[k], tol)) ends.push_back(k);
        }
        // Collinear points on an edge of F: constrain consecutive pairs.
        if (ends.size() >= 2) {
          Vec dir = local[ends.back()] - local[ends.front()];
          std::sort(ends.begin(), ends.end(), [&](int a, int b) { return local[a].dot(dir) < local[b].dot(dir); });
          for (size_t k = 0; k + 1 < ends.size(); ++k) constraints.emplace_back(ends[k], ends[k + 1]);
        }
      }
    }
    for (const auto& cell : constrained_triangulation(local, constraints, tol)) {
      std::vector<int> g{vid};
      std::vector<int> base;
      for (int k : cell) base.push_back(ids[k]);
      g.insert(g.end(), base.begin(), base.end());
      cells.push_back(g);
      if (hi == *fi) fbar_cells.push_back(base);
    }
  }
  // Every cell of the facet holding F is inside F or meets it in a null set.
  for (const auto& base : fbar_cells) {
    Points v;
    Vec c = Vec::Zero(n);
    for (int i : base) {
      v.push_back(pool[i]);
      c += pool[i];
    }
    c /= static_cast<double>(base.size());
    if (in_set(fp, c, tol)) {
      for (const auto& x : v) {
        if (!in_set(fp, x, tol)) throw Error(ErrorCode::Degenerate, "facet cell straddles the boundary of F");
      }
    } else {
      Polytope meet = intersect(convex_hull(v, tol), fp, tol);
      if (!meet.empty() && meet.dim == n - 1 && relative_volume(meet) > 1e-9) {
        throw Error(ErrorCode::Degenerate, "facet cell overlaps F");
      }
    }
  }
  return assemble_triangulation(pool, cells, fp.vertices, pool[vid], tol);
}

Cover cover_wrt_F(const Polytope& p, const Points& f, const SystemGeometry& geom, double tol) {
  require_full(p);
  const int n = p.ambient;
  Polytope fp = convex_hull(f, tol);
  auto fi = containing_facet(p, fp.vertices, tol);
  if (!fi) throw Error(ErrorCode::AssumptionViolated, "target does not lie in a facet of P");
  const HalfSpace fbar = p.halfspaces[*fi];
  Points facet_pts;
  for (const auto& v : p.vertices) {
    if (std::abs(fbar.eval(v)) <= 10 * tol) facet_pts.push_back(v);
  }
  Polytope facet = convex_hull(facet_pts, tol);
  Cover out;
  if (relative_volume(fp) >= relative_volume(facet) * (1 - 1e-9)) {
    out.passthrough = true;
    out.pieces.push_back({p, PieceRole::Target, fp.vertices, 0});
    return out;
  }

  const double top = level_top(geom, p);
  std::optional<Vec> vstar;
  for (const auto& v : fp.vertices) {
    if (geom.level(v) >= top - 10 * tol) {
      vstar = v;
      break;
    }
  }
  if (!vstar) throw Error(ErrorCode::NoQualifyingVertex, "no vertex of F lies in P+");
  const Vec vminus = argmin_beta(geom, fp.vertices, tol);

  Points base{vminus};
  if ((*vstar - vminus).norm() > 10 * tol) base.push_back(*vstar);
  const int need = n - static_cast<int>(base.size());

  Points extras = canonicalize(p.vertices, tol);
  extras.push_back(p.centroid());
  for (const auto& e : faces_of(p, 1, tol)) {
    if (e.vertices.size() == 2) extras.push_back(0.5 * (e.vertices[0] + e.vertices[1]));
  }
  for (int k = 0; k < n; ++k) extras.push_back(vminus + Vec::Unit(n, k));

  double best = 0.0;
  Cover chosen;
  combinations(static_cast<int>(extras.size()), need, [&](const std::vector<int>& pick) {
    Points pts = base;
    for (int i : pick) pts.push_back(extras[i]);
    if (affine_dim(pts, tol) != n - 1) return;
    Hyperplane h = normalized(hyperplane_through(pts, tol));
    auto [p2, p3] = split_by_hyperplane(p, h, tol);
    if (!p2.full() || !p3.full()) return;
    double score = std::min(volume(p2), volume(p3));
    if (score <= best * (1 + 1e-9)) return;
    Polytope f23 = intersect(p, {}, {h}, tol);
    Points joined = fp.vertices;
    joined.insert(joined.end(), f23.vertices.begin(), f23.vertices.end());
    Polytope p1 = convex_hull(joined, tol);
    if (!p1.full()) return;
    for (const auto& v : p1.vertices) {
      if (std::abs(fbar.eval(v)) <= 10 * tol && !in_set(fp, v, tol)) return;
    }
    best = score;
    chosen.pieces = {{p1, PieceRole::Target, fp.vertices, 0},
                     {p2, PieceRole::Feeder, f23.vertices, 1},
                     {p3, PieceRole::Feeder, f23.vertices, 1}};
  });
  if (chosen.pieces.empty()) throw Error(ErrorCode::Degenerate, "no splitting hyperplane through v- and v*");
  return chosen;
}

FarSplit split_far_case(const Polytope& p, const Points& f, const SystemGeometry& geom, double tol) {
  require_full(p);
  FarSplit out;
  const double top = level_top(geom, p);
  Polytope fp = convex_hull(f, tol);
  for (const auto& v : fp.vertices) {
    if (geom.level(v) >= top - 10 * tol) {
      out.p1 = p;
      out.p2 = empty_polytope(p.ambient);
      out.passthrough = true;
      return out;
    }
  }
  const Vec vplus = argmax_beta(geom, fp.vertices, tol);
  Hyperplane h = geom.through(vplus);
  auto [below, above] = split_by_hyperplane(p, h, tol);
  out.p1 = below;
  out.p2 = above;
  out.interface = intersect(p, {}, {h}, tol).vertices;
  return out;
}

Cover cover_wrt_O(const AffineSystem& sys, const Polytope& p, const Points& f, double eps, double tol) {
  require_full(p);
  const int n = p.ambient;
  Cover out;
  Polytope fp = convex_hull(f, tol);
  if (!o_crosses_interior(sys, p, tol)) {
    out.passthrough = true;
    out.pieces.push_back({p, PieceRole::Target, fp.vertices, 0});
    return out;
  }
  SystemGeometry g0 = geometry_for_beta(sys, input_normal(sys));
  auto halves = split_by_hyperplane(p, g0.o_plane, tol);
  Polytope side[2] = {halves.first, halves.second};
  SystemGeometry geom[2] = {compute_geometry(sys, side[0], tol), compute_geometry(sys, side[1], tol)};

  auto reach = [&](int i, const Polytope& target) -> Polytope {
    try {
      return epsilon_cut(sys, geom[i], side[i], target.vertices, eps, tol).reach_eps;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EpsTooLarge) {
        throw Error(ErrorCode::CoverIncomplete, std::string("eps too large on one side of O: ") + e.what());
      }
      throw;
    }
  };

  Polytope q1[2];
  Polytope t1[2];
  for (int i = 0; i < 2; ++i) {
    t1[i] = intersect(fp, side[i], tol);
    q1[i] = (!t1[i].empty() && t1[i].dim == n - 1) ? reach(i, t1[i]) : empty_polytope(n);
  }
  for (int i = 0; i < 2; ++i) {
    if (q1[i].full()) out.pieces.push_back({q1[i], PieceRole::Target, t1[i].vertices, 0});
  }
  for (int i = 0; i < 2; ++i) {
    const Polytope& other = q1[1 - i];
    if (!other.full()) continue;
    Polytope t2 = intersect(side[i], other, tol);
    if (t2.empty() || t2.dim != n - 1) continue;
    Polytope q2 = reach(i, t2);
    if (q2.full()) out.pieces.push_back({q2, PieceRole::Feeder, t2.vertices, 1});
  }

  std::vector<Polytope> polys;
  for (const auto& pc : out.pieces) polys.push_back(pc.poly);
  const double vp = volume(p);
  if (polys.empty() || std::abs(union_volume(polys) - vp) > 1e-8 * std::max(1.0, vp)) {
    throw Error(ErrorCode::CoverIncomplete, "eps-reach pieces do not cover P");
  }
  return out;
}

bool valid_triangulation(const Triangulation& t, const Polytope& p, double tol) {
  double sum = 0.0;
  for (const auto& s : t.simplices) {
    for (const auto& v : s.v) {
      if (!contains(p, v, tol)) return false;
    }
    sum += simplex_volume(s.v);
  }
  const double vp = volume(p);
  if (std::abs(sum - vp) > tol * std::max(1.0, vp)) return false;
  // Pairwise intersections are common faces: their vertices are shared pool points.
  for (int i = 0; i < t.size(); ++i) {
    Polytope a = convex_hull(t.simplices[i].v);
    for (int j = i + 1; j < t.size(); ++j) {
      Polytope m = intersect(a, convex_hull(t.simplices[j].v));
      if (m.empty()) continue;
      for (const auto& x : m.vertices) {
        int k = -1;
        for (int q = 0; q < static_cast<int>(t.points.size()); ++q) {
          if ((t.points[q] - x).lpNorm<Eigen::Infinity>() <= 1e-7) k = q;
        }
        if (k < 0) return false;
        if (!std::binary_search(t.cells[i].begin(), t.cells[i].end(), k) ||
            !std::binary_search(t.cells[j].begin(), t.cells[j].end(), k)) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace reachctl
