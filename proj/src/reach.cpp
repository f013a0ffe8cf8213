#include "reachctl/reach.hpp"

#include <limits>

namespace reachctl {

namespace {

Vec extreme_beta(const SystemGeometry& geom, const Points& pts, double sign, double tol) {
  if (pts.empty()) throw Error(ErrorCode::Degenerate, "extreme point of an empty set");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::max(best, sign * geom.level(p));
  const Vec* pick = nullptr;
  for (const auto& p : pts) {
    if (sign * geom.level(p) >= best - tol && (!pick || lex_less(p, *pick))) pick = &p;
  }
  return *pick;
}

std::vector<HalfSpace> constraint_list(const Polytope& q) {
  std::vector<HalfSpace> out = q.halfspaces;
  for (const auto& e : q.equalities) {
    out.push_back(e.below());
    out.push_back(e.above());
  }
  return out;
}

HalfSpace unit(const HalfSpace& h) {
  double s = h.normal.norm();
  return {h.normal / s, h.offset / s};
}

}  // namespace

Vec argmin_beta(const SystemGeometry& geom, const Points& pts, double tol) {
  return extreme_beta(geom, pts, -1.0, tol);
}

Vec argmax_beta(const SystemGeometry& geom, const Points& pts, double tol) {
  return extreme_beta(geom, pts, 1.0, tol);
}

double beta_extent(const SystemGeometry& geom, const Polytope& p) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : p.vertices) {
    lo = std::min(lo, geom.level(v));
    hi = std::max(hi, geom.level(v));
  }
  return hi - lo;
}

double default_eps(const SystemGeometry& geom, const Polytope& p) { return 1e-2 * beta_extent(geom, p); }

ReachAnalysis analyze(const AffineSystem& sys, const SystemGeometry& geom, const Polytope& p,
                      const Points& f, double tol) {
  require_full(p);
  const int n = p.ambient;
  if (sys.n() != n) throw Error(ErrorCode::AssumptionViolated, "system and polytope dimensions differ");
  Polytope fp = convex_hull(f, tol);
  if (fp.dim != n - 1) {
    throw Error(ErrorCode::AssumptionViolated, "target must be (n-1)-dimensional", fp.dim);
  }
  auto fi = containing_facet(p, fp.vertices, tol);
  if (!fi) throw Error(ErrorCode::AssumptionViolated, "target does not lie in a facet of P");
  for (const auto& v : fp.vertices) {
    if (!contains(p, v, 10 * tol)) throw Error(ErrorCode::AssumptionViolated, "target leaves P");
  }

  ReachAnalysis r;
  r.target_facet = *fi;
  r.v_minus = argmin_beta(geom, fp.vertices, tol);
  r.v_plus = argmax_beta(geom, fp.vertices, tol);
  const double lm = geom.level(r.v_minus);
  const double lp = geom.level(r.v_plus);
  r.h_minus = intersect(p, {HalfSpace{geom.beta, lm}}, {}, tol);
  r.h_plus = intersect(p, {HalfSpace{-geom.beta, -lp}}, {}, tol);

  double top = -std::numeric_limits<double>::infinity();
  for (const auto& v : p.vertices) top = std::max(top, geom.level(v));
  Points pplus;
  for (const auto& v : p.vertices) {
    if (geom.level(v) >= top - tol) pplus.push_back(v);
  }
  r.p_plus = convex_hull(pplus, tol);

  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (const auto& v : fp.vertices) {
    if (geom.level(v) <= lm + tol) {
      smin = std::min(smin, geom.o_plane.eval(v));
      smax = std::max(smax, geom.o_plane.eval(v));
    }
  }
  r.b_minus_nonempty = smin <= tol && smax >= -tol;
  if (r.b_minus_nonempty) {
    r.b_minus = intersect(p, {}, {Hyperplane{geom.beta, lm}, geom.o_plane}, tol);
  } else {
    r.b_minus = empty_polytope(n);
  }

  // H- \ F is the union over constraints c of F of H- ∩ {c violated}. Each
  // nonempty piece has closure H- ∩ {c reversed}, which must lie in B-.
  const double strict = 10 * tol;
  r.condition_a = true;
  if (!r.h_minus.empty()) {
    for (const auto& c : constraint_list(fp)) {
      Polytope q = intersect(r.h_minus, {HalfSpace{-c.normal, -c.offset}}, {}, tol);
      if (q.empty()) continue;
      double viol = -std::numeric_limits<double>::infinity();
      for (const auto& v : q.vertices) viol = std::max(viol, c.eval(v));
      if (viol > tol && viol <= strict) r.ambiguous = true;
      if (viol <= strict) continue;
      bool inside = r.b_minus_nonempty;
      for (const auto& v : q.vertices) {
        double db = std::abs(geom.level(v) - lm);
        double dob = std::abs(geom.o_plane.eval(v));
        if ((db > tol && db <= strict) || (dob > tol && dob <= strict)) r.ambiguous = true;
        inside = inside && db <= strict && dob <= strict;
      }
      if (!inside) {
        r.condition_a = false;
        break;
      }
    }
  }

  bool off_o = false;
  for (const auto& v : r.p_plus.vertices) off_o = off_o || std::abs(geom.o_plane.eval(v)) > strict;
  r.condition_b = off_o || top <= lp + strict;

  r.reachable = r.condition_a && r.condition_b;
  r.a_minus = r.condition_a ? empty_polytope(n) : r.h_minus;
  r.a_plus = r.condition_b ? empty_polytope(n) : r.p_plus;
  return r;
}

EpsilonCut epsilon_cut(const AffineSystem& sys, const SystemGeometry& geom, const Polytope& p,
                       const Points& f, double eps, double tol) {
  if (!(eps > 0)) throw Error(ErrorCode::EpsTooLarge, "eps must be positive");
  ReachAnalysis ra = analyze(sys, geom, p, f, tol);
  const int n = p.ambient;
  EpsilonCut out;
  out.eps = eps;
  out.a_eps_minus = empty_polytope(n);
  out.a_eps_plus = empty_polytope(n);
  if (ra.reachable) {
    out.no_failure_sets = true;
    out.reach_eps = p;
    return out;
  }
  Polytope fp = convex_hull(f, tol);
  std::vector<HalfSpace> keep;
  const Vec& beta = geom.beta;

  if (!ra.condition_a) {
    const Vec& v0 = ra.v_minus;
    const double lm = geom.level(v0);
    // Pivot points: F-vertices on B_{v-} that lie on another facet of P and on
    // the closure of H- \ F.
    std::vector<Polytope> outside;
    for (const auto& c : constraint_list(fp)) {
      Polytope q = intersect(ra.h_minus, {HalfSpace{-c.normal, -c.offset}}, {}, tol);
      double viol = 0.0;
      for (const auto& v : q.vertices) viol = std::max(viol, c.eval(v));
      if (viol > 10 * tol) outside.push_back(q);
    }
    Mat w(n, 1);
    w.col(0) = beta;
    for (const auto& z : fp.vertices) {
      if (std::abs(geom.level(z) - lm) > tol || (z - v0).norm() <= tol) continue;
      bool boundary = false;
      for (int j = 0; j < static_cast<int>(p.halfspaces.size()); ++j) {
        if (j != ra.target_facet && std::abs(p.halfspaces[j].eval(z)) <= 10 * tol) boundary = true;
      }
      bool touches = false;
      for (const auto& q : outside) touches = touches || violation(q, z) <= 10 * tol;
      if (!boundary || !touches) continue;
      w.conservativeResize(n, w.cols() + 1);
      w.col(w.cols() - 1) = z - v0;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(w);
    qr.setThreshold(1e-9);
    Mat q = qr.householderQ();
    Mat wb = q.leftCols(qr.rank());
    auto off_w = [&](const Vec& x) { return Vec(x - wb * (wb.transpose() * x)); };
    Vec d = -off_w(p.halfspaces[ra.target_facet].normal);
    if (d.norm() <= 1e-9) d = -off_w(fp.centroid() - v0);
    double c = 0.0;
    if (d.norm() > 1e-9) {
      d.normalize();
      auto reach_at = [&](double cc) {
        Vec nrm = beta - cc * d;
        Polytope g = intersect(p, {}, {Hyperplane{nrm, nrm.dot(v0)}}, tol);
        double best = 0.0;
        for (const auto& x : g.vertices) best = std::max(best, geom.level(x) - lm);
        return best;
      };
      double hi = 1.0;
      while (reach_at(hi) < eps && hi < 1e8) hi *= 2;
      if (reach_at(hi) < eps) throw Error(ErrorCode::EpsTooLarge, "tilted cut cannot reach depth eps");
      double lo = 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (reach_at(mid) < eps ? lo : hi) = mid;
      }
      c = hi;
    } else {
      d = Vec::Zero(n);
    }
    Vec nrm = c * d - beta;
    HalfSpace reach_side = unit({nrm, nrm.dot(v0)});
    out.minus_cut = reach_side;
    keep.push_back(reach_side);
    out.a_eps_minus = intersect(p, {HalfSpace{-reach_side.normal, -reach_side.offset}}, {}, tol);
    if (out.a_eps_minus.dim < n) out.a_eps_minus = empty_polytope(n);
  }

  if (!ra.condition_b) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& v : p.vertices) top = std::max(top, geom.level(v));
    if (geom.level(ra.v_plus) > top - eps + tol) {
      throw Error(ErrorCode::EpsTooLarge, "A+ cut would remove part of F");
    }
    HalfSpace reach_side{beta, top - eps};
    out.plus_cut = reach_side;
    keep.push_back(reach_side);
    out.a_eps_plus = intersect(p, {HalfSpace{-beta, -(top - eps)}}, {}, tol);
  }

  out.reach_eps = intersect(p, keep, {}, tol);
  if (out.reach_eps.dim < n) {
    out.reach_eps = empty_polytope(n);
    return out;
  }
  for (const auto& v : fp.vertices) {
    if (!contains(out.reach_eps, v, 10 * tol)) throw Error(ErrorCode::EpsTooLarge, "cut removes part of F");
  }
  if (!ra.condition_a) {
    for (const auto& v : out.reach_eps.vertices) {
      if (geom.level(v) < geom.level(ra.v_minus) - 10 * tol) {
        throw Error(ErrorCode::EpsTooLarge, "cut leaves points of A- in the reach set");
      }
    }
  }
  return out;
}

double union_volume(const std::vector<Polytope>& pieces) {
  const int k = static_cast<int>(pieces.size());
  if (k > 16) throw Error(ErrorCode::Degenerate, "too many pieces for inclusion-exclusion");
  double total = 0.0;
  std::vector<Polytope> inter(1u << k);
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    int low = __builtin_ctz(mask);
    unsigned rest = mask & (mask - 1);
    Polytope cur = rest ? inter[rest] : pieces[low];
    if (rest && !cur.empty()) cur = pieces[low].empty() ? pieces[low] : intersect(cur, pieces[low]);
    inter[mask] = cur;
    if (cur.empty()) continue;
    total += (__builtin_popcount(mask) % 2 ? 1.0 : -1.0) * volume(cur);
  }
  return total;
}

ReachPair reach_eps_pair(const AffineSystem& sys, const SystemGeometry& geom, const Polytope& p,
                         const Points& f1, const Points& f2, double eps, double tol) {
  Points both = f1;
  both.insert(both.end(), f2.begin(), f2.end());
  if (affine_dim(both, tol) < p.ambient) throw Error(ErrorCode::CommonHyperplane, "targets share a hyperplane");
  ReachPair out;
  try {
    out.first = epsilon_cut(sys, geom, p, f1, eps, tol);
    out.second = epsilon_cut(sys, geom, p, f2, eps, tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EpsTooLarge) throw;
    out.eps_too_large = true;
    return out;
  }
  const Polytope& r1 = out.first->reach_eps;
  const Polytope& r2 = out.second->reach_eps;
  double vp = volume(p);
  bool vol_ok = std::abs(union_volume({r1, r2}) - vp) <= 1e-8 * vp;
  bool verts_ok = true;
  for (const auto& v : p.vertices) verts_ok = verts_ok && (contains(r1, v, 10 * tol) || contains(r2, v, 10 * tol));
  out.covers = vol_ok && verts_ok;
  return out;
}

}  // namespace reachctl
