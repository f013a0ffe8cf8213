#include "reachctl/synth.hpp"

#include "reachctl/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reachctl {

namespace {

std::vector<int> blocked_facets(int n, int i, int exit) {
  std::vector<int> out;
  for (int j = 0; j <= n; ++j) {
    if (j != i && j != exit) out.push_back(j);
  }
  return out;
}

Vec solve_input(const AffineSystem& sys, const Vec& rhs) {
  return sys.B.colPivHouseholderQr().solve(rhs);
}

double exit_margin(const AffineSystem& sys, const Simplex& s, int exit, const std::vector<Vec>& u) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= s.n(); ++i) {
    if (i == exit) continue;
    m = std::min(m, s.h[exit].dot(sys.field(s.v[i], u[i])));
  }
  return m;
}

int index_in(const Points& pts, const Vec& x) {
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    if ((pts[i] - x).norm() == 0.0) return i;
  }
  return -1;
}

}  // namespace

double invariance_residual(const AffineSystem& sys, const Simplex& s, int exit, const std::vector<Vec>& u) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= s.n(); ++i) {
    Vec f = sys.field(s.v[i], u[i]);
    for (int j : blocked_facets(s.n(), i, exit)) worst = std::max(worst, s.h[j].dot(f));
  }
  return worst;
}

VertexControls vertex_controls_lp(const AffineSystem& sys, const Simplex& s, int exit, const Tolerances& tol) {
  const int n = s.n();
  const int m = sys.m();
  VertexControls vc;
  for (int i = 0; i <= n; ++i) {
    const Vec drift = sys.drift(s.v[i]);
    std::vector<LinearRow> rows;
    for (int j : blocked_facets(n, i, exit)) rows.emplace_back(Vec(sys.B.transpose() * s.h[j]), -s.h[j].dot(drift));
    SlackResult best{-std::numeric_limits<double>::infinity(), Vec::Zero(m)};
    if (i != exit) {
      std::vector<LinearRow> with_exit = rows;
      with_exit.emplace_back(Vec(-sys.B.transpose() * s.h[exit]), s.h[exit].dot(drift));
      best = max_slack_feasibility(with_exit);
    }
    if (best.slack < tol.slack_min) {
      SlackResult plain = max_slack_feasibility(rows);
      if (plain.slack < -tol.lp) {
        throw Error(ErrorCode::Infeasible, "invariance conditions fail at vertex " + std::to_string(i), i);
      }
      best = plain;
    }
    vc.u.push_back(best.x);
  }
  vc.slack = -invariance_residual(sys, s, exit, vc.u);
  return vc;
}

VertexControls vertex_controls_constructive(const AffineSystem& sys, const SystemGeometry& geom, const Simplex& s,
                                            int exit, double tol) {
  const int n = s.n();
  const Points f0 = s.facet(exit);
  const Vec wm = argmin_beta(geom, f0, tol);
  const Vec wp = argmax_beta(geom, f0, tol);
  const Vec& v0 = s.v[exit];
  const double bm = geom.level(wm), bp = geom.level(wp), b0 = geom.level(v0);
  const Vec c = s.centroid();
  const double strict = 10 * tol;

  // Interior point strictly below `level` on the segment (w-, centroid].
  auto aim = [&](double level) -> Vec {
    double bc = geom.level(c);
    if (bc < level) return c;
    double t = 0.5 * (level - bm) / (bc - bm);
    return Vec(wm + t * (c - wm));
  };
  auto along = [&](const Vec& dir, const Vec& drift) -> std::pair<Vec, double> {
    Mat mtx(n, n);
    mtx << -sys.B, dir;
    Eigen::FullPivLU<Mat> lu(mtx);
    if (!lu.isInvertible()) throw Error(ErrorCode::CaseViolation, "aim direction lies in the input subspace");
    Vec sol = lu.solve(drift);
    return {sol.head(sys.m()), sol(n - 1)};
  };

  VertexControls vc;
  for (int i = 0; i <= n; ++i) {
    const Vec& vi = s.v[i];
    const Vec drift = sys.drift(vi);
    Vec u;
    if (!geom.on_o(vi, strict)) {
      if (geom.level(vi) > bm + strict) {
        auto [ui, lambda] = along(aim(geom.level(vi)) - vi, drift);
        if (!(lambda > 0)) throw Error(ErrorCode::CaseViolation, "negative step toward the aim point", i);
        u = ui;
      } else {
        if (i == exit || b0 <= bm + strict) {
          throw Error(ErrorCode::CaseViolation, "vertex at the lowest exit level with v0 not above it", i);
        }
        auto [ui, lambda] = along(aim(b0) - v0, drift);
        if (!(lambda > 0)) throw Error(ErrorCode::CaseViolation, "negative step toward the aim point", i);
        u = ui;
      }
    } else if (b0 >= bm - strict && b0 <= bp + strict) {
      double span = bp - bm;
      double t = span > strict ? std::clamp((b0 - bm) / span, 0.0, 1.0) : 0.5;
      Vec target = wm + t * (wp - wm);
      u = solve_input(sys, Vec(target - v0 - drift));
    } else if (b0 > bp + strict) {
      if (i == exit) throw Error(ErrorCode::CaseViolation, "v0 lies in O above the exit facet", i);
      Mat rows(n, n);
      Vec rhs = Vec::Constant(n, -1.0);
      rows.row(0) = geom.beta.transpose();
      rhs(0) = 0.0;
      int r = 1;
      for (int j : blocked_facets(n, i, exit)) rows.row(r++) = s.h[j].transpose();
      Eigen::FullPivLU<Mat> lu(rows);
      if (!lu.isInvertible()) throw Error(ErrorCode::CaseViolation, "beta and the blocked normals are dependent", i);
      Vec y = lu.solve(rhs);
      y.normalize();
      u = solve_input(sys, Vec(y - drift));
    } else {
      throw Error(ErrorCode::CaseViolation, "v0 lies below the exit facet in beta", i);
    }
    vc.u.push_back(u);
  }
  vc.slack = -invariance_residual(sys, s, exit, vc.u);
  return vc;
}

std::pair<Mat, Vec> affine_from_vertex_controls(const Simplex& s, const VertexControls& vc) {
  const int n = s.n();
  const int m = static_cast<int>(vc.u.front().size());
  Mat vm(n + 1, n + 1);
  Mat um(m, n + 1);
  for (int i = 0; i <= n; ++i) {
    vm.col(i) << s.v[i], 1.0;
    um.col(i) = vc.u[i];
  }
  Eigen::FullPivLU<Mat> lu(vm.transpose());
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularVertexMatrix, "simplex vertex matrix is singular");
  Mat fg = lu.solve(um.transpose()).transpose();
  Mat gain = fg.leftCols(n);
  Vec offset = fg.col(n);
  double res = (gain * vm.topRows(n) + offset.replicate(1, n + 1) - um).cwiseAbs().maxCoeff();
  if (res > 1e-9 * std::max(1.0, um.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::SingularVertexMatrix, "vertex control interpolation is inaccurate");
  }
  return {gain, offset};
}

bool check_no_equilibrium(const AffineSystem& sys, const Simplex& s, const Mat& gain, const Vec& offset, double tol) {
  const int n = s.n();
  Mat acl = sys.A + sys.B * gain;
  Vec bcl = sys.a + sys.B * offset;
  Eigen::FullPivLU<Mat> lu(acl);
  lu.setThreshold(1e-10);
  if (lu.isInvertible()) {
    Vec x = lu.solve(Vec(-bcl));
    return !s.contains(x, tol);
  }
  LinearProgram lp;
  lp.nvars = n;
  lp.objective = Vec::Zero(n);
  for (int j = 0; j <= n; ++j) lp.ineq.emplace_back(s.h[j], s.c[j] + tol);
  for (int r = 0; r < n; ++r) lp.eq.emplace_back(Vec(acl.row(r).transpose()), -bcl(r));
  return solve(lp).status == LPStatus::Infeasible;
}

namespace {

std::optional<AffinePiece> try_piece(const AffineSystem& sys, const Simplex& s, int exit, const VertexControls& vc,
                                     const Tolerances& tol, std::string& why) {
  if (invariance_residual(sys, s, exit, vc.u) > tol.lp) {
    why = "invariance conditions violated";
    return std::nullopt;
  }
  auto [gain, offset] = affine_from_vertex_controls(s, vc);
  if (!check_no_equilibrium(sys, s, gain, offset, tol.geom)) {
    why = "closed-loop equilibrium inside the simplex";
    return std::nullopt;
  }
  AffinePiece p;
  p.region = s;
  p.gain = gain;
  p.offset = offset;
  p.exit_facet = exit;
  p.slack = vc.slack;
  p.exit_margin = exit_margin(sys, s, exit, vc.u);
  return p;
}

AffinePiece single_piece(const AffineSystem& sys, const SystemGeometry& geom, const Simplex& s, int exit,
                         const Tolerances& tol) {
  std::string why_lp = "LP infeasible";
  try {
    VertexControls vc = vertex_controls_lp(sys, s, exit, tol);
    if (auto p = try_piece(sys, s, exit, vc, tol, why_lp)) return *p;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Infeasible) throw;
    why_lp = e.what();
  }
  std::string why_c;
  try {
    VertexControls vc = vertex_controls_constructive(sys, geom, s, exit, tol.geom);
    if (auto p = try_piece(sys, s, exit, vc, tol, why_c)) return *p;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CaseViolation) throw;
    why_c = e.what();
  }
  throw Error(ErrorCode::SynthesisFailed, "LP: " + why_lp + "; construction: " + why_c);
}

}  // namespace

std::vector<AffinePiece> synth_simplex(const AffineSystem& sys, const SystemGeometry& geom, const Simplex& s, int exit,
                                       const Tolerances& tol) {
  const Points f0 = s.facet(exit);
  const Vec wm = argmin_beta(geom, f0, tol.geom);
  const Vec wp = argmax_beta(geom, f0, tol.geom);
  const Vec& v0 = s.v[exit];
  const double bm = geom.level(wm), bp = geom.level(wp), b0 = geom.level(v0);
  bool in_o = true;
  for (const auto& v : f0) in_o = in_o && geom.on_o(v, 10 * tol.geom);

  if (!(in_o && b0 > bp + 10 * tol.geom)) return {single_piece(sys, geom, s, exit, tol)};

  if (bp - bm <= 10 * tol.geom) throw Error(ErrorCode::SynthesisFailed, "exit facet in O is parallel to B");
  const double mid = 0.5 * (bm + bp);
  const Vec vp = wm + (mid - bm) / (b0 - bm) * (v0 - wm);
  const int iw = index_in(s.v, wm);
  Points upper = s.v;  // v0 kept, w- replaced: exits through conv(v', F0 \ {w-})
  upper[iw] = vp;
  Points lower = s.v;  // v0 replaced by v': exits through F0
  lower[exit] = vp;
  AffinePiece p2 = single_piece(sys, geom, make_simplex(lower, tol.geom), exit, tol);
  AffinePiece p1 = single_piece(sys, geom, make_simplex(upper, tol.geom), exit, tol);
  p2.path_len = 0;
  p1.path_len = 1;
  return {p2, p1};
}

PathPlan greedy_paths(const AffineSystem& sys, const Triangulation& t, const SystemGeometry& geom, double tol) {
  const int q = t.size();
  PathPlan plan;
  plan.exit_facet.assign(q, -1);
  plan.next.assign(q, -1);
  plan.path_len.assign(q, -1);
  std::vector<bool> done(q, false);

  struct Cand {
    int i, j, facet;
    double level;
    int count;
  };
  for (int step = 0; step < q; ++step) {
    std::vector<Cand> cands;
    auto add = [&](int i, int j, int facet) {
      Points pts = t.simplices[i].facet(facet);
      double lv = std::numeric_limits<double>::infinity();
      for (const auto& x : pts) lv = std::min(lv, geom.level(x));
      int cnt = 0;
      for (const auto& x : pts) cnt += geom.level(x) <= lv + 10 * tol;
      cands.push_back({i, j, facet, lv, cnt});
    };
    for (int i = 0; i < q; ++i) {
      if (!done[i] && t.target_facet[i] >= 0) add(i, -1, t.target_facet[i]);
    }
    for (const auto& a : t.adjacency) {
      if (!done[a.i] && done[a.j]) add(a.i, a.j, a.facet_i);
      if (!done[a.j] && done[a.i]) add(a.j, a.i, a.facet_j);
    }
    if (cands.empty()) throw Error(ErrorCode::Stuck, "no unfinished simplex touches the finished region");
    std::sort(cands.begin(), cands.end(), [&](const Cand& x, const Cand& y) {
      if (std::abs(x.level - y.level) > 10 * tol) return x.level < y.level;
      if (x.count != y.count) return x.count > y.count;
      if (x.i != y.i) return x.i < y.i;
      return x.j < y.j;
    });
    bool moved = false;
    for (const auto& c : cands) {
      const Simplex& s = t.simplices[c.i];
      Polytope sp = convex_hull(s.v, tol);
      if (!analyze(sys, geom, sp, s.facet(c.facet), tol).reachable) continue;
      done[c.i] = true;
      plan.order.push_back(c.i);
      plan.exit_facet[c.i] = c.facet;
      plan.next[c.i] = c.j;
      plan.path_len[c.i] = c.j < 0 ? 1 : plan.path_len[c.j] + 1;
      plan.levels.push_back(c.level);
      moved = true;
      break;
    }
    if (!moved) {
      std::string frontier;
      for (const auto& c : cands) frontier += " " + std::to_string(c.i) + "->" + std::to_string(c.j);
      throw Error(ErrorCode::Stuck, "no adjacent pair is solvable; frontier:" + frontier);
    }
  }
  return plan;
}

int PWAController::lookup(const Vec& x, double tol) const {
  int best = -1;
  for (int k = 0; k < static_cast<int>(pieces.size()); ++k) {
    if (!pieces[k].region.contains(x, tol)) continue;
    if (best < 0 || pieces[k].priority < pieces[best].priority) best = k;
  }
  return best;
}

bool PWAController::covers(const Vec& x, double tol) const { return lookup(x, tol) >= 0; }

namespace {

struct Builder {
  const AffineSystem& sys;
  const SynthOptions& opt;
  double eps;
  PWAController out;

  double facet_measure(const Polytope& p, const Points& f) const {
    auto fi = containing_facet(p, f, opt.tol.geom);
    if (!fi) throw Error(ErrorCode::AssumptionViolated, "target does not lie in a facet of P");
    Points on;
    for (const auto& v : p.vertices) {
      if (std::abs(p.halfspaces[*fi].eval(v)) <= 10 * opt.tol.geom) on.push_back(v);
    }
    return relative_volume(convex_hull(on, opt.tol.geom));
  }

  void leaf(const Polytope& p, const SystemGeometry& geom, const Triangulation& t, const std::vector<int>& key) {
    PathPlan plan = greedy_paths(sys, t, geom, opt.tol.geom);
    for (int i = 0; i < t.size(); ++i) {
      std::vector<AffinePiece> ps;
      try {
        ps = synth_simplex(sys, geom, t.simplices[i], plan.exit_facet[i], opt.tol);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SynthesisFailed) {
          throw Error(ErrorCode::SynthesisFailed, "simplex " + std::to_string(i) + ": " + e.what(), i);
        }
        throw;
      }
      for (int k = 0; k < static_cast<int>(ps.size()); ++k) {
        ps[k].path_len += plan.path_len[i];
        ps[k].priority = key;
        ps[k].priority.insert(ps[k].priority.end(), {ps[k].path_len, i, k});
        out.pieces.push_back(ps[k]);
      }
    }
    out.domain.push_back(p);
  }

  void build(Polytope p, Points f, const std::vector<int>& key, int depth) {
    const double gt = opt.tol.geom;
    if (depth > opt.max_depth) throw Error(ErrorCode::SynthesisFailed, "decomposition depth exceeded");
    auto extend = [&](std::initializer_list<int> more) {
      std::vector<int> k = key;
      k.insert(k.end(), more);
      return k;
    };

    if (o_crosses_interior(sys, p, gt)) {
      double e = eps;
      for (int h = 0;; ++h) {
        try {
          Cover c = cover_wrt_O(sys, p, f, e, gt);
          for (int k = 0; k < static_cast<int>(c.pieces.size()); ++k) {
            build(c.pieces[k].poly, c.pieces[k].target, extend({c.pieces[k].stage, k}), depth + 1);
          }
          return;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::CoverIncomplete || h >= opt.max_halvings) throw;
          e *= 0.5;
        }
      }
    }

    SystemGeometry geom = compute_geometry(sys, p, gt);
    ReachAnalysis ra = analyze(sys, geom, p, f, gt);
    if (!ra.reachable) {
      EpsilonCut cut;
      double e = eps;
      for (int h = 0;; ++h) {
        try {
          cut = epsilon_cut(sys, geom, p, f, e, gt);
          break;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::EpsTooLarge || h >= opt.max_halvings) throw;
          e *= 0.5;
        }
      }
      if (cut.reach_eps.empty()) throw NotReachableError("no state of P reaches F (total failure)", ra);
      p = cut.reach_eps;
      geom = compute_geometry(sys, p, gt);
      ra = analyze(sys, geom, p, f, gt);
      if (!ra.reachable) throw NotReachableError("eps-reach set still has failure sets", ra);
    }

    Polytope fp = convex_hull(f, gt);
    if (relative_volume(fp) >= facet_measure(p, fp.vertices) * (1 - 1e-9)) {
      leaf(p, geom, basic_triangulation(p, select_vstar(p, f, geom, gt), fp.vertices, gt), key);
      return;
    }
    const HalfSpace fbar = p.halfspaces[*containing_facet(p, fp.vertices, gt)];
    if (p.ambient <= 3) {
      for (const auto& v : vstar_candidates(p, f, geom, gt)) {
        if (std::abs(fbar.eval(v)) > 10 * gt) {
          leaf(p, geom, triangulation_wrt_F(p, fp.vertices, v, gt), key);
          return;
        }
      }
    }
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& v : p.vertices) top = std::max(top, geom.level(v));
    bool f_in_top = false;
    for (const auto& v : fp.vertices) f_in_top = f_in_top || geom.level(v) >= top - 10 * gt;
    if (f_in_top) {
      Cover c = cover_wrt_F(p, fp.vertices, geom, gt);
      for (int k = 0; k < static_cast<int>(c.pieces.size()); ++k) {
        build(c.pieces[k].poly, c.pieces[k].target, extend({c.pieces[k].stage, k}), depth + 1);
      }
      return;
    }
    FarSplit s = split_far_case(p, fp.vertices, geom, gt);
    if (!s.p1.full() || !s.p2.full()) throw Error(ErrorCode::SynthesisFailed, "far-case split is degenerate");
    build(s.p1, fp.vertices, extend({0, 0}), depth + 1);
    build(s.p2, s.interface, extend({1, 1}), depth + 1);
  }
};

}  // namespace

PWAController synth_polytope(const AffineSystem& sys, const Polytope& p, const Points& f, const SynthOptions& opt) {
  check_dimensions(sys);
  require_full(p);
  Vec beta = input_normal(sys);
  double eps = opt.eps ? *opt.eps : default_eps(geometry_for_beta(sys, beta), p);
  Builder b{sys, opt, eps, {}};
  b.out.n = sys.n();
  b.out.m = sys.m();
  b.out.region = p;
  b.out.target = convex_hull(f, opt.tol.geom).vertices;
  b.build(p, f, {}, 0);
  std::stable_sort(b.out.pieces.begin(), b.out.pieces.end(),
                   [](const AffinePiece& x, const AffinePiece& y) { return x.priority < y.priority; });
  return b.out;
}

}  // namespace reachctl
