#include "reachctl/geometry.hpp"

#include "reachctl/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace reachctl {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionDeficient: return "DimensionDeficient";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::SignAmbiguous: return "SignAmbiguous";
    case ErrorCode::DegenerateO: return "DegenerateO";
    case ErrorCode::EpsTooLarge: return "EpsTooLarge";
    case ErrorCode::NoFailureSets: return "NoFailureSets";
    case ErrorCode::CommonHyperplane: return "CommonHyperplane";
    case ErrorCode::NoQualifyingVertex: return "NoQualifyingVertex";
    case ErrorCode::VStarInFbar: return "VStarInFbar";
    case ErrorCode::CoverIncomplete: return "CoverIncomplete";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::CaseViolation: return "CaseViolation";
    case ErrorCode::SingularVertexMatrix: return "SingularVertexMatrix";
    case ErrorCode::SynthesisFailed: return "SynthesisFailed";
    case ErrorCode::Stuck: return "Stuck";
    case ErrorCode::NotReachable: return "NotReachable";
    case ErrorCode::ControllerGap: return "ControllerGap";
    case ErrorCode::Schema: return "Schema";
  }
  return "Error";
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

namespace {

// Calls f on every k-subset of {0..m-1} in lexicographic order.
void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& f) {
  if (k > m || k < 0) return;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct LocalFacet {
  Vec normal;
  double offset;
  std::vector<int> tight;
};

struct LocalHull {
  std::vector<LocalFacet> facets;
  std::vector<int> vertices;
};

// Hull of points in R^k, assumed to affinely span R^k (k >= 1).
LocalHull hull_full(const std::vector<Vec>& y, double tol) {
  const int m = static_cast<int>(y.size());
  const int k = static_cast<int>(y.front().size());
  LocalHull out;
  if (k == 1) {
    int lo = 0, hi = 0;
    for (int i = 1; i < m; ++i) {
      if (y[i](0) < y[lo](0)) lo = i;
      if (y[i](0) > y[hi](0)) hi = i;
    }
    LocalFacet fl{Vec::Constant(1, -1.0), -y[lo](0), {}};
    LocalFacet fh{Vec::Constant(1, 1.0), y[hi](0), {}};
    for (int i = 0; i < m; ++i) {
      if (std::abs(y[i](0) - y[lo](0)) <= tol) fl.tight.push_back(i);
      if (std::abs(y[i](0) - y[hi](0)) <= tol) fh.tight.push_back(i);
    }
    out.facets = {fl, fh};
    out.vertices = {std::min(lo, hi), std::max(lo, hi)};
    return out;
  }
  Vec s(m);
  for_each_subset(m, k, [&](const std::vector<int>& c) {
    for (const auto& f : out.facets) {
      bool all = true;
      for (int i : c) {
        if (std::find(f.tight.begin(), f.tight.end(), i) == f.tight.end()) {
          all = false;
          break;
        }
      }
      if (all) return;
    }
    Mat d(k - 1, k);
    for (int r = 1; r < k; ++r) d.row(r - 1) = (y[c[r]] - y[c[0]]).transpose();
    Eigen::JacobiSVD<Mat> svd(d, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(k - 2) <= 1e-10 * std::max(1.0, sv(0))) return;
    Vec nrm = svd.matrixV().col(k - 1);
    double off = nrm.dot(y[c[0]]);
    double lo = 0, hi = 0;
    for (int i = 0; i < m; ++i) {
      s(i) = nrm.dot(y[i]) - off;
      lo = std::min(lo, s(i));
      hi = std::max(hi, s(i));
    }
    if (hi <= tol) {
      // already oriented
    } else if (lo >= -tol) {
      nrm = -nrm;
      off = -off;
      s = -s;
    } else {
      return;
    }
    LocalFacet f{nrm, off, {}};
    for (int i = 0; i < m; ++i) {
      if (std::abs(s(i)) <= tol) f.tight.push_back(i);
    }
    out.facets.push_back(std::move(f));
  });
  for (int i = 0; i < m; ++i) {
    std::vector<Vec> normals;
    for (const auto& f : out.facets) {
      if (std::find(f.tight.begin(), f.tight.end(), i) != f.tight.end()) normals.push_back(f.normal);
    }
    if (static_cast<int>(normals.size()) < k) continue;
    Mat nm(normals.size(), k);
    for (size_t r = 0; r < normals.size(); ++r) nm.row(r) = normals[r].transpose();
    Eigen::FullPivLU<Mat> lu(nm);
    lu.setThreshold(1e-9);
    if (lu.rank() == k) out.vertices.push_back(i);
  }
  return out;
}

bool halfspace_less(const HalfSpace& a, const HalfSpace& b) {
  for (int i = 0; i < a.normal.size(); ++i) {
    if (a.normal(i) != b.normal(i)) return a.normal(i) < b.normal(i);
  }
  return a.offset < b.offset;
}

// Orthonormal basis of the orthogonal complement of the columns of u.
Mat complement(const Mat& u, int n) {
  if (u.cols() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(u.transpose(), Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n - u.cols());
}

std::vector<Vec> project(const Points& pts, const Mat& u, const Vec& c) {
  std::vector<Vec> y;
  y.reserve(pts.size());
  for (const auto& p : pts) y.push_back(u.transpose() * (p - c));
  return y;
}

// Facet vertex sets (indices into pts) of conv(pts) inside its own affine hull.
std::vector<std::vector<int>> relative_facets(const Points& pts, double tol) {
  auto [u, c] = affine_basis(pts, tol);
  if (u.cols() == 0) return {};
  LocalHull h = hull_full(project(pts, u, c), tol);
  std::vector<std::vector<int>> out;
  for (auto& f : h.facets) out.push_back(f.tight);
  return out;
}

void fan(const Points& all, const std::vector<int>& ids, int d, int anchor, double tol,
         std::vector<std::vector<int>>& out) {
  if (d == 1 && ids.size() > 2) {
    // Collinear points: consecutive pairs along the line.
    std::vector<int> order = ids;
    Vec dir = all[order[1]] - all[order[0]];
    for (int i : ids) {
      if ((all[i] - all[ids[0]]).norm() > dir.norm()) dir = all[i] - all[ids[0]];
    }
    std::sort(order.begin(), order.end(), [&](int x, int y) { return all[x].dot(dir) < all[y].dot(dir); });
    for (size_t k = 0; k + 1 < order.size(); ++k) {
      std::vector<int> cell{order[k], order[k + 1]};
      if (cell[1] == anchor) std::swap(cell[0], cell[1]);
      out.push_back(cell);
    }
    return;
  }
  if (static_cast<int>(ids.size()) == d + 1) {
    std::vector<int> cell = ids;
    if (anchor >= 0 && std::find(cell.begin(), cell.end(), anchor) != cell.end()) {
      std::stable_partition(cell.begin(), cell.end(), [&](int i) { return i == anchor; });
    }
    out.push_back(cell);
    return;
  }
  int a = anchor >= 0 && std::find(ids.begin(), ids.end(), anchor) != ids.end()
              ? anchor
              : *std::min_element(ids.begin(), ids.end());
  Points sub;
  for (int i : ids) sub.push_back(all[i]);
  for (const auto& facet : relative_facets(sub, tol)) {
    std::vector<int> gids;
    for (int li : facet) gids.push_back(ids[li]);
    if (std::find(gids.begin(), gids.end(), a) != gids.end()) continue;
    std::sort(gids.begin(), gids.end());
    std::vector<std::vector<int>> sub_cells;
    fan(all, gids, d - 1, -1, tol, sub_cells);
    for (auto& sc : sub_cells) {
      std::vector<int> cell{a};
      cell.insert(cell.end(), sc.begin(), sc.end());
      out.push_back(cell);
    }
  }
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

}  // namespace

Vec Polytope::centroid() const {
  Vec c = Vec::Zero(ambient);
  for (const auto& v : vertices) c += v;
  if (!vertices.empty()) c /= static_cast<double>(vertices.size());
  return c;
}

Points Simplex::facet(int j) const {
  Points f;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    if (i != j) f.push_back(v[i]);
  }
  return f;
}

bool Simplex::contains(const Vec& x, double tol) const { return violation(x) <= tol; }

double Simplex::violation(const Vec& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < h.size(); ++j) worst = std::max(worst, h[j].dot(x) - c[j]);
  return worst;
}

Vec Simplex::centroid() const {
  Vec s = Vec::Zero(v.front().size());
  for (const auto& p : v) s += p;
  return s / static_cast<double>(v.size());
}

bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

Points canonicalize(Points pts, double tol) {
  std::sort(pts.begin(), pts.end(), lex_less);
  Points out;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out) {
      if ((p - q).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

std::pair<Mat, Vec> affine_basis(const Points& pts, double tol) {
  if (pts.empty()) throw Error(ErrorCode::Degenerate, "affine basis of empty set");
  const int n = static_cast<int>(pts.front().size());
  Vec c = pts.front();
  if (pts.size() == 1) return {Mat(n, 0), c};
  Mat d(pts.size() - 1, n);
  for (size_t i = 1; i < pts.size(); ++i) d.row(i - 1) = (pts[i] - c).transpose();
  Eigen::JacobiSVD<Mat> svd(d, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * std::max(1.0, std::sqrt(static_cast<double>(pts.size())))) ++r;
  }
  return {svd.matrixV().leftCols(r), c};
}

int affine_dim(const Points& pts, double tol) {
  if (pts.empty()) return -1;
  return static_cast<int>(affine_basis(pts, tol).first.cols());
}

Polytope empty_polytope(int ambient) {
  Polytope p;
  p.ambient = ambient;
  p.dim = -1;
  return p;
}

Polytope convex_hull(const Points& pts_in, double tol) {
  if (pts_in.empty()) return empty_polytope(0);
  const int n = static_cast<int>(pts_in.front().size());
  Points q = canonicalize(pts_in, tol);
  Polytope p;
  p.ambient = n;
  auto [u, c] = affine_basis(q, tol);
  const int k = static_cast<int>(u.cols());
  p.dim = k;
  Mat w = complement(u, n);
  for (int j = 0; j < w.cols(); ++j) {
    Vec nrm = w.col(j);
    p.equalities.push_back({nrm, nrm.dot(c)});
  }
  if (k == 0) {
    p.vertices = {q.front()};
    return p;
  }
  LocalHull h = hull_full(project(q, u, c), tol);
  for (int i : h.vertices) p.vertices.push_back(q[i]);
  for (const auto& f : h.facets) {
    Vec nrm = u * f.normal;
    nrm.normalize();
    double off = f.offset + nrm.dot(c);
    p.halfspaces.push_back({nrm, off});
  }
  std::sort(p.halfspaces.begin(), p.halfspaces.end(), halfspace_less);
  return p;
}

const Polytope& require_full(const Polytope& p) {
  if (!p.full()) {
    throw Error(ErrorCode::DimensionDeficient,
                "polytope has affine dimension " + std::to_string(p.dim), p.dim);
  }
  return p;
}

std::vector<HalfSpace> vrep_to_hrep(const Points& vertices, double tol) {
  Polytope p = convex_hull(vertices, tol);
  if (!p.full()) throw Error(ErrorCode::Degenerate, "vertex set is not full-dimensional", p.dim);
  return p.halfspaces;
}

namespace {

Points enumerate_vertices(const std::vector<HalfSpace>& hs, const std::vector<Hyperplane>& eqs,
                          int n, double tol) {
  Mat erow(0, n);
  Vec erhs(0);
  if (!eqs.empty()) {
    Mat e(eqs.size(), n);
    Vec f(eqs.size());
    for (size_t i = 0; i < eqs.size(); ++i) {
      e.row(i) = eqs[i].normal.transpose();
      f(i) = eqs[i].offset;
    }
    Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++r;
    }
    erow = svd.matrixV().leftCols(r).transpose();
    Vec uf = svd.matrixU().leftCols(r).transpose() * f;
    erhs = uf.cwiseQuotient(sv.head(r));
  }
  const int re = static_cast<int>(erow.rows());
  const int free_dims = n - re;
  const int m = static_cast<int>(hs.size());
  Points found;
  auto feasible = [&](const Vec& x) {
    for (const auto& h : hs) {
      if (h.eval(x) > 10 * tol) return false;
    }
    for (const auto& e : eqs) {
      if (std::abs(e.eval(x)) > 10 * tol) return false;
    }
    return true;
  };
  if (free_dims == 0) {
    Vec x = erow.colPivHouseholderQr().solve(erhs);
    if (feasible(x)) found.push_back(x);
    return canonicalize(found, 10 * tol);
  }
  Mat mat(n, n);
  Vec rhs(n);
  mat.topRows(re) = erow;
  rhs.head(re) = erhs;
  for_each_subset(m, free_dims, [&](const std::vector<int>& c) {
    for (int r = 0; r < free_dims; ++r) {
      mat.row(re + r) = hs[c[r]].normal.transpose();
      rhs(re + r) = hs[c[r]].offset;
    }
    Eigen::FullPivLU<Mat> lu(mat);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) return;
    Vec x = lu.solve(rhs);
    if (feasible(x)) found.push_back(x);
  });
  return canonicalize(found, 10 * tol);
}

void check_bounded(const std::vector<HalfSpace>& hs, int n) {
  for (int i = 0; i < n; ++i) {
    for (double sgn : {1.0, -1.0}) {
      LinearProgram lp;
      lp.nvars = n;
      lp.objective = Vec::Zero(n);
      lp.objective(i) = sgn;
      for (const auto& h : hs) lp.ineq.emplace_back(h.normal, h.offset);
      LPOutcome out = solve(lp);
      if (out.status == LPStatus::Infeasible) return;
      if (out.status == LPStatus::Unbounded) {
        throw Error(ErrorCode::Unbounded, "halfspaces describe an unbounded set");
      }
    }
  }
}

}  // namespace

Points hrep_to_vrep(const std::vector<HalfSpace>& hs, int n, double tol) {
  check_bounded(hs, n);
  Polytope p = from_halfspaces(hs, n, {}, tol);
  return p.vertices;
}

Polytope from_halfspaces(const std::vector<HalfSpace>& hs, int n, const std::vector<Hyperplane>& eqs,
                         double tol) {
  Points v = enumerate_vertices(hs, eqs, n, tol);
  if (v.empty()) return empty_polytope(n);
  return convex_hull(v, tol);
}

Polytope intersect(const Polytope& p, const std::vector<HalfSpace>& hs,
                   const std::vector<Hyperplane>& eqs, double tol) {
  if (p.empty()) return p;
  std::vector<HalfSpace> all = p.halfspaces;
  all.insert(all.end(), hs.begin(), hs.end());
  std::vector<Hyperplane> alleq = p.equalities;
  alleq.insert(alleq.end(), eqs.begin(), eqs.end());
  return from_halfspaces(all, p.ambient, alleq, tol);
}

Polytope intersect(const Polytope& p, const Polytope& q, double tol) {
  if (p.empty()) return p;
  if (q.empty()) return q;
  return intersect(p, q.halfspaces, q.equalities, tol);
}

Hyperplane normalized(const Hyperplane& h) {
  double s = h.normal.norm();
  if (s == 0.0) throw Error(ErrorCode::Degenerate, "hyperplane with zero normal");
  return {h.normal / s, h.offset / s};
}

std::pair<Polytope, Polytope> split_by_hyperplane(const Polytope& p, const Hyperplane& h_in, double tol) {
  if (p.empty()) return {p, p};
  Hyperplane h = normalized(h_in);
  auto side = [&](const HalfSpace& hs) {
    Polytope s = intersect(p, {hs}, {}, tol);
    if (s.empty() || s.dim < p.dim) return empty_polytope(p.ambient);
    double reach = 0.0;
    for (const auto& v : s.vertices) reach = std::max(reach, std::abs(h.eval(v)));
    if (reach <= 10 * tol) return empty_polytope(p.ambient);
    return s;
  };
  return {side(h.below()), side(h.above())};
}

bool contains(const Polytope& p, const Vec& x, double tol) {
  if (p.empty()) return false;
  return violation(p, x) <= tol;
}

double violation(const Polytope& p, const Vec& x) {
  if (p.empty()) return std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : p.halfspaces) worst = std::max(worst, h.eval(x));
  for (const auto& e : p.equalities) worst = std::max(worst, std::abs(e.eval(x)));
  if (p.halfspaces.empty() && p.equalities.empty()) worst = 0.0;
  return worst;
}

bool subset_of(const Polytope& a, const Polytope& b, double tol) {
  if (a.empty()) return true;
  for (const auto& v : a.vertices) {
    if (!contains(b, v, tol)) return false;
  }
  return true;
}

double simplex_volume(const Points& s) {
  const int k = static_cast<int>(s.size()) - 1;
  if (k <= 0) return 0.0;
  const int n = static_cast<int>(s.front().size());
  Mat d(n, k);
  for (int i = 0; i < k; ++i) d.col(i) = s[i + 1] - s[0];
  double g = k == n ? std::abs(d.determinant()) : std::sqrt(std::max(0.0, (d.transpose() * d).determinant()));
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return g / fact;
}

double volume(const Polytope& p) {
  if (!p.full()) return 0.0;
  return relative_volume(p);
}

double relative_volume(const Polytope& p) {
  if (p.dim <= 0) return 0.0;
  double total = 0.0;
  for (const auto& cell : pulling_triangulation(p, 0)) {
    Points s;
    for (int i : cell) s.push_back(p.vertices[i]);
    total += simplex_volume(s);
  }
  return total;
}

Hyperplane hyperplane_through(const Points& pts, double tol) {
  const int n = static_cast<int>(pts.front().size());
  auto [u, c] = affine_basis(pts, tol);
  if (u.cols() != n - 1) {
    throw Error(ErrorCode::Degenerate, "points do not span a hyperplane", static_cast<int>(u.cols()));
  }
  Vec nrm = complement(u, n).col(0);
  return {nrm, nrm.dot(c)};
}

std::vector<Face> faces_of(const Polytope& p, int d, double tol) {
  std::vector<Face> out;
  if (p.empty() || d > p.dim || d < 0) return out;
  if (d == p.dim) {
    out.push_back({p.vertices, HalfSpace{Vec::Zero(p.ambient), 0.0}, p.dim});
    return out;
  }
  std::vector<std::vector<int>> facet_sets;
  for (const auto& h : p.halfspaces) {
    std::vector<int> s;
    for (int i = 0; i < static_cast<int>(p.vertices.size()); ++i) {
      if (std::abs(h.eval(p.vertices[i])) <= 10 * tol) s.push_back(i);
    }
    facet_sets.push_back(s);
  }
  std::set<std::vector<int>> seen(facet_sets.begin(), facet_sets.end());
  std::vector<std::vector<int>> frontier(seen.begin(), seen.end());
  while (!frontier.empty()) {
    std::vector<std::vector<int>> next;
    for (const auto& a : frontier) {
      for (const auto& b : facet_sets) {
        std::vector<int> c;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(c));
        if (!c.empty() && !seen.count(c)) {
          seen.insert(c);
          next.push_back(c);
        }
      }
    }
    frontier = std::move(next);
  }
  for (const auto& s : seen) {
    Points pts;
    for (int i : s) pts.push_back(p.vertices[i]);
    if (affine_dim(pts, tol) != d) continue;
    Vec nrm = Vec::Zero(p.ambient);
    for (size_t f = 0; f < facet_sets.size(); ++f) {
      if (std::includes(facet_sets[f].begin(), facet_sets[f].end(), s.begin(), s.end())) {
        nrm += p.halfspaces[f].normal;
      }
    }
    if (nrm.norm() > 0) nrm.normalize();
    out.push_back({pts, HalfSpace{nrm, pts.empty() ? 0.0 : nrm.dot(pts.front())}, d});
  }
  std::sort(out.begin(), out.end(), [](const Face& a, const Face& b) {
    return std::lexicographical_compare(a.vertices.begin(), a.vertices.end(), b.vertices.begin(),
                                        b.vertices.end(), lex_less);
  });
  return out;
}

std::optional<int> containing_facet(const Polytope& p, const Points& f, double tol) {
  for (int j = 0; j < static_cast<int>(p.halfspaces.size()); ++j) {
    bool all = true;
    for (const auto& v : f) {
      if (std::abs(p.halfspaces[j].eval(v)) > 10 * tol) {
        all = false;
        break;
      }
    }
    if (all) return j;
  }
  return std::nullopt;
}

Face common_face(const Polytope& p, const Polytope& q, double tol) {
  Polytope i = intersect(p, q, tol);
  Face f;
  if (i.empty()) return f;
  f.vertices = i.vertices;
  f.dim = i.dim;
  f.supporting = HalfSpace{Vec::Zero(p.ambient), 0.0};
  if (auto j = containing_facet(p, f.vertices, tol)) f.supporting = p.halfspaces[*j];
  return f;
}

Polytope face_polytope(const Face& f, double tol) {
  if (f.vertices.empty()) return empty_polytope(f.supporting.normal.size());
  return convex_hull(f.vertices, tol);
}

Face make_face(const Points& pts, const Polytope& parent, double tol) {
  Face f;
  f.vertices = convex_hull(pts, tol).vertices;
  f.dim = affine_dim(f.vertices, tol);
  if (auto j = containing_facet(parent, f.vertices, tol)) {
    f.supporting = parent.halfspaces[*j];
  } else if (f.dim == parent.ambient - 1) {
    Hyperplane h = hyperplane_through(f.vertices, tol);
    if (!parent.vertices.empty() && h.eval(parent.centroid()) > 0) h = {-h.normal, -h.offset};
    f.supporting = h.below();
  } else {
    f.supporting = HalfSpace{Vec::Zero(parent.ambient), 0.0};
  }
  return f;
}

Simplex make_simplex(const Points& v, double tol) {
  const int n = static_cast<int>(v.size()) - 1;
  if (n < 1 || static_cast<int>(v.front().size()) != n || affine_dim(v, tol) != n) {
    throw Error(ErrorCode::Degenerate, "simplex vertices are not affinely independent");
  }
  Simplex s;
  s.v = v;
  for (int j = 0; j <= n; ++j) {
    Hyperplane h = hyperplane_through(s.facet(j), tol);
    if (h.eval(v[j]) > 0) h = {-h.normal, -h.offset};
    s.h.push_back(h.normal);
    s.c.push_back(h.offset);
  }
  return s;
}

std::vector<Points> triangulate_face(const Face& f, const std::optional<Vec>& anchor, double tol) {
  Points pts = f.vertices;
  if (anchor) pts.push_back(*anchor);
  pts = canonicalize(pts, tol);
  int a = 0;
  if (anchor) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if ((pts[i] - *anchor).cwiseAbs().maxCoeff() <= tol) a = i;
    }
  }
  int d = affine_dim(pts, tol);
  std::vector<int> ids(pts.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<std::vector<int>> cells;
  if (d <= 0) {
    cells.push_back({0});
  } else {
    fan(pts, ids, d, a, tol, cells);
  }
  std::vector<Points> out;
  for (const auto& c : cells) {
    Points s;
    for (int i : c) s.push_back(pts[i]);
    out.push_back(s);
  }
  return out;
}

std::vector<std::vector<int>> pulling_triangulation(const Polytope& p, int anchor, double tol) {
  std::vector<std::vector<int>> cells;
  if (p.dim <= 0) return cells;
  std::vector<int> ids(p.vertices.size());
  std::iota(ids.begin(), ids.end(), 0);
  fan(p.vertices, ids, p.dim, anchor, tol, cells);
  return cells;
}

std::vector<std::vector<int>> constrained_triangulation(
    const Points& pts, const std::vector<std::pair<int, int>>& constraints_in, double tol) {
  auto [u, c] = affine_basis(pts, tol);
  const int d = static_cast<int>(u.cols());
  std::vector<Vec> y = project(pts, u, c);
  const int m = static_cast<int>(pts.size());
  std::vector<std::vector<int>> tris;
  if (d == 1) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return y[a](0) < y[b](0); });
    for (int i = 0; i + 1 < m; ++i) {
      tris.push_back({std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1])});
    }
    return tris;
  }
  if (d != 2) throw Error(ErrorCode::Degenerate, "constrained triangulation needs a planar point set");

  // Start from a fan over the hull vertices, then insert the remaining points.
  LocalHull hull = hull_full(y, tol);
  std::vector<int> hv = hull.vertices;
  Points hpts;
  for (int i : hv) hpts.push_back(pts[i]);
  std::vector<int> hids(hv.size());
  std::iota(hids.begin(), hids.end(), 0);
  std::vector<std::vector<int>> cells;
  fan(hpts, hids, 2, 0, tol, cells);
  auto orient = [&](std::vector<int>& t) {
    if (cross2(y[t[0]], y[t[1]], y[t[2]]) < 0) std::swap(t[1], t[2]);
  };
  for (auto& cell : cells) {
    std::vector<int> t{hv[cell[0]], hv[cell[1]], hv[cell[2]]};
    orient(t);
    tris.push_back(t);
  }
  std::vector<bool> used(m, false);
  for (int i : hv) used[i] = true;
  double scale = 0.0;
  for (const auto& p : y) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double etol = tol * std::max(1.0, scale) * 10;
  for (int p = 0; p < m; ++p) {
    if (used[p]) continue;
    used[p] = true;
    // Locate by signed areas.
    int where = -1;
    int on_edge = -1;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      const auto& tr = tris[t];
      double a0 = cross2(y[tr[1]], y[tr[2]], y[p]);
      double a1 = cross2(y[tr[2]], y[tr[0]], y[p]);
      double a2 = cross2(y[tr[0]], y[tr[1]], y[p]);
      double mn = std::min({a0, a1, a2});
      if (mn < -etol) continue;
      where = t;
      if (std::abs(a0) <= etol) on_edge = 0;
      else if (std::abs(a1) <= etol) on_edge = 1;
      else if (std::abs(a2) <= etol) on_edge = 2;
      break;
    }
    if (where < 0) throw Error(ErrorCode::NumericalFailure, "point outside triangulated region");
    if (on_edge < 0) {
      auto tr = tris[where];
      tris.erase(tris.begin() + where);
      tris.push_back({tr[0], tr[1], p});
      tris.push_back({tr[1], tr[2], p});
      tris.push_back({tr[2], tr[0], p});
    } else {
      auto tr = tris[where];
      int a = tr[(on_edge + 1) % 3];
      int b = tr[(on_edge + 2) % 3];
      std::vector<std::vector<int>> keep, split;
      for (const auto& t : tris) {
        bool ha = std::find(t.begin(), t.end(), a) != t.end();
        bool hb = std::find(t.begin(), t.end(), b) != t.end();
        (ha && hb ? split : keep).push_back(t);
      }
      for (const auto& t : split) {
        int o = t[0] != a && t[0] != b ? t[0] : (t[1] != a && t[1] != b ? t[1] : t[2]);
        std::vector<int> t1{a, p, o}, t2{p, b, o};
        orient(t1);
        orient(t2);
        keep.push_back(t1);
        keep.push_back(t2);
      }
      tris = keep;
    }
  }

  // Constraint segments are split at input points lying on them.
  std::vector<std::pair<int, int>> constraints;
  for (auto [a, b] : constraints_in) {
    std::vector<std::pair<double, int>> on;
    Vec dir = y[b] - y[a];
    double len2 = dir.squaredNorm();
    for (int p = 0; p < m; ++p) {
      double t = (y[p] - y[a]).dot(dir) / len2;
      if (t < -1e-12 || t > 1 + 1e-12) continue;
      if ((y[a] + t * dir - y[p]).norm() <= etol) on.emplace_back(t, p);
    }
    std::sort(on.begin(), on.end());
    for (size_t k = 0; k + 1 < on.size(); ++k) constraints.emplace_back(on[k].second, on[k + 1].second);
  }
  auto has_edge = [&](int a, int b) {
    for (const auto& t : tris) {
      bool ha = std::find(t.begin(), t.end(), a) != t.end();
      bool hb = std::find(t.begin(), t.end(), b) != t.end();
      if (ha && hb) return true;
    }
    return false;
  };
  auto crosses = [&](int p, int q, int a, int b) {
    if (p == a || p == b || q == a || q == b) return false;
    double d1 = cross2(y[a], y[b], y[p]);
    double d2 = cross2(y[a], y[b], y[q]);
    double d3 = cross2(y[p], y[q], y[a]);
    double d4 = cross2(y[p], y[q], y[b]);
    return d1 * d2 < -etol * etol && d3 * d4 < -etol * etol;
  };
  for (auto [a, b] : constraints) {
    for (int guard = 0; guard < 10000 && !has_edge(a, b); ++guard) {
      bool flipped = false;
      for (size_t t1 = 0; t1 < tris.size() && !flipped; ++t1) {
        for (int e = 0; e < 3 && !flipped; ++e) {
          int p = tris[t1][e], q = tris[t1][(e + 1) % 3];
          if (!crosses(p, q, a, b)) continue;
          int r = tris[t1][(e + 2) % 3];
          for (size_t t2 = 0; t2 < tris.size(); ++t2) {
            if (t2 == t1) continue;
            const auto& o = tris[t2];
            bool hp = std::find(o.begin(), o.end(), p) != o.end();
            bool hq = std::find(o.begin(), o.end(), q) != o.end();
            if (!hp || !hq) continue;
            int s = o[0] != p && o[0] != q ? o[0] : (o[1] != p && o[1] != q ? o[1] : o[2]);
            if (!crosses(r, s, p, q)) break;  // quad not strictly convex
            std::vector<int> n1{r, s, q}, n2{s, r, p};
            orient(n1);
            orient(n2);
            tris[t1] = n1;
            tris[t2] = n2;
            flipped = true;
            break;
          }
        }
      }
      if (!flipped) throw Error(ErrorCode::NumericalFailure, "constraint edge recovery stalled");
    }
  }
  for (auto& t : tris) std::sort(t.begin(), t.end());
  std::sort(tris.begin(), tris.end());
  return tris;
}

std::pair<Vec, Vec> bounding_box(const Points& pts) {
  Vec lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

}  // namespace reachctl
