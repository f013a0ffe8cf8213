#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace reachctl::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::Schema, (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

std::string kind_of(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

void require_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected object, got " + kind_of(j));
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path.empty() ? key : path + "." + key, "missing");
  return j.at(key);
}

std::string sub(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }
std::string sub(const std::string& path, size_t i) { return path + "[" + std::to_string(i) + "]"; }

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected number, got " + kind_of(j));
  double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, "number is not finite");
  return x;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected integer, got " + kind_of(j));
  return j.get<int>();
}

Vec vector(const json& j, const std::string& path, int expect = -1) {
  if (!j.is_array()) fail(path, "expected array, got " + kind_of(j));
  if (expect >= 0 && static_cast<int>(j.size()) != expect) {
    fail(path, "expected " + std::to_string(expect) + " entries, got " + std::to_string(j.size()));
  }
  Vec v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = number(j[i], sub(path, i));
  return v;
}

Mat matrix(const json& j, const std::string& path, int rows = -1, int cols = -1) {
  if (!j.is_array()) fail(path, "expected array of rows, got " + kind_of(j));
  if (j.empty()) fail(path, "matrix has no rows");
  if (rows >= 0 && static_cast<int>(j.size()) != rows) {
    fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  }
  if (!j[0].is_array()) fail(sub(path, size_t{0}), "expected array, got " + kind_of(j[0]));
  const int c = cols >= 0 ? cols : static_cast<int>(j[0].size());
  Mat m(static_cast<int>(j.size()), c);
  for (size_t r = 0; r < j.size(); ++r) m.row(static_cast<int>(r)) = vector(j[r], sub(path, r), c).transpose();
  return m;
}

Points points(const json& j, const std::string& path, int n) {
  if (!j.is_array()) fail(path, "expected array of points, got " + kind_of(j));
  Points out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(vector(j[i], sub(path, i), n));
  return out;
}

Polytope polytope(const json& j, const std::string& path, int n) {
  if (!j.is_object()) fail(path, "expected object, got " + kind_of(j));
  const bool hv = j.contains("vertices"), hh = j.contains("halfspaces");
  if (hv == hh) fail(path, "give exactly one of vertices or halfspaces");
  if (hv) {
    require_keys(j, path, {"vertices", "dim", "facets"});
    return convex_hull(points(j.at("vertices"), sub(path, "vertices"), n));
  }
  require_keys(j, path, {"halfspaces"});
  const json& hs = j.at("halfspaces");
  const std::string hp = sub(path, "halfspaces");
  if (!hs.is_array()) fail(hp, "expected array, got " + kind_of(hs));
  std::vector<HalfSpace> out;
  for (size_t i = 0; i < hs.size(); ++i) {
    const std::string ip = sub(hp, i);
    require_keys(hs[i], ip, {"normal", "offset"});
    out.push_back({vector(field(hs[i], ip, "normal"), sub(ip, "normal"), n), number(field(hs[i], ip, "offset"), sub(ip, "offset"))});
  }
  return from_halfspaces(out, n);
}

AffineSystem system(const json& j, const std::string& path) {
  require_keys(j, path, {"A", "a", "B"});
  AffineSystem s;
  s.A = matrix(field(j, path, "A"), sub(path, "A"));
  const int n = static_cast<int>(s.A.rows());
  if (s.A.cols() != n) fail(sub(path, "A"), "expected a square matrix, got " + std::to_string(n) + "x" + std::to_string(s.A.cols()));
  s.a = j.contains("a") ? vector(j.at("a"), sub(path, "a"), n) : Vec(Vec::Zero(n));
  s.B = matrix(field(j, path, "B"), sub(path, "B"), n);
  return s;
}

// Vertex order around a 2-dimensional set, counterclockwise about `normal`
// when one is given (in R^2 the standard orientation), starting from the
// lexicographically smallest vertex.
Points ring(Points pts, const Vec* normal) {
  if (pts.size() < 3) return pts;
  const int n = static_cast<int>(pts.front().size());
  Mat u;
  Vec c;
  if (n == 2) {
    u = Mat::Identity(2, 2);
    c = Vec::Zero(2);
  } else {
    std::tie(u, c) = affine_basis(pts);
    if (u.cols() != 2) return pts;
    if (normal && n == 3) {
      Eigen::Vector3d a = u.col(0), b = u.col(1);
      if (a.cross(b).dot(Eigen::Vector3d(*normal)) < 0) u.col(1) *= -1;
    }
  }
  Eigen::Vector2d mid = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> y;
  for (const auto& p : pts) {
    y.push_back(u.transpose() * (p - c));
    mid += y.back() / static_cast<double>(pts.size());
  }
  std::vector<int> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto angle = [&](int i) { return std::atan2(y[i](1) - mid(1), y[i](0) - mid(0)); };
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return angle(a) < angle(b); });
  int start = 0;
  for (int k = 1; k < static_cast<int>(idx.size()); ++k) {
    if (lex_less(pts[idx[k]], pts[idx[start]])) start = k;
  }
  Points out;
  for (size_t k = 0; k < idx.size(); ++k) out.push_back(pts[idx[(start + k) % idx.size()]]);
  return out;
}

void write_value(std::ostream& os, const json& j, int indent) {
  auto pad = [&](int k) { os << std::string(static_cast<size_t>(k), ' '); };
  switch (j.type()) {
    case json::value_t::number_float: {
      double x = j.get<double>();
      if (std::isfinite(x)) {
        os << format_number(x);
      } else {
        os << "null";
      }
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        os << '[';
        for (size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_value(os, j[i], indent);
        }
        os << ']';
        return;
      }
      os << "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        pad(indent + 2);
        write_value(os, j[i], indent + 2);
        os << (i + 1 < j.size() ? ",\n" : "\n");
      }
      pad(indent);
      os << ']';
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        pad(indent + 2);
        os << json(it.key()).dump() << ": ";
        write_value(os, it.value(), indent + 2);
        os << (i + 1 < j.size() ? ",\n" : "\n");
      }
      pad(indent);
      os << '}';
      return;
    }
    default:
      os << j.dump();
  }
}

std::vector<int> thin(int count, int max_points) {
  std::vector<int> idx;
  if (count <= max_points || max_points < 2) {
    for (int i = 0; i < count; ++i) idx.push_back(i);
    return idx;
  }
  for (int k = 0; k < max_points; ++k) {
    idx.push_back(static_cast<int>((static_cast<long long>(k) * (count - 1)) / (max_points - 1)));
  }
  return idx;
}

}  // namespace

void write(std::ostream& os, const json& j) {
  write_value(os, j, 0);
  os << '\n';
}

std::string dump(const json& j) {
  std::ostringstream os;
  write(os, j);
  return os.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Schema, path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, path + ": " + e.what());
  }
}

Problem parse_problem(const json& j) {
  require_keys(j, "", {"version", "name", "description", "system", "polytope", "target", "options"});
  if (j.contains("version") && integer(j.at("version"), "version") != kSchemaVersion) {
    fail("version", "unsupported schema version");
  }
  Problem pr;
  pr.sys = system(field(j, "", "system"), "system");
  const int n = pr.sys.n();
  pr.p = polytope(field(j, "", "polytope"), "polytope", n);
  pr.f = points(field(j, "", "target"), "target", n);
  if (pr.f.empty()) fail("target", "no points");
  if (pr.p.full() && !containing_facet(pr.p, pr.f)) fail("target", "points do not lie in one facet of the polytope");
  if (j.contains("options")) {
    const json& o = j.at("options");
    require_keys(o, "options", {"eps", "dt", "tmax", "nsamples", "seed", "tol_geom", "tol_lp", "tol_sim", "slack_min"});
    if (o.contains("eps")) pr.options.eps = number(o.at("eps"), "options.eps");
    if (o.contains("dt")) pr.options.dt = number(o.at("dt"), "options.dt");
    if (o.contains("tmax")) pr.options.tmax = number(o.at("tmax"), "options.tmax");
    if (o.contains("nsamples")) pr.options.nsamples = integer(o.at("nsamples"), "options.nsamples");
    if (o.contains("seed")) {
      if (!o.at("seed").is_number_unsigned()) fail("options.seed", "expected nonnegative integer");
      pr.options.seed = o.at("seed").get<std::uint64_t>();
    }
    if (o.contains("tol_geom")) pr.options.tol.geom = number(o.at("tol_geom"), "options.tol_geom");
    if (o.contains("tol_lp")) pr.options.tol.lp = number(o.at("tol_lp"), "options.tol_lp");
    if (o.contains("tol_sim")) pr.options.tol.sim = number(o.at("tol_sim"), "options.tol_sim");
    if (o.contains("slack_min")) pr.options.tol.slack_min = number(o.at("slack_min"), "options.slack_min");
  }
  return pr;
}

Problem load_problem(const std::string& path) { return parse_problem(read_json_file(path)); }

PWAController parse_controller(const json& j) {
  require_keys(j, "", {"version", "kind", "n", "m", "region", "target", "domain", "pieces"});
  if (!j.contains("kind") || j.at("kind") != "controller") fail("kind", "expected \"controller\"");
  PWAController c;
  c.n = integer(field(j, "", "n"), "n");
  c.m = integer(field(j, "", "m"), "m");
  c.region = polytope(field(j, "", "region"), "region", c.n);
  c.target = points(field(j, "", "target"), "target", c.n);
  const json& dom = field(j, "", "domain");
  if (!dom.is_array()) fail("domain", "expected array");
  for (size_t i = 0; i < dom.size(); ++i) c.domain.push_back(polytope(dom[i], sub("domain", i), c.n));
  const json& ps = field(j, "", "pieces");
  if (!ps.is_array()) fail("pieces", "expected array");
  for (size_t i = 0; i < ps.size(); ++i) {
    const std::string ip = sub("pieces", i);
    require_keys(ps[i], ip, {"vertices", "gain", "offset", "exit_facet", "path_len", "slack", "exit_margin", "priority"});
    AffinePiece p;
    Points v = points(field(ps[i], ip, "vertices"), sub(ip, "vertices"), c.n);
    if (static_cast<int>(v.size()) != c.n + 1) fail(sub(ip, "vertices"), "expected " + std::to_string(c.n + 1) + " vertices");
    p.region = make_simplex(v);
    p.gain = matrix(field(ps[i], ip, "gain"), sub(ip, "gain"), c.m, c.n);
    p.offset = vector(field(ps[i], ip, "offset"), sub(ip, "offset"), c.m);
    p.exit_facet = integer(field(ps[i], ip, "exit_facet"), sub(ip, "exit_facet"));
    p.path_len = integer(field(ps[i], ip, "path_len"), sub(ip, "path_len"));
    if (ps[i].contains("slack")) p.slack = number(ps[i].at("slack"), sub(ip, "slack"));
    if (ps[i].contains("exit_margin")) p.exit_margin = number(ps[i].at("exit_margin"), sub(ip, "exit_margin"));
    const json& pr = field(ps[i], ip, "priority");
    if (!pr.is_array()) fail(sub(ip, "priority"), "expected array");
    for (size_t k = 0; k < pr.size(); ++k) p.priority.push_back(integer(pr[k], sub(sub(ip, "priority"), k)));
    c.pieces.push_back(std::move(p));
  }
  return c;
}

PWAController load_controller(const std::string& path) { return parse_controller(read_json_file(path)); }

json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
  return a;
}

json to_json(const Points& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(to_json(p));
  return a;
}

json to_json(const HalfSpace& h) { return json{{"normal", to_json(h.normal)}, {"offset", h.offset}}; }

json polytope_json(const Polytope& p) {
  json j;
  j["dim"] = p.dim;
  if (p.empty()) {
    j["vertices"] = json::array();
    return j;
  }
  if (p.dim == 2) {
    Vec normal;
    if (p.ambient == 3 && !p.equalities.empty()) normal = p.equalities.front().normal;
    j["vertices"] = to_json(ring(p.vertices, normal.size() ? &normal : nullptr));
    return j;
  }
  j["vertices"] = to_json(p.vertices);
  if (p.dim == 3 && p.ambient == 3) {
    json facets = json::array();
    for (const auto& h : p.halfspaces) {
      Points on;
      for (const auto& v : p.vertices) {
        if (std::abs(h.eval(v)) <= 1e-9) on.push_back(v);
      }
      json ids = json::array();
      for (const auto& x : ring(on, &h.normal)) {
        for (size_t k = 0; k < p.vertices.size(); ++k) {
          if (p.vertices[k] == x) ids.push_back(k);
        }
      }
      facets.push_back(ids);
    }
    j["facets"] = facets;
  }
  return j;
}

json system_json(const AffineSystem& sys) {
  return json{{"A", to_json(sys.A)}, {"a", to_json(sys.a)}, {"B", to_json(sys.B)}};
}

json controller_json(const PWAController& c) {
  json j;
  j["version"] = kSchemaVersion;
  j["kind"] = "controller";
  j["n"] = c.n;
  j["m"] = c.m;
  j["region"] = polytope_json(c.region);
  j["target"] = to_json(c.target);
  json dom = json::array();
  for (const auto& d : c.domain) dom.push_back(polytope_json(d));
  j["domain"] = dom;
  json ps = json::array();
  for (const auto& p : c.pieces) {
    json pj;
    pj["vertices"] = to_json(p.region.v);
    pj["gain"] = to_json(p.gain);
    pj["offset"] = to_json(p.offset);
    pj["exit_facet"] = p.exit_facet;
    pj["path_len"] = p.path_len;
    pj["slack"] = p.slack;
    pj["exit_margin"] = p.exit_margin;
    pj["priority"] = p.priority;
    ps.push_back(pj);
  }
  j["pieces"] = ps;
  return j;
}

json triangulation_json(const PWAController& c) {
  Points all;
  for (const auto& p : c.pieces) all.insert(all.end(), p.region.v.begin(), p.region.v.end());
  Points pool = canonicalize(all);
  auto id = [&](const Vec& x) {
    for (size_t k = 0; k < pool.size(); ++k) {
      if ((pool[k] - x).norm() <= 1e-12) return static_cast<int>(k);
    }
    return -1;
  };
  json cells = json::array();
  for (size_t i = 0; i < c.pieces.size(); ++i) {
    const auto& p = c.pieces[i];
    json ids = json::array();
    for (const auto& v : p.region.v) ids.push_back(id(v));
    cells.push_back(json{{"piece", i}, {"vertices", ids}, {"exit_facet", p.exit_facet}, {"path_len", p.path_len}});
  }
  json j;
  j["version"] = kSchemaVersion;
  j["kind"] = "triangulation";
  j["points"] = to_json(pool);
  j["cells"] = cells;
  return j;
}

json analysis_json(const ReachAnalysis& ra, const SystemGeometry& geom) {
  json j;
  j["reachable"] = ra.reachable;
  j["condition_a"] = ra.condition_a;
  j["condition_b"] = ra.condition_b;
  j["ambiguous"] = ra.ambiguous;
  j["beta"] = to_json(geom.beta);
  j["o_plane"] = json{{"normal", to_json(geom.o_plane.normal)}, {"offset", geom.o_plane.offset}};
  j["v_minus"] = to_json(ra.v_minus);
  j["v_plus"] = to_json(ra.v_plus);
  j["target_facet"] = ra.target_facet;
  j["P_plus"] = polytope_json(ra.p_plus);
  j["B_minus"] = ra.b_minus_nonempty ? polytope_json(ra.b_minus) : json(nullptr);
  j["A_minus"] = polytope_json(ra.a_minus);
  j["A_plus"] = polytope_json(ra.a_plus);
  return j;
}

json cut_json(const EpsilonCut& cut) {
  json j;
  j["eps"] = cut.eps;
  j["no_failure_sets"] = cut.no_failure_sets;
  j["minus_cut"] = cut.minus_cut ? to_json(*cut.minus_cut) : json(nullptr);
  j["plus_cut"] = cut.plus_cut ? to_json(*cut.plus_cut) : json(nullptr);
  j["A_eps_minus"] = polytope_json(cut.a_eps_minus);
  j["A_eps_plus"] = polytope_json(cut.a_eps_plus);
  j["reach_eps"] = polytope_json(cut.reach_eps);
  return j;
}

json trajectory_json(const Trajectory& t, int max_points) {
  json j;
  j["outcome"] = outcome_name(t.outcome.kind);
  j["t"] = t.outcome.t;
  j["facet"] = t.outcome.facet;
  j["chattering"] = t.chattering;
  j["max_violation"] = t.max_violation;
  json times = json::array(), states = json::array();
  for (int i : thin(static_cast<int>(t.times.size()), max_points)) {
    times.push_back(t.times[i]);
    states.push_back(to_json(t.states[i]));
  }
  j["times"] = times;
  j["states"] = states;
  return j;
}

json report_json(const VerifyReport& r, std::uint64_t seed, int max_points) {
  json j;
  j["version"] = kSchemaVersion;
  j["kind"] = "verification";
  j["nsamples"] = r.nsamples;
  j["seed"] = seed;
  j["successes"] = r.successes;
  j["success_fraction"] = r.success_fraction;
  j["max_time"] = r.max_time;
  j["mean_time"] = r.mean_time;
  j["max_violation"] = r.max_violation;
  j["chattering"] = r.chattering;
  json fs = json::array();
  for (const auto& f : r.failures) {
    fs.push_back(json{{"index", f.index}, {"x0", to_json(f.x0)}, {"trajectory", trajectory_json(f.trajectory, max_points)}});
  }
  j["failures"] = fs;
  return j;
}

}  // namespace reachctl::io
