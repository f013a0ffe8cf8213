#pragma once

#include "reachctl/sim.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace reachctl::io {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

struct ProblemOptions {
  std::optional<double> eps;
  std::optional<double> dt;
  std::optional<double> tmax;
  int nsamples = 100;
  std::uint64_t seed = 0;
  Tolerances tol;
};

struct Problem {
  AffineSystem sys;
  Polytope p;
  Points f;
  ProblemOptions options;
};

// Schema errors carry the field path, e.g. "system.A[1]: expected 2 entries, got 1".
Problem parse_problem(const json& j);
Problem load_problem(const std::string& path);
json read_json_file(const std::string& path);

PWAController parse_controller(const json& j);
PWAController load_controller(const std::string& path);

json to_json(const Vec& v);
json to_json(const Mat& m);
json to_json(const Points& pts);
json to_json(const HalfSpace& h);
// V-rep; 2-faces come out as an ordered ring, 3-polytopes also list their facets as rings.
json polytope_json(const Polytope& p);
json system_json(const AffineSystem& sys);
json controller_json(const PWAController& c);
json triangulation_json(const PWAController& c);
json analysis_json(const ReachAnalysis& ra, const SystemGeometry& geom);
json cut_json(const EpsilonCut& cut);
json report_json(const VerifyReport& r, std::uint64_t seed, int max_points = 1000);
json trajectory_json(const Trajectory& t, int max_points = 1000);

// Pretty printer with every floating-point number as %.17g.
void write(std::ostream& os, const json& j);
std::string dump(const json& j);

}  // namespace reachctl::io
