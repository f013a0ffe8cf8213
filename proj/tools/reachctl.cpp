#include "io.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace reachctl;
using io::json;

namespace {

struct Flags {
  std::string file;
  std::string controller;
  std::string out;
  std::vector<std::string> x0;
  std::optional<double> eps, dt, tmax, tol_geom, tol_lp;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
};

io::Problem load(const Flags& fl) {
  io::Problem pr = io::load_problem(fl.file);
  if (fl.eps) pr.options.eps = fl.eps;
  if (fl.dt) pr.options.dt = fl.dt;
  if (fl.tmax) pr.options.tmax = fl.tmax;
  if (fl.samples) pr.options.nsamples = *fl.samples;
  if (fl.seed) pr.options.seed = *fl.seed;
  if (fl.tol_geom) pr.options.tol.geom = *fl.tol_geom;
  if (fl.tol_lp) pr.options.tol.lp = *fl.tol_lp;
  return pr;
}

void emit(const Flags& fl, const std::string& name, const std::string& text) {
  if (fl.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(fl.out);
  std::ofstream os(std::filesystem::path(fl.out) / name);
  if (!os) throw Error(ErrorCode::Schema, fl.out + "/" + name + ": cannot write");
  os << text;
}

void emit(const Flags& fl, const std::string& name, const json& j) { emit(fl, name, io::dump(j)); }

double eps_for(const io::Problem& pr, const SystemGeometry& geom) {
  return pr.options.eps ? *pr.options.eps : default_eps(geom, pr.p);
}

SystemGeometry loose_geometry(const AffineSystem& sys) { return geometry_for_beta(sys, input_normal(sys)); }

SimOptions sim_options(const io::Problem& pr) {
  SimOptions o;
  o.dt = pr.options.dt;
  o.tmax = pr.options.tmax;
  o.tol = pr.options.tol;
  return o;
}

json cover_json(const Cover& c) {
  json ps = json::array();
  for (const auto& pc : c.pieces) {
    ps.push_back(json{{"role", pc.role == PieceRole::Target ? "target" : "feeder"},
                      {"stage", pc.stage},
                      {"polytope", io::polytope_json(pc.poly)},
                      {"target", io::to_json(pc.target)}});
  }
  return ps;
}

int cmd_analyze(const Flags& fl) {
  io::Problem pr = load(fl);
  const double gt = pr.options.tol.geom;
  json rep;
  rep["version"] = io::kSchemaVersion;
  rep["kind"] = "analysis";
  AssumptionReport ar = check_assumptions(pr.sys, pr.p, pr.f, gt);
  rep["assumptions"] = json{{"rank_b", ar.rank_b},
                            {"controllable", ar.controllable},
                            {"o_outside", ar.o_outside},
                            {"target_facet", ar.target_facet},
                            {"messages", ar.messages}};
  if (!ar.rank_b || !ar.controllable || !ar.target_facet) {
    emit(fl, "analysis.json", rep);
    throw Error(ErrorCode::AssumptionViolated, ar.messages.empty() ? "assumptions fail" : ar.messages.front());
  }
  int code = 0;
  if (o_crosses_interior(pr.sys, pr.p, gt)) {
    rep["o_crosses_interior"] = true;
    try {
      Cover c = cover_wrt_O(pr.sys, pr.p, pr.f, eps_for(pr, loose_geometry(pr.sys)), gt);
      rep["reachable"] = true;
      rep["cover"] = cover_json(c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CoverIncomplete) throw;
      rep["reachable"] = false;
      rep["cover_error"] = e.what();
      code = 2;
    }
  } else {
    rep["o_crosses_interior"] = false;
    SystemGeometry geom = compute_geometry(pr.sys, pr.p, gt);
    ReachAnalysis ra = analyze(pr.sys, geom, pr.p, pr.f, gt);
    json a = io::analysis_json(ra, geom);
    for (auto& [k, v] : a.items()) rep[k] = v;
    code = ra.reachable ? 0 : 2;
  }
  emit(fl, "analysis.json", rep);
  return code;
}

int cmd_cut(const Flags& fl) {
  io::Problem pr = load(fl);
  SystemGeometry geom = compute_geometry(pr.sys, pr.p, pr.options.tol.geom);
  EpsilonCut cut = epsilon_cut(pr.sys, geom, pr.p, pr.f, eps_for(pr, geom), pr.options.tol.geom);
  json j;
  j["version"] = io::kSchemaVersion;
  j["kind"] = "cut";
  json body = io::cut_json(cut);
  for (auto& [k, v] : body.items()) j[k] = v;
  emit(fl, "cut.json", j);
  return cut.reach_eps.empty() ? 2 : 0;
}

int cmd_synthesize(const Flags& fl) {
  io::Problem pr = load(fl);
  SynthOptions so;
  so.eps = pr.options.eps;
  so.tol = pr.options.tol;
  try {
    PWAController c = synth_polytope(pr.sys, pr.p, pr.f, so);
    emit(fl, "controller.json", io::controller_json(c));
    if (!fl.out.empty()) emit(fl, "triangulation.json", io::triangulation_json(c));
    return 0;
  } catch (const NotReachableError& e) {
    json rep;
    rep["version"] = io::kSchemaVersion;
    rep["kind"] = "analysis";
    rep["message"] = e.what();
    SystemGeometry geom = o_crosses_interior(pr.sys, pr.p, pr.options.tol.geom)
                              ? loose_geometry(pr.sys)
                              : compute_geometry(pr.sys, pr.p, pr.options.tol.geom);
    json a = io::analysis_json(e.analysis(), geom);
    for (auto& [k, v] : a.items()) rep[k] = v;
    emit(fl, "analysis.json", rep);
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CoverIncomplete) throw;
    std::cerr << e.what() << '\n';
    return 2;
  }
}

Vec parse_point(const std::string& s, int n) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (static_cast<int>(parts.size()) != n) {
    throw Error(ErrorCode::Schema, "--x0 " + s + ": expected " + std::to_string(n) + " comma-separated numbers");
  }
  Vec x(n);
  for (int i = 0; i < n; ++i) {
    size_t used = 0;
    try {
      x(i) = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[i].size()) {
      throw Error(ErrorCode::Schema, "--x0 " + s + ": entry " + std::to_string(i) + " is not a number");
    }
  }
  return x;
}

PWAController controller_for(const Flags& fl, const io::Problem& pr) {
  if (fl.controller.empty()) throw Error(ErrorCode::Schema, "--controller is required");
  PWAController c = io::load_controller(fl.controller);
  if (c.n != pr.sys.n() || c.m != pr.sys.m()) {
    throw Error(ErrorCode::Schema, fl.controller + ": dimensions do not match the problem system");
  }
  return c;
}

Polytope sampling_region(const PWAController& c) {
  if (c.domain.empty()) return c.region;
  Points all;
  for (const auto& d : c.domain) all.insert(all.end(), d.vertices.begin(), d.vertices.end());
  return convex_hull(all);
}

int cmd_simulate(const Flags& fl) {
  io::Problem pr = load(fl);
  PWAController c = controller_for(fl, pr);
  if (fl.x0.empty()) throw Error(ErrorCode::Schema, "--x0 is required");
  std::string all;
  for (size_t k = 0; k < fl.x0.size(); ++k) {
    Trajectory tr = integrate(pr.sys, c, parse_point(fl.x0[k], pr.sys.n()), sim_options(pr));
    std::ostringstream os;
    write_csv(os, tr);
    std::cerr << "trajectory " << k << ": " << outcome_name(tr.outcome.kind) << " at t=" << format_number(tr.outcome.t)
              << (tr.chattering ? " (chattering)" : "") << '\n';
    if (fl.out.empty()) {
      all += (k ? "\n" : "") + os.str();
    } else {
      emit(fl, "trajectory_" + std::to_string(k) + ".csv", os.str());
    }
  }
  if (fl.out.empty()) std::cout << all;
  return 0;
}

int cmd_verify(const Flags& fl) {
  io::Problem pr = load(fl);
  PWAController c = controller_for(fl, pr);
  VerifyReport r = verify(pr.sys, c, sampling_region(c), pr.options.nsamples, pr.options.seed, sim_options(pr));
  emit(fl, "verification.json", io::report_json(r, pr.options.seed));
  return 0;
}

int cmd_plot_data(const Flags& fl) {
  io::Problem pr = load(fl);
  const double gt = pr.options.tol.geom;
  json j;
  j["version"] = io::kSchemaVersion;
  j["kind"] = "plot-data";
  j["P"] = io::polytope_json(pr.p);
  j["F"] = io::polytope_json(convex_hull(pr.f, gt));
  SystemGeometry loose = loose_geometry(pr.sys);
  j["O_cap_P"] = io::polytope_json(intersect(pr.p, {}, {loose.o_plane}, gt));
  j["failure_sets"] = nullptr;
  j["reach_eps"] = nullptr;
  if (!o_crosses_interior(pr.sys, pr.p, gt)) {
    SystemGeometry geom = compute_geometry(pr.sys, pr.p, gt);
    ReachAnalysis ra = analyze(pr.sys, geom, pr.p, pr.f, gt);
    j["failure_sets"] = json{{"A_minus", io::polytope_json(ra.a_minus)}, {"A_plus", io::polytope_json(ra.a_plus)}};
    if (!ra.reachable) {
      try {
        j["reach_eps"] = io::polytope_json(epsilon_cut(pr.sys, geom, pr.p, pr.f, eps_for(pr, geom), gt).reach_eps);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EpsTooLarge) throw;
      }
    }
  }
  json simplices = json::array(), trajectories = json::array();
  if (!fl.controller.empty()) {
    PWAController c = controller_for(fl, pr);
    for (const auto& p : c.pieces) simplices.push_back(io::polytope_json(convex_hull(p.region.v, gt))["vertices"]);
    const int ns = fl.samples ? *fl.samples : 0;
    Polytope region = sampling_region(c);
    for (int i = 0; i < ns; ++i) {
      Vec x0 = sample_in(region, pr.options.seed, i);
      trajectories.push_back(io::trajectory_json(integrate(pr.sys, c, x0, sim_options(pr)), 200));
    }
  }
  j["simplices"] = simplices;
  j["trajectories"] = trajectories;
  emit(fl, "plot_data.json", j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reach-control analysis and piecewise affine feedback synthesis on polytopes"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags fl;
  app.add_option("--eps", fl.eps, "cut depth for eps-reach sets");
  app.add_option("--dt", fl.dt, "integration step");
  app.add_option("--tmax", fl.tmax, "integration horizon");
  app.add_option("--samples", fl.samples, "number of sampled initial states");
  app.add_option("--seed", fl.seed, "sampling seed");
  app.add_option("--out", fl.out, "write outputs into this directory instead of stdout");
  app.add_option("--tol-geom", fl.tol_geom, "geometric tolerance");
  app.add_option("--tol-lp", fl.tol_lp, "LP feasibility tolerance");

  auto command = [&](const char* name, const char* help) {
    CLI::App* c = app.add_subcommand(name, help);
    c->add_option("file", fl.file, "problem JSON")->required();
    return c;
  };
  CLI::App* analyze_cmd = command("analyze", "check assumptions and decide reachability");
  CLI::App* cut_cmd = command("cut", "eps-cut the failure sets");
  CLI::App* synth_cmd = command("synthesize", "build a piecewise affine controller");
  CLI::App* sim_cmd = command("simulate", "integrate closed-loop trajectories");
  sim_cmd->add_option("--controller", fl.controller, "controller JSON")->required();
  sim_cmd->add_option("--x0", fl.x0, "initial state as comma-separated numbers (repeatable)")->required();
  CLI::App* verify_cmd = command("verify", "sample initial states and simulate");
  verify_cmd->add_option("--controller", fl.controller, "controller JSON")->required();
  CLI::App* plot_cmd = command("plot-data", "export polygons and trajectories for plotting");
  plot_cmd->add_option("--controller", fl.controller, "controller JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze_cmd->parsed()) return cmd_analyze(fl);
    if (cut_cmd->parsed()) return cmd_cut(fl);
    if (synth_cmd->parsed()) return cmd_synthesize(fl);
    if (sim_cmd->parsed()) return cmd_simulate(fl);
    if (verify_cmd->parsed()) return cmd_verify(fl);
    if (plot_cmd->parsed()) return cmd_plot_data(fl);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
