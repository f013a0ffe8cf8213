#pragma once

#include "reachctl/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace reachctl {

enum class OutcomeKind { ReachedF, LeftP, Timeout, ControllerGap };

std::string outcome_name(OutcomeKind k);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Timeout;
  double t = 0.0;
  int facet = -1;  // LeftP: index into region.halfspaces
};

struct Trajectory {
  std::vector<double> times;
  Points states;
  std::vector<Vec> controls;
  std::vector<int> pieces;
  Outcome outcome;
  bool chattering = false;     // piece switched at every step over a 10-step window
  double max_violation = 0.0;  // max over states of max_k h_k.x - c_k, clipped at 0
};

struct SimOptions {
  std::optional<double> dt;    // default: default_dt
  std::optional<double> tmax;  // default: default_tmax
  Tolerances tol;
};

// 1e-3 * (beta-extent of the region) / (largest closed-loop speed at a piece vertex).
double default_dt(const AffineSystem& sys, const PWAController& ctrl);
// 10x the summed per-piece exit-time bounds, each width / min vertex outflow
// through the exit facet, and never below 1e5 steps of dt.
double default_tmax(const AffineSystem& sys, const PWAController& ctrl, double dt);

// Fixed-step RK4 on the closed loop, piece looked up at the start of each step.
// Events (entering F, leaving the region by more than tol.sim) are located by
// bisection to 1e-10 in time. A state outside every piece ends the run with
// outcome ControllerGap.
Trajectory integrate(const AffineSystem& sys, const PWAController& ctrl, const Vec& x0,
                     const SimOptions& opt = {});

struct FailureRecord {
  int index = 0;
  Vec x0;
  Trajectory trajectory;
};

struct VerifyReport {
  int nsamples = 0;
  int successes = 0;
  double success_fraction = 1.0;  // vacuously 1 for nsamples = 0
  double max_time = 0.0;          // over successes
  double mean_time = 0.0;
  double max_violation = 0.0;
  int chattering = 0;
  std::vector<FailureRecord> failures;
};

// Sample i is drawn by rejection in the bounding box of p with an RNG seeded
// from (seed, i), so the report does not depend on the thread count.
// REACHCTL_THREADS caps the number of worker threads.
VerifyReport verify(const AffineSystem& sys, const PWAController& ctrl, const Polytope& p, int nsamples,
                    std::uint64_t seed, const SimOptions& opt = {});

Vec sample_in(const Polytope& p, std::uint64_t seed, int index);

int worker_threads();

// t, x1..xn, u1..um, piece; numbers with 17 significant digits.
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace reachctl
