#pragma once

#include "reachctl/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace reachctl {

inline constexpr double kTolLp = 1e-8;

using LinearRow = std::pair<Vec, double>;

// minimize objective . x  s.t.  g . x <= h (ineq),  e . x == f (eq);  x free.
struct LinearProgram {
  Vec objective;
  std::vector<LinearRow> ineq;
  std::vector<LinearRow> eq;
  int nvars = 0;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPOutcome {
  LPStatus status = LPStatus::Infeasible;
  std::optional<Vec> x;
  std::optional<double> value;

  bool optimal() const { return status == LPStatus::Optimal; }
};

// Dense two-phase simplex with Bland's rule. Throws NumericalFailure when the
// iteration guard trips.
LPOutcome solve(const LinearProgram& lp);

struct SlackResult {
  double slack = 0.0;
  Vec x;
};

// max t  s.t.  g . x <= h - t,  t <= 1.
SlackResult max_slack_feasibility(const std::vector<LinearRow>& ineq);

}  // namespace reachctl
