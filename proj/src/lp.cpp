#include "reachctl/lp.hpp"

#include <cmath>
#include <limits>

namespace reachctl {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;

struct Tableau {
  Mat t;                  // rows 0..m-1 constraints, row m the cost row; last column rhs
  std::vector<int> basis;
  int m = 0;
  int ncols = 0;

  double& rhs(int r) { return t(r, ncols); }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i <= m; ++i) {
      if (i != r && t(i, c) != 0.0) {
        t.row(i) -= t(i, c) * t.row(r);
      }
    }
    basis[r] = c;
  }
};

enum class RunResult { Optimal, Unbounded };

// Bland's rule: lowest-index improving column, lowest-index leaving variable on
// ratio ties.
RunResult run(Tableau& tb, int allowed_cols) {
  const int guard = 200 * (tb.m + tb.ncols) + 2000;
  for (int iter = 0; iter < guard; ++iter) {
    int enter = -1;
    for (int j = 0; j < allowed_cols; ++j) {
      if (tb.t(tb.m, j) < -kCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return RunResult::Optimal;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < tb.m; ++i) {
      double a = tb.t(i, enter);
      if (a > kPivotTol) {
        double ratio = tb.rhs(i) / a;
        if (ratio < best - 1e-13 ||
            (std::abs(ratio - best) <= 1e-13 && leave >= 0 && tb.basis[i] < tb.basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return RunResult::Unbounded;
    tb.pivot(leave, enter);
  }
  throw Error(ErrorCode::NumericalFailure, "simplex iteration guard exceeded");
}

void set_cost_row(Tableau& tb, const Vec& cost) {
  tb.t.row(tb.m).setZero();
  for (int j = 0; j < cost.size(); ++j) tb.t(tb.m, j) = cost(j);
  for (int i = 0; i < tb.m; ++i) {
    double cb = tb.basis[i] < cost.size() ? cost(tb.basis[i]) : 0.0;
    if (cb != 0.0) tb.t.row(tb.m) -= cb * tb.t.row(i);
  }
}

}  // namespace

LPOutcome solve(const LinearProgram& lp) {
  const int n = lp.nvars;
  const int mi = static_cast<int>(lp.ineq.size());
  const int me = static_cast<int>(lp.eq.size());
  const int m = mi + me;
  for (const auto& r : lp.ineq) {
    if (r.first.size() != n) throw Error(ErrorCode::NumericalFailure, "inequality row has wrong length");
  }
  for (const auto& r : lp.eq) {
    if (r.first.size() != n) throw Error(ErrorCode::NumericalFailure, "equality row has wrong length");
  }

  // Columns: x+ (n), x- (n), slacks (mi), artificials (na), rhs.
  std::vector<int> needs_art;
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    double b = i < mi ? lp.ineq[i].second : lp.eq[i - mi].second;
    if (b < 0) sign[i] = -1.0;
    if (i >= mi || sign[i] < 0) needs_art.push_back(i);
  }
  const int na = static_cast<int>(needs_art.size());
  Tableau tb;
  tb.m = m;
  tb.ncols = 2 * n + mi + na;
  tb.t = Mat::Zero(m + 1, tb.ncols + 1);
  tb.basis.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    const Vec& g = i < mi ? lp.ineq[i].first : lp.eq[i - mi].first;
    double b = i < mi ? lp.ineq[i].second : lp.eq[i - mi].second;
    for (int j = 0; j < n; ++j) {
      tb.t(i, j) = sign[i] * g(j);
      tb.t(i, n + j) = -sign[i] * g(j);
    }
    if (i < mi) tb.t(i, 2 * n + i) = sign[i];
    tb.rhs(i) = sign[i] * b;
    if (i < mi && sign[i] > 0) tb.basis[i] = 2 * n + i;
  }
  for (int k = 0; k < na; ++k) {
    int i = needs_art[k];
    tb.t(i, 2 * n + mi + k) = 1.0;
    tb.basis[i] = 2 * n + mi + k;
  }

  const int first_art = 2 * n + mi;
  if (na > 0) {
    Vec cost = Vec::Zero(tb.ncols);
    for (int k = 0; k < na; ++k) cost(first_art + k) = 1.0;
    set_cost_row(tb, cost);
    run(tb, tb.ncols);
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(tb.rhs(i)));
    double infeas = -tb.t(m, tb.ncols);
    if (infeas > 1e-9 * scale) return LPOutcome{LPStatus::Infeasible, std::nullopt, std::nullopt};
    // Drive artificials out of the basis; rows where that is impossible are redundant.
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] < first_art) continue;
      int col = -1;
      double best = kPivotTol;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(tb.t(i, j)) > best) {
          best = std::abs(tb.t(i, j));
          col = j;
        }
      }
      if (col >= 0) {
        tb.pivot(i, col);
      } else {
        tb.t.row(i).setZero();
      }
    }
  }

  Vec cost = Vec::Zero(tb.ncols);
  Vec obj = lp.objective.size() == n ? lp.objective : Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    cost(j) = obj(j);
    cost(n + j) = -obj(j);
  }
  set_cost_row(tb, cost);
  if (run(tb, first_art) == RunResult::Unbounded) {
    return LPOutcome{LPStatus::Unbounded, std::nullopt, std::nullopt};
  }
  Vec x = Vec::Zero(n);
  for (int i = 0; i < m; ++i) {
    int b = tb.basis[i];
    if (b < n) {
      x(b) += tb.rhs(i);
    } else if (b < 2 * n) {
      x(b - n) -= tb.rhs(i);
    }
  }
  return LPOutcome{LPStatus::Optimal, x, obj.dot(x)};
}

SlackResult max_slack_feasibility(const std::vector<LinearRow>& ineq) {
  if (ineq.empty()) throw Error(ErrorCode::NumericalFailure, "max_slack_feasibility needs a constraint");
  const int n = static_cast<int>(ineq.front().first.size());
  LinearProgram lp;
  lp.nvars = n + 1;
  lp.objective = Vec::Zero(n + 1);
  lp.objective(n) = -1.0;
  for (const auto& [g, h] : ineq) {
    Vec row(n + 1);
    row << g, 1.0;
    lp.ineq.emplace_back(row, h);
  }
  Vec cap = Vec::Zero(n + 1);
  cap(n) = 1.0;
  lp.ineq.emplace_back(cap, 1.0);
  LPOutcome out = solve(lp);
  if (!out.optimal()) throw Error(ErrorCode::NumericalFailure, "slack program not optimal");
  return SlackResult{(*out.x)(n), out.x->head(n)};
}

}  // namespace reachctl
