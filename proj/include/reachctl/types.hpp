#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace reachctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Points = std::vector<Vec>;

struct Tolerances {
  double geom = 1e-9;       // geometric predicates on O(1)-scaled data
  double lp = 1e-8;         // LP feasibility and residual checks
  double slack_min = 1e-6;  // realization of strict inequalities
  double sim = 1e-6;        // constraint-violation allowance during simulation
};

enum class ErrorCode {
  DimensionDeficient,
  Unbounded,
  Degenerate,
  NoIntersection,
  NumericalFailure,
  AssumptionViolated,
  SignAmbiguous,
  DegenerateO,
  EpsTooLarge,
  NoFailureSets,
  CommonHyperplane,
  NoQualifyingVertex,
  VStarInFbar,
  CoverIncomplete,
  Infeasible,
  CaseViolation,
  SingularVertexMatrix,
  SynthesisFailed,
  Stuck,
  NotReachable,
  ControllerGap,
  Schema,
};

const char* error_name(ErrorCode code);

// Decimal with 17 significant digits (printf %.17g).
std::string format_number(double x);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int detail = -1)
      : std::runtime_error(std::string(error_name(code)) + ": " + what),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  // Extra integer payload: affine dimension for DimensionDeficient, vertex
  // index for Infeasible, simplex index for SynthesisFailed.
  int detail() const { return detail_; }

 private:
  ErrorCode code_;
  int detail_;
};

}  // namespace reachctl
