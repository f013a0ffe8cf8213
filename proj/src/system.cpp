#include "reachctl/system.hpp"

namespace reachctl {

void check_dimensions(const AffineSystem& sys) {
  const int n = static_cast<int>(sys.A.rows());
  if (n < 1 || sys.A.cols() != n || sys.a.size() != n || sys.B.rows() != n || sys.B.cols() < 1) {
    throw Error(ErrorCode::AssumptionViolated, "inconsistent system dimensions");
  }
  if (!sys.A.allFinite() || !sys.a.allFinite() || !sys.B.allFinite()) {
    throw Error(ErrorCode::AssumptionViolated, "non-finite system data");
  }
}

int matrix_rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++r;
  }
  return r;
}

Mat controllability_matrix(const AffineSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  Mat c(n, n * m);
  Mat block = sys.B;
  for (int k = 0; k < n; ++k) {
    c.middleCols(k * m, m) = block;
    block = sys.A * block;
  }
  return c;
}

Vec input_normal(const AffineSystem& sys) {
  check_dimensions(sys);
  const int n = sys.n();
  if (matrix_rank(sys.B) != n - 1) {
    throw Error(ErrorCode::AssumptionViolated, "rank B must equal n - 1");
  }
  Eigen::JacobiSVD<Mat> svd(sys.B, Eigen::ComputeFullU);
  Vec beta = svd.matrixU().col(n - 1);
  beta.normalize();
  for (int i = 0; i < n; ++i) {
    if (std::abs(beta(i)) > 1e-12) {
      if (beta(i) < 0) beta = -beta;
      break;
    }
  }
  return beta;
}

SystemGeometry geometry_for_beta(const AffineSystem& sys, const Vec& beta) {
  SystemGeometry g;
  g.beta = beta;
  const int n = sys.n();
  Eigen::JacobiSVD<Mat> svd(sys.B, Eigen::ComputeFullU);
  g.b_basis = svd.matrixU().leftCols(n - 1);
  Vec nrm = sys.A.transpose() * beta;
  double s = nrm.norm();
  if (s <= 1e-12 * std::max(1.0, sys.A.norm())) {
    throw Error(ErrorCode::DegenerateO, "beta^T A vanishes, O is not a hyperplane");
  }
  g.o_plane = {nrm / s, -beta.dot(sys.a) / s};
  return g;
}

namespace {

double o_scale(const AffineSystem& sys, const Polytope& p) {
  double s = 1.0;
  for (const auto& v : p.vertices) s = std::max(s, sys.drift(v).norm());
  return s;
}

}  // namespace

bool o_crosses_interior(const AffineSystem& sys, const Polytope& p, double tol) {
  Vec beta = input_normal(sys);
  double t = tol * o_scale(sys, p);
  bool neg = false, pos = false;
  for (const auto& v : p.vertices) {
    double s = beta.dot(sys.drift(v));
    neg = neg || s < -t;
    pos = pos || s > t;
  }
  return neg && pos;
}

AssumptionReport check_assumptions(const AffineSystem& sys, const Polytope& p, const Points& f,
                                   double tol) {
  AssumptionReport r;
  check_dimensions(sys);
  const int n = sys.n();
  r.rank_b = matrix_rank(sys.B) == n - 1;
  if (!r.rank_b) r.messages.push_back("rank B = " + std::to_string(matrix_rank(sys.B)) + ", need n - 1");
  r.controllable = matrix_rank(controllability_matrix(sys)) == n;
  if (!r.controllable) r.messages.push_back("(A, B) is not controllable");
  if (r.rank_b) {
    r.o_outside = !o_crosses_interior(sys, p, tol);
    if (!r.o_outside) r.messages.push_back("O meets the interior of P");
  }
  int fd = affine_dim(f, tol);
  bool on_facet = !f.empty() && containing_facet(p, f, tol).has_value();
  for (const auto& v : f) on_facet = on_facet && contains(p, v, 10 * tol);
  r.target_facet = fd == n - 1 && on_facet;
  if (!r.target_facet) r.messages.push_back("target is not an (n-1)-dimensional subset of a facet");
  return r;
}

SystemGeometry compute_geometry(const AffineSystem& sys, const Polytope& p, double tol) {
  Vec beta = input_normal(sys);
  double t = tol * o_scale(sys, p);
  bool neg = false, pos = false;
  for (const auto& v : p.vertices) {
    double s = beta.dot(sys.drift(v));
    neg = neg || s < -t;
    pos = pos || s > t;
  }
  if (neg && pos) throw Error(ErrorCode::SignAmbiguous, "beta.(Ax+a) changes sign on P");
  if (pos) beta = -beta;
  return geometry_for_beta(sys, beta);
}

}  // namespace reachctl
