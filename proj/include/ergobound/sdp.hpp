#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ergobound {

/// One entry of a sparse symmetric matrix: value at (row, col) and
/// (col, row). row <= col is required.
struct SymEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

using SparseSym = std::vector<SymEntry>;

/// A linear equality over free scalars and PSD blocks:
///   sum_k free[k].second * u[free[k].first] + sum_b <A_b, X_b> = rhs.
struct SdpConstraint {
  std::vector<std::pair<int, double>> free;
  std::vector<SparseSym> blocks;  // one (possibly empty) entry list per block
  double rhs = 0.0;
};

/// Standard-form SDP with free scalar variables:
///
///   minimize    c^T u + sum_b <C_b, X_b>
///   subject to  a_i^T u + sum_b <A_ib, X_b> = b_i,   i = 1..m
///               X_b PSD,  u free.
///
/// Its dual is: maximize b^T y s.t. sum_i y_i a_i = c and
/// Z_b = C_b - sum_i y_i A_ib PSD.
struct SdpProblem {
  std::vector<int> block_sizes;
  int num_free = 0;
  std::vector<double> free_objective;   // size num_free
  std::vector<SparseSym> block_objective;  // one per block
  std::vector<SdpConstraint> constraints;

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  /// Throws std::invalid_argument if sizes or indices are inconsistent.
  void Validate() const;
};

enum class SdpStatus { kConverged, kMaxIterations, kNumericalFailure };

std::string_view ToString(SdpStatus status);

struct SdpOptions {
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  int max_iterations = 200;
  double step_fraction = 0.98;
  /// Checks weak duality at every iterate and counts violations.
  bool check_weak_duality = true;
  int verbosity = 0;
};

struct SdpSolution {
  Eigen::VectorXd free;                 // u
  std::vector<Eigen::MatrixXd> blocks;  // X_b
  Eigen::VectorXd dual;                 // y
  std::vector<Eigen::MatrixXd> slacks;  // Z_b
  SdpStatus status = SdpStatus::kNumericalFailure;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// Relative measures used for termination.
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int weak_duality_violations = 0;
  std::string message;
};

/// Absolute residuals recomputed from the problem data:
/// ||b - A(X) - B u||, ||(C - A^T y - Z, c - B^T y)|| and
/// primal objective minus dual objective.
struct SdpResiduals {
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
};

/// Infeasible-start primal-dual path following (HKM direction, Mehrotra
/// predictor-corrector). Free variables are kept in an augmented Newton
/// system rather than split into differences of nonnegative variables.
SdpSolution SolveSdp(const SdpProblem& problem, const SdpOptions& options = {});

SdpResiduals ComputeResiduals(const SdpProblem& problem, const SdpSolution& solution);

/// Sparse SDPA text format. Free scalars are written as an extra diagonal
/// block announced by a "*free <block index>" comment line; readers without
/// that extension see it as a nonnegative LP block.
void WriteSdpa(const SdpProblem& problem, std::ostream& out);
SdpProblem ReadSdpa(std::istream& in);

/// <A, X> for a sparse symmetric A.
double Inner(const SparseSym& a, const Eigen::MatrixXd& x);

}  // namespace ergobound
