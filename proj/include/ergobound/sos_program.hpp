#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergobound/poly_system.hpp"
#include "ergobound/polynomial.hpp"
#include "ergobound/sdp.hpp"

namespace ergobound {

/// Coordinates used for SDP assembly: x = scales .* x~ + shifts.
struct VariableScaling {
  std::vector<double> scales;
  std::vector<double> shifts;

  static VariableScaling Identity(int dim);
  /// x, y divided by 10 and z by 30 for the Lorenz system; identity otherwise.
  static VariableScaling DefaultFor(const PolySystem& system);
};

/// Restricts the nonnegativity requirement to |x - center| <= radius via an
/// extra SOS multiplier (S-procedure). Off by default.
struct BallConstraint {
  std::vector<double> center;
  double radius = 0.0;
};

struct SosOptions {
  /// Unset means VariableScaling::DefaultFor(system).
  std::optional<VariableScaling> scaling;
  /// Divide Phi by its largest scaled coefficient before assembly.
  bool normalize_objective = true;
  std::optional<BallConstraint> ball;
};

/// Upper-bound program: minimize U subject to
///   U - Phi - f . grad V = b^T Q b (+ ball multiplier),  Q PSD,
/// written in scaled coordinates and with Phi divided by objective_scale.
///
/// Decision layout: free scalar 0 is U, free scalar 1 + j is the coefficient
/// of v_basis[j]; PSD block 0 is the Gram matrix over gram_basis and, when a
/// ball is present, block 1 is the multiplier Gram over multiplier_basis.
/// One equality per monomial of degree <= residual_degree, in graded lex
/// order.
struct SosBoundProgram {
  PolySystem system;
  Polynomial phi;
  int aux_degree = 0;
  VariableScaling scaling;
  double objective_scale = 1.0;

  PolySystem scaled_system;
  Polynomial scaled_phi;  // already divided by objective_scale

  std::vector<Monomial> v_basis;
  std::vector<Monomial> gram_basis;
  std::optional<BallConstraint> ball;
  Polynomial scaled_ball;  // radius^2 - |x - center|^2 in scaled coordinates
  std::vector<Monomial> multiplier_basis;

  int residual_degree = 0;
  std::vector<Monomial> constraint_monomials;
  std::map<Monomial, int, GradedLexLess> constraint_index;
  std::vector<Polynomial> lie_columns;  // f~ . grad m_j for each m_j in v_basis

  int num_free() const { return 1 + static_cast<int>(v_basis.size()); }
};

SosBoundProgram BuildBoundProgram(const PolySystem& system, const Polynomial& phi,
                                  int aux_degree, const SosOptions& options = {});

SdpProblem AssembleSdp(const SosBoundProgram& program);

struct SolverReport {
  std::string status;
  int iterations = 0;
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// Absolute primal-minus-dual objective in bound units.
  double duality_gap = 0.0;
};

/// A bound U together with everything needed to re-check it.
struct BoundCertificate {
  double bound = 0.0;
  int aux_degree = 0;
  PolySystem system;
  Polynomial phi;
  Polynomial v;  // original coordinates
  VariableScaling scaling;
  double objective_scale = 1.0;

  Eigen::MatrixXd gram;  // in bound units, over gram_basis in scaled coordinates
  std::vector<Monomial> gram_basis;
  std::optional<BallConstraint> ball;
  Eigen::MatrixXd multiplier_gram;
  std::vector<Monomial> multiplier_basis;

  double residual_infnorm = 0.0;
  double gram_min_eigenvalue = 0.0;
  double gram_norm = 0.0;
  bool valid = false;
  double tol_psd = 1e-8;
  double tol_fit = 1e-6;
  SolverReport solver;

  /// Stable identifier derived from V and U.
  std::string Id() const;
};

struct ValidationTolerances {
  double tol_psd = 1e-8;
  double tol_fit = 1e-6;
};

/// Axis-aligned box given as (low, high) per coordinate.
using Box = std::vector<std::pair<double, double>>;

struct ValidityReport {
  bool valid = false;
  double residual_infnorm = 0.0;
  double gram_min_eigenvalue = 0.0;
  double gram_norm = 0.0;
  /// Upper bound on max over the box of (Phi + f.grad V - U) implied by the
  /// residual and any negative Gram eigenvalue; set only when a box is given.
  std::optional<double> slack_bound;
};

/// Thrown when a solver result cannot be turned into a certificate.
class CertificateUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Status values other than converged are accepted only when every relative
/// measure is below this level.
inline constexpr double kNearConvergedTolerance = 1e-6;

BoundCertificate ExtractCertificate(const SosBoundProgram& program, const SdpSolution& solution,
                                    const ValidationTolerances& tolerances = {});

/// Recomputes the residual polynomial and Gram spectrum from the certificate's
/// own data, independent of any solver state.
ValidityReport ValidateCertificate(const BoundCertificate& cert,
                                   const ValidationTolerances& tolerances = {},
                                   const std::optional<Box>& box = std::nullopt);

/// U - Phi - f . grad V - b^T G b (- ball multiplier) in scaled coordinates.
Polynomial CertificateResidual(const BoundCertificate& cert);

/// g(x) = U - Phi(x) - f . grad V(x) in original coordinates.
Polynomial BoundGap(const BoundCertificate& cert);

struct BoundResult {
  SosBoundProgram program;
  SdpSolution solution;
  BoundCertificate certificate;
};

/// build -> assemble -> solve -> extract -> validate.
BoundResult ComputeBound(const PolySystem& system, const Polynomial& phi, int aux_degree,
                         const SosOptions& sos_options = {},
                         const SdpOptions& sdp_options = {},
                         const ValidationTolerances& tolerances = {});

std::string CertificateToJson(const BoundCertificate& cert);
BoundCertificate CertificateFromJson(const std::string& text);

}  // namespace ergobound
