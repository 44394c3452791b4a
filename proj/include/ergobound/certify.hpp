#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ergobound/dynamics.hpp"
#include "ergobound/polynomial.hpp"
#include "ergobound/sos_program.hpp"

namespace ergobound {

/// Flattened polynomial for repeated evaluation at many points.
class CompiledPolynomial {
 public:
  explicit CompiledPolynomial(const Polynomial& p);
  double Evaluate(std::span<const double> x) const;
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  int max_exp_ = 0;
  std::vector<double> coef_;
  std::vector<int> exps_;
};

/// g = U - Phi - f.grad V sampled on an axis-aligned grid. Nodes are ordered
/// with the first coordinate varying fastest.
struct RegionGrid {
  Box box;
  std::vector<int> resolution;
  double threshold = 0.0;  // M
  double bound = 0.0;      // U
  std::string certificate_id;
  std::vector<double> values;

  std::size_t num_nodes() const;
  std::vector<double> Node(std::size_t index) const;
  bool Member(std::size_t index) const { return values[index] <= threshold; }
  double MemberFraction() const;
  double MinValue() const;
  double MaxValue() const;
};

/// Throws std::invalid_argument if M <= 0, a resolution is below 2 or the box
/// is empty; std::runtime_error on a non-finite value.
RegionGrid ComputeRegionGrid(const BoundCertificate& cert, const Box& box,
                             const std::vector<int>& resolution, double M, int threads = 1);

/// Text form: "ergobound-grid 1", then box, resolution, threshold, bound and
/// certificate lines, then one value per line (9 significant digits).
std::string RegionGridToText(const RegionGrid& grid);
RegionGrid RegionGridFromText(std::string_view text);

/// max(0, 1 - epsilon / M): the Markov lower bound on the time fraction spent
/// where g <= M by a trajectory whose average is within epsilon of U.
double MarkovBound(double epsilon, double M);

/// Fraction of [t_begin + spinup, t_end] with g(x(t)) <= M. Threshold
/// crossings are located on the dense output.
double OccupancyFraction(const Trajectory& traj, const BoundCertificate& cert, double M,
                         double spinup = 0.0);

struct ResidualTrace {
  std::vector<double> times;
  std::vector<double> values;
  /// Time average of g over the trajectory, by quadrature.
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// g along the trajectory at every grid point plus samples_per_step - 1
/// interior dense-output points per step.
ResidualTrace ComputeResidualTrace(const Trajectory& traj, const BoundCertificate& cert,
                                   int samples_per_step = 4);
std::string ResidualTraceToCsv(const ResidualTrace& trace);

struct GapReport {
  std::string orbit;
  int aux_degree = 0;
  std::string certificate_id;
  double bound = 0.0;
  double average = 0.0;
  double epsilon = 0.0;
  double trace_mean = 0.0;
  double M = 0.0;
  double markov_bound = 0.0;
  double occupancy = 0.0;
};

/// epsilon = U - (average of Phi over the orbit); slightly negative epsilon
/// (within the fit tolerance) is clamped to zero for the Markov bound.
GapReport ComputeGapReport(const PeriodicOrbit& orbit, const BoundCertificate& cert, double M);
std::string GapReportToJson(const GapReport& report);

enum class TrappingVerdict { kPass, kFail, kInconclusive };
std::string ToString(TrappingVerdict v);

struct TrappingReport {
  std::vector<double> radii;
  std::vector<double> max_lie;        // max of f.grad V on each sphere
  std::vector<double> max_violation;  // max of Phi + f.grad V - U on each sphere
  TrappingVerdict verdict = TrappingVerdict::kInconclusive;
  std::string message;
};

struct TrappingOptions {
  std::vector<double> center;  // empty means the origin
  int samples = 2000;
  /// Spheres of radius <= inner_radius are treated as inside the attractor
  /// and do not probe the far-field behaviour.
  double inner_radius = 0.0;
  std::uint64_t seed = 12345;
};

/// Samples f.grad V on spheres of increasing radius. PASS when its maximum
/// decreases strictly with radius and is negative on the outermost sphere.
/// The caller asserts that Phi is coercive.
TrappingReport TrappingCheck(const BoundCertificate& cert, const std::vector<double>& radii,
                             const TrappingOptions& options = {});

struct MaxEstimate {
  double value = 0.0;
  std::vector<double> argmax;
};

/// Maximum of Phi + f.grad V over a box: grid search then projected gradient
/// ascent from the best nodes.
MaxEstimate EstimateMax(const BoundCertificate& cert, const Box& box, int resolution = 41);

/// Largest value of Phi + f.grad V - U at `samples` uniform random points.
double SampledBoundViolation(const BoundCertificate& cert, const Box& box, int samples,
                             std::uint64_t seed = 1);

}  // namespace ergobound
