#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergobound/poly_system.hpp"
#include "ergobound/polynomial.hpp"

namespace ergobound {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  /// 0 picks an initial step automatically.
  double initial_step = 0.0;
  double max_step = 0.0;  // 0 means unlimited
  long max_steps = 50'000'000;
  /// When positive, take steps of exactly this size with no error control.
  double fixed_step = 0.0;

  static IntegratorOptions WithTolerance(double tol) {
    IntegratorOptions o;
    o.rtol = o.atol = tol;
    return o;
  }
};

struct StepStatistics {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Solution of dx/dt = f(x) on a strictly increasing time grid, with the
/// Dormand-Prince continuous extension stored for every step.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t num_points() const { return times_.size(); }
  std::size_t num_steps() const { return times_.empty() ? 0 : times_.size() - 1; }
  const std::vector<double>& times() const { return times_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

  /// Dense-output state at time t in [t_begin, t_end].
  std::vector<double> StateAt(double t) const;
  void StateAt(double t, std::span<double> out) const;
  /// State inside step `step` at fraction theta in [0, 1].
  void StateInStep(std::size_t step, double theta, std::span<double> out) const;
  /// Index of the step containing t.
  std::size_t StepIndex(double t) const;

  int method_order() const { return 5; }
  IntegratorOptions options;
  StepStatistics stats;

  // Used by the integrator.
  void Start(double t0, std::span<const double> x0);
  void Append(double t1, std::span<const double> x1, std::span<const double> dense);
  void PopStep();

 private:
  int dim_ = 0;
  std::vector<double> times_;
  std::vector<double> states_;  // num_points * dim
  std::vector<double> dense_;   // num_steps * 5 * dim
};

/// Raised on step-size underflow or a non-finite state; carries the last
/// valid point.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t, std::vector<double> state)
      : std::runtime_error(what), time(t), last_state(std::move(state)) {}
  double time;
  std::vector<double> last_state;
};

/// Adaptive Dormand-Prince 5(4) with mixed absolute/relative error control.
Trajectory Integrate(const PolySystem& system, std::span<const double> x0, double t_end,
                     double tol);
Trajectory Integrate(const PolySystem& system, std::span<const double> x0, double t_end,
                     const IntegratorOptions& options);

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> GaussLegendre(int points);

/// (1 / (T - t0 - spinup)) * integral of phi over [t0 + spinup, T], using the
/// dense output and `points` Gauss-Legendre nodes per step. Nine points
/// integrate the quartic interpolant composed with a quartic phi exactly.
double TimeAverage(const Trajectory& traj, const Polynomial& phi, double spinup = 0.0,
                   int points = 9);

/// Hyperplane normal . x = offset, crossed in the given direction: -1 for
/// normal . x decreasing, +1 increasing, 0 either way.
struct SectionSpec {
  std::vector<double> normal;
  double offset = 0.0;
  int direction = -1;

  double Evaluate(std::span<const double> x) const;
  void Validate(int dim) const;
  /// Plane z = r - 1 crossed upward. Upward crossings happen on the outer
  /// side of each wing, so the sign of x there names the wing reliably.
  static SectionSpec LorenzDefault(const LorenzParameters& params = {});
};

struct Crossing {
  double time = 0.0;
  std::vector<double> state;
};

/// All crossings in the declared direction, refined on the dense output.
std::vector<Crossing> SectionCrossings(const Trajectory& traj, const SectionSpec& section);

/// Integrates from x0 until the count-th crossing (a crossing at t = 0 does
/// not count); the last step is recomputed to end exactly on the crossing.
Trajectory IntegrateToCrossing(const PolySystem& system, std::span<const double> x0,
                               const SectionSpec& section, int count,
                               const IntegratorOptions& options, double t_max,
                               std::vector<Crossing>* crossings = nullptr);

/// Wing label of a crossing: 'A' when the first coordinate is negative.
char SymbolOf(std::span<const double> state);

/// Reduces a symbol word to its primitive root ("ABAB" -> "AB").
struct NormalizedSymbols {
  std::string root;
  int repetitions = 1;
};
NormalizedSymbols NormalizeSymbols(const std::string& symbols);
/// True when b is a cyclic rotation of a.
bool IsRotation(const std::string& a, const std::string& b);

struct PeriodicOrbit {
  std::vector<double> anchor;
  double period = 0.0;
  std::string symbols;
  /// |flow(anchor, period) - anchor|.
  double residual = 0.0;
  int newton_iterations = 0;
  SectionSpec section;
  double integration_tol = 0.0;
  Trajectory trajectory;  // one period
};

struct ShootingOptions {
  double integration_tol = 1e-13;
  /// Newton stops once the return residual is at most tol * (1 + |anchor|).
  double tol = 1e-11;
  /// If Newton stalls, the best iterate is still accepted below this level.
  double accept_tol = 1e-9;
  int max_iterations = 40;
  double fd_step = 1e-7;
  double max_period = 50.0;
};

class ShootingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton iteration on the k-fold return map, k = symbols.size(), with a
/// central-difference Jacobian. Throws ShootingError on non-convergence or
/// when the converged orbit's itinerary is not a rotation of `symbols`.
PeriodicOrbit FindPeriodicOrbit(const PolySystem& system, const SectionSpec& section,
                                const std::string& symbols, std::span<const double> guess,
                                const ShootingOptions& options = {});

/// Re-integrates one period from a stored anchor and period.
PeriodicOrbit RebuildOrbit(const PolySystem& system, const SectionSpec& section,
                           std::span<const double> anchor, double period,
                           const std::string& symbols, double integration_tol);

struct SeedCandidate {
  std::vector<double> guess;
  double distance = 0.0;
  double time = 0.0;
  bool low_confidence = false;
};

struct SeedOptions {
  std::vector<double> initial_state = {1.0, 1.0, 1.0};
  double spinup = 20.0;
  double tol = 1e-10;
  std::size_t max_candidates = 20;
  /// Returns farther apart than this are flagged low-confidence.
  double confidence_distance = 1.0;
};

/// Scans the section crossings of a long run for near-repeats whose itinerary
/// is a rotation of `symbols`, sorted by return distance.
std::vector<SeedCandidate> CloseReturnSeeds(const PolySystem& system, const SectionSpec& section,
                                            const std::string& symbols, double run_length,
                                            const SeedOptions& options = {});

/// Origin and, when r > 1, (+-sqrt(beta (r - 1)), +-sqrt(beta (r - 1)), r - 1).
std::vector<std::vector<double>> LorenzEquilibria(const LorenzParameters& params);

/// CSV with header "t,x,y,z" (variable names) and 17 significant digits.
std::string TrajectoryToCsv(const Trajectory& traj, std::span<const std::string> names);
std::string OrbitToJson(const PeriodicOrbit& orbit, const Polynomial* phi = nullptr);

}  // namespace ergobound
