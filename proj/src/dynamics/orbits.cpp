#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ergobound/dynamics.hpp"
#include "json.hpp"

namespace ergobound {

using json = nlohmann::json;

NormalizedSymbols NormalizeSymbols(const std::string& symbols) {
  if (symbols.empty()) throw std::invalid_argument("symbol word is empty");
  for (char c : symbols) {
    if (c != 'A' && c != 'B') {
      throw std::invalid_argument("symbol word may only contain 'A' and 'B': " + symbols);
    }
  }
  const std::size_t n = symbols.size();
  for (std::size_t p = 1; p <= n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = symbols[i] == symbols[i - p];
    if (ok) return {symbols.substr(0, p), static_cast<int>(n / p)};
  }
  return {symbols, 1};
}

bool IsRotation(const std::string& a, const std::string& b) {
  return a.size() == b.size() && (a + a).find(b) != std::string::npos;
}

namespace {

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

double Distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Coordinates on the section: every variable except the one with the largest
// normal component, which is solved for.
struct SectionChart {
  SectionSpec section;
  int dim;
  int dependent;
  std::vector<int> free;

  SectionChart(const SectionSpec& s, int d) : section(s), dim(d), dependent(0) {
    for (int i = 1; i < d; ++i) {
      if (std::abs(s.normal[i]) > std::abs(s.normal[dependent])) dependent = i;
    }
    for (int i = 0; i < d; ++i) {
      if (i != dependent) free.push_back(i);
    }
  }

  std::vector<double> Lift(const Eigen::VectorXd& p) const {
    std::vector<double> x(dim, 0.0);
    double rest = section.offset;
    for (std::size_t k = 0; k < free.size(); ++k) {
      x[free[k]] = p[k];
      rest -= section.normal[free[k]] * p[k];
    }
    x[dependent] = rest / section.normal[dependent];
    return x;
  }

  Eigen::VectorXd Project(std::span<const double> x) const {
    Eigen::VectorXd p(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) p[k] = x[free[k]];
    return p;
  }
};

struct ReturnResult {
  std::vector<double> start;
  std::vector<double> end;
  Eigen::VectorXd displacement;  // projected end - start
  double residual = 0.0;
  std::string itinerary;
  Trajectory trajectory;
};

ReturnResult ReturnMap(const PolySystem& system, const SectionChart& chart,
                       const Eigen::VectorXd& p, int k, const ShootingOptions& o) {
  ReturnResult r;
  r.start = chart.Lift(p);
  std::vector<Crossing> crossings;
  r.trajectory = IntegrateToCrossing(system, r.start, chart.section, k,
                                     IntegratorOptions::WithTolerance(o.integration_tol),
                                     o.max_period, &crossings);
  const auto end = r.trajectory.state(r.trajectory.num_points() - 1);
  r.end.assign(end.begin(), end.end());
  r.displacement = chart.Project(r.end) - p;
  r.residual = Distance(r.end, r.start);
  for (const auto& c : crossings) r.itinerary.push_back(SymbolOf(c.state));
  return r;
}

}  // namespace

PeriodicOrbit FindPeriodicOrbit(const PolySystem& system, const SectionSpec& section,
                                const std::string& symbols, std::span<const double> guess,
                                const ShootingOptions& options) {
  NormalizeSymbols(symbols);  // validates the alphabet
  section.Validate(system.dim());
  if (static_cast<int>(guess.size()) != system.dim()) {
    throw std::invalid_argument("FindPeriodicOrbit: guess has wrong dimension");
  }
  const int k = static_cast<int>(symbols.size());
  const SectionChart chart(section, system.dim());
  const int m = static_cast<int>(chart.free.size());

  auto evaluate = [&](const Eigen::VectorXd& p) -> std::optional<ReturnResult> {
    try {
      return ReturnMap(system, chart, p, k, options);
    } catch (const IntegrationError&) {
      return std::nullopt;
    }
  };

  Eigen::VectorXd p = chart.Project(guess);
  auto current = evaluate(p);
  if (!current) throw ShootingError("FindPeriodicOrbit: return map undefined at the guess");
  int iterations = 0;
  auto scale = [&](const ReturnResult& r) { return 1.0 + Norm(r.start); };

  while (iterations < options.max_iterations &&
         current->residual > options.tol * scale(*current)) {
    Eigen::MatrixXd jac(m, m);
    bool ok = true;
    for (int j = 0; j < m && ok; ++j) {
      const double h = options.fd_step * (1.0 + std::abs(p[j]));
      Eigen::VectorXd pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      const auto rp = evaluate(pp);
      const auto rm = evaluate(pm);
      if (!rp || !rm) {
        ok = false;
        break;
      }
      // d(P(p) - p)/dp_j
      jac.col(j) = (rp->displacement - rm->displacement) / (2.0 * h);
    }
    if (!ok) break;
    const Eigen::VectorXd delta = jac.fullPivLu().solve(-current->displacement);
    if (!delta.allFinite()) break;

    bool improved = false;
    double lambda = 1.0;
    for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
      const Eigen::VectorXd trial = p + lambda * delta;
      auto next = evaluate(trial);
      if (next && next->displacement.norm() < current->displacement.norm()) {
        p = trial;
        current = std::move(next);
        improved = true;
        break;
      }
    }
    ++iterations;
    if (!improved) break;
  }

  if (current->residual > options.accept_tol * scale(*current)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "FindPeriodicOrbit: no convergence for %s after %d iterations "
                  "(residual %.3g)",
                  symbols.c_str(), iterations, current->residual);
    throw ShootingError(buf);
  }
  // Newton can also settle on an equilibrium lying in the section, where
  // every return is trivially short.
  double amplitude = 0.0;
  for (std::size_t i = 0; i < current->trajectory.num_points(); ++i) {
    amplitude = std::max(amplitude, Distance(current->trajectory.state(i), current->start));
  }
  if (amplitude < 1e-4 * scale(*current)) {
    throw ShootingError("FindPeriodicOrbit: iteration collapsed onto an equilibrium");
  }
  if (!IsRotation(symbols, current->itinerary)) {
    throw ShootingError("FindPeriodicOrbit: converged orbit has itinerary " +
                        current->itinerary + ", not a rotation of " + symbols);
  }

  PeriodicOrbit orbit;
  orbit.anchor = current->start;
  orbit.period = current->trajectory.t_end();
  orbit.symbols = symbols;
  orbit.residual = current->residual;
  orbit.newton_iterations = iterations;
  orbit.section = section;
  orbit.integration_tol = options.integration_tol;
  orbit.trajectory = std::move(current->trajectory);
  return orbit;
}

PeriodicOrbit RebuildOrbit(const PolySystem& system, const SectionSpec& section,
                           std::span<const double> anchor, double period,
                           const std::string& symbols, double integration_tol) {
  PeriodicOrbit orbit;
  orbit.anchor.assign(anchor.begin(), anchor.end());
  orbit.period = period;
  orbit.symbols = symbols;
  orbit.section = section;
  orbit.integration_tol = integration_tol;
  orbit.trajectory = Integrate(system, anchor, period, integration_tol);
  orbit.residual = Distance(orbit.trajectory.state(orbit.trajectory.num_points() - 1), anchor);
  return orbit;
}

std::vector<SeedCandidate> CloseReturnSeeds(const PolySystem& system, const SectionSpec& section,
                                            const std::string& symbols, double run_length,
                                            const SeedOptions& options) {
  NormalizeSymbols(symbols);
  if (!(run_length > 0.0)) throw std::invalid_argument("CloseReturnSeeds: run length must be > 0");
  const Trajectory traj =
      Integrate(system, options.initial_state, options.spinup + run_length, options.tol);
  std::vector<Crossing> crossings;
  for (auto& c : SectionCrossings(traj, section)) {
    if (c.time >= options.spinup) crossings.push_back(std::move(c));
  }
  const std::size_t k = symbols.size();
  std::string word;
  for (const auto& c : crossings) word.push_back(SymbolOf(c.state));

  std::vector<SeedCandidate> out;
  for (std::size_t i = 0; i + k < crossings.size(); ++i) {
    if (!IsRotation(symbols, word.substr(i, k))) continue;
    SeedCandidate s;
    s.guess = crossings[i].state;
    s.distance = Distance(crossings[i + k].state, crossings[i].state);
    s.time = crossings[i].time;
    s.low_confidence = s.distance > options.confidence_distance;
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const SeedCandidate& a, const SeedCandidate& b) {
    return a.distance < b.distance;
  });
  if (out.size() > options.max_candidates) out.resize(options.max_candidates);
  return out;
}

std::vector<std::vector<double>> LorenzEquilibria(const LorenzParameters& params) {
  std::vector<std::vector<double>> out = {{0.0, 0.0, 0.0}};
  if (params.r > 1.0) {
    const double a = std::sqrt(params.beta * (params.r - 1.0));
    out.push_back({a, a, params.r - 1.0});
    out.push_back({-a, -a, params.r - 1.0});
  }
  return out;
}

std::string TrajectoryToCsv(const Trajectory& traj, std::span<const std::string> names) {
  if (static_cast<int>(names.size()) != traj.dim()) {
    throw std::invalid_argument("TrajectoryToCsv: wrong number of names");
  }
  std::ostringstream out;
  out << "t";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < traj.num_points(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.times()[i]);
    out << buf;
    for (double v : traj.state(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string OrbitToJson(const PeriodicOrbit& orbit, const Polynomial* phi) {
  json j;
  j["symbols"] = orbit.symbols;
  j["anchor"] = orbit.anchor;
  j["period"] = orbit.period;
  j["residual"] = orbit.residual;
  j["newton_iterations"] = orbit.newton_iterations;
  j["integration_tol"] = orbit.integration_tol;
  j["section"] = {{"normal", orbit.section.normal},
                  {"offset", orbit.section.offset},
                  {"direction", orbit.section.direction}};
  j["steps"] = orbit.trajectory.num_steps();
  if (phi) {
    j["phi"] = phi->ToText();
    j["average"] = TimeAverage(orbit.trajectory, *phi);
  }
  return j.dump(2);
}

}  // namespace ergobound
