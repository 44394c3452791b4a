#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ergobound/dynamics.hpp"
#include "field.hpp"

namespace ergobound {

// ---- Trajectory ------------------------------------------------------------

void Trajectory::Start(double t0, std::span<const double> x0) {
  dim_ = static_cast<int>(x0.size());
  times_.assign(1, t0);
  states_.assign(x0.begin(), x0.end());
  dense_.clear();
}

void Trajectory::Append(double t1, std::span<const double> x1, std::span<const double> dense) {
  times_.push_back(t1);
  states_.insert(states_.end(), x1.begin(), x1.end());
  dense_.insert(dense_.end(), dense.begin(), dense.end());
}

void Trajectory::PopStep() {
  if (num_steps() == 0) return;
  times_.pop_back();
  states_.resize(states_.size() - dim_);
  dense_.resize(dense_.size() - 5 * dim_);
}

std::size_t Trajectory::StepIndex(double t) const {
  if (num_steps() == 0) throw std::out_of_range("Trajectory: no steps");
  if (t < times_.front() || t > times_.back()) {
    throw std::out_of_range("Trajectory: time outside integrated range");
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times_.begin());
  if (i == 0) return 0;
  return std::min(i - 1, num_steps() - 1);
}

void Trajectory::StateInStep(std::size_t step, double theta, std::span<double> out) const {
  const double* r = dense_.data() + step * 5 * dim_;
  const double th1 = 1.0 - theta;
  for (int i = 0; i < dim_; ++i) {
    out[i] = r[i] +
             theta * (r[dim_ + i] +
                      th1 * (r[2 * dim_ + i] +
                             theta * (r[3 * dim_ + i] + th1 * r[4 * dim_ + i])));
  }
}

void Trajectory::StateAt(double t, std::span<double> out) const {
  if (num_steps() == 0) {
    if (!times_.empty() && t == times_.front()) {
      std::copy(states_.begin(), states_.end(), out.begin());
      return;
    }
    throw std::out_of_range("Trajectory: no steps");
  }
  const std::size_t k = StepIndex(t);
  const double h = times_[k + 1] - times_[k];
  StateInStep(k, (t - times_[k]) / h, out);
}

std::vector<double> Trajectory::StateAt(double t) const {
  std::vector<double> out(dim_);
  StateAt(t, out);
  return out;
}

// ---- Dormand-Prince 5(4) ---------------------------------------------------

namespace {

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Stepper::Stepper(const PolySystem& system, const IntegratorOptions& options)
    : field_(system), options_(options), n_(system.dim()) {
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &x1_, &err_}) v->resize(n_);
  dense_.resize(5 * n_);
}

double Stepper::Attempt(std::span<const double> x, double h) {
  const int n = n_;
  auto stage = [&](auto combine, std::vector<double>& k) {
    for (int i = 0; i < n; ++i) tmp_[i] = x[i] + h * combine(i);
    field_.Evaluate(tmp_, k);
  };
  stage([&](int i) { return a21 * k1_[i]; }, k2_);
  stage([&](int i) { return a31 * k1_[i] + a32 * k2_[i]; }, k3_);
  stage([&](int i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; }, k4_);
  stage([&](int i) { return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]; }, k5_);
  stage([&](int i) {
    return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
  }, k6_);
  for (int i = 0; i < n; ++i) {
    x1_[i] = x[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                         a76 * k6_[i]);
  }
  field_.Evaluate(x1_, k7_);
  evaluations_ += 6;

  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                          e7 * k7_[i]);
    const double sk = options_.atol + options_.rtol * std::max(std::abs(x[i]), std::abs(x1_[i]));
    sum += (e / sk) * (e / sk);
  }
  const double err = std::sqrt(sum / n);
  return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
}

void Stepper::Accept(std::span<const double> x, double h) {
  const int n = n_;
  for (int i = 0; i < n; ++i) {
    const double ydiff = x1_[i] - x[i];
    const double bspl = h * k1_[i] - ydiff;
    dense_[i] = x[i];
    dense_[n + i] = ydiff;
    dense_[2 * n + i] = bspl;
    dense_[3 * n + i] = ydiff - h * k7_[i] - bspl;
    dense_[4 * n + i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                             d6 * k6_[i] + d7 * k7_[i]);
  }
  k1_.swap(k7_);  // first same as last
}

void Stepper::SetSlope(std::span<const double> x) {
  field_.Evaluate(x, k1_);
  ++evaluations_;
}

double Stepper::InitialStep(std::span<const double> x, double hmax) {
  const int n = n_;
  double dnf = 0.0, dny = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = options_.atol + options_.rtol * std::abs(x[i]);
    dnf += (k1_[i] / sk) * (k1_[i] / sk);
    dny += (x[i] / sk) * (x[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  for (int i = 0; i < n; ++i) tmp_[i] = x[i] + h * k1_[i];
  field_.Evaluate(tmp_, k2_);
  ++evaluations_;
  double der2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = options_.atol + options_.rtol * std::abs(x[i]);
    der2 += ((k2_[i] - k1_[i]) / sk) * ((k2_[i] - k1_[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  h = std::min({100.0 * h, h1, hmax});
  return std::isfinite(h) && h > 0.0 ? h : 1e-6;
}

namespace {

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

void CheckOptions(const IntegratorOptions& o) {
  if (o.fixed_step > 0.0) return;
  if (!(o.rtol >= 0.0) || !(o.atol >= 0.0) || (o.rtol == 0.0 && o.atol == 0.0)) {
    throw std::invalid_argument("Integrate: tolerances must be nonnegative and not both zero");
  }
}

}  // namespace

void AdvanceAdaptive(Stepper& stepper, Trajectory& traj, double t_end,
                     const std::function<bool(Trajectory&)>& after_step) {
  const IntegratorOptions& o = stepper.options();
  double t = traj.t_end();
  std::vector<double> x(traj.state(traj.num_points() - 1).begin(),
                        traj.state(traj.num_points() - 1).end());
  const double hmax = o.max_step > 0.0 ? o.max_step : std::abs(t_end - t);
  stepper.SetSlope(x);

  if (o.fixed_step > 0.0) {
    while (t < t_end) {
      double h = o.fixed_step;
      const bool last = t + h * (1.0 + 1e-12) >= t_end;
      if (last) h = t_end - t;
      stepper.Attempt(x, h);
      if (!AllFinite(stepper.x1())) {
        throw IntegrationError("Integrate: non-finite state", t, x);
      }
      stepper.Accept(x, h);
      t = last ? t_end : t + h;
      x.assign(stepper.x1().begin(), stepper.x1().end());
      traj.Append(t, x, stepper.dense());
      ++traj.stats.accepted;
      if (after_step && after_step(traj)) break;
      if (static_cast<long>(traj.num_steps()) > o.max_steps) {
        throw IntegrationError("Integrate: step limit exceeded", t, x);
      }
    }
    traj.stats.evaluations = stepper.evaluations();
    return;
  }

  double h = o.initial_step > 0.0 ? o.initial_step : stepper.InitialStep(x, hmax);
  bool rejected_last = false;
  long attempts = 0;
  while (t < t_end) {
    if (++attempts > o.max_steps) {
      throw IntegrationError("Integrate: step limit exceeded", t, x);
    }
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < hmin) {
      throw IntegrationError("Integrate: step size underflow", t, x);
    }
    bool last = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last = true;
    }
    const double err = stepper.Attempt(x, h);
    if (err <= 1.0 && AllFinite(stepper.x1())) {
      stepper.Accept(x, h);
      t = last ? t_end : t + h;
      x.assign(stepper.x1().begin(), stepper.x1().end());
      traj.Append(t, x, stepper.dense());
      ++traj.stats.accepted;
      double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
      if (rejected_last) fac = std::min(fac, 1.0);
      h = std::min(h * fac, hmax);
      rejected_last = false;
      if (after_step && after_step(traj)) break;
    } else {
      ++traj.stats.rejected;
      const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0)
                                            : 0.1;
      h *= fac;
      rejected_last = true;
    }
  }
  traj.stats.evaluations = stepper.evaluations();
}

Trajectory Integrate(const PolySystem& system, std::span<const double> x0, double t_end,
                     double tol) {
  return Integrate(system, x0, t_end, IntegratorOptions::WithTolerance(tol));
}

Trajectory Integrate(const PolySystem& system, std::span<const double> x0, double t_end,
                     const IntegratorOptions& options) {
  if (static_cast<int>(x0.size()) != system.dim()) {
    throw std::invalid_argument("Integrate: initial state has wrong dimension");
  }
  if (!AllFinite(x0)) throw std::invalid_argument("Integrate: non-finite initial state");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("Integrate: t_end must be positive and finite");
  }
  CheckOptions(options);
  Trajectory traj(system.dim());
  traj.options = options;
  traj.Start(0.0, x0);
  Stepper stepper(system, options);
  AdvanceAdaptive(stepper, traj, t_end, {});
  return traj;
}

// ---- Quadrature and averages -------------------------------------------------

std::pair<std::vector<double>, std::vector<double>> GaussLegendre(int points) {
  if (points < 1) throw std::invalid_argument("GaussLegendre: need at least one point");
  std::vector<double> nodes(points), weights(points);
  for (int i = 0; i < points; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (points == 1) p0 = 1.0, p1 = x;
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= points; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = points * (x * p1 - p0) / (x * x - 1.0);
    nodes[points - 1 - i] = 0.5 * (1.0 + x);
    weights[points - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

double TimeAverage(const Trajectory& traj, const Polynomial& phi, double spinup, int points) {
  if (traj.num_steps() == 0) throw std::invalid_argument("TimeAverage: empty trajectory");
  if (phi.dim() != traj.dim()) throw std::invalid_argument("TimeAverage: dimension mismatch");
  const double start = traj.t_begin() + spinup;
  if (!(spinup >= 0.0) || !(start < traj.t_end())) {
    throw std::invalid_argument("TimeAverage: spinup must be in [0, duration)");
  }
  const auto [nodes, weights] = GaussLegendre(points);
  const auto& ts = traj.times();
  std::vector<double> x(traj.dim());
  long double total = 0.0L;
  for (std::size_t k = traj.StepIndex(start); k < traj.num_steps(); ++k) {
    const double h = ts[k + 1] - ts[k];
    const double a = std::max(ts[k], start);
    const double b = ts[k + 1];
    if (b <= a) continue;
    const double ta = (a - ts[k]) / h, tb = 1.0;
    long double step_sum = 0.0L;
    for (int q = 0; q < points; ++q) {
      traj.StateInStep(k, ta + (tb - ta) * nodes[q], x);
      step_sum += weights[q] * phi.Evaluate(x);
    }
    total += step_sum * (b - a);
  }
  return static_cast<double>(total / (traj.t_end() - start));
}

// ---- Sections ----------------------------------------------------------------

double SectionSpec::Evaluate(std::span<const double> x) const {
  double s = -offset;
  for (std::size_t i = 0; i < normal.size(); ++i) s += normal[i] * x[i];
  return s;
}

void SectionSpec::Validate(int dim) const {
  if (static_cast<int>(normal.size()) != dim) {
    throw std::invalid_argument("SectionSpec: normal has wrong dimension");
  }
  double n2 = 0.0;
  for (double v : normal) n2 += v * v;
  if (!(n2 > 0.0) || !std::isfinite(offset)) {
    throw std::invalid_argument("SectionSpec: degenerate normal");
  }
  if (direction < -1 || direction > 1) throw std::invalid_argument("SectionSpec: bad direction");
}

SectionSpec SectionSpec::LorenzDefault(const LorenzParameters& params) {
  return {{0.0, 0.0, 1.0}, params.r - 1.0, +1};
}

namespace {

bool Crosses(double s0, double s1, int direction) {
  const bool down = s0 > 0.0 && s1 <= 0.0;
  const bool up = s0 < 0.0 && s1 >= 0.0;
  return direction < 0 ? down : direction > 0 ? up : (down || up);
}

}  // namespace

// Root of s(x(theta)) inside one step by the Illinois variant of regula falsi.
double RefineCrossing(const Trajectory& traj, std::size_t step, const SectionSpec& section,
                      std::vector<double>& x) {
  double lo = 0.0, hi = 1.0;
  double slo = section.Evaluate(traj.state(step));
  double shi = section.Evaluate(traj.state(step + 1));
  if (shi == 0.0) {
    traj.StateInStep(step, 1.0, x);
    return 1.0;
  }
  int side = 0;
  double theta = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    theta = (lo * shi - hi * slo) / (shi - slo);
    if (!(theta > lo && theta < hi)) theta = 0.5 * (lo + hi);
    traj.StateInStep(step, theta, x);
    const double s = section.Evaluate(x);
    if (s == 0.0) return theta;
    if ((s > 0.0) == (slo > 0.0)) {
      lo = theta;
      slo = s;
      if (side == -1) shi *= 0.5;
      side = -1;
    } else {
      hi = theta;
      shi = s;
      if (side == 1) slo *= 0.5;
      side = 1;
    }
    const double h = traj.times()[step + 1] - traj.times()[step];
    if ((hi - lo) * h <= 1e-15 * std::max(1.0, std::abs(traj.times()[step]))) break;
  }
  theta = std::abs(slo) < std::abs(shi) ? lo : hi;
  traj.StateInStep(step, theta, x);
  return theta;
}

std::vector<Crossing> SectionCrossings(const Trajectory& traj, const SectionSpec& section) {
  section.Validate(traj.dim());
  std::vector<Crossing> out;
  std::vector<double> x(traj.dim());
  for (std::size_t k = 0; k < traj.num_steps(); ++k) {
    const double s0 = section.Evaluate(traj.state(k));
    const double s1 = section.Evaluate(traj.state(k + 1));
    if (!Crosses(s0, s1, section.direction)) continue;
    const double theta = RefineCrossing(traj, k, section, x);
    const double h = traj.times()[k + 1] - traj.times()[k];
    out.push_back({traj.times()[k] + theta * h, x});
  }
  return out;
}

Trajectory IntegrateToCrossing(const PolySystem& system, std::span<const double> x0,
                               const SectionSpec& section, int count,
                               const IntegratorOptions& options, double t_max,
                               std::vector<Crossing>* crossings) {
  if (static_cast<int>(x0.size()) != system.dim()) {
    throw std::invalid_argument("IntegrateToCrossing: initial state has wrong dimension");
  }
  if (count < 1) throw std::invalid_argument("IntegrateToCrossing: count must be >= 1");
  section.Validate(system.dim());
  CheckOptions(options);
  // Ignore an immediate crossing when starting on the section.
  constexpr double kMinReturnTime = 1e-6;

  Trajectory traj(system.dim());
  traj.options = options;
  traj.Start(0.0, x0);
  Stepper stepper(system, options);
  std::vector<Crossing> found;
  std::vector<double> x(system.dim());
  double t_cross = -1.0;

  AdvanceAdaptive(stepper, traj, t_max, [&](Trajectory& tr) {
    const std::size_t k = tr.num_steps() - 1;
    const double s0 = section.Evaluate(tr.state(k));
    const double s1 = section.Evaluate(tr.state(k + 1));
    if (!Crosses(s0, s1, section.direction)) return false;
    const double theta = RefineCrossing(tr, k, section, x);
    const double h = tr.times()[k + 1] - tr.times()[k];
    const double tc = tr.times()[k] + theta * h;
    if (tc < kMinReturnTime) return false;
    found.push_back({tc, x});
    if (static_cast<int>(found.size()) < count) return false;
    t_cross = tc;
    return true;
  });
  if (t_cross < 0.0) {
    const auto last = traj.state(traj.num_points() - 1);
    throw IntegrationError("IntegrateToCrossing: too few crossings before t_max", traj.t_end(),
                           {last.begin(), last.end()});
  }

  // Recompute the final step so the grid ends exactly at the crossing.
  traj.PopStep();
  const double t0 = traj.t_end();
  const double h = t_cross - t0;
  if (h > 0.0) {
    const auto xs = traj.state(traj.num_points() - 1);
    std::vector<double> xk(xs.begin(), xs.end());
    stepper.SetSlope(xk);
    stepper.Attempt(xk, h);
    stepper.Accept(xk, h);
    traj.Append(t_cross, stepper.x1(), stepper.dense());
  }
  const auto end = traj.state(traj.num_points() - 1);
  found.back().state.assign(end.begin(), end.end());
  found.back().time = traj.t_end();
  traj.stats.evaluations = stepper.evaluations();
  if (crossings) *crossings = std::move(found);
  return traj;
}

char SymbolOf(std::span<const double> state) { return state[0] < 0.0 ? 'A' : 'B'; }

}  // namespace ergobound
