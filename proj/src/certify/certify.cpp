#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "ergobound/certify.hpp"

namespace ergobound {

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) : dim_(p.dim()) {
  for (const auto& [m, c] : p.terms()) {
    coef_.push_back(c);
    for (int i = 0; i < dim_; ++i) {
      exps_.push_back(m[i]);
      max_exp_ = std::max(max_exp_, m[i]);
    }
  }
}

double CompiledPolynomial::Evaluate(std::span<const double> x) const {
  thread_local std::vector<double> powers;
  const int stride = max_exp_ + 1;
  powers.resize(static_cast<std::size_t>(dim_) * stride);
  for (int i = 0; i < dim_; ++i) {
    double* pw = powers.data() + i * stride;
    pw[0] = 1.0;
    for (int e = 1; e <= max_exp_; ++e) pw[e] = pw[e - 1] * x[i];
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    double v = coef_[t];
    const int* e = exps_.data() + t * dim_;
    for (int i = 0; i < dim_; ++i) v *= powers[i * stride + e[i]];
    sum += v;
  }
  return sum;
}

// ---- Region grids ------------------------------------------------------------

std::size_t RegionGrid::num_nodes() const {
  std::size_t n = 1;
  for (int r : resolution) n *= static_cast<std::size_t>(r);
  return n;
}

std::vector<double> RegionGrid::Node(std::size_t index) const {
  std::vector<double> x(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    const std::size_t k = index % resolution[i];
    index /= resolution[i];
    const auto [lo, hi] = box[i];
    x[i] = lo + (hi - lo) * static_cast<double>(k) / (resolution[i] - 1);
  }
  return x;
}

double RegionGrid::MemberFraction() const {
  if (values.empty()) return 0.0;
  const auto n = std::count_if(values.begin(), values.end(),
                               [&](double v) { return v <= threshold; });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

double RegionGrid::MinValue() const { return *std::min_element(values.begin(), values.end()); }
double RegionGrid::MaxValue() const { return *std::max_element(values.begin(), values.end()); }

namespace {

void CheckBox(const Box& box, int dim) {
  if (static_cast<int>(box.size()) != dim) throw std::invalid_argument("box has wrong dimension");
  for (const auto& [lo, hi] : box) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      throw std::invalid_argument("box must have finite bounds with low < high");
    }
  }
}

}  // namespace

RegionGrid ComputeRegionGrid(const BoundCertificate& cert, const Box& box,
                             const std::vector<int>& resolution, double M, int threads) {
  const int d = cert.system.dim();
  CheckBox(box, d);
  if (!(M > 0.0)) throw std::invalid_argument("ComputeRegionGrid: M must be positive");
  if (static_cast<int>(resolution.size()) != d ||
      std::any_of(resolution.begin(), resolution.end(), [](int r) { return r < 2; })) {
    throw std::invalid_argument("ComputeRegionGrid: resolution must be >= 2 on every axis");
  }
  RegionGrid grid;
  grid.box = box;
  grid.resolution = resolution;
  grid.threshold = M;
  grid.bound = cert.bound;
  grid.certificate_id = cert.Id();
  grid.values.resize(grid.num_nodes());

  const CompiledPolynomial g(BoundGap(cert));
  const std::size_t n = grid.values.size();
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) grid.values[i] = g.Evaluate(grid.Node(i));
  };
  const int nt = std::clamp(threads, 1, 64);
  if (nt == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, n * t / nt, n * (t + 1) / nt);
    for (auto& th : pool) th.join();
  }
  if (!std::all_of(grid.values.begin(), grid.values.end(), [](double v) { return std::isfinite(v); })) {
    throw std::runtime_error("ComputeRegionGrid: non-finite value");
  }
  return grid;
}

// ---- Time fractions and traces ---------------------------------------------------

double MarkovBound(double epsilon, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("MarkovBound: M must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("MarkovBound: epsilon must be >= 0");
  return std::max(0.0, 1.0 - epsilon / M);
}

double OccupancyFraction(const Trajectory& traj, const BoundCertificate& cert, double M,
                         double spinup) {
  if (traj.num_steps() == 0) throw std::invalid_argument("OccupancyFraction: empty trajectory");
  const double start = traj.t_begin() + spinup;
  if (!(spinup >= 0.0) || !(start < traj.t_end())) {
    throw std::invalid_argument("OccupancyFraction: empty window");
  }
  const CompiledPolynomial g(BoundGap(cert));
  std::vector<double> x(traj.dim());
  const auto& ts = traj.times();
  auto value = [&](std::size_t k, double theta) {
    traj.StateInStep(k, theta, x);
    return g.Evaluate(x) - M;
  };
  // Each step is split into a few pieces so that a brief excursion inside a
  // step is not missed.
  constexpr int kPieces = 8;
  long double inside = 0.0L;
  for (std::size_t k = traj.StepIndex(start); k < traj.num_steps(); ++k) {
    const double h = ts[k + 1] - ts[k];
    const double a = std::max(ts[k], start);
    if (ts[k + 1] <= a) continue;
    const double th0 = (a - ts[k]) / h;
    double left = th0;
    double fl = value(k, left);
    for (int p = 1; p <= kPieces; ++p) {
      const double right = th0 + (1.0 - th0) * p / kPieces;
      const double fr = value(k, right);
      if (fl <= 0.0 && fr <= 0.0) {
        inside += (right - left) * h;
      } else if ((fl <= 0.0) != (fr <= 0.0)) {
        // Illinois iteration for the threshold crossing.
        double lo = left, hi = right, flo = fl, fhi = fr;
        int side = 0;
        for (int it = 0; it < 100 && (hi - lo) * h > 1e-15; ++it) {
          double mid = (lo * fhi - hi * flo) / (fhi - flo);
          if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
          const double fm = value(k, mid);
          if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid, flo = fm;
            if (side == -1) fhi *= 0.5;
            side = -1;
          } else {
            hi = mid, fhi = fm;
            if (side == 1) flo *= 0.5;
            side = 1;
          }
        }
        const double root = 0.5 * (lo + hi);
        inside += (fl <= 0.0 ? root - left : right - root) * h;
      }
      left = right;
      fl = fr;
    }
  }
  const double frac = static_cast<double>(inside / (traj.t_end() - start));
  return std::clamp(frac, 0.0, 1.0);
}

ResidualTrace ComputeResidualTrace(const Trajectory& traj, const BoundCertificate& cert,
                                   int samples_per_step) {
  if (traj.num_steps() == 0) throw std::invalid_argument("ComputeResidualTrace: empty trajectory");
  if (samples_per_step < 1) throw std::invalid_argument("ComputeResidualTrace: bad sampling");
  const Polynomial gp = BoundGap(cert);
  const CompiledPolynomial g(gp);
  ResidualTrace trace;
  std::vector<double> x(traj.dim());
  const auto& ts = traj.times();
  for (std::size_t k = 0; k < traj.num_steps(); ++k) {
    for (int s = 0; s < samples_per_step; ++s) {
      const double theta = static_cast<double>(s) / samples_per_step;
      traj.StateInStep(k, theta, x);
      trace.times.push_back(ts[k] + theta * (ts[k + 1] - ts[k]));
      trace.values.push_back(g.Evaluate(x));
    }
  }
  const auto last = traj.state(traj.num_points() - 1);
  trace.times.push_back(traj.t_end());
  trace.values.push_back(g.Evaluate(last));
  // g has degree up to aux_degree + 1 in x, so more nodes are used than for Phi.
  trace.mean = TimeAverage(traj, gp, 0.0, 16);
  trace.min = *std::min_element(trace.values.begin(), trace.values.end());
  trace.max = *std::max_element(trace.values.begin(), trace.values.end());
  return trace;
}

GapReport ComputeGapReport(const PeriodicOrbit& orbit, const BoundCertificate& cert, double M) {
  GapReport r;
  r.orbit = orbit.symbols;
  r.aux_degree = cert.aux_degree;
  r.certificate_id = cert.Id();
  r.bound = cert.bound;
  r.average = TimeAverage(orbit.trajectory, cert.phi);
  r.epsilon = r.bound - r.average;
  r.trace_mean = ComputeResidualTrace(orbit.trajectory, cert, 1).mean;
  r.M = M;
  r.markov_bound = MarkovBound(std::max(r.epsilon, 0.0), M);
  r.occupancy = OccupancyFraction(orbit.trajectory, cert, M);
  return r;
}

// ---- Far-field and maximum diagnostics ------------------------------------------

std::string ToString(TrappingVerdict v) {
  switch (v) {
    case TrappingVerdict::kPass: return "PASS";
    case TrappingVerdict::kFail: return "FAIL";
    case TrappingVerdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

TrappingReport TrappingCheck(const BoundCertificate& cert, const std::vector<double>& radii,
                             const TrappingOptions& options) {
  const int d = cert.system.dim();
  std::vector<double> center = options.center.empty() ? std::vector<double>(d, 0.0)
                                                      : options.center;
  if (static_cast<int>(center.size()) != d) {
    throw std::invalid_argument("TrappingCheck: center has wrong dimension");
  }
  const CompiledPolynomial lie(LieDerivative(cert.system, cert.v));
  const CompiledPolynomial phi(cert.phi);

  TrappingReport report;
  report.radii = radii;
  std::sort(report.radii.begin(), report.radii.end());
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(d), u(d);
  for (double r : report.radii) {
    double max_lie = -std::numeric_limits<double>::infinity();
    double max_violation = max_lie;
    for (int s = 0; s < options.samples; ++s) {
      double n2 = 0.0;
      for (double& ui : u) {
        ui = normal(rng);
        n2 += ui * ui;
      }
      const double scale = r / std::sqrt(n2);
      for (int i = 0; i < d; ++i) x[i] = center[i] + scale * u[i];
      const double l = lie.Evaluate(x);
      max_lie = std::max(max_lie, l);
      max_violation = std::max(max_violation, phi.Evaluate(x) + l - cert.bound);
    }
    report.max_lie.push_back(max_lie);
    report.max_violation.push_back(max_violation);
  }

  std::vector<double> probe;
  for (std::size_t i = 0; i < report.radii.size(); ++i) {
    if (report.radii[i] > options.inner_radius) probe.push_back(report.max_lie[i]);
  }
  if (probe.size() < 2) {
    report.verdict = TrappingVerdict::kInconclusive;
    report.message = "fewer than two radii beyond the inner radius";
    return report;
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < probe.size(); ++i) decreasing = decreasing && probe[i] < probe[i - 1];
  if (decreasing && probe.back() < 0.0) {
    report.verdict = TrappingVerdict::kPass;
    report.message = "max of f.grad V decreases with radius and is negative far out";
  } else {
    report.verdict = TrappingVerdict::kFail;
    report.message = decreasing ? "max of f.grad V is not negative on the outermost sphere"
                                : "max of f.grad V does not decrease with radius";
  }
  return report;
}

MaxEstimate EstimateMax(const BoundCertificate& cert, const Box& box, int resolution) {
  const int d = cert.system.dim();
  CheckBox(box, d);
  if (resolution < 2) throw std::invalid_argument("EstimateMax: resolution must be >= 2");
  const Polynomial h = cert.phi + LieDerivative(cert.system, cert.v);
  const CompiledPolynomial hc(h);
  std::vector<CompiledPolynomial> grad;
  for (const auto& gi : h.Gradient()) grad.emplace_back(gi);

  RegionGrid nodes;
  nodes.box = box;
  nodes.resolution.assign(d, resolution);
  const std::size_t n = nodes.num_nodes();
  std::vector<std::pair<double, std::size_t>> best;
  for (std::size_t i = 0; i < n; ++i) best.emplace_back(hc.Evaluate(nodes.Node(i)), i);
  const std::size_t keep = std::min<std::size_t>(8, best.size());
  std::partial_sort(best.begin(), best.begin() + keep, best.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });

  MaxEstimate out;
  out.value = -std::numeric_limits<double>::infinity();
  std::vector<double> trial(d), gv(d);
  for (std::size_t b = 0; b < keep; ++b) {
    std::vector<double> x = nodes.Node(best[b].second);
    double fx = best[b].first;
    double step = 1e-3;
    for (int it = 0; it < 2000 && step > 1e-14; ++it) {
      double gn = 0.0;
      for (int i = 0; i < d; ++i) {
        gv[i] = grad[i].Evaluate(x);
        gn += gv[i] * gv[i];
      }
      gn = std::sqrt(gn);
      if (gn == 0.0) break;
      for (int i = 0; i < d; ++i) {
        trial[i] = std::clamp(x[i] + step * gv[i] / gn, box[i].first, box[i].second);
      }
      const double ft = hc.Evaluate(trial);
      if (ft > fx) {
        x = trial;
        fx = ft;
        step *= 2.0;
      } else {
        step *= 0.5;
      }
    }
    if (fx > out.value) {
      out.value = fx;
      out.argmax = x;
    }
  }
  return out;
}

double SampledBoundViolation(const BoundCertificate& cert, const Box& box, int samples,
                             std::uint64_t seed) {
  const int d = cert.system.dim();
  CheckBox(box, d);
  const CompiledPolynomial g(BoundGap(cert));
  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (const auto& [lo, hi] : box) dist.emplace_back(lo, hi);
  std::vector<double> x(d);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) x[i] = dist[i](rng);
    worst = std::max(worst, -g.Evaluate(x));
  }
  return worst;
}

}  // namespace ergobound
