// Runs the Lorenz z^4 experiment end to end and prints one PASS/FAIL line per
// acceptance criterion. Usage: acceptance [output-dir]
// Exit status is 0 only when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ergobound/certify.hpp"
#include "ergobound/cli.hpp"
#include "ergobound/dynamics.hpp"
#include "ergobound/sdp.hpp"
#include "ergobound/sos_program.hpp"

namespace fs = std::filesystem;
using namespace ergobound;

namespace {

const std::vector<std::string> kXYZ = {"x", "y", "z"};
const Box kBox = {{-25, 25}, {-25, 25}, {0, 60}};
constexpr double kAbAverage = 592827.338;

Polynomial P(const std::string& s) { return ParsePolynomial(s, kXYZ); }

int failures = 0;

void Report(int id, bool ok, const std::string& detail) {
  std::printf("%s %2d  %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double RelErr(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

struct TimedCertificate {
  BoundCertificate cert;
  double seconds = 0.0;
  bool ok = false;
  std::string error;
};

TimedCertificate RunBound(const cli::ExperimentConfig& cfg, const fs::path& dir, int degree) {
  TimedCertificate out;
  cli::RunOptions run;
  run.out_dir = dir.string();
  run.degrees = {degree};
  std::ostringstream log;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cli::CmdBound(cfg, run, log);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.cert = CertificateFromJson(Slurp(dir / cli::CertificateFileName(degree)));
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::optional<PeriodicOrbit> ShootOrbit(const std::string& symbols) {
  const auto section = SectionSpec::LorenzDefault();
  const auto seeds = CloseReturnSeeds(PolySystem::Lorenz(), section, symbols, 500.0);
  for (std::size_t i = 0; i < seeds.size() && i < 5; ++i) {
    try {
      return FindPeriodicOrbit(PolySystem::Lorenz(), section, symbols, seeds[i].guess);
    } catch (const ShootingError&) {
    }
  }
  return std::nullopt;
}

// Small analytic SDPs.

SdpProblem TwoByTwo() {
  SdpProblem p;
  p.block_sizes = {2};
  p.num_free = 1;
  p.free_objective = {1.0};
  p.block_objective = {{}};
  p.constraints = {
      {{{0, -1.0}}, {{{0, 0, 1.0}}}, 0.0},
      {{{0, -1.0}}, {{{1, 1, 1.0}}}, 0.0},
      {{}, {{{0, 1, 0.5}}}, 1.0},
  };
  return p;
}

SdpProblem DiagonalLp() {
  SdpProblem p;
  p.block_sizes = {1, 1};
  p.num_free = 2;
  p.free_objective = {1.0, 1.0};
  p.block_objective = {{}, {}};
  p.constraints = {
      {{{0, -1.0}}, {{{0, 0, 1.0}}, {}}, -1.0},
      {{{1, -1.0}}, {{}, {{0, 0, 1.0}}}, -2.0},
  };
  return p;
}

SdpProblem MaxEigenvalue(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  SdpProblem p;
  p.block_sizes = {n};
  SparseSym obj, trace;
  for (int j = 0; j < n; ++j) {
    trace.push_back({j, j, 1.0});
    for (int i = 0; i <= j; ++i) obj.push_back({i, j, -c(i, j)});
  }
  p.block_objective = {obj};
  p.constraints = {{{}, {trace}, 1.0}};
  return p;
}

void SdpSuite() {
  bool ok = true;
  int violations = 0;
  std::string detail;
  const auto t = SolveSdp(TwoByTwo());
  const auto lp = SolveSdp(DiagonalLp());
  violations += t.weak_duality_violations + lp.weak_duality_violations;
  ok &= t.status == SdpStatus::kConverged && std::abs(t.primal_objective - 1.0) <= 1e-7;
  ok &= lp.status == SdpStatus::kConverged && std::abs(lp.primal_objective - 3.0) <= 1e-7;
  detail += Fmt("t*=%.10f LP=%.10f", t.primal_objective, lp.primal_objective);

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(8, 8);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) a(i, j) = g(rng);
    }
    const Eigen::MatrixXd c = 0.5 * (a + a.transpose());
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues()(7);
    const auto s = SolveSdp(MaxEigenvalue(c));
    violations += s.weak_duality_violations;
    const double err = std::abs(-s.primal_objective - lmax) / (1.0 + std::abs(lmax));
    worst = std::max(worst, err);
    ok &= s.status == SdpStatus::kConverged && err <= 1e-7;
  }
  detail += Fmt(", lambda_max worst rel err %.2e", worst);

  const auto a = SolveSdp(TwoByTwo()), b = SolveSdp(TwoByTwo());
  const bool identical = a.free == b.free && a.dual == b.dual && a.blocks[0] == b.blocks[0] &&
                         a.iterations == b.iterations;
  ok &= identical && violations == 0;
  detail += Fmt(", weak-duality violations %d, rerun %s", violations,
                identical ? "bit-identical" : "DIFFERS");
  Report(10, ok, "SDP solver suite: " + detail);
}

void OrderCheck() {
  const std::vector<std::string> v = {"x", "y"};
  const PolySystem rot({ParsePolynomial("-y", v), ParsePolynomial("x", v)}, v);
  const std::vector<double> x0 = {1.0, 0.0};
  std::vector<double> err;
  for (int n : {50, 100, 200}) {
    IntegratorOptions o;
    o.fixed_step = 10.0 / n;
    const auto traj = Integrate(rot, x0, 10.0, o);
    const auto x = traj.state(traj.num_points() - 1);
    err.push_back(std::hypot(x[0] - std::cos(10.0), x[1] - std::sin(10.0)));
  }
  const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
  Report(12, std::abs(p1 - 5.0) <= 0.5 && std::abs(p2 - 5.0) <= 0.5,
         Fmt("integrator order on the harmonic oscillator: %.3f, %.3f", p1, p2));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(dir);

  const std::string config_text =
      "system: {builtin: lorenz}\n"
      "phi: \"z^4\"\n"
      "bound: {degrees: [4, 6, 8]}\n"
      "orbits: {symbols: [AB, AABABB]}\n"
      "trace: {degrees: [4, 6, 8], M: [1500, 3000, 6000]}\n";
  const cli::ExperimentConfig cfg = cli::ParseConfig(config_text);
  std::ofstream(dir / "config.yaml") << config_text;

  // Bounds.
  const TimedCertificate c4 = RunBound(cfg, dir, 4);
  Report(1, c4.ok && c4.cert.valid && RelErr(c4.cert.bound, 635908.0) <= 1e-3 && c4.seconds <= 60,
         c4.ok ? Fmt("degree 4: U = %.3f (rel err %.2e), %s, %.2f s", c4.cert.bound,
                     RelErr(c4.cert.bound, 635908.0), c4.cert.valid ? "VALID" : "INVALID",
                     c4.seconds)
               : "degree 4 failed: " + c4.error);
  const TimedCertificate c6 = RunBound(cfg, dir, 6);
  Report(2, c6.ok && c6.cert.valid && RelErr(c6.cert.bound, 595152.0) <= 1e-3 && c6.seconds <= 300,
         c6.ok ? Fmt("degree 6: U = %.3f (rel err %.2e), %s, %.2f s", c6.cert.bound,
                     RelErr(c6.cert.bound, 595152.0), c6.cert.valid ? "VALID" : "INVALID",
                     c6.seconds)
               : "degree 6 failed: " + c6.error);
  const TimedCertificate c8 = RunBound(cfg, dir, 8);
  Report(3, c8.ok && c8.cert.valid && RelErr(c8.cert.bound, 592935.0) <= 5e-3,
         c8.ok ? Fmt("degree 8 (stretch): U = %.3f (rel err %.2e), %s, solver status %s, %.2f s",
                     c8.cert.bound, RelErr(c8.cert.bound, 592935.0),
                     c8.cert.valid ? "VALID" : "INVALID", c8.cert.solver.status.c_str(),
                     c8.seconds)
               : "degree 8 failed: " + c8.error);

  // Equilibrium-sharp bounds.
  std::vector<BoundCertificate> extra;
  {
    bool ok = false;
    std::string detail;
    try {
      const auto z = ComputeBound(PolySystem::Lorenz(), P("z"), 2).certificate;
      const auto z2 = ComputeBound(PolySystem::Lorenz(), P("z^2"), 4).certificate;
      ok = z.valid && z2.valid && std::abs(z.bound - 27.0) <= 1e-3 &&
           RelErr(z2.bound, 729.0) <= 1e-3;
      detail = Fmt("mean z <= %.6f (degree 2), mean z^2 <= %.4f (degree 4)", z.bound, z2.bound);
      extra = {z, z2};
    } catch (const std::exception& e) {
      detail = e.what();
    }
    Report(4, ok, "equilibrium bounds: " + detail);
  }

  // Orbits.
  const auto ab = ShootOrbit("AB");
  const auto ab6 = ShootOrbit("AABABB");
  const Polynomial phi = P("z^4");
  const double avg_ab = ab ? TimeAverage(ab->trajectory, phi) : NAN;
  const double avg_ab6 = ab6 ? TimeAverage(ab6->trajectory, phi) : NAN;
  Report(5, ab && ab->residual <= 1e-9 && std::abs(avg_ab - kAbAverage) <= 0.05,
         ab ? Fmt("AB orbit: T = %.10f, residual %.2e, average z^4 = %.6f", ab->period,
                  ab->residual, avg_ab)
            : "AB orbit: shooting failed");
  Report(6, ab && ab6 && std::abs(avg_ab - avg_ab6 - 2798.0) <= 10.0,
         ab6 ? Fmt("AABABB orbit: T = %.10f, average z^4 = %.6f, below AB by %.3f", ab6->period,
                   avg_ab6, avg_ab - avg_ab6)
             : "AABABB orbit: shooting failed");

  {
    cli::RunOptions run;
    run.out_dir = dir.string();
    std::ostringstream log;
    try {
      cli::CmdOrbit(cfg, run, log);
      cli::CmdTrace(cfg, run, log);
    } catch (const std::exception& e) {
      std::printf("note: orbit/trace artifacts not written: %s\n", e.what());
    }
  }

  const double eps6 = c6.ok ? c6.cert.bound - kAbAverage : NAN;
  Report(7, c6.ok && eps6 > 2324.0, Fmt("epsilon_6 = U_6 - %.3f = %.3f", kAbAverage, eps6));

  // Markov property.
  {
    bool ok = MarkovBound(0.23, 1000.0) == 0.99977;
    std::string detail = Fmt("markov_bound(0.23, 1000) = %.17g", MarkovBound(0.23, 1000.0));
    for (const auto* c : {&c4, &c6}) {
      if (!c->ok || !ab) {
        ok = false;
        continue;
      }
      for (double M : {1500.0, 3000.0, 6000.0}) {
        const GapReport r = ComputeGapReport(*ab, c->cert, M);
        ok &= r.occupancy >= r.markov_bound - 1e-6;
        detail += Fmt("; d%d M%g: %.4f >= %.4f", c->cert.aux_degree, M, r.occupancy,
                      r.markov_bound);
      }
    }
    Report(8, ok, "Markov suite: " + detail);
  }

  // Certificate validity.
  {
    bool ok = true;
    std::string detail;
    std::vector<const BoundCertificate*> certs;
    for (const auto* c : {&c4, &c6, &c8}) {
      if (c->ok) certs.push_back(&c->cert);
    }
    for (const auto& c : extra) certs.push_back(&c);
    for (const BoundCertificate* c : certs) {
      if (!c->valid) continue;
      const double U = c->bound;
      const auto v = ValidateCertificate(*c);
      const double viol = SampledBoundViolation(*c, kBox, 100000);
      const bool good = v.gram_min_eigenvalue >= -1e-8 * (1.0 + v.gram_norm) &&
                        v.residual_infnorm <= 1e-6 * (1.0 + std::abs(U)) &&
                        viol <= 1e-4 * (1.0 + std::abs(U));
      ok &= good;
      detail += Fmt("%sU=%.6g: min eig %.2e, residual %.2e, max violation %.3g",
                    detail.empty() ? "" : "; ", U, v.gram_min_eigenvalue, v.residual_infnorm, viol);
    }
    ok &= !certs.empty();
    Report(9, ok, "validity suite: " + detail);
  }

  SdpSuite();

  // Monotonicity and orbit identities.
  {
    bool ok = c4.ok && c6.ok && c8.ok && ab && ab6;
    std::string detail;
    if (ok) {
      auto slack = [](const BoundCertificate& c) { return 10.0 * std::abs(c.solver.duality_gap); };
      ok &= c6.cert.bound <= c4.cert.bound + slack(c6.cert);
      ok &= c8.cert.bound <= c6.cert.bound + slack(c8.cert);
      detail = Fmt("U: %.3f >= %.3f >= %.3f", c4.cert.bound, c6.cert.bound, c8.cert.bound);
      double worst_trace = 0.0, worst_lie = 0.0;
      for (const auto* c : {&c4, &c6, &c8}) {
        const Polynomial shifted = phi + LieDerivative(c->cert.system, c->cert.v);
        for (const PeriodicOrbit* o : {&*ab, &*ab6}) {
          const double avg = TimeAverage(o->trajectory, phi);
          const double gap = c->cert.bound - avg;
          const double mean = ComputeResidualTrace(o->trajectory, c->cert).mean;
          worst_trace = std::max(worst_trace, std::abs(mean - gap) / std::abs(gap));
          worst_lie =
              std::max(worst_lie, std::abs(TimeAverage(o->trajectory, shifted) - avg) / avg);
        }
      }
      ok &= worst_trace <= 1e-6 && worst_lie <= 1e-7;
      detail += Fmt("; trace mean vs U - average worst rel err %.2e", worst_trace);
      detail += Fmt("; average of Phi + f.grad V vs Phi worst rel err %.2e", worst_lie);
    } else {
      detail = "missing certificates or orbits";
    }
    Report(11, ok, "monotonicity and identities: " + detail);
  }

  OrderCheck();

  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
  return failures == 0 ? 0 : 1;
}
