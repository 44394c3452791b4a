#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "ergobound/cli.hpp"
#include "json.hpp"

namespace ergobound::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string CertificateFileName(int degree) {
  return "certificate_deg" + std::to_string(degree) + ".json";
}

std::string OrbitFileStem(const std::string& symbols) { return "orbit_" + symbols; }

std::string RegionFileName(int degree, double M) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "region_deg%d_M%g.grid", degree, M);
  return buf;
}

std::string TraceFileName(const std::string& symbols, int degree) {
  return "trace_" + symbols + "_deg" + std::to_string(degree) + ".csv";
}

std::string GapFileName(const std::string& symbols, int degree) {
  return "gap_" + symbols + "_deg" + std::to_string(degree) + ".json";
}

std::vector<std::string> NormalizeOrbitRequests(const std::vector<std::string>& requests,
                                                std::vector<std::string>* warnings) {
  std::vector<std::string> out;
  for (const auto& r : requests) {
    const auto n = NormalizeSymbols(r);
    if (n.repetitions > 1 && warnings) {
      warnings->push_back("orbit request " + r + " repeats " + n.root + " " +
                          std::to_string(n.repetitions) + " times; using " + n.root);
    }
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const std::string& s) { return IsRotation(s, n.root); });
    if (seen) {
      if (warnings && n.repetitions == 1) {
        warnings->push_back("orbit request " + r + " duplicates an earlier request");
      }
      continue;
    }
    out.push_back(n.root);
  }
  return out;
}

namespace {

std::string Table(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7g", v);
  return buf;
}

std::string OutDir(const ExperimentConfig& cfg, const RunOptions& run) {
  const std::string dir = run.out_dir.empty() ? cfg.output_dir : run.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("error writing " + path.string());
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

BoundCertificate LoadCertificate(const fs::path& path) {
  const std::string text = ReadFile(path);
  try {
    return CertificateFromJson(text);
  } catch (const std::exception& e) {
    throw UsageError("malformed certificate " + path.string() + ": " + e.what());
  }
}

std::vector<int> Degrees(const std::vector<int>& specific, const ExperimentConfig& cfg,
                         const RunOptions& run) {
  if (!run.degrees.empty()) return run.degrees;
  return specific.empty() ? cfg.degrees : specific;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

int CmdBound(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& log) {
  const fs::path dir = OutDir(cfg, run);
  const std::vector<int> degrees = Degrees({}, cfg, run);

  struct Row {
    int degree = 0;
    bool ok = false;
    BoundCertificate cert;
    std::string error;
    double seconds = 0.0;
  };
  std::vector<Row> rows(degrees.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < degrees.size(); i = next++) {
      Row& row = rows[i];
      row.degree = degrees[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        auto result = ComputeBound(cfg.system, cfg.phi, row.degree, cfg.sos, cfg.sdp,
                                   cfg.tolerances);
        row.cert = std::move(result.certificate);
        row.ok = true;
        WriteFile(dir / CertificateFileName(row.degree), CertificateToJson(row.cert));
      } catch (const CertificateUnavailable& e) {
        row.error = e.what();
      }
      row.seconds = Seconds(t0);
      std::lock_guard lock(log_mutex);
      if (row.ok) {
        log << "degree " << row.degree << ": U = " << Table(row.cert.bound) << " "
            << (row.cert.valid ? "VALID" : "INVALID") << " (" << row.cert.solver.iterations
            << " iterations, " << Table(row.seconds) << " s)\n";
      } else {
        log << "degree " << row.degree << ": FAILED " << row.error << "\n";
      }
    }
  };
  const int jobs = std::clamp(run.jobs, 1, static_cast<int>(std::max<std::size_t>(1, degrees.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "degree,bound,relative_gap,residual_infnorm,gram_min_eigenvalue,status,validity\n";
  bool all_valid = true;
  for (const auto& r : rows) {
    if (r.ok) {
      csv << r.degree << "," << Table(r.cert.bound) << "," << Table(r.cert.solver.relative_gap)
          << "," << Table(r.cert.residual_infnorm) << "," << Table(r.cert.gram_min_eigenvalue)
          << "," << r.cert.solver.status << "," << (r.cert.valid ? "VALID" : "INVALID") << "\n";
      all_valid = all_valid && r.cert.valid;
    } else {
      csv << r.degree << ",,,,,failed,FAILED\n";
      all_valid = false;
    }
  }
  WriteFile(dir / "bound_summary.csv", csv.str());
  return all_valid ? kExitOk : kExitMathFailure;
}

int CmdOrbit(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& log) {
  const fs::path dir = OutDir(cfg, run);
  std::vector<std::string> warnings;
  const auto requests = NormalizeOrbitRequests(cfg.orbits, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  if (requests.empty()) throw UsageError("orbit: no orbit requests in the config");

  std::ostringstream csv;
  csv << "symbols,period,average,residual,iterations\n";
  bool all_ok = true;
  for (const auto& sym : requests) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SeedCandidate> seeds;
    try {
      seeds = CloseReturnSeeds(cfg.system, cfg.section, sym, cfg.seed_run_length, cfg.seeds);
    } catch (const IntegrationError& e) {
      log << sym << ": seed run failed: " << e.what() << "\n";
    }
    std::optional<PeriodicOrbit> orbit;
    std::string last_error = seeds.empty() ? "no close returns found" : "";
    const int attempts = std::min<int>(cfg.seed_attempts, static_cast<int>(seeds.size()));
    for (int a = 0; a < attempts && !orbit; ++a) {
      try {
        orbit = FindPeriodicOrbit(cfg.system, cfg.section, sym, seeds[a].guess, cfg.shooting);
        if (seeds[a].low_confidence) log << sym << ": warning: converged from a low-confidence seed\n";
      } catch (const ShootingError& e) {
        last_error = e.what();
      }
    }
    if (!orbit) {
      log << sym << ": FAILED " << last_error << "\n";
      all_ok = false;
      continue;
    }
    const double avg = TimeAverage(orbit->trajectory, cfg.phi);
    WriteFile(dir / (OrbitFileStem(sym) + ".csv"),
              TrajectoryToCsv(orbit->trajectory, cfg.system.variable_names()));
    WriteFile(dir / (OrbitFileStem(sym) + ".json"), OrbitToJson(*orbit, &cfg.phi) + "\n");
    csv << sym << "," << Table(orbit->period) << "," << Table(avg) << ","
        << Table(orbit->residual) << "," << orbit->newton_iterations << "\n";
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%s: period %.10g, average %.10g, residual %.2g (%.2f s)\n",
                  sym.c_str(), orbit->period, avg, orbit->residual, Seconds(t0));
    log << buf;
  }
  WriteFile(dir / "orbit_summary.csv", csv.str());
  return all_ok ? kExitOk : kExitMathFailure;
}

int CmdRegion(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& log) {
  const fs::path dir = OutDir(cfg, run);
  if (cfg.region_box.empty() || cfg.region_resolution.empty()) {
    throw UsageError("region: the config needs region.box and region.resolution");
  }
  for (int degree : Degrees(cfg.region_degrees, cfg, run)) {
    const BoundCertificate cert = LoadCertificate(dir / CertificateFileName(degree));
    for (double M : cfg.region_M) {
      const auto t0 = std::chrono::steady_clock::now();
      RegionGrid grid;
      try {
        grid = ComputeRegionGrid(cert, cfg.region_box, cfg.region_resolution, M,
                                 std::max(run.jobs, cfg.region_threads));
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("region: ") + e.what());
      }
      WriteFile(dir / RegionFileName(degree, M), RegionGridToText(grid));
      log << "degree " << degree << ", M = " << Table(M) << ": member fraction "
          << Table(grid.MemberFraction()) << ", min g " << Table(grid.MinValue()) << " ("
          << Table(Seconds(t0)) << " s)\n";
    }
  }
  return kExitOk;
}

int CmdTrace(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& log) {
  const fs::path dir = OutDir(cfg, run);
  const auto requests = NormalizeOrbitRequests(cfg.orbits, nullptr);
  if (requests.empty()) throw UsageError("trace: no orbit requests in the config");
  const auto degrees = Degrees(cfg.trace_degrees, cfg, run);

  std::vector<BoundCertificate> certs;
  for (int degree : degrees) certs.push_back(LoadCertificate(dir / CertificateFileName(degree)));

  for (const auto& sym : requests) {
    const fs::path orbit_path = dir / (OrbitFileStem(sym) + ".json");
    PeriodicOrbit orbit;
    try {
      const json j = json::parse(ReadFile(orbit_path));
      SectionSpec section{j.at("section").at("normal").get<std::vector<double>>(),
                          j.at("section").at("offset").get<double>(),
                          j.at("section").at("direction").get<int>()};
      orbit = RebuildOrbit(cfg.system, section, j.at("anchor").get<std::vector<double>>(),
                           j.at("period").get<double>(), j.at("symbols").get<std::string>(),
                           j.at("integration_tol").get<double>());
      orbit.newton_iterations = j.at("newton_iterations").get<int>();
    } catch (const json::exception& e) {
      throw UsageError("malformed orbit file " + orbit_path.string() + ": " + e.what());
    }
    for (std::size_t i = 0; i < degrees.size(); ++i) {
      const auto trace = ComputeResidualTrace(orbit.trajectory, certs[i]);
      WriteFile(dir / TraceFileName(sym, degrees[i]), ResidualTraceToCsv(trace));
      json reports = json::array();
      for (double M : cfg.trace_M) {
        reports.push_back(json::parse(GapReportToJson(ComputeGapReport(orbit, certs[i], M))));
      }
      WriteFile(dir / GapFileName(sym, degrees[i]), reports.dump(2) + "\n");
      log << sym << ", degree " << degrees[i] << ": epsilon " << Table(reports[0]["epsilon"].get<double>())
          << ", trace mean " << Table(trace.mean) << ", trace min " << Table(trace.min) << "\n";
    }
  }
  return kExitOk;
}

int CmdVerify(const std::string& path, const ValidationTolerances& tolerances,
              std::ostream& log) {
  const BoundCertificate cert = LoadCertificate(path);
  const ValidityReport report = ValidateCertificate(cert, tolerances);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s: U = %.10g, degree %d, residual %.3g, min eigenvalue %.3g, ||Gram|| %.3g\n",
                report.valid ? "VALID" : "INVALID", cert.bound, cert.aux_degree,
                report.residual_infnorm, report.gram_min_eigenvalue, report.gram_norm);
  log << buf;
  return report.valid ? kExitOk : kExitMathFailure;
}

}  // namespace ergobound::cli
