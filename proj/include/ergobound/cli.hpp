#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergobound/certify.hpp"
#include "ergobound/dynamics.hpp"
#include "ergobound/sos_program.hpp"

namespace ergobound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMathFailure = 1;
inline constexpr int kExitUsage = 2;

/// Malformed configuration, bad arguments, or unreadable/missing inputs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  PolySystem system;
  Polynomial phi;
  std::string phi_text;

  // bound
  std::vector<int> degrees = {4, 6};
  SosOptions sos;
  SdpOptions sdp;
  ValidationTolerances tolerances;

  // orbit
  std::vector<std::string> orbits;
  SectionSpec section;
  SeedOptions seeds;
  double seed_run_length = 500.0;
  int seed_attempts = 5;
  ShootingOptions shooting;

  // region
  Box region_box;
  std::vector<int> region_resolution;
  std::vector<double> region_M = {3000.0};
  std::vector<int> region_degrees;  // empty means `degrees`
  int region_threads = 1;

  // trace
  std::vector<int> trace_degrees;  // empty means `degrees`
  std::vector<double> trace_M = {1500.0, 3000.0, 6000.0};

  std::string output_dir = "ergobound_out";
};

/// Parses YAML text. Throws UsageError with a description of the first problem.
ExperimentConfig ParseConfig(const std::string& yaml_text);
ExperimentConfig LoadConfig(const std::string& path);

struct RunOptions {
  /// Overrides the config's output directory when nonempty.
  std::string out_dir;
  /// Overrides the config's degree list when nonempty.
  std::vector<int> degrees;
  int jobs = 1;
};

/// Each command returns an exit code and writes progress to `log`.
int CmdBound(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int CmdOrbit(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int CmdRegion(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int CmdTrace(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int CmdVerify(const std::string& certificate_path, const ValidationTolerances& tolerances,
              std::ostream& log);

/// Output file names.
std::string CertificateFileName(int degree);
std::string OrbitFileStem(const std::string& symbols);
std::string RegionFileName(int degree, double M);
std::string TraceFileName(const std::string& symbols, int degree);
std::string GapFileName(const std::string& symbols, int degree);

/// Collapses repeated words ("ABAB" -> "AB") and duplicate requests, keeping
/// the first occurrence order. Warnings are appended to `warnings`.
std::vector<std::string> NormalizeOrbitRequests(const std::vector<std::string>& requests,
                                                std::vector<std::string>* warnings);

}  // namespace ergobound::cli
