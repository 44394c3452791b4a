#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergobound/cli.hpp"

namespace fs = std::filesystem;

namespace ergobound::cli {
namespace {

const std::string kData = ERGOBOUND_TEST_DATA;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ergobound_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string FirstLine(const std::string& s) { return s.substr(0, s.find('\n')); }

const char* kMinimal = "system: {builtin: lorenz}\nphi: \"z^4\"\n";

TEST(Config, MinimalLorenzDefaults) {
  const auto cfg = ParseConfig(kMinimal);
  EXPECT_EQ(cfg.system.dim(), 3);
  EXPECT_EQ(cfg.degrees, (std::vector<int>{4, 6}));
  EXPECT_EQ(cfg.section.direction, 1);
  EXPECT_EQ(cfg.section.offset, 27.0);
  EXPECT_EQ(cfg.region_box.size(), 3u);
  EXPECT_EQ(cfg.region_resolution, (std::vector<int>{121, 121, 121}));
}

TEST(Config, CustomSystemMatchesBuiltin) {
  const auto cfg = LoadConfig(kData + "/constant.yaml");
  const auto lorenz = PolySystem::Lorenz();
  for (int i = 0; i < 3; ++i) EXPECT_EQ(cfg.system.component(i), lorenz.component(i));
  EXPECT_EQ(cfg.phi, Polynomial::Constant(3, 5.0));
}

TEST(Config, ErrorsAreUsageErrors) {
  const std::string base = kMinimal;
  EXPECT_THROW(ParseConfig("phi: z\n"), UsageError);
  EXPECT_THROW(ParseConfig("system: {builtin: lorenz}\n"), UsageError);
  EXPECT_THROW(ParseConfig("system: {builtin: rossler}\nphi: z\n"), UsageError);
  EXPECT_THROW(ParseConfig(base + "colour: blue\n"), UsageError);
  EXPECT_THROW(ParseConfig(base + "bound: {degrees: [3]}\n"), UsageError);
  EXPECT_THROW(ParseConfig(base + "bound: {degree: [4]}\n"), UsageError);
  EXPECT_THROW(ParseConfig(base + "region: {M: [-1]}\n"), UsageError);
  EXPECT_THROW(ParseConfig(base + "region: {resolution: 1}\n"), UsageError);
  EXPECT_THROW(ParseConfig(base + "region: {box: [[0, 1], [0, 1]]}\n"), UsageError);
  EXPECT_THROW(ParseConfig(base + "orbits: {symbols: [ABC]}\n"), UsageError);
  EXPECT_THROW(ParseConfig("system: {builtin: lorenz}\nphi: \"w^2\"\n"), UsageError);
  EXPECT_THROW(ParseConfig("system: [1, 2\n"), UsageError);
  EXPECT_THROW(ParseConfig("system:\n  variables: [x, y]\n  components: [\"y\"]\nphi: x\n"),
               UsageError);
  EXPECT_THROW(LoadConfig(kData + "/does_not_exist.yaml"), UsageError);
}

TEST(OrbitRequests, RepetitionsAndRotationsCollapse) {
  std::vector<std::string> warnings;
  const auto out = NormalizeOrbitRequests({"ABAB", "BA", "AABABB", "AB", "ABBAAB"}, &warnings);
  EXPECT_EQ(out, (std::vector<std::string>{"AB", "AABABB"}));
  ASSERT_FALSE(warnings.empty());
  EXPECT_NE(warnings[0].find("ABAB"), std::string::npos);
}

TEST(FileNames, Stable) {
  EXPECT_EQ(CertificateFileName(6), "certificate_deg6.json");
  EXPECT_EQ(RegionFileName(6, 3000.0), "region_deg6_M3000.grid");
  EXPECT_EQ(TraceFileName("AB", 4), "trace_AB_deg4.csv");
  EXPECT_EQ(GapFileName("AABABB", 8), "gap_AABABB_deg8.json");
}

TEST(Commands, ConstantObjectiveBoundAndVerify) {
  const fs::path dir = FreshDir("constant");
  const auto cfg = LoadConfig(kData + "/constant.yaml");
  RunOptions run;
  run.out_dir = dir.string();
  std::ostringstream log;
  ASSERT_EQ(CmdBound(cfg, run, log), kExitOk) << log.str();
  const std::string summary = Slurp(dir / "bound_summary.csv");
  EXPECT_EQ(FirstLine(summary),
            "degree,bound,relative_gap,residual_infnorm,gram_min_eigenvalue,status,validity");
  const fs::path cert = dir / CertificateFileName(2);
  const auto parsed = CertificateFromJson(Slurp(cert));
  EXPECT_NEAR(parsed.bound, 5.0, 1e-6);

  std::ostringstream vlog;
  EXPECT_EQ(CmdVerify(cert.string(), {}, vlog), kExitOk);
  EXPECT_EQ(vlog.str().rfind("VALID", 0), 0u);

  BoundCertificate bad = parsed;
  bad.bound -= 1.0;
  const fs::path bad_path = dir / "bad.json";
  std::ofstream(bad_path) << CertificateToJson(bad);
  std::ostringstream blog;
  EXPECT_EQ(CmdVerify(bad_path.string(), {}, blog), kExitMathFailure);
  EXPECT_EQ(blog.str().rfind("INVALID", 0), 0u);

  const std::string text = Slurp(cert);
  std::ofstream(dir / "truncated.json") << text.substr(0, text.size() / 3);
  EXPECT_THROW(CmdVerify((dir / "truncated.json").string(), {}, blog), UsageError);
  EXPECT_THROW(CmdVerify((dir / "missing.json").string(), {}, blog), UsageError);
}

TEST(Commands, FullPipelineOnMeanZ) {
  const fs::path dir = FreshDir("mean_z");
  const auto cfg = LoadConfig(kData + "/mean_z.yaml");
  RunOptions run;
  run.out_dir = dir.string();
  run.jobs = 2;
  std::ostringstream log;
  ASSERT_EQ(CmdBound(cfg, run, log), kExitOk) << log.str();
  for (int d : {2, 4}) {
    const auto cert = CertificateFromJson(Slurp(dir / CertificateFileName(d)));
    EXPECT_NEAR(cert.bound, 27.0, 1e-3);
  }
  ASSERT_EQ(CmdOrbit(cfg, run, log), kExitOk) << log.str();
  EXPECT_NE(log.str().find("warning"), std::string::npos);
  const std::string orbits = Slurp(dir / "orbit_summary.csv");
  EXPECT_EQ(FirstLine(orbits), "symbols,period,average,residual,iterations");
  EXPECT_EQ(std::count(orbits.begin(), orbits.end(), '\n'), 2);

  ASSERT_EQ(CmdRegion(cfg, run, log), kExitOk) << log.str();
  for (double M : {5.0, 50.0}) {
    const auto grid = RegionGridFromText(Slurp(dir / RegionFileName(2, M)));
    EXPECT_EQ(grid.num_nodes(), 9u * 9u * 13u);
    EXPECT_EQ(grid.threshold, M);
  }

  ASSERT_EQ(CmdTrace(cfg, run, log), kExitOk) << log.str();
  EXPECT_EQ(FirstLine(Slurp(dir / TraceFileName("AB", 2))), "t,g");
  EXPECT_FALSE(Slurp(dir / GapFileName("AB", 2)).empty());

  // Outputs are deterministic across reruns and job counts.
  const fs::path again = FreshDir("mean_z_again");
  RunOptions serial = run;
  serial.out_dir = again.string();
  serial.jobs = 1;
  std::ostringstream quiet;
  ASSERT_EQ(CmdBound(cfg, serial, quiet), kExitOk);
  EXPECT_EQ(Slurp(dir / CertificateFileName(4)), Slurp(again / CertificateFileName(4)));
  EXPECT_EQ(Slurp(dir / "bound_summary.csv"), Slurp(again / "bound_summary.csv"));
}

TEST(Commands, RegionWithoutCertificateIsUsageError) {
  const fs::path dir = FreshDir("empty");
  const auto cfg = LoadConfig(kData + "/mean_z.yaml");
  RunOptions run;
  run.out_dir = dir.string();
  std::ostringstream log;
  EXPECT_THROW(CmdRegion(cfg, run, log), UsageError);
}

int RunBinary(const std::string& args) {
  const std::string cmd = std::string(ERGOBOUND_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Binary, ExitCodes) {
  const fs::path dir = FreshDir("binary");
  const std::string cfg = kData + "/constant.yaml";
  EXPECT_EQ(RunBinary(""), kExitUsage);
  EXPECT_EQ(RunBinary("--help"), kExitOk);
  EXPECT_EQ(RunBinary("bound"), kExitUsage);
  EXPECT_EQ(RunBinary("bound --config " + kData + "/nope.yaml"), kExitUsage);
  EXPECT_EQ(RunBinary("bound --config " + cfg + " --degree 3"), kExitUsage);
  EXPECT_EQ(RunBinary("bound --config " + cfg + " --jobs 0"), kExitUsage);
  EXPECT_EQ(RunBinary("bound --config " + cfg + " --out " + dir.string()), kExitOk);
  EXPECT_EQ(RunBinary("verify --certificate " + (dir / CertificateFileName(2)).string()), kExitOk);
  std::ofstream(dir / "junk.json") << "{";
  EXPECT_EQ(RunBinary("verify --certificate " + (dir / "junk.json").string()), kExitUsage);
}

}  // namespace
}  // namespace ergobound::cli
