#include "twinfock/config.hpp"
#include "twinfock/csv.hpp"
#include "twinfock/measurement.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace twinfock;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "twinfock_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(TWINFOCK_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh(const std::string& name) {
  const fs::path d = kRoot / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("sweep --config /nonexistent.ini") == 2);
  CHECK(run("sweep --preset bogus --out " + (kRoot / "x").string()) == 2);
  const fs::path d = fresh("badcfg");
  std::ofstream(d / "bad.ini") << "[model]\nunknown_key = 1\n";
  CHECK(run("sweep --config " + (d / "bad.ini").string() + " --out " + d.string()) == 2);
  std::ofstream(d / "bad.csv") << "shot,cycle\n";
  CHECK(run("analyze " + (d / "bad.csv").string() + " --out " + d.string()) == 2);
}

TEST_CASE("analyze reports entanglement for ideal twin-Fock records") {
  const fs::path d = fresh("analyze");
  SamplingSpec spec;
  spec.shots = 400;
  NoiseModel noise;
  noise.sigma_mode = 3.0;
  const SpinorState tf = SpinorState::fock(PairBasis(2000), 1000);
  auto records = sample_jz(tf, spec, noise);
  const auto perp = sample_jperp(tf, spec, noise);
  records.insert(records.end(), perp.begin(), perp.end());
  write_records_file((d / "records.csv").string(), records);
  REQUIRE(run("analyze " + (d / "records.csv").string() + " --conditional --out " + d.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(d / "report.json"));
  CHECK(j.dump().find("\"entangled\":true") != std::string::npos);
  CHECK(fs::exists(d / "report.txt"));
  CHECK(fs::exists(d / "manifest.txt"));
}

TEST_CASE("repeat runs are byte-identical and the manifest parses back") {
  const fs::path a = fresh("repeat_a"), b = fresh("repeat_b");
  const std::string args = "raman-scan --preset paper_momentum --points 12 --seed 5 --out ";
  REQUIRE(run(args + a.string()) == 0);
  REQUIRE(run(args + b.string()) == 0);
  CHECK(slurp(a / "raman_scan.csv") == slurp(b / "raman_scan.csv"));
  CHECK(slurp(a / "manifest.txt") == slurp(b / "manifest.txt"));
  const ExperimentConfig back = parse_config(slurp(a / "manifest.txt"));
  ExperimentConfig expect = preset_config("paper_momentum");
  expect.run.seed = 5;
  CHECK(back == expect);
  REQUIRE(run("raman-scan --config " + (a / "manifest.txt").string() + " --points 12 --out " + b.string()) ==
          0);
  CHECK(slurp(a / "raman_scan.csv") == slurp(b / "raman_scan.csv"));
}

TEST_CASE("phase-scan writes its table") {
  const fs::path d = fresh("phase");
  REQUIRE(run("phase-scan --points 41 --out " + d.string()) == 0);
  const std::string csv = slurp(d / "phase_scan.csv");
  CHECK(csv.rfind("q_over_omega,q_hz,pair_fraction,slope,curvature\n", 0) == 0);
  CHECK(fs::exists(d / "summary.json"));
}
