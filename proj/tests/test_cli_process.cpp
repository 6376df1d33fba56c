#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "petrowave/io.hpp"

using namespace petrowave;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(PETROWAVE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

const char* kGoodConfig = R"({
  "schema": 1,
  "basis": {"modes": 4},
  "coupling": {"kind": "constant", "value": 0.3},
  "damping": {"g1": {"kind": "linear"}, "g2": {"kind": "linear"}},
  "initial": {"u2": {"kind": "modes", "coefficients": [1.0]}},
  "time": {"dt": 1e-3, "t_end": 0.1, "sample_stride": 10}
})";

}  // namespace

TEST_CASE("help and argument parsing") {
  REQUIRE(run_cli("--help") == 0);
  REQUIRE(run_cli("") == 2);
  REQUIRE(run_cli("frobnicate --config x.json") == 2);
  REQUIRE(run_cli("check") == 2);  // --config is required
}

TEST_CASE("config loading failures exit 2") {
  REQUIRE(run_cli("check --config no_such_config_file.json") == 2);

  write_text_file("cli_bad.json", "{ this is not json");
  REQUIRE(run_cli("check --config cli_bad.json") == 2);

  write_text_file("cli_unknown.json",
                  R"({"schema":1,"basis":{},"time":{"dt":1e-3,"t_end":0.1},
                      "unknown_section":{}})");
  REQUIRE(run_cli("check --config cli_unknown.json") == 2);

  std::filesystem::remove("cli_bad.json");
  std::filesystem::remove("cli_unknown.json");
}

TEST_CASE("check and simulate through the binary") {
  write_text_file("cli_good.json", kGoodConfig);
  std::filesystem::remove_all("cli_out_a");
  std::filesystem::remove_all("cli_out_b");

  REQUIRE(run_cli("check --config cli_good.json --output cli_out_a") == 0);
  REQUIRE(std::filesystem::exists("cli_out_a/hypotheses.json"));

  REQUIRE(run_cli("simulate --config cli_good.json --output cli_out_a") == 0);
  REQUIRE(std::filesystem::exists("cli_out_a/energy.csv"));
  REQUIRE(std::filesystem::exists("cli_out_a/states.csv"));
  REQUIRE(std::filesystem::exists("cli_out_a/manifest.json"));

  // a second run elsewhere reproduces the energy trace byte for byte
  REQUIRE(run_cli("simulate --config cli_good.json --output cli_out_b") == 0);
  REQUIRE(read_text_file("cli_out_b/energy.csv") ==
          read_text_file("cli_out_a/energy.csv"));

  std::filesystem::remove("cli_good.json");
  std::filesystem::remove_all("cli_out_a");
  std::filesystem::remove_all("cli_out_b");
}

TEST_CASE("envelope branch gap surfaces as exit 5") {
  write_text_file("cli_branch.json", R"({
    "schema": 1,
    "basis": {"modes": 4},
    "damping": {"g1": {"kind": "power_log", "p": 1.0, "q": 2.0,
                        "epsilon": 0.1}},
    "time": {"dt": 1e-3, "t_end": 0.1},
    "envelope": {"omega": 1.0, "E0": 1.0}
  })");
  std::filesystem::remove_all("cli_out_branch");
  REQUIRE(run_cli("envelope --config cli_branch.json --output "
                  "cli_out_branch") == 5);
  std::filesystem::remove("cli_branch.json");
  std::filesystem::remove_all("cli_out_branch");
}

TEST_CASE("fit without a simulated trace exits 2") {
  write_text_file("cli_fitless.json", kGoodConfig);
  std::filesystem::remove_all("cli_out_fitless");
  REQUIRE(run_cli("fit --config cli_fitless.json --output cli_out_fitless") ==
          2);
  std::filesystem::remove("cli_fitless.json");
  std::filesystem::remove_all("cli_out_fitless");
}
