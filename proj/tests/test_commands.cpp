#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>

#include "petrowave/commands.hpp"

using namespace petrowave;
using nlohmann::json;

namespace {

ExperimentConfig cfg_from(const std::string& text) {
  return parse_config_text(text);
}

std::string fresh_dir(const std::string& name) {
  std::filesystem::remove_all(name);
  return name;
}

json read_json(const std::string& path) {
  return json::parse(read_text_file(path));
}

const char* kLinearDamped = R"({
  "schema": 1,
  "basis": {"modes": 4},
  "coupling": {"kind": "constant", "value": 0.3},
  "damping": {"g1": {"kind": "linear"}, "g2": {"kind": "linear"}},
  "initial": {"u2": {"kind": "modes", "coefficients": [1.0]}},
  "time": {"dt": 1e-3, "t_end": 0.1, "sample_stride": 10}
})";

}  // namespace

TEST_CASE("hypothesis evaluation aggregates coupling and damping checks") {
  ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "coupling": {"kind": "constant", "value": 0.9},
    "time": {"dt": 1e-3, "t_end": 0.1}
  })");
  HypothesisOutcome h = evaluate_hypotheses(cfg);
  REQUIRE(h.all_pass);
  REQUIRE(h.failed.empty());
  REQUIRE(h.report["coupling"]["admissible"].get<bool>());
  REQUIRE(std::fabs(h.report["coupling"]["margin"].get<double>() - 0.1) <=
          1e-12);
  REQUIRE_FALSE(h.report["g1"]["present"].get<bool>());
  REQUIRE_FALSE(h.report["g2"]["present"].get<bool>());

  cfg.coupling.value = 1.2;
  h = evaluate_hypotheses(cfg);
  REQUIRE_FALSE(h.all_pass);
  REQUIRE(h.failed == std::vector<std::string>{"coupling_smallness"});

  ExperimentConfig damped = cfg_from(kLinearDamped);
  h = evaluate_hypotheses(damped);
  REQUIRE(h.all_pass);
  REQUIRE(h.report["g1"]["present"].get<bool>());
  REQUIRE(h.report["g1"]["checks"].size() == 5);
  for (const auto& chk : h.report["g1"]["checks"])
    REQUIRE(chk["pass"].get<bool>());

  // the steep power law violates the global derivative bounds near zero
  ExperimentConfig steep = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "coupling": {"kind": "constant", "value": 0.3},
    "damping": {"g1": {"kind": "power_log", "p": 2.0, "epsilon": 0.5}},
    "time": {"dt": 1e-3, "t_end": 0.1}
  })");
  h = evaluate_hypotheses(steep);
  REQUIRE_FALSE(h.all_pass);
  REQUIRE(h.failed == std::vector<std::string>{"g1.derivative_bounds"});
  for (const auto& chk : h.report["g1"]["checks"]) {
    const bool expect_pass = chk["id"].get<std::string>() != "derivative_bounds";
    REQUIRE(chk["pass"].get<bool>() == expect_pass);
  }

  ExperimentConfig broken = cfg_from(
      R"({"schema":1,"basis":{"modes":0},"time":{"dt":1e-3,"t_end":0.1}})");
  REQUIRE_THROWS_AS(evaluate_hypotheses(broken), ConfigError);
}

TEST_CASE("check command writes its report and exit code") {
  const std::string dir = fresh_dir("cmd_out_check");
  std::ostringstream os;
  REQUIRE(cmd_check(cfg_from(kLinearDamped), os, dir) == exit_code::ok);
  const json rep = read_json(dir + "/hypotheses.json");
  REQUIRE(rep["all_pass"].get<bool>());
  REQUIRE(rep["coupling"]["condition"] == "coupling_smallness");
  REQUIRE(os.str().find("ALL PASS") != std::string::npos);

  ExperimentConfig bad = cfg_from(kLinearDamped);
  bad.coupling.value = 1.2;
  std::ostringstream os2;
  REQUIRE(cmd_check(bad, os2, dir) == exit_code::hypothesis_failure);
  REQUIRE_FALSE(read_json(dir + "/hypotheses.json")["all_pass"].get<bool>());
  std::filesystem::remove_all(dir);
}

TEST_CASE("simulate command writes energy, states, and manifest") {
  const std::string dir = fresh_dir("cmd_out_sim");
  std::ostringstream os;
  const ExperimentConfig cfg = cfg_from(kLinearDamped);
  REQUIRE(cmd_simulate(cfg, os, dir) == exit_code::ok);
  REQUIRE(std::filesystem::exists(dir + "/energy.csv"));
  REQUIRE(std::filesystem::exists(dir + "/states.csv"));
  REQUIRE(std::filesystem::exists(dir + "/hypotheses.json"));

  const json man = read_json(dir + "/manifest.json");
  REQUIRE(man["command"] == "simulate");
  REQUIRE(man["steps"].get<int>() == 100);
  REQUIRE(man["samples"].get<int>() == 11);
  REQUIRE_FALSE(man["diverged"].get<bool>());
  REQUIRE(man["diverged_t"].is_null());
  // u2 = first mode: E0 = lambda_1^2 / 4 on the unit interval
  REQUIRE(std::fabs(man["initial_energy"].get<double>() -
                    24.352272758500609309) <= 1e-6);
  REQUIRE(man["drift"].get<double>() <= 1e-12);
  REQUIRE(man["hypotheses_pass"].get<bool>());
  REQUIRE(man["hashes"]["config"] == config_fingerprint(cfg));
  const std::string energy_text = read_text_file(dir + "/energy.csv");
  REQUIRE(man["hashes"]["energy_csv"] == hex64(fnv1a64(energy_text)));
  REQUIRE(man["hashes"]["states_csv"].is_string());
  REQUIRE(man["hashes"]["trace"].get<std::string>().size() == 16);

  // a rerun reproduces every byte except the wall clock
  const std::string dir2 = fresh_dir("cmd_out_sim2");
  std::ostringstream os2;
  REQUIRE(cmd_simulate(cfg, os2, dir2) == exit_code::ok);
  REQUIRE(read_text_file(dir2 + "/energy.csv") == energy_text);
  json man2 = read_json(dir2 + "/manifest.json");
  json man_stripped = man;
  man_stripped.erase("wall_ms");
  man2.erase("wall_ms");
  REQUIRE(man2 == man_stripped);

  // keep_states=false suppresses the states file
  ExperimentConfig lean = cfg;
  lean.keep_states = false;
  const std::string dir3 = fresh_dir("cmd_out_sim3");
  std::ostringstream os3;
  REQUIRE(cmd_simulate(lean, os3, dir3) == exit_code::ok);
  REQUIRE_FALSE(std::filesystem::exists(dir3 + "/states.csv"));
  REQUIRE(read_json(dir3 + "/manifest.json")["hashes"]["states_csv"].is_null());

  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
  std::filesystem::remove_all(dir3);
}

TEST_CASE("simulate gates on failed hypotheses unless forced") {
  ExperimentConfig cfg = cfg_from(kLinearDamped);
  cfg.coupling.value = 1.2;
  cfg.t_end = 0.05;
  const std::string dir = fresh_dir("cmd_out_gate");
  std::ostringstream os;
  REQUIRE(cmd_simulate(cfg, os, dir) == exit_code::hypothesis_failure);
  REQUIRE_FALSE(std::filesystem::exists(dir + "/energy.csv"));
  REQUIRE(std::filesystem::exists(dir + "/hypotheses.json"));

  std::ostringstream os2;
  REQUIRE(cmd_simulate(cfg, os2, dir, /*force=*/true) == exit_code::ok);
  REQUIRE(std::filesystem::exists(dir + "/energy.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("simulate reports divergence with exit 4") {
  const ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "coupling": {"kind": "constant", "value": 5.0},
    "initial": {"u1": {"kind": "modes", "coefficients": [0.1]},
                "u2": {"kind": "modes", "coefficients": [0.1]}},
    "time": {"dt": 0.01, "t_end": 10.0}
  })");
  const std::string dir = fresh_dir("cmd_out_div");
  std::ostringstream os;
  REQUIRE(cmd_simulate(cfg, os, dir, /*force=*/true) == exit_code::divergence);
  const json man = read_json(dir + "/manifest.json");
  REQUIRE(man["diverged"].get<bool>());
  REQUIRE(man["diverged_t"].get<double>() > 0.0);
  REQUIRE(man["diverged_t"].get<double>() <= 10.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("envelope command without a trace uses the grid options") {
  const ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "damping": {"g1": {"kind": "linear"}},
    "time": {"dt": 1e-3, "t_end": 1.0},
    "envelope": {"omega": 2.0, "E0": 4.0, "grid_t_max": 5.0,
                 "grid_points": 11}
  })");
  const std::string dir = fresh_dir("cmd_out_env");
  std::ostringstream os;
  REQUIRE(guarded(os, [&] { return cmd_envelope(cfg, os, dir); }) ==
          exit_code::ok);

  const std::string csv = read_text_file(dir + "/envelope.csv");
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  REQUIRE(rows == 12);
  REQUIRE(csv.rfind("t,value\n0,4\n", 0) == 0);

  const json rate = read_json(dir + "/rate.json");
  REQUIRE(rate["command"] == "envelope");
  REQUIRE(rate["rate"]["branch"] == "exponential");
  REQUIRE(rate["rate"]["formula"] == "c*e^(-omega*t)");
  REQUIRE_FALSE(rate["rate"]["ambiguous"].get<bool>());
  REQUIRE(rate["omega"].get<double>() == 2.0);
  REQUIRE_FALSE(rate["omega_fitted"].get<bool>());
  REQUIRE(rate["E0"].get<double>() == 4.0);
  REQUIRE(rate["c_G"].get<double>() == 0.5);
  REQUIRE(std::fabs(rate["plateau_end"].get<double>() - 0.5) <= 1e-12);
  REQUIRE(rate["scale"].get<double>() == 4.0);
  REQUIRE(rate["grid_points"].get<int>() == 11);
  std::filesystem::remove_all(dir);
}

TEST_CASE("envelope command exits 5 on the uncatalogued branch") {
  const ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "damping": {"g1": {"kind": "power_log", "p": 1.0, "q": 2.0,
                        "epsilon": 0.1}},
    "time": {"dt": 1e-3, "t_end": 1.0},
    "envelope": {"omega": 1.0, "E0": 1.0}
  })");
  const std::string dir = fresh_dir("cmd_out_env5");
  std::ostringstream os;
  REQUIRE(guarded(os, [&] { return cmd_envelope(cfg, os, dir); }) ==
          exit_code::unsupported_branch);
  std::filesystem::remove_all(dir);
}

TEST_CASE("envelope command requires a damping law") {
  const ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "time": {"dt": 1e-3, "t_end": 1.0},
    "envelope": {"omega": 1.0, "E0": 1.0}
  })");
  const std::string dir = fresh_dir("cmd_out_env2");
  std::ostringstream os;
  REQUIRE(guarded(os, [&] { return cmd_envelope(cfg, os, dir); }) ==
          exit_code::config_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fit command end to end on a damped trace") {
  const ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "coupling": {"kind": "constant", "value": 0.3},
    "damping": {"g1": {"kind": "linear"}, "g2": {"kind": "linear"}},
    "initial": {"u2": {"kind": "modes", "coefficients": [1.0]}},
    "time": {"dt": 1e-3, "t_end": 8.0, "sample_stride": 40,
             "keep_states": false}
  })");
  const std::string dir = fresh_dir("cmd_out_fit");
  std::ostringstream os;
  REQUIRE(cmd_simulate(cfg, os, dir) == exit_code::ok);
  REQUIRE(guarded(os, [&] { return cmd_fit(cfg, os, dir); }) == exit_code::ok);

  const json fit = read_json(dir + "/fit.json");
  REQUIRE(fit["command"] == "fit");
  REQUIRE(fit["model"] == "exponential");
  REQUIRE(fit["rate"].get<double>() > 0.0);
  REQUIRE(fit["residual"].get<double>() < 0.05);
  REQUIRE_FALSE(fit["poor_fit"].get<bool>());
  REQUIRE(fit["window"][0].get<double>() == 4.0);
  REQUIRE(fit["window"][1].get<double>() == 8.0);
  REQUIRE(fit["dominance"]["holds"].get<bool>());
  REQUIRE(fit["dominance"]["worst_ratio"].get<double>() <= 1.0 + 1e-6);
  REQUIRE(fit["dominance"]["first_violation_t"].is_null());
  REQUIRE(fit["omega"].get<double>() == fit["rate"].get<double>());

  const std::string cmp = read_text_file(dir + "/comparison.csv");
  std::size_t rows = 0;
  for (char c : cmp)
    if (c == '\n') ++rows;
  REQUIRE(rows == 202);  // header + 201 samples
  REQUIRE(cmp.rfind("t,E,envelope,ratio\n", 0) == 0);

  // an absurdly small dominance constant must be reported as a violation
  ExperimentConfig tight = cfg;
  tight.fit.dominance_C = 1e-6;
  std::ostringstream os2;
  REQUIRE(guarded(os2, [&] { return cmd_fit(tight, os2, dir); }) ==
          exit_code::dominance_failure);
  const json fit2 = read_json(dir + "/fit.json");
  REQUIRE_FALSE(fit2["dominance"]["holds"].get<bool>());
  REQUIRE(fit2["dominance"]["first_violation_t"].is_number());

  // the wrong model family is flagged as a poor fit
  ExperimentConfig wrong = cfg;
  wrong.fit.model = FitModel::power_log;
  wrong.fit.p = 3.0;
  std::ostringstream os3;
  const int code = guarded(os3, [&] { return cmd_fit(wrong, os3, dir); });
  REQUIRE(code == exit_code::dominance_failure);
  const json fit3 = read_json(dir + "/fit.json");
  REQUIRE(fit3["model"] == "power_log");
  REQUIRE(fit3["exponent"].get<double>() == 1.0);
  REQUIRE(fit3["poor_fit"].get<bool>());
  REQUIRE(fit3.contains("local_slope"));

  std::filesystem::remove_all(dir);
}

TEST_CASE("fit command without a trace maps to a config error") {
  const std::string dir = fresh_dir("cmd_out_fit2");
  detail::ensure_dir(dir);
  std::ostringstream os;
  REQUIRE(guarded(os, [&] {
            return cmd_fit(cfg_from(kLinearDamped), os, dir);
          }) == exit_code::config_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("guarded maps exception families to exit codes") {
  std::ostringstream os;
  REQUIRE(guarded(os, [] { return 7; }) == 7);
  REQUIRE(guarded(os, []() -> int { throw ConfigError("boom"); }) ==
          exit_code::config_error);
  REQUIRE(guarded(os, []() -> int {
            throw UnsupportedBranchError("no branch");
          }) == exit_code::unsupported_branch);
  std::ostringstream os2;
  REQUIRE(guarded(os2, []() -> int { throw std::runtime_error("odd"); }) ==
          exit_code::config_error);
  REQUIRE(os2.str().rfind("error: ", 0) == 0);
}

TEST_CASE("sweep command fans out entries and writes a summary") {
  const ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "coupling": {"kind": "constant", "value": 0.3},
    "initial": {"u2": {"kind": "modes", "coefficients": [1.0]}},
    "time": {"dt": 1e-3, "t_end": 0.5, "sample_stride": 10,
             "keep_states": false},
    "sweep": [
      {"name": "fine", "time": {"dt": 5e-4, "t_end": 0.5,
                                 "sample_stride": 10, "keep_states": false}},
      {"coupling": {"kind": "constant", "value": 0.5}}
    ]
  })");
  const std::string dir = fresh_dir("cmd_out_sweep");
  std::ostringstream os;
  REQUIRE(cmd_sweep(cfg, os, dir, false, 2) == exit_code::ok);

  const json sum = read_json(dir + "/sweep_summary.json");
  REQUIRE(sum["command"] == "sweep");
  REQUIRE(sum["jobs"].get<int>() == 2);
  REQUIRE(sum["all_ok"].get<bool>());
  REQUIRE(sum["entries"].size() == 2);
  REQUIRE(sum["entries"][0]["name"] == "fine");
  REQUIRE(sum["entries"][1]["name"] == "entry_2");
  REQUIRE(sum["entries"][0]["exit_code"].get<int>() == 0);

  const json fine = read_json(dir + "/fine/manifest.json");
  REQUIRE(fine["dt"].get<double>() == 5e-4);
  REQUIRE(fine["steps"].get<int>() == 1000);
  const json second = read_json(dir + "/entry_2/manifest.json");
  REQUIRE(second["dt"].get<double>() == 1e-3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep propagates entry failures and validates entries") {
  ExperimentConfig cfg = cfg_from(R"({
    "schema": 1, "basis": {"modes": 4},
    "coupling": {"kind": "constant", "value": 0.3},
    "initial": {"u2": {"kind": "modes", "coefficients": [1.0]}},
    "time": {"dt": 1e-3, "t_end": 0.05, "keep_states": false},
    "sweep": [
      {"name": "good"},
      {"name": "bad", "coupling": {"kind": "constant", "value": 1.2}}
    ]
  })");
  const std::string dir = fresh_dir("cmd_out_sweep2");
  std::ostringstream os;
  REQUIRE(cmd_sweep(cfg, os, dir) == exit_code::hypothesis_failure);
  const json sum = read_json(dir + "/sweep_summary.json");
  REQUIRE_FALSE(sum["all_ok"].get<bool>());
  REQUIRE(sum["entries"][0]["exit_code"].get<int>() == 0);
  REQUIRE(sum["entries"][1]["exit_code"].get<int>() == 3);
  std::filesystem::remove_all(dir);

  ExperimentConfig empty = cfg;
  empty.sweep_entries.clear();
  std::ostringstream os2;
  REQUIRE_THROWS_AS(cmd_sweep(empty, os2, "cmd_out_sweep3"), ConfigError);

  ExperimentConfig badname = cfg;
  badname.sweep_entries = {json::parse(R"({"name": "bad name!"})")};
  REQUIRE_THROWS_AS(cmd_sweep(badname, os2, "cmd_out_sweep3"), ConfigError);

  ExperimentConfig nested = cfg;
  nested.sweep_entries = {json::parse(R"({"sweep": []})")};
  REQUIRE_THROWS_AS(cmd_sweep(nested, os2, "cmd_out_sweep3"), ConfigError);
  std::filesystem::remove_all("cmd_out_sweep3");
}
