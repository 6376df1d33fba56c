#pragma once

// Batch commands behind the CLI: hypothesis checking, simulation, envelope
// construction, rate fitting, and parameter sweeps.  Every command writes its
// machine-readable artifacts (CSV/JSON) into the experiment's output
// directory and a short human-readable summary to the given stream, then
// returns a process exit code:
//
//   0 ok | 2 config error | 3 hypothesis failure | 4 divergence
//   5 unsupported branch | 6 dominance failure
//
// Re-running a command overwrites bit-identical outputs; the only exception
// is the wall-clock field of manifests, which is kept outside the "hashes"
// identity block.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "petrowave/config.hpp"

namespace petrowave {

namespace exit_code {
constexpr int ok = 0;
constexpr int config_error = 2;
constexpr int hypothesis_failure = 3;
constexpr int divergence = 4;
constexpr int unsupported_branch = 5;
constexpr int dominance_failure = 6;
}  // namespace exit_code

namespace detail {

inline const char* check_description(const std::string& id) {
  if (id == "coupling_smallness") return "sup|a| < min(1/c', 1)";
  if (id == "monotone") return "g is nondecreasing";
  if (id == "linear_growth") return "c1*s <= |g(s)| <= c2*s for s > epsilon";
  if (id == "origin_comparison")
    return "s^2 + g(s)^2 <= G^{-1}(s*g(s)) for s <= epsilon";
  if (id == "derivative_bounds") return "tau1 <= g'(s) <= tau2 on (0, epsilon]";
  if (id == "convexity") return "G is convex and increasing";
  return "";
}

inline GFunction resolve_G(const DampingLaw& law, const EnvelopeOptions& env) {
  return env.cg_from_fit ? make_G(law) : make_G(law, env.c_G);
}

// Damping parameters (p, q) that the decay branches key on.
inline void law_exponents(const DampingSpec& spec, double& p, double& q) {
  if (spec.kind == DampingSpec::Kind::power_log) {
    p = spec.p;
    q = spec.q;
  } else {
    p = 1.0;
    q = 0.0;
  }
}

inline std::string path_join(const std::string& dir, const char* file) {
  return (std::filesystem::path(dir) / file).string();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + dir + ": " +
                             ec.message());
}

}  // namespace detail

struct HypothesisOutcome {
  bool all_pass = true;
  std::vector<std::string> failed;  // condition ids, e.g. "g1.derivative_bounds"
  json report;
};

// Admissibility of the coupling plus the damping hypotheses for each law.
inline HypothesisOutcome evaluate_hypotheses(const ExperimentConfig& cfg) {
  HypothesisOutcome out;
  ModeBasis basis;
  CouplingProfile coupling;
  try {
    basis = make_basis(cfg.length, cfg.modes, cfg.oversample);
    coupling = make_coupling_profile(basis, cfg.coupling);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const Admissibility adm = coupling_admissible(coupling, basis);
  out.report["coupling"] = {
      {"condition", "coupling_smallness"},
      {"description", detail::check_description("coupling_smallness")},
      {"admissible", adm.admissible},
      {"margin", adm.margin},
      {"sup_norm", coupling.sup_norm},
      {"threshold", admissibility_threshold(basis)}};
  if (!adm.admissible) {
    out.all_pass = false;
    out.failed.push_back("coupling_smallness");
  }
  const char* names[2] = {"g1", "g2"};
  const DampingSpec* specs[2] = {&cfg.g1, &cfg.g2};
  for (int i = 0; i < 2; ++i) {
    if (specs[i]->kind == DampingSpec::Kind::none) {
      out.report[names[i]] = {{"present", false}};
      continue;
    }
    std::optional<DampingLaw> law;
    GFunction Gf;
    try {
      law = make_damping_law(*specs[i]);
      Gf = detail::resolve_G(*law, cfg.envelope);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: damping.") + names[i] + ": " +
                        e.what());
    }
    const HypothesisReport rep = check_hypotheses(*law, Gf);
    json checks = json::array();
    for (const auto& c : rep.checks) {
      checks.push_back({{"id", c.id},
                        {"description", detail::check_description(c.id)},
                        {"pass", c.pass},
                        {"worst_margin", c.worst_margin},
                        {"location", c.location}});
      if (!c.pass) out.failed.push_back(std::string(names[i]) + "." + c.id);
    }
    out.report[names[i]] = {
        {"present", true}, {"all_pass", rep.all_pass}, {"checks", checks}};
    if (!rep.all_pass) out.all_pass = false;
  }
  out.report["all_pass"] = out.all_pass;
  return out;
}

inline void print_hypotheses(std::ostream& os, const HypothesisOutcome& h) {
  const auto& c = h.report["coupling"];
  os << "coupling_smallness: "
     << (c["admissible"].get<bool>() ? "PASS" : "FAIL")
     << " (sup|a|=" << c["sup_norm"].get<double>()
     << ", threshold=" << c["threshold"].get<double>()
     << ", margin=" << c["margin"].get<double>() << ")\n";
  for (const char* g : {"g1", "g2"}) {
    const auto& rep = h.report[g];
    if (!rep["present"].get<bool>()) {
      os << g << ": no damping law\n";
      continue;
    }
    for (const auto& chk : rep["checks"])
      os << g << "." << chk["id"].get<std::string>() << ": "
         << (chk["pass"].get<bool>() ? "PASS" : "FAIL")
         << " (worst margin " << chk["worst_margin"].get<double>() << " at s="
         << chk["location"].get<double>() << ")\n";
  }
  os << "hypotheses: " << (h.all_pass ? "ALL PASS" : "FAILED") << "\n";
}

inline int cmd_check(const ExperimentConfig& cfg, std::ostream& os,
                     const std::string& output_dir) {
  detail::ensure_dir(output_dir);
  const HypothesisOutcome h = evaluate_hypotheses(cfg);
  write_text_file(detail::path_join(output_dir, "hypotheses.json"),
                  h.report.dump(2) + "\n");
  print_hypotheses(os, h);
  os << "wrote " << detail::path_join(output_dir, "hypotheses.json") << "\n";
  return h.all_pass ? exit_code::ok : exit_code::hypothesis_failure;
}

inline int cmd_simulate(const ExperimentConfig& cfg, std::ostream& os,
                        const std::string& output_dir, bool force = false) {
  detail::ensure_dir(output_dir);
  const HypothesisOutcome h = evaluate_hypotheses(cfg);
  write_text_file(detail::path_join(output_dir, "hypotheses.json"),
                  h.report.dump(2) + "\n");
  if (!h.all_pass && !force) {
    print_hypotheses(os, h);
    os << "hypothesis check failed; rerun with --force to simulate anyway\n";
    return exit_code::hypothesis_failure;
  }
  const SimConfig sim = assemble(cfg);
  const auto t_start = std::chrono::steady_clock::now();
  const RunResult result = run(sim);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();

  const std::string energy_path = detail::path_join(output_dir, "energy.csv");
  const std::string energy_text = energy_csv_text(result.trace);
  write_text_file(energy_path, energy_text);
  std::string states_hash;
  if (sim.keep_states) {
    const std::string states_text =
        states_csv_text(result.states, sim.basis.mode_count);
    write_text_file(detail::path_join(output_dir, "states.csv"), states_text);
    states_hash = hex64(fnv1a64(states_text));
  }

  const double e_first = result.trace.samples.front().E;
  double drift = 0.0;
  const bool damped = sim.g1.has_value() || sim.g2.has_value();
  for (std::size_t i = 0; i + 1 < result.trace.samples.size(); ++i) {
    const double a = result.trace.samples[i].E;
    const double b = result.trace.samples[i + 1].E;
    drift = std::max(drift, damped ? b - a : std::fabs(b - e_first));
  }
  if (!damped && result.trace.samples.size() == 1) drift = 0.0;
  if (e_first > 0.0) drift /= e_first;

  json manifest;
  manifest["command"] = "simulate";
  manifest["schema"] = cfg.schema;
  manifest["seed"] = cfg.seed;
  manifest["integrator"] =
      sim.integrator == Integrator::rk4 ? "rk4" : "splitting";
  manifest["modes"] = sim.basis.mode_count;
  manifest["dt"] = sim.dt;
  manifest["t_end"] = sim.t_end;
  manifest["sample_stride"] = sim.sample_stride;
  manifest["steps"] = result.steps_taken;
  manifest["samples"] = result.trace.samples.size();
  manifest["diverged"] = result.diverged;
  manifest["diverged_t"] = result.diverged ? json(result.diverged_t) : json();
  manifest["initial_energy"] = e_first;
  manifest["final_energy"] = result.trace.samples.back().E;
  manifest["drift"] = drift;
  manifest["hypotheses_pass"] = h.all_pass;
  manifest["hashes"] = {
      {"config", config_fingerprint(cfg)},
      {"energy_csv", hex64(fnv1a64(energy_text))},
      {"states_csv", sim.keep_states ? json(states_hash) : json()},
      {"trace", result.trace.fingerprint}};
  manifest["wall_ms"] = wall_ms;
  write_text_file(detail::path_join(output_dir, "manifest.json"),
                  manifest.dump(2) + "\n");

  os << "simulate: modes=" << sim.basis.mode_count << " dt=" << sim.dt
     << " steps=" << result.steps_taken
     << " E0=" << e_first
     << " E_end=" << result.trace.samples.back().E << " drift=" << drift
     << "\n";
  os << "wrote " << energy_path << "\n";
  if (result.diverged) {
    os << "diverged at t=" << result.diverged_t << " (partial outputs kept)\n";
    return exit_code::divergence;
  }
  return exit_code::ok;
}

namespace detail {

struct EnvelopeSetup {
  DampingLaw law;
  GFunction Gf;
  double p = 1.0, q = 0.0;
  double omega = 1.0;
  double E0 = 1.0;
  bool omega_fitted = false;
};

// Resolves the damping law, G, omega, and E0 shared by envelope and fit.
inline EnvelopeSetup resolve_envelope(const ExperimentConfig& cfg,
                                      const EnergyTrace* trace) {
  EnvelopeSetup s;
  const DampingSpec* spec = nullptr;
  if (cfg.g1.kind != DampingSpec::Kind::none) {
    spec = &cfg.g1;
  } else if (cfg.g2.kind != DampingSpec::Kind::none) {
    spec = &cfg.g2;
  } else {
    throw ConfigError("config: envelope requires a damping law (g1 or g2)");
  }
  law_exponents(*spec, s.p, s.q);
  try {
    s.law = *make_damping_law(*spec);
    s.Gf = resolve_G(s.law, cfg.envelope);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.envelope.E0) {
    s.E0 = *cfg.envelope.E0;
  } else if (trace && !trace->samples.empty()) {
    s.E0 = trace->samples.front().E;
  } else {
    throw ConfigError(
        "config: envelope.E0 missing and no simulated trace available");
  }
  if (!(s.E0 > 0.0))
    throw ConfigError("config: envelope initial energy must be positive");
  if (cfg.envelope.omega_from_fit) {
    if (!trace || trace->samples.empty())
      throw ConfigError(
          "config: envelope.omega=\"fit\" requires a simulated trace");
    const FitResult fr = fit_exponential(*trace, late_window(*trace, false));
    if (!(fr.rate > 0.0))
      throw ConfigError(
          "config: fitted omega is not positive; supply envelope.omega");
    s.omega = fr.rate;
    s.omega_fitted = true;
  } else {
    s.omega = cfg.envelope.omega;
  }
  return s;
}

inline std::optional<EnergyTrace> try_read_trace(const std::string& dir) {
  const std::string path = path_join(dir, "energy.csv");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_energy_csv(path);
}

inline json rate_to_json(const RateDescriptor& r) {
  return {{"branch", rate_branch_name(r.branch)},
          {"exponents", {r.exponent1, r.exponent2}},
          {"formula", r.formula},
          {"ambiguous", r.ambiguous}};
}

}  // namespace detail

inline int cmd_envelope(const ExperimentConfig& cfg, std::ostream& os,
                        const std::string& output_dir) {
  detail::ensure_dir(output_dir);
  const std::optional<EnergyTrace> trace = detail::try_read_trace(output_dir);
  const detail::EnvelopeSetup setup =
      detail::resolve_envelope(cfg, trace ? &*trace : nullptr);
  const RateDescriptor rate = asymptotic_rate(setup.p, setup.q);
  const DecayEnvelope env = make_envelope(setup.Gf, cfg.envelope.eps0,
                                          setup.omega, setup.E0,
                                          cfg.envelope.lambda);
  std::vector<double> ts;
  if (trace) {
    for (const auto& s : trace->samples) ts.push_back(s.t);
  } else {
    const double t_max =
        cfg.envelope.grid_t_max > 0.0 ? cfg.envelope.grid_t_max : cfg.t_end;
    const int n = std::max(2, cfg.envelope.grid_points);
    for (int i = 0; i < n; ++i)
      ts.push_back(t_max * static_cast<double>(i) / (n - 1));
  }
  std::vector<double> values(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) values[i] = env.value(ts[i]);
  write_text_file(detail::path_join(output_dir, "envelope.csv"),
                  envelope_csv_text(ts, values));

  json out;
  out["command"] = "envelope";
  out["rate"] = detail::rate_to_json(rate);
  out["omega"] = setup.omega;
  out["omega_fitted"] = setup.omega_fitted;
  out["eps0"] = cfg.envelope.eps0;
  out["lambda"] = cfg.envelope.lambda;
  out["E0"] = setup.E0;
  out["c_G"] = setup.Gf.c_G;
  out["plateau_end"] = env.plateau_end();
  out["scale"] = env.scale();
  out["grid_points"] = ts.size();
  out["config_fingerprint"] = config_fingerprint(cfg);
  write_text_file(detail::path_join(output_dir, "rate.json"),
                  out.dump(2) + "\n");

  os << "envelope: branch=" << rate_branch_name(rate.branch) << " formula=\""
     << rate.formula << "\" omega=" << setup.omega << " E0=" << setup.E0
     << " plateau_end=" << env.plateau_end() << "\n";
  if (rate.ambiguous)
    os << "note: the source family's case label and branch formula disagree "
          "here; formula reported from the exponent pair\n";
  os << "wrote " << detail::path_join(output_dir, "envelope.csv") << "\n";
  return exit_code::ok;
}

inline int cmd_fit(const ExperimentConfig& cfg, std::ostream& os,
                   const std::string& output_dir) {
  detail::ensure_dir(output_dir);
  EnergyTrace trace;
  try {
    trace = read_energy_csv(detail::path_join(output_dir, "energy.csv"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("fit: ") + e.what());
  }
  if (trace.samples.empty()) throw ConfigError("fit: trace is empty");

  FitResult fr;
  std::optional<double> local_slope;
  FitWindow window;
  try {
    if (cfg.fit.model == FitModel::power_log) {
      window = cfg.fit.window ? *cfg.fit.window : late_window(trace, true);
      fr = fit_power_log(trace, window, cfg.fit.p, cfg.fit.q);
      local_slope = -log_log_slope(trace, window);
    } else {
      window = cfg.fit.window ? *cfg.fit.window : late_window(trace, false);
      fr = fit_exponential(trace, window);
    }
  } catch (const std::exception& e) {
    throw ConfigError(std::string("fit: ") + e.what());
  }

  const detail::EnvelopeSetup setup = detail::resolve_envelope(cfg, &trace);
  const DecayEnvelope env = make_envelope(setup.Gf, cfg.envelope.eps0,
                                          setup.omega, setup.E0,
                                          cfg.envelope.lambda);
  const double C =
      cfg.fit.dominance_C ? *cfg.fit.dominance_C : fr.C / setup.E0;
  if (!(C > 0.0)) throw ConfigError("fit: dominance constant must be positive");
  const DominanceReport dom = dominance_check(trace, env, C, window);

  std::vector<double> ts, es, envs;
  for (const auto& s : trace.samples) {
    ts.push_back(s.t);
    es.push_back(s.E);
    envs.push_back(env.value(s.t));
  }
  write_text_file(detail::path_join(output_dir, "comparison.csv"),
                  comparison_csv_text(ts, es, envs, C));

  json out;
  out["command"] = "fit";
  out["model"] = cfg.fit.model == FitModel::power_log ? "power_log"
                                                      : "exponential";
  out["C"] = fr.C;
  if (cfg.fit.model == FitModel::power_log) {
    out["exponent"] = fr.exponent;
    out["log_exponent"] = fr.log_exponent;
    out["p"] = cfg.fit.p;
    out["q"] = cfg.fit.q;
    out["local_slope"] = *local_slope;
  } else {
    out["rate"] = fr.rate;
  }
  out["residual"] = fr.residual;
  out["poor_fit"] = fr.poor_fit;
  out["window"] = {fr.window.t_min, fr.window.t_max};
  out["sample_count"] = fr.sample_count;
  out["omega"] = setup.omega;
  out["E0"] = setup.E0;
  out["dominance"] = {
      {"C", C},
      {"holds", dom.holds},
      {"worst_ratio", dom.worst_ratio},
      {"max_violation", dom.max_violation},
      {"first_violation_t",
       dom.first_violation_t ? json(*dom.first_violation_t) : json()},
      {"window", {window.t_min, window.t_max}},
      {"sample_count", dom.sample_count}};
  out["config_fingerprint"] = config_fingerprint(cfg);
  write_text_file(detail::path_join(output_dir, "fit.json"),
                  out.dump(2) + "\n");

  os << "fit: model=" << out["model"].get<std::string>() << " C=" << fr.C;
  if (cfg.fit.model == FitModel::power_log)
    os << " exponents=(" << fr.exponent << "," << fr.log_exponent
       << ") local_slope=" << *local_slope;
  else
    os << " omega=" << fr.rate;
  os << " residual=" << fr.residual << (fr.poor_fit ? " (poor fit)" : "")
     << "\n";
  os << "dominance: " << (dom.holds ? "HOLDS" : "VIOLATED")
     << " (worst ratio " << dom.worst_ratio << " over ["
     << window.t_min << ", " << window.t_max << "])\n";
  os << "wrote " << detail::path_join(output_dir, "fit.json") << "\n";
  return dom.holds ? exit_code::ok : exit_code::dominance_failure;
}

// Mapping of exceptions to the stable exit-code contract.
template <typename F>
inline int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return exit_code::config_error;
  } catch (const UnsupportedBranchError& e) {
    err << e.what() << "\n";
    return exit_code::unsupported_branch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::config_error;
  }
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& os,
                     const std::string& output_dir, bool force = false,
                     int jobs = 1) {
  if (cfg.sweep_entries.empty())
    throw ConfigError("sweep: config has no sweep entries");
  detail::ensure_dir(output_dir);
  json base = cfg.raw;
  base.erase("sweep");

  struct Entry {
    std::string name;
    ExperimentConfig config;
    std::string dir;
    int code = 0;
    std::string log;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < cfg.sweep_entries.size(); ++i) {
    json patch = cfg.sweep_entries[i];
    std::string name = "entry_" + std::to_string(i + 1);
    if (patch.contains("name")) {
      if (!patch["name"].is_string())
        throw ConfigError("sweep: entry name must be a string");
      name = patch["name"].get<std::string>();
      patch.erase("name");
    }
    if (name.empty() ||
        name.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                               "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos)
      throw ConfigError("sweep: entry name '" + name +
                        "' must match [A-Za-z0-9_-]+");
    if (patch.contains("sweep"))
      throw ConfigError("sweep: entries may not nest sweeps");
    json doc = base;
    doc.merge_patch(patch);
    Entry e;
    e.name = name;
    e.config = parse_config(doc);  // re-validates the merged document
    e.dir = (std::filesystem::path(output_dir) / name).string();
    e.config.output_dir = e.dir;
    entries.push_back(std::move(e));
  }

  // Pre-create directories serially to avoid racing on shared parents.
  for (auto& e : entries) detail::ensure_dir(e.dir);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      Entry& e = entries[i];
      std::ostringstream log;
      e.code = guarded(log, [&]() {
        int code = cmd_simulate(e.config, log, e.dir, force);
        if (code != exit_code::ok) return code;
        const bool damped = e.config.g1.kind != DampingSpec::Kind::none ||
                            e.config.g2.kind != DampingSpec::Kind::none;
        if (damped) {
          code = cmd_envelope(e.config, log, e.dir);
          if (code != exit_code::ok) return code;
          code = cmd_fit(e.config, log, e.dir);
        }
        return code;
      });
      e.log = log.str();
    }
  };
  const int n_jobs =
      std::max(1, std::min<int>(jobs, static_cast<int>(entries.size())));
  std::vector<std::thread> pool;
  for (int j = 0; j < n_jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  json summary;
  summary["command"] = "sweep";
  summary["jobs"] = n_jobs;
  summary["entries"] = json::array();
  int first_bad = exit_code::ok;
  for (const auto& e : entries) {
    summary["entries"].push_back(
        {{"name", e.name}, {"dir", e.dir}, {"exit_code", e.code}});
    if (e.code != exit_code::ok && first_bad == exit_code::ok)
      first_bad = e.code;
    os << "sweep[" << e.name << "]: exit " << e.code << "\n";
    std::istringstream lines(e.log);
    std::string line;
    while (std::getline(lines, line)) os << "  " << line << "\n";
  }
  summary["all_ok"] = first_bad == exit_code::ok;
  summary["config_fingerprint"] = config_fingerprint(cfg);
  write_text_file(detail::path_join(output_dir, "sweep_summary.json"),
                  summary.dump(2) + "\n");
  os << "wrote " << detail::path_join(output_dir, "sweep_summary.json")
     << "\n";
  return first_bad;
}

}  // namespace petrowave
