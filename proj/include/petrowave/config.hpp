#pragma once

// Experiment configuration: a single versioned JSON document.  Unknown keys
// are rejected at every level so that a config file is always a faithful
// record of the experiment it produced.

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "petrowave/fitting.hpp"
#include "petrowave/galerkin.hpp"
#include "petrowave/io.hpp"

namespace petrowave {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CouplingSpec {
  enum class Kind { zero, constant, table };
  Kind kind = Kind::zero;
  double value = 0.0;                // constant
  std::vector<double> xs, values;    // table breakpoints
};

struct DampingSpec {
  enum class Kind { none, linear, power_log };
  Kind kind = Kind::none;
  double p = 1.0, q = 0.0, epsilon = 1.0;
};

struct InitialSpec {
  enum class Kind { zero, modes, profile };
  Kind kind = Kind::zero;
  std::vector<double> coefficients;
  std::string profile;  // currently: "parabola" = amplitude * x * (L - x)
  double amplitude = 1.0;
};

struct EnvelopeOptions {
  bool omega_from_fit = true;  // "fit": estimate omega from the trace
  double omega = 1.0;
  bool cg_from_fit = true;  // "fit": calibrate c_G from the damping law
  double c_G = 0.5;
  double eps0 = 0.01;
  double lambda = 0.0;
  std::optional<double> E0;  // default: first trace sample
  double grid_t_max = -1.0;  // traceless grids: default t_end
  int grid_points = 201;
};

struct FitOptions {
  FitModel model = FitModel::exponential;
  std::optional<FitWindow> window;
  double p = 3.0, q = 0.0;             // power_log exponent source
  std::optional<double> dominance_C;   // default: fitted C / E0
};

struct ExperimentConfig {
  int schema = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  // basis
  double length = 1.0;
  int modes = 8;
  int oversample = 4;
  CouplingSpec coupling;
  DampingSpec g1, g2;
  InitialSpec u1, u2, v1, v2;
  // time stepping
  double dt = 1e-3;
  double t_end = 1.0;
  Integrator integrator = Integrator::rk4;
  int sample_stride = 1;
  bool keep_states = true;
  EnvelopeOptions envelope;
  FitOptions fit;
  std::vector<json> sweep_entries;
  json raw;  // normalized document (sorted keys) — fingerprint source
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const char* where,
                                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(std::string("config: unknown key '") + it.key() +
                        "' in " + where);
  }
}

inline const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double require_number(const json& obj, const char* where,
                             const char* key) {
  const json* v = find(obj, key);
  if (!v || !v->is_number())
    throw ConfigError(std::string("config: ") + where + "." + key +
                      " must be a number");
  return v->get<double>();
}

inline double number_or(const json& obj, const char* where, const char* key,
                        double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number())
    throw ConfigError(std::string("config: ") + where + "." + key +
                      " must be a number");
  return v->get<double>();
}

inline int int_or(const json& obj, const char* where, const char* key,
                  int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw ConfigError(std::string("config: ") + where + "." + key +
                      " must be an integer");
  return v->get<int>();
}

inline bool bool_or(const json& obj, const char* where, const char* key,
                    bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean())
    throw ConfigError(std::string("config: ") + where + "." + key +
                      " must be a boolean");
  return v->get<bool>();
}

inline std::string string_or(const json& obj, const char* where,
                             const char* key, const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string())
    throw ConfigError(std::string("config: ") + where + "." + key +
                      " must be a string");
  return v->get<std::string>();
}

inline std::vector<double> number_list(const json& v, const char* where) {
  if (!v.is_array())
    throw ConfigError(std::string("config: ") + where + " must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError(std::string("config: ") + where +
                        " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline CouplingSpec parse_coupling(const json& obj) {
  reject_unknown_keys(obj, "coupling", {"kind", "value", "x", "a"});
  CouplingSpec out;
  const std::string kind = string_or(obj, "coupling", "kind", "zero");
  if (kind == "zero") {
    out.kind = CouplingSpec::Kind::zero;
  } else if (kind == "constant") {
    out.kind = CouplingSpec::Kind::constant;
    out.value = require_number(obj, "coupling", "value");
  } else if (kind == "table") {
    out.kind = CouplingSpec::Kind::table;
    const json* xs = find(obj, "x");
    const json* as = find(obj, "a");
    if (!xs || !as)
      throw ConfigError("config: coupling table requires 'x' and 'a' arrays");
    out.xs = number_list(*xs, "coupling.x");
    out.values = number_list(*as, "coupling.a");
  } else {
    throw ConfigError("config: coupling.kind must be zero|constant|table");
  }
  return out;
}

inline DampingSpec parse_damping(const json& obj, const char* where) {
  reject_unknown_keys(obj, where, {"kind", "p", "q", "epsilon"});
  DampingSpec out;
  const std::string kind = string_or(obj, where, "kind", "none");
  if (kind == "none") {
    out.kind = DampingSpec::Kind::none;
  } else if (kind == "linear") {
    out.kind = DampingSpec::Kind::linear;
  } else if (kind == "power_log") {
    out.kind = DampingSpec::Kind::power_log;
    out.p = require_number(obj, where, "p");
    out.q = number_or(obj, where, "q", 0.0);
    out.epsilon = number_or(obj, where, "epsilon", 1.0);
  } else {
    throw ConfigError(std::string("config: ") + where +
                      ".kind must be none|linear|power_log");
  }
  return out;
}

inline InitialSpec parse_initial(const json& obj, const char* where) {
  reject_unknown_keys(obj, where,
                      {"kind", "coefficients", "profile", "amplitude"});
  InitialSpec out;
  const std::string kind = string_or(obj, where, "kind", "zero");
  if (kind == "zero") {
    out.kind = InitialSpec::Kind::zero;
  } else if (kind == "modes") {
    out.kind = InitialSpec::Kind::modes;
    const json* c = find(obj, "coefficients");
    if (!c)
      throw ConfigError(std::string("config: ") + where +
                        " of kind 'modes' requires 'coefficients'");
    out.coefficients = number_list(*c, where);
  } else if (kind == "profile") {
    out.kind = InitialSpec::Kind::profile;
    out.profile = string_or(obj, where, "profile", "parabola");
    if (out.profile != "parabola")
      throw ConfigError(std::string("config: ") + where +
                        ".profile: only 'parabola' is available");
    out.amplitude = number_or(obj, where, "amplitude", 1.0);
  } else {
    throw ConfigError(std::string("config: ") + where +
                      ".kind must be zero|modes|profile");
  }
  return out;
}

inline EnvelopeOptions parse_envelope(const json& obj) {
  reject_unknown_keys(
      obj, "envelope",
      {"omega", "c_G", "eps0", "lambda", "E0", "grid_t_max", "grid_points"});
  EnvelopeOptions out;
  if (const json* w = find(obj, "omega")) {
    if (w->is_string()) {
      if (w->get<std::string>() != "fit")
        throw ConfigError("config: envelope.omega must be a number or \"fit\"");
      out.omega_from_fit = true;
    } else if (w->is_number()) {
      out.omega_from_fit = false;
      out.omega = w->get<double>();
    } else {
      throw ConfigError("config: envelope.omega must be a number or \"fit\"");
    }
  }
  if (const json* cg = find(obj, "c_G")) {
    if (cg->is_string()) {
      if (cg->get<std::string>() != "fit")
        throw ConfigError("config: envelope.c_G must be a number or \"fit\"");
      out.cg_from_fit = true;
    } else if (cg->is_number()) {
      out.cg_from_fit = false;
      out.c_G = cg->get<double>();
    } else {
      throw ConfigError("config: envelope.c_G must be a number or \"fit\"");
    }
  }
  out.eps0 = number_or(obj, "envelope", "eps0", out.eps0);
  out.lambda = number_or(obj, "envelope", "lambda", out.lambda);
  if (const json* e0 = find(obj, "E0")) {
    if (!e0->is_number())
      throw ConfigError("config: envelope.E0 must be a number");
    out.E0 = e0->get<double>();
  }
  out.grid_t_max = number_or(obj, "envelope", "grid_t_max", out.grid_t_max);
  out.grid_points = int_or(obj, "envelope", "grid_points", out.grid_points);
  return out;
}

inline FitOptions parse_fit(const json& obj) {
  reject_unknown_keys(obj, "fit",
                      {"model", "window", "p", "q", "dominance_C"});
  FitOptions out;
  const std::string model = string_or(obj, "fit", "model", "exponential");
  if (model == "exponential") {
    out.model = FitModel::exponential;
  } else if (model == "power_log") {
    out.model = FitModel::power_log;
  } else {
    throw ConfigError("config: fit.model must be exponential|power_log");
  }
  if (const json* w = find(obj, "window")) {
    auto lim = number_list(*w, "fit.window");
    if (lim.size() != 2 || !(lim[0] < lim[1]))
      throw ConfigError("config: fit.window must be [t_min, t_max]");
    out.window = FitWindow{lim[0], lim[1]};
  }
  out.p = number_or(obj, "fit", "p", out.p);
  out.q = number_or(obj, "fit", "q", out.q);
  if (const json* c = find(obj, "dominance_C")) {
    if (c->is_string()) {
      if (c->get<std::string>() != "fit")
        throw ConfigError("config: fit.dominance_C must be a number or \"fit\"");
    } else if (c->is_number()) {
      out.dominance_C = c->get<double>();
    } else {
      throw ConfigError("config: fit.dominance_C must be a number or \"fit\"");
    }
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("config: document must be an object");
  reject_unknown_keys(doc, "top level",
                      {"schema", "seed", "output_dir", "basis", "coupling",
                       "damping", "initial", "time", "envelope", "fit",
                       "sweep"});
  ExperimentConfig cfg;
  const json* schema = find(doc, "schema");
  if (!schema || !schema->is_number_integer() || schema->get<int>() != 1)
    throw ConfigError("config: 'schema' must be the integer 1");
  if (const json* seed = find(doc, "seed")) {
    if (!seed->is_number_unsigned() && !seed->is_number_integer())
      throw ConfigError("config: seed must be a nonnegative integer");
    const long long s = seed->get<long long>();
    if (s < 0) throw ConfigError("config: seed must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  cfg.output_dir = string_or(doc, "top level", "output_dir", cfg.output_dir);

  const json* basis = find(doc, "basis");
  if (!basis || !basis->is_object())
    throw ConfigError("config: 'basis' object is required");
  reject_unknown_keys(*basis, "basis", {"length", "modes", "oversample"});
  cfg.length = number_or(*basis, "basis", "length", 1.0);
  cfg.modes = int_or(*basis, "basis", "modes", 8);
  cfg.oversample = int_or(*basis, "basis", "oversample", 4);

  if (const json* c = find(doc, "coupling")) {
    if (!c->is_object()) throw ConfigError("config: coupling must be an object");
    cfg.coupling = parse_coupling(*c);
  }
  if (const json* d = find(doc, "damping")) {
    if (!d->is_object()) throw ConfigError("config: damping must be an object");
    reject_unknown_keys(*d, "damping", {"g1", "g2"});
    if (const json* g = find(*d, "g1")) cfg.g1 = parse_damping(*g, "damping.g1");
    if (const json* g = find(*d, "g2")) cfg.g2 = parse_damping(*g, "damping.g2");
  }
  if (const json* ini = find(doc, "initial")) {
    if (!ini->is_object())
      throw ConfigError("config: initial must be an object");
    reject_unknown_keys(*ini, "initial", {"u1", "u2", "v1", "v2"});
    if (const json* f = find(*ini, "u1")) cfg.u1 = parse_initial(*f, "initial.u1");
    if (const json* f = find(*ini, "u2")) cfg.u2 = parse_initial(*f, "initial.u2");
    if (const json* f = find(*ini, "v1")) cfg.v1 = parse_initial(*f, "initial.v1");
    if (const json* f = find(*ini, "v2")) cfg.v2 = parse_initial(*f, "initial.v2");
  }

  const json* time = find(doc, "time");
  if (!time || !time->is_object())
    throw ConfigError("config: 'time' object is required");
  reject_unknown_keys(
      *time, "time",
      {"dt", "t_end", "integrator", "sample_stride", "keep_states"});
  cfg.dt = require_number(*time, "time", "dt");
  cfg.t_end = require_number(*time, "time", "t_end");
  const std::string integ = string_or(*time, "time", "integrator", "rk4");
  if (integ == "rk4") {
    cfg.integrator = Integrator::rk4;
  } else if (integ == "splitting") {
    cfg.integrator = Integrator::splitting;
  } else {
    throw ConfigError("config: time.integrator must be rk4|splitting");
  }
  cfg.sample_stride = int_or(*time, "time", "sample_stride", 1);
  cfg.keep_states = bool_or(*time, "time", "keep_states", true);

  if (const json* e = find(doc, "envelope")) {
    if (!e->is_object())
      throw ConfigError("config: envelope must be an object");
    cfg.envelope = parse_envelope(*e);
  }
  if (const json* f = find(doc, "fit")) {
    if (!f->is_object()) throw ConfigError("config: fit must be an object");
    cfg.fit = parse_fit(*f);
  }
  if (const json* sw = find(doc, "sweep")) {
    if (!sw->is_array()) throw ConfigError("config: sweep must be an array");
    for (const auto& entry : *sw) {
      if (!entry.is_object())
        throw ConfigError("config: sweep entries must be objects");
      cfg.sweep_entries.push_back(entry);
    }
  }
  cfg.raw = doc;
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config_text(text);
}

inline std::string config_fingerprint(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(cfg.raw.dump()));
}

// --- Assembly of runtime objects from the parsed document. ---------------

inline CouplingProfile make_coupling_profile(const ModeBasis& basis,
                                             const CouplingSpec& spec) {
  switch (spec.kind) {
    case CouplingSpec::Kind::zero:
      return make_zero_coupling(basis);
    case CouplingSpec::Kind::constant:
      return make_constant_coupling(basis, spec.value);
    case CouplingSpec::Kind::table:
      return make_table_coupling(basis, spec.xs, spec.values);
  }
  throw ConfigError("config: bad coupling kind");
}

inline std::optional<DampingLaw> make_damping_law(const DampingSpec& spec) {
  switch (spec.kind) {
    case DampingSpec::Kind::none:
      return std::nullopt;
    case DampingSpec::Kind::linear:
      return make_linear();
    case DampingSpec::Kind::power_log:
      return make_power_log(spec.p, spec.q, spec.epsilon);
  }
  throw ConfigError("config: bad damping kind");
}

inline SpectralField make_initial_field(const ModeBasis& basis,
                                        const InitialSpec& spec) {
  switch (spec.kind) {
    case InitialSpec::Kind::zero:
      return project_initial(basis, std::vector<double>{});
    case InitialSpec::Kind::modes:
      return project_initial(basis, spec.coefficients);
    case InitialSpec::Kind::profile: {
      const double amp = spec.amplitude;
      const double L = basis.length;
      return project_initial(
          basis, [amp, L](double x) { return amp * x * (L - x); });
    }
  }
  throw ConfigError("config: bad initial kind");
}

// Builds the complete simulation setup.  Domain-level validation errors
// (basis constraints, damping domain, stability guard) surface as
// ConfigError so the caller maps them to the config-error exit path.
inline SimConfig assemble(const ExperimentConfig& cfg) {
  try {
    SimConfig sim;
    sim.basis = make_basis(cfg.length, cfg.modes, cfg.oversample);
    sim.coupling = make_coupling_profile(sim.basis, cfg.coupling);
    sim.g1 = make_damping_law(cfg.g1);
    sim.g2 = make_damping_law(cfg.g2);
    sim.initial = make_state(cfg.modes);
    sim.initial.u1 = make_initial_field(sim.basis, cfg.u1);
    sim.initial.u2 = make_initial_field(sim.basis, cfg.u2);
    sim.initial.v1 = make_initial_field(sim.basis, cfg.v1);
    sim.initial.v2 = make_initial_field(sim.basis, cfg.v2);
    sim.dt = cfg.dt;
    sim.t_end = cfg.t_end;
    sim.integrator = cfg.integrator;
    sim.sample_stride = cfg.sample_stride;
    sim.keep_states = cfg.keep_states;
    validate(sim);
    return sim;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace petrowave
