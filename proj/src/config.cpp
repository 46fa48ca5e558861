// Copyright 2026 The cqed-thermometry Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cqed/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cqed/errors.hpp"

namespace cqed {
namespace {

std::string anchor(const std::string& source, const YAML::Mark& mark) {
  if (mark.is_null()) return source;
  return source + ": line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1);
}

// Strict view of one YAML mapping. Every key read is recorded so that
// finish() can reject anything left over.
class Block {
 public:
  Block(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_.Mark(), "'" + path_ + "' must be a mapping");
  }

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& msg) const {
    throw ConfigError(anchor(source_, mark) + ": " + msg);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    const YAML::Node v = node_[key];
    return v.IsDefined() && !v.IsNull();
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  YAML::Node require(const std::string& key) {
    if (!has(key)) fail(node_.Mark(), "missing required key '" + key_path(key) + "'");
    return node_[key];
  }

  template <class T>
  T as(const YAML::Node& v, const std::string& key) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v.Mark(), "'" + key_path(key) + "' has the wrong type");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? as<T>(node_[key], key) : fallback;
  }

  template <class T>
  T need(const std::string& key) {
    return as<T>(require(key), key);
  }

  double number(const std::string& key, double fallback) {
    const double v = get<double>(key, fallback);
    if (std::isnan(v)) fail(node_[key].Mark(), "'" + key_path(key) + "' is NaN");
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as<double>(node_[key], key);
  }

  std::vector<double> numbers(const std::string& key) {
    const YAML::Node v = raw(key);
    if (!v.IsDefined() || v.IsNull()) return {};
    if (v.IsScalar()) return {as<double>(v, key)};
    if (!v.IsSequence()) fail(v.Mark(), "'" + key_path(key) + "' must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& item : v) out.push_back(as<double>(item, key));
    return out;
  }

  Block child(const std::string& key) {
    seen_.insert(key);
    YAML::Node v = node_[key];
    if (!v.IsDefined() || v.IsNull()) v = YAML::Node(YAML::NodeType::Map);
    return Block(v, key_path(key), source_);
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(kv.first.Mark(), "unknown key '" + key_path(key) + "'");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> seen_;
};

void positive(Block& b, const std::string& key, double v) {
  if (!(v > 0.0)) b.fail(b.node()[key].Mark(), "'" + b.key_path(key) + "' must be positive");
}

void non_negative(Block& b, const std::string& key, double v) {
  if (!(v >= 0.0)) b.fail(b.node()[key].Mark(), "'" + b.key_path(key) + "' must be non-negative");
}

DeviceParams parse_device(Block b) {
  DeviceParams p;
  p.nu_r = Frequency::ghz(b.need<double>("nu_r_GHz"));
  p.kappa = Frequency::mhz(b.need<double>("kappa_MHz"));
  p.gamma = Frequency::mhz(b.need<double>("gamma_MHz"));
  p.g_ge = Frequency::mhz(b.need<double>("g_MHz"));
  p.E_C = Frequency::ghz(b.number("E_C_GHz", p.E_C.ghz()));
  p.E_J_max = Frequency::ghz(b.number("E_J_max_GHz", p.E_J_max.ghz()));
  p.flux = b.number("flux", p.flux);
  // An explicit null selects flux tuning.
  const YAML::Node det = b.raw("detuning_GHz");
  if (!det.IsDefined()) {
    p.detuning = Frequency::ghz(0.0);
  } else if (det.IsNull()) {
    p.detuning.reset();
  } else {
    p.detuning = Frequency::ghz(b.as<double>(det, "detuning_GHz"));
  }
  if (auto gp = b.optional_number("gamma_phi_MHz")) p.gamma_phi = Frequency::mhz(*gp);
  p.coupling_ratios = b.numbers("coupling_ratios");

  positive(b, "nu_r_GHz", p.nu_r.ghz());
  non_negative(b, "kappa_MHz", p.kappa.mhz());
  non_negative(b, "gamma_MHz", p.gamma.mhz());
  non_negative(b, "g_MHz", p.g_ge.mhz());
  if (p.gamma_phi) non_negative(b, "gamma_phi_MHz", p.gamma_phi->mhz());
  b.finish();
  try {
    p.validate();
  } catch (const ConfigError& e) {
    b.fail(b.node().Mark(), e.what());
  }
  return p;
}

GridSpec parse_grid(Block b, const std::string& lo, const std::string& hi, GridSpec fallback) {
  GridSpec g;
  g.start = b.number(lo, fallback.start);
  g.stop = b.number(hi, fallback.stop);
  g.points = b.get<int>("points", fallback.points);
  if (!(g.stop > g.start)) b.fail(b.node().Mark(), "'" + b.key_path(hi) + "' must exceed '" + b.key_path(lo) + "'");
  if (g.points < 2) b.fail(b.node().Mark(), "'" + b.key_path("points") + "' must be at least 2");
  b.finish();
  return g;
}

ExperimentKind parse_kind(Block& b) {
  const YAML::Node v = b.require("type");
  const std::string s = b.as<std::string>(v, "type");
  if (s == "spectrum") return ExperimentKind::spectrum;
  if (s == "rabi") return ExperimentKind::rabi;
  if (s == "fit_spectrum") return ExperimentKind::fit_spectrum;
  if (s == "fit_rabi") return ExperimentKind::fit_rabi;
  if (s == "sweep") return ExperimentKind::sweep;
  if (s == "crossover") return ExperimentKind::crossover;
  b.fail(v.Mark(), "unknown experiment type '" + s +
                       "' (expected spectrum, rabi, fit_spectrum, fit_rabi, sweep or crossover)");
}

RabiInitial parse_initial(Block& b, const YAML::Node& v) {
  const std::string s = b.as<std::string>(v, "initial");
  if (s == "ground") return RabiInitial::ground;
  if (s == "pi_pulse") return RabiInitial::pi_pulse;
  b.fail(v.Mark(), "unknown initial state '" + s + "' (expected ground or pi_pulse)");
}

void parse_occupation(Block& b, ExperimentConfig& e, const DeviceParams& p) {
  const bool by_n = b.has("n_th");
  const bool by_t = b.has("temperature_mK");
  if (by_n == by_t) b.fail(b.node().Mark(), "give exactly one of 'experiment.n_th' or 'experiment.temperature_mK'");
  if (by_n) {
    e.n_th = b.numbers("n_th");
    for (double n : e.n_th) {
      if (!(n >= 0.0) || !std::isfinite(n)) b.fail(b.node()["n_th"].Mark(), "n_th values must be finite and >= 0");
    }
  } else {
    e.temperature_mk = b.numbers("temperature_mK");
    for (double t : e.temperature_mk) {
      if (!(t >= 0.0) || !std::isfinite(t)) {
        b.fail(b.node()["temperature_mK"].Mark(), "temperatures must be finite and >= 0");
      }
      e.n_th.push_back(nth_from_temperature(t * 1e-3, p.nu_r.ghz()));
    }
  }
  if (e.n_th.empty()) b.fail(b.node().Mark(), "the occupation list is empty");
}

void parse_calibration(Block& b, ExperimentConfig& e) {
  if (!b.has("calibration")) return;
  Block c = b.child("calibration");
  e.calibration_table = c.need<std::string>("table");
  e.calibration_noise_dbm_hz = c.need<double>("noise_dBm_Hz");
  c.finish();
}

ExperimentConfig parse_experiment(Block b, const DeviceParams& p) {
  ExperimentConfig e;
  e.kind = parse_kind(b);
  const GridSpec freq_default{p.nu_r.ghz() - 0.15, p.nu_r.ghz() + 0.15, 801};
  const bool spectral = e.kind == ExperimentKind::spectrum || e.kind == ExperimentKind::sweep ||
                        e.kind == ExperimentKind::crossover;
  const bool fit = e.kind == ExperimentKind::fit_spectrum || e.kind == ExperimentKind::fit_rabi;
  const bool timed = e.kind == ExperimentKind::rabi || e.kind == ExperimentKind::fit_rabi;

  if (e.kind == ExperimentKind::sweep) {
    e.noise_dbm_hz = b.numbers("noise_dBm_Hz");
    if (e.noise_dbm_hz.empty()) b.fail(b.node().Mark(), "missing required key 'experiment.noise_dBm_Hz'");
    e.n0 = b.number("n0", 0.0);
    non_negative(b, "n0", e.n0);
    for (double s : e.noise_dbm_hz) e.n_th.push_back(nth_from_noise(s, p.nu_r.ghz(), e.n0));
  } else if (!fit) {
    parse_occupation(b, e, p);
  }

  if (spectral) e.grid = parse_grid(b.child("grid"), "start_GHz", "stop_GHz", freq_default);
  if (e.kind == ExperimentKind::spectrum || e.kind == ExperimentKind::sweep || e.kind == ExperimentKind::fit_spectrum) {
    e.normalize = b.get<bool>("normalize", e.normalize);
    e.reference_detuning_ghz = b.number("reference_detuning_GHz", e.reference_detuning_ghz);
  }
  if (e.kind == ExperimentKind::spectrum || e.kind == ExperimentKind::sweep || e.kind == ExperimentKind::rabi) {
    e.synthetic_noise = b.number("synthetic_noise", 0.0);
    non_negative(b, "synthetic_noise", e.synthetic_noise);
  }

  if (timed) {
    const YAML::Node init = b.raw("initial");
    if (init.IsDefined() && !init.IsNull()) {
      e.initial.clear();
      if (init.IsSequence()) {
        for (const auto& item : init) e.initial.push_back(parse_initial(b, item));
      } else {
        e.initial.push_back(parse_initial(b, init));
      }
      if (e.initial.empty()) b.fail(init.Mark(), "'experiment.initial' is empty");
      if (e.kind == ExperimentKind::fit_rabi && e.initial.size() != 1) {
        b.fail(init.Mark(), "'experiment.initial' must name a single state for fit_rabi");
      }
    }
    e.idle_detuning_ghz = b.number("idle_detuning_GHz", e.idle_detuning_ghz);
    e.rise_time_ns = b.number("rise_time_ns", 0.0);
    non_negative(b, "rise_time_ns", e.rise_time_ns);
    e.include_dephasing = b.get<bool>("include_dephasing", true);
  }
  if (e.kind == ExperimentKind::rabi) {
    if (!b.has("tau_ns")) b.fail(b.node().Mark(), "missing required key 'experiment.tau_ns'");
    e.tau_ns = parse_grid(b.child("tau_ns"), "start", "stop", {});
    if (e.tau_ns.start < 0.0) b.fail(b.node()["tau_ns"].Mark(), "'experiment.tau_ns.start' must be >= 0");
  }

  if (fit) {
    e.data = b.need<std::string>("data");
    e.n_max = b.number("n_max", e.n_max);
    positive(b, "n_max", e.n_max);
    e.scan_points = b.get<int>("scan_points", e.scan_points);
    e.max_iter = b.get<int>("max_iter", e.max_iter);
    if (e.scan_points < 2) b.fail(b.node()["scan_points"].Mark(), "'experiment.scan_points' must be at least 2");
    if (e.max_iter < 1) b.fail(b.node()["max_iter"].Mark(), "'experiment.max_iter' must be at least 1");
    parse_calibration(b, e);
  }
  if (e.kind == ExperimentKind::fit_rabi) {
    e.exclude_tau_below_ns = b.number("exclude_tau_below_ns", 0.0);
    e.exclude_tau_above_ns = b.optional_number("exclude_tau_above_ns");
  }
  b.finish();
  return e;
}

TruncationConfig parse_truncation(Block b, ExperimentKind kind) {
  TruncationConfig t;
  const bool timed = kind == ExperimentKind::rabi || kind == ExperimentKind::fit_rabi;
  t.n_transmon = b.get<int>("n_transmon", timed ? 2 : 3);
  const YAML::Node nc = b.raw("n_cavity");
  if (nc.IsDefined() && !nc.IsNull()) {
    const std::string s = b.as<std::string>(nc, "n_cavity");
    t.n_cavity = s == "auto" ? 0 : b.as<int>(nc, "n_cavity");
    if (t.n_cavity != 0 && t.n_cavity < 2) b.fail(nc.Mark(), "'truncation.n_cavity' must be at least 2 or 'auto'");
  }
  if (t.n_transmon < 2 || t.n_transmon > 8) {
    b.fail(b.node()["n_transmon"].Mark(), "'truncation.n_transmon' must lie in [2, 8]");
  }
  b.finish();
  return t;
}

NumericsConfig parse_numerics(Block b) {
  NumericsConfig n;
  n.rtol = b.number("rtol", n.rtol);
  n.atol = b.number("atol", n.atol);
  positive(b, "rtol", n.rtol);
  positive(b, "atol", n.atol);
  const std::string integ = b.get<std::string>("integrator", "rk45");
  if (integ == "rk45") {
    n.integrator = Integrator::rk45;
  } else if (integ == "krylov") {
    n.integrator = Integrator::krylov;
  } else {
    b.fail(b.node()["integrator"].Mark(), "'numerics.integrator' must be rk45 or krylov");
  }
  n.krylov_dim = b.get<int>("krylov_dim", n.krylov_dim);
  if (n.krylov_dim < 4) b.fail(b.node()["krylov_dim"].Mark(), "'numerics.krylov_dim' must be at least 4");
  n.parallel = b.get<bool>("parallel", n.parallel);
  const std::string method = b.get<std::string>("spectrum_method", "resolvent");
  if (method == "resolvent") {
    n.method = SpectrumMethod::resolvent;
  } else if (method == "weak_drive") {
    n.method = SpectrumMethod::weak_drive;
  } else {
    b.fail(b.node()["spectrum_method"].Mark(), "'numerics.spectrum_method' must be resolvent or weak_drive");
  }
  n.epsilon_mhz = b.number("probe_epsilon_MHz", n.epsilon_mhz);
  positive(b, "probe_epsilon_MHz", n.epsilon_mhz);
  b.finish();
  return n;
}

OutputConfig parse_output(Block b) {
  OutputConfig o;
  o.directory = b.get<std::string>("directory", o.directory);
  o.prefix = b.get<std::string>("prefix", o.prefix);
  if (o.prefix.empty() || o.prefix.find('/') != std::string::npos) {
    b.fail(b.node()["prefix"].Mark(), "'output.prefix' must be a non-empty file name stem");
  }
  b.finish();
  return o;
}

const char* initial_name(RabiInitial i) { return i == RabiInitial::ground ? "ground" : "pi_pulse"; }

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::rabi: return "rabi";
    case ExperimentKind::fit_spectrum: return "fit_spectrum";
    case ExperimentKind::fit_rabi: return "fit_rabi";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::crossover: return "crossover";
  }
  return "unknown";
}

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(anchor(source_name, e.mark) + ": " + e.msg);
  }
  if (!doc.IsMap()) throw ConfigError(source_name + ": the config must be a mapping");
  if (doc["cqed_manifest"].IsDefined()) doc = doc["config"];

  Block root(doc, "", source_name);
  RunConfig cfg;
  cfg.device = parse_device(root.child("device"));
  if (!root.has("experiment")) root.fail(doc.Mark(), "missing required key 'experiment'");
  cfg.experiment = parse_experiment(root.child("experiment"), cfg.device);
  cfg.truncation = parse_truncation(root.child("truncation"), cfg.experiment.kind);
  cfg.numerics = parse_numerics(root.child("numerics"));
  cfg.output = parse_output(root.child("output"));
  cfg.seed = root.get<unsigned long long>("seed", 0);
  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  using nlohmann::json;
  const DeviceParams& p = cfg.device;
  json dev = {
      {"nu_r_GHz", p.nu_r.ghz()},   {"kappa_MHz", p.kappa.mhz()},     {"gamma_MHz", p.gamma.mhz()},
      {"g_MHz", p.g_ge.mhz()},      {"E_C_GHz", p.E_C.ghz()},         {"E_J_max_GHz", p.E_J_max.ghz()},
      {"flux", p.flux},             {"coupling_ratios", p.coupling_ratios},
  };
  dev["detuning_GHz"] = p.detuning ? json(p.detuning->ghz()) : json(nullptr);
  dev["gamma_phi_MHz"] = p.gamma_phi ? json(p.gamma_phi->mhz()) : json(nullptr);

  const ExperimentConfig& e = cfg.experiment;
  const ExperimentKind k = e.kind;
  json exp = {{"type", to_string(k)}};
  if (k == ExperimentKind::sweep) {
    exp["noise_dBm_Hz"] = e.noise_dbm_hz;
    exp["n0"] = e.n0;
  } else if (!e.temperature_mk.empty()) {
    exp["temperature_mK"] = e.temperature_mk;
  } else if (k != ExperimentKind::fit_spectrum && k != ExperimentKind::fit_rabi) {
    exp["n_th"] = e.n_th;
  }
  if (k == ExperimentKind::spectrum || k == ExperimentKind::sweep || k == ExperimentKind::crossover) {
    exp["grid"] = {{"start_GHz", e.grid.start}, {"stop_GHz", e.grid.stop}, {"points", e.grid.points}};
  }
  if (k == ExperimentKind::spectrum || k == ExperimentKind::sweep || k == ExperimentKind::fit_spectrum) {
    exp["normalize"] = e.normalize;
    exp["reference_detuning_GHz"] = e.reference_detuning_ghz;
  }
  if (k == ExperimentKind::spectrum || k == ExperimentKind::sweep || k == ExperimentKind::rabi) {
    exp["synthetic_noise"] = e.synthetic_noise;
  }
  if (k == ExperimentKind::rabi || k == ExperimentKind::fit_rabi) {
    json init = json::array();
    for (RabiInitial i : e.initial) init.push_back(initial_name(i));
    exp["initial"] = init;
    exp["idle_detuning_GHz"] = e.idle_detuning_ghz;
    exp["rise_time_ns"] = e.rise_time_ns;
    exp["include_dephasing"] = e.include_dephasing;
  }
  if (k == ExperimentKind::rabi) {
    exp["tau_ns"] = {{"start", e.tau_ns.start}, {"stop", e.tau_ns.stop}, {"points", e.tau_ns.points}};
  }
  if (k == ExperimentKind::fit_spectrum || k == ExperimentKind::fit_rabi) {
    exp["data"] = e.data;
    exp["n_max"] = e.n_max;
    exp["scan_points"] = e.scan_points;
    exp["max_iter"] = e.max_iter;
    if (e.calibration_noise_dbm_hz) {
      exp["calibration"] = {{"table", e.calibration_table}, {"noise_dBm_Hz", *e.calibration_noise_dbm_hz}};
    }
  }
  if (k == ExperimentKind::fit_rabi) {
    exp["exclude_tau_below_ns"] = e.exclude_tau_below_ns;
    exp["exclude_tau_above_ns"] = e.exclude_tau_above_ns ? json(*e.exclude_tau_above_ns) : json(nullptr);
  }

  json trunc = {{"n_transmon", cfg.truncation.n_transmon}};
  trunc["n_cavity"] = cfg.truncation.automatic() ? json("auto") : json(cfg.truncation.n_cavity);

  const NumericsConfig& n = cfg.numerics;
  json num = {
      {"rtol", n.rtol},
      {"atol", n.atol},
      {"integrator", n.integrator == Integrator::rk45 ? "rk45" : "krylov"},
      {"krylov_dim", n.krylov_dim},
      {"parallel", n.parallel},
      {"spectrum_method", n.method == SpectrumMethod::resolvent ? "resolvent" : "weak_drive"},
      {"probe_epsilon_MHz", n.epsilon_mhz},
  };
  return json{{"device", dev},
              {"truncation", trunc},
              {"experiment", exp},
              {"numerics", num},
              {"output", {{"directory", cfg.output.directory}, {"prefix", cfg.output.prefix}}},
              {"seed", cfg.seed}};
}

SpaceDims truncation_for(const RunConfig& cfg, double n_th) {
  if (!cfg.truncation.automatic()) return SpaceDims(cfg.truncation.n_cavity, cfg.truncation.n_transmon);
  const ExperimentKind k = cfg.experiment.kind;
  const bool time_domain = k == ExperimentKind::rabi || k == ExperimentKind::fit_rabi;
  return SpaceDims(time_domain ? min_cavity_levels(n_th) : spectral_cavity_levels(n_th), cfg.truncation.n_transmon);
}

RabiOptions rabi_options_for(const RunConfig& cfg, SpaceDims dims) {
  RabiOptions ro;
  ro.n_cavity = dims.n_cavity();
  ro.n_transmon = dims.n_transmon();
  ro.idle_detuning = Frequency::ghz(cfg.experiment.idle_detuning_ghz);
  ro.rise_time = cfg.experiment.rise_time_ns * 1e-9;
  ro.include_dephasing = cfg.experiment.include_dephasing;
  ro.evolve.integrator = cfg.numerics.integrator;
  ro.evolve.rtol = cfg.numerics.rtol;
  ro.evolve.atol = cfg.numerics.atol;
  ro.evolve.krylov_dim = cfg.numerics.krylov_dim;
  ro.evolve.store_states = false;
  return ro;
}

FitConfig fit_config_for(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  FitConfig fc;
  fc.n_max = e.n_max;
  fc.scan_points = e.scan_points;
  fc.max_iter = e.max_iter;
  fc.dims = truncation_for(cfg, e.n_max);
  fc.reference_detuning = Frequency::ghz(e.reference_detuning_ghz);
  fc.normalize_to_reference = e.normalize;
  fc.parallel = cfg.numerics.parallel;
  fc.initial = e.initial.front();
  fc.exclude_tau_below = e.exclude_tau_below_ns * 1e-9;
  fc.exclude_tau_above =
      e.exclude_tau_above_ns ? *e.exclude_tau_above_ns * 1e-9 : std::numeric_limits<double>::infinity();
  fc.rabi = rabi_options_for(cfg, *fc.dims);
  return fc;
}

}  // namespace cqed
