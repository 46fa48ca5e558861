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

#include "cqed/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "cqed/errors.hpp"
#include "cqed/kernels.hpp"
#include "cqed/tables.hpp"

namespace cqed {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string output_path(const RunConfig& cfg, const std::string& stem, int index, const std::string& ext) {
  char idx[16];
  std::snprintf(idx, sizeof idx, "%03d", index);
  std::string name = cfg.output.prefix + "_" + stem;
  if (index >= 0) name += std::string("_") + idx;
  return (std::filesystem::path(cfg.output.directory) / (name + ext)).string();
}

void write_json(const std::string& path, const json& j) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

double safe_temperature(double n_th, double nu_ghz) { return n_th > 0.0 ? temperature_from_nth(n_th, nu_ghz) : 0.0; }

// Relative Gaussian noise on generated data. Each output index draws from
// its own stream so results do not depend on evaluation order.
void add_noise(std::vector<double>& y, double level, unsigned long long seed, int index) {
  if (level <= 0.0) return;
  std::seed_seq seq{static_cast<unsigned>(seed), static_cast<unsigned>(seed >> 32), static_cast<unsigned>(index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> z(0.0, 1.0);
  for (double& v : y) v *= 1.0 + level * z(rng);
}

json base_manifest(const RunConfig& cfg, const std::string& command) {
  return json{{"cqed_manifest", 1},
              {"command", command},
              {"config", config_to_json(cfg)},
              {"threads", kernels::max_threads()},
              {"results", json::array()}};
}

json point_header(const RunConfig& cfg, double n_th, SpaceDims dims) {
  const double nu = cfg.device.nu_r.ghz();
  return json{{"n_th", n_th},
              {"T_c_K", safe_temperature(n_th, nu)},
              {"n_cavity", dims.n_cavity()},
              {"n_transmon", dims.n_transmon()},
              {"classicality_report", to_json(classicality_report(cfg.device, n_th))}};
}

RunResult finish(RunResult r, const std::string& manifest_path, Clock::time_point t0) {
  r.manifest["timing"]["total_s"] = seconds_since(t0);
  r.manifest["files"] = r.files;
  write_json(manifest_path, r.manifest);
  r.files.push_back(manifest_path);
  return r;
}

SpectrumResult compute_spectrum(const RunConfig& cfg, double n_th, SpaceDims dims,
                                const std::vector<double>& freqs) {
  SpectrumOptions so;
  so.parallel = cfg.numerics.parallel;
  SpectrumResult s = cfg.numerics.method == SpectrumMethod::resolvent
                         ? transmission_spectrum(cfg.device, n_th, dims, freqs, so)
                         : transmission_weak_drive(cfg.device, n_th, dims, freqs,
                                                   Frequency::mhz(cfg.numerics.epsilon_mhz), so);
  if (!s.failed_points.empty()) {
    throw NumericalError("linear solve failed at " + std::to_string(s.failed_points.size()) +
                         " frequency points for n_th = " + format_number(n_th));
  }
  return s;
}

}  // namespace

json to_json(const ClassicalityReport& r) {
  json j{{"threshold", r.threshold},
         {"threshold_rounded", r.threshold_rounded},
         {"n_th", r.n_th},
         {"classical", r.classical},
         {"nonlinearity_ratio", r.nonlinearity_ratio},
         {"note", r.note}};
  j["dissipation_ratio"] = std::isfinite(r.dissipation_ratio) ? json(r.dissipation_ratio) : json("inf");
  return j;
}

json to_json(const ThermalFit& f) {
  const char* method = f.method == ThermalSource::fitted_spectrum ? "fitted_spectrum"
                       : f.method == ThermalSource::fitted_rabi   ? "fitted_rabi"
                                                                  : "applied_noise";
  return json{{"n_th", f.n_th},
              {"T_c_K", f.T_c},
              {"nu_GHz", f.nu_ghz},
              {"residual_rms", f.residual_rms},
              {"sigma", f.sigma},
              {"sigma_curvature", f.sigma_curvature},
              {"sigma_robust", f.sigma_robust},
              {"ci_1sigma", {f.ci_low, f.ci_high}},
              {"ci_90", {f.ci90_low, f.ci90_high}},
              {"at_boundary", f.at_boundary},
              {"insensitive", f.insensitive},
              {"method", method},
              {"iterations", f.iterations},
              {"evaluations", f.evaluations},
              {"warnings", f.warnings}};
}

void validate(const RunConfig& cfg) {
  cfg.device.validate();
  const ExperimentConfig& e = cfg.experiment;
  const bool fit = e.kind == ExperimentKind::fit_spectrum || e.kind == ExperimentKind::fit_rabi;
  if (fit) {
    (void)truncation_for(cfg, e.n_max);
  } else {
    for (double n : e.n_th) (void)truncation_for(cfg, n);
  }
  const bool timed = e.kind == ExperimentKind::rabi || e.kind == ExperimentKind::fit_rabi;
  if (timed && e.include_dephasing && !cfg.device.gamma_phi) {
    throw ConfigError("device.gamma_phi_MHz is required for time-domain runs with include_dephasing");
  }
  if (!cfg.device.coupling_ratios.empty()) (void)coupling_ratios(cfg.device, cfg.truncation.n_transmon);
}

RunResult run_spectrum(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = Clock::now();
  const ExperimentConfig& e = cfg.experiment;
  RunResult r;
  r.manifest = base_manifest(cfg, "spectrum");
  const std::vector<double> freqs = linear_grid(e.grid.start, e.grid.stop, e.grid.points);
  const Frequency ref_det = Frequency::ghz(e.reference_detuning_ghz);

  for (size_t i = 0; i < e.n_th.size(); ++i) {
    const auto tp = Clock::now();
    const double n = e.n_th[i];
    const SpaceDims dims = truncation_for(cfg, n);
    SpectrumResult s = compute_spectrum(cfg, n, dims, freqs);
    std::vector<std::string> ref_warnings;
    if (e.normalize) {
      SpectrumOptions so;
      so.parallel = cfg.numerics.parallel;
      const SpectrumResult ref = reference_spectrum(cfg.device, n, dims, freqs, ref_det, so);
      ref_warnings = ref.warnings;
      s = normalize(s, ref);
    }
    add_noise(s.power_normalized, e.synthetic_noise, cfg.seed, static_cast<int>(i));

    const std::string path = output_path(cfg, "spectrum", static_cast<int>(i), ".csv");
    write_table(path, spectrum_table(s));
    r.files.push_back(path);

    json point = point_header(cfg, n, dims);
    if (e.kind == ExperimentKind::sweep) point["noise_dBm_Hz"] = e.noise_dbm_hz[i];
    point["file"] = path;
    point["method"] = cfg.numerics.method == SpectrumMethod::resolvent ? "resolvent" : "weak_drive";
    point["warnings"] = s.warnings;
    point["reference_warnings"] = ref_warnings;
    point["peak_power"] = *std::max_element(s.power_normalized.begin(), s.power_normalized.end());
    point["time_s"] = seconds_since(tp);
    r.manifest["results"].push_back(point);
  }
  return finish(std::move(r), output_path(cfg, "manifest", -1, ".json"), t0);
}

RunResult run_rabi(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = Clock::now();
  const ExperimentConfig& e = cfg.experiment;
  RunResult r;
  r.manifest = base_manifest(cfg, "rabi");
  const std::vector<double> tau_ns = linear_grid(e.tau_ns.start, e.tau_ns.stop, e.tau_ns.points);
  std::vector<double> tau(tau_ns.size());
  for (size_t k = 0; k < tau.size(); ++k) tau[k] = tau_ns[k] * 1e-9;

  int index = 0;
  for (RabiInitial init : e.initial) {
    const std::string variant = init == RabiInitial::ground ? "ground" : "pi_pulse";
    for (double n : e.n_th) {
      const auto tp = Clock::now();
      const SpaceDims dims = truncation_for(cfg, n);
      const Trajectory traj = rabi_sequence(cfg.device, n, tau, init, rabi_options_for(cfg, dims));
      std::vector<double> pe = traj.observables.at("P_e");
      const std::vector<double> clean = pe;
      add_noise(pe, e.synthetic_noise, cfg.seed, index);

      const std::string path = output_path(cfg, "rabi_" + variant, index, ".csv");
      write_table(path, rabi_table(tau, pe));
      r.files.push_back(path);

      json point = point_header(cfg, n, dims);
      point["initial"] = variant;
      point["file"] = path;
      point["warnings"] = traj.warnings;
      point["steps"] = traj.stats.steps;
      point["max_trace_drift"] = traj.stats.max_trace_drift;
      point["tail_mean"] = tail_mean(tau, clean, tau.back() * 0.75);
      try {
        const double g = cfg.device.g_ge.rad_per_s();
        const double decay_guess = 2.0 / (cfg.device.kappa.rad_per_s() + cfg.device.gamma.rad_per_s());
        const OscillationFit f = fit_damped_oscillation(tau, clean, 2.0 * g, decay_guess);
        point["oscillation"] = {{"amplitude", f.amplitude},         {"decay_time_ns", f.decay_time * 1e9},
                                {"frequency_MHz", f.omega / (2e6 * std::numbers::pi)}, {"offset", f.offset}, {"transient", f.transient},
                                {"r2", f.r2}};
      } catch (const Error& ex) {
        point["oscillation"] = nullptr;
        point["warnings"].push_back(std::string("oscillation fit failed: ") + ex.what());
      }
      point["time_s"] = seconds_since(tp);
      r.manifest["results"].push_back(point);
      ++index;
    }
  }
  return finish(std::move(r), output_path(cfg, "manifest", -1, ".json"), t0);
}

RunResult run_fit(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = Clock::now();
  const ExperimentConfig& e = cfg.experiment;
  RunResult r;
  r.manifest = base_manifest(cfg, "fit");
  const FitConfig fc = fit_config_for(cfg);

  ThermalFit fit;
  if (e.kind == ExperimentKind::fit_spectrum) {
    fit = fit_nth_spectrum(read_spectrum_data(e.data), cfg.device, fc);
  } else {
    fit = fit_nth_rabi(read_rabi_data(e.data), cfg.device, fc);
  }
  const json fit_json = to_json(fit);
  const std::string path = output_path(cfg, "fit", -1, ".json");
  write_json(path, fit_json);
  r.files.push_back(path);
  r.manifest["results"].push_back(fit_json);

  if (e.calibration_noise_dbm_hz) {
    const Table t = append_calibration_row(e.calibration_table, *e.calibration_noise_dbm_hz, fit);
    r.files.push_back(e.calibration_table);
    std::vector<CalibrationPoint> pts;
    std::set<double> distinct;
    for (const auto& row : t.rows) {
      pts.push_back({row[0], row[1], row[2]});
      distinct.insert(row[0]);
    }
    json cal{{"table", e.calibration_table}, {"rows", t.rows.size()}};
    if (pts.size() >= 3 && distinct.size() >= 2) {
      const CalibrationLine line = calibration_line(pts, cfg.device.nu_r.ghz());
      cal["n0"] = line.n0;
      cal["n0_sigma"] = line.n0_sigma;
      cal["slope"] = line.slope;
      cal["slope_sigma"] = line.slope_sigma;
    }
    r.manifest["calibration"] = cal;
  }
  return finish(std::move(r), output_path(cfg, "manifest", -1, ".json"), t0);
}

RunResult run_crossover(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = Clock::now();
  const ExperimentConfig& e = cfg.experiment;
  RunResult r;
  r.manifest = base_manifest(cfg, "crossover");
  const std::vector<double> freqs = linear_grid(e.grid.start, e.grid.stop, e.grid.points);

  Table table{schema::crossover(), {}};
  for (size_t i = 0; i < e.n_th.size(); ++i) {
    const auto tp = Clock::now();
    const double n = e.n_th[i];
    const SpaceDims dims = truncation_for(cfg, n);
    const SpectrumResult s = compute_spectrum(cfg, n, dims, freqs);
    const std::string path = output_path(cfg, "crossover", static_cast<int>(i), ".csv");
    write_table(path, spectrum_table(s));
    r.files.push_back(path);

    const ClassicalityReport rep = classicality_report(cfg.device, n);
    json point = point_header(cfg, n, dims);
    point["file"] = path;
    point["warnings"] = s.warnings;
    double r2 = 0.0, width = 0.0;
    try {
      const LorentzianFit lf = fit_lorentzian(s);
      r2 = lf.r2;
      width = lf.fwhm_mhz;
      point["lorentzian"] = {{"center_GHz", lf.center_ghz}, {"fwhm_MHz", lf.fwhm_mhz}, {"peak", lf.peak},
                             {"baseline", lf.baseline},    {"r2", lf.r2},             {"converged", lf.converged}};
    } catch (const NumericalError& ex) {
      point["lorentzian"] = nullptr;
      point["warnings"].push_back(std::string("Lorentzian fit failed: ") + ex.what());
    }
    table.rows.push_back({n, r2, width, rep.classical ? 1.0 : 0.0, rep.threshold});
    point["time_s"] = seconds_since(tp);
    r.manifest["results"].push_back(point);
  }
  const std::string path = output_path(cfg, "crossover", -1, ".csv");
  write_table(path, table);
  r.files.push_back(path);
  return finish(std::move(r), output_path(cfg, "manifest", -1, ".json"), t0);
}

RunResult run(Command cmd, const RunConfig& cfg) {
  const ExperimentKind k = cfg.experiment.kind;
  auto mismatch = [&](const char* name) {
    return ConfigError(std::string("subcommand '") + name + "' cannot run experiment type '" + to_string(k) + "'");
  };
  switch (cmd) {
    case Command::spectrum:
      if (k != ExperimentKind::spectrum && k != ExperimentKind::sweep) throw mismatch("spectrum");
      return run_spectrum(cfg);
    case Command::rabi:
      if (k != ExperimentKind::rabi) throw mismatch("rabi");
      return run_rabi(cfg);
    case Command::fit:
      if (k != ExperimentKind::fit_spectrum && k != ExperimentKind::fit_rabi) throw mismatch("fit");
      return run_fit(cfg);
    case Command::crossover:
      if (k != ExperimentKind::crossover) throw mismatch("crossover");
      return run_crossover(cfg);
  }
  throw ConfigError("unknown command");
}

}  // namespace cqed
