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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqed/device.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/response.hpp"
#include "cqed/thermo.hpp"

namespace cqed {

enum class ExperimentKind { spectrum, rabi, fit_spectrum, fit_rabi, sweep, crossover };

std::string to_string(ExperimentKind kind);

struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
};

/// Cavity truncation: a fixed level count, or 0 for automatic sizing from
/// the occupation at each sweep point.
struct TruncationConfig {
  int n_cavity = 0;
  int n_transmon = 3;
  bool automatic() const { return n_cavity == 0; }
};

struct NumericsConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  Integrator integrator = Integrator::rk45;
  int krylov_dim = 30;
  bool parallel = true;
  SpectrumMethod method = SpectrumMethod::resolvent;
  double epsilon_mhz = 0.16;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::spectrum;

  // Occupation points. Exactly one source is set after loading; the others
  // are empty. n_th is always filled with the resolved values.
  std::vector<double> n_th;
  std::vector<double> temperature_mk;
  std::vector<double> noise_dbm_hz;
  double n0 = 0.0;

  GridSpec grid;  // GHz
  bool normalize = true;
  double reference_detuning_ghz = -2.0;
  double synthetic_noise = 0.0;  // relative Gaussian noise on generated data

  std::vector<RabiInitial> initial{RabiInitial::ground};
  GridSpec tau_ns;
  double idle_detuning_ghz = 0.5;
  double rise_time_ns = 0.0;
  bool include_dephasing = true;

  std::string data;
  double n_max = 5.0;
  int scan_points = 14;
  int max_iter = 100;
  double exclude_tau_below_ns = 0.0;
  std::optional<double> exclude_tau_above_ns;

  std::string calibration_table;
  std::optional<double> calibration_noise_dbm_hz;
};

struct OutputConfig {
  std::string directory = "out";
  std::string prefix = "run";
};

struct RunConfig {
  DeviceParams device;
  TruncationConfig truncation;
  ExperimentConfig experiment;
  NumericsConfig numerics;
  OutputConfig output;
  unsigned long long seed = 0;
};

/// Parses YAML text. Accepts a config document or a manifest written by a
/// previous run. Throws ConfigError with "line L, column C" anchors.
RunConfig parse_config(const std::string& text, const std::string& source_name = "<config>");
RunConfig load_config(const std::string& path);

/// Resolved configuration with every default spelled out. Feeding the
/// result back into parse_config reproduces the same RunConfig.
nlohmann::json config_to_json(const RunConfig& cfg);

SpaceDims truncation_for(const RunConfig& cfg, double n_th);
FitConfig fit_config_for(const RunConfig& cfg);
RabiOptions rabi_options_for(const RunConfig& cfg, SpaceDims dims);

}  // namespace cqed
