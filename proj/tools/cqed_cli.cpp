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

// Batch front end. Exit codes: 0 success, 2 config error, 3 numerical
// failure, 4 I/O error. CQED_NUM_THREADS overrides the OpenMP thread count.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cqed/config.hpp"
#include "cqed/errors.hpp"
#include "cqed/kernels.hpp"
#include "cqed/runner.hpp"

namespace {

enum Exit { ok = 0, config_error = 2, numerical_error = 3, io_error = 4 };

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "cqed: " << kind << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity QED thermometry: thermal-field spectra, Rabi traces and temperature fits"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress the list of written files");

  std::string config_path;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "YAML config, or a manifest from an earlier run")->required();
    return sub;
  };
  CLI::App* spectrum = add("spectrum", "Transmission spectra over an n_th list or an applied-noise sweep");
  CLI::App* rabi = add("rabi", "Vacuum Rabi oscillation traces P_e(tau)");
  CLI::App* fit = add("fit", "Extract n_th from a measured spectrum or Rabi trace");
  CLI::App* crossover = add("crossover", "Single-Lorentzian diagnostics across the quantum-to-classical crossover");
  CLI::App* validate = add("validate", "Check a config against the schema and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::config_error;
  }

  try {
    cqed::kernels::configure_threads_from_env();
    const cqed::RunConfig cfg = cqed::load_config(config_path);
    if (validate->parsed()) {
      cqed::validate(cfg);
      if (!quiet) std::cout << config_path << ": ok (" << cqed::to_string(cfg.experiment.kind) << ")\n";
      return Exit::ok;
    }
    cqed::Command cmd = cqed::Command::spectrum;
    if (rabi->parsed()) cmd = cqed::Command::rabi;
    if (fit->parsed()) cmd = cqed::Command::fit;
    if (crossover->parsed()) cmd = cqed::Command::crossover;
    (void)spectrum;
    const cqed::RunResult result = cqed::run(cmd, cfg);
    if (!quiet) {
      for (const auto& f : result.files) std::cout << f << '\n';
    }
    return Exit::ok;
  } catch (const cqed::ConfigError& e) {
    return report("config error", e, Exit::config_error);
  } catch (const cqed::DimensionError& e) {
    return report("config error", e, Exit::config_error);
  } catch (const cqed::IoError& e) {
    return report("I/O error", e, Exit::io_error);
  } catch (const cqed::NumericalError& e) {
    return report("numerical failure", e, Exit::numerical_error);
  } catch (const cqed::Error& e) {
    return report("numerical failure", e, Exit::numerical_error);
  } catch (const std::bad_alloc& e) {
    return report("numerical failure", e, Exit::numerical_error);
  }
}
