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

#include <string>
#include <vector>

#include <json.hpp>

#include "cqed/config.hpp"

namespace cqed {

enum class Command { spectrum, rabi, fit, crossover };

struct RunResult {
  std::vector<std::string> files;  // data files, manifest last
  nlohmann::json manifest;
};

RunResult run_spectrum(const RunConfig& cfg);
RunResult run_rabi(const RunConfig& cfg);
RunResult run_fit(const RunConfig& cfg);
RunResult run_crossover(const RunConfig& cfg);

/// Dispatches on the command after checking that it matches the
/// experiment type (spectrum also runs noise sweeps).
RunResult run(Command cmd, const RunConfig& cfg);

/// Schema and model-level checks without running anything: truncations
/// are constructible and the device parameters are consistent.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const ThermalFit& fit);
nlohmann::json to_json(const ClassicalityReport& r);

}  // namespace cqed
