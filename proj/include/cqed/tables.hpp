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

#include <map>
#include <string>
#include <vector>

#include "cqed/response.hpp"
#include "cqed/thermo.hpp"

namespace cqed {

/// Column-oriented numeric table with a fixed header.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  const std::vector<double> column(const std::string& name) const;
};

/// Formats with 17 significant digits so values survive a round trip.
std::string format_number(double v);

std::string to_csv(const Table& t);
void write_table(const std::string& path, const Table& t);

/// Parses CSV text. Every column in `required` must be present and every
/// header entry must belong to `allowed`. Errors carry row/column anchors.
Table parse_csv(const std::string& text, const std::vector<std::string>& required,
                const std::vector<std::string>& allowed, const std::string& source_name = "<csv>");
Table read_table(const std::string& path, const std::vector<std::string>& required,
                 const std::vector<std::string>& allowed);

namespace schema {
const std::vector<std::string>& spectrum();
const std::vector<std::string>& spectrum_fit_input();
const std::vector<std::string>& rabi();
const std::vector<std::string>& crossover();
const std::vector<std::string>& calibration();
}  // namespace schema

Table spectrum_table(const SpectrumResult& s);
Table rabi_table(const std::vector<double>& tau_s, const std::vector<double>& p_e);

SpectrumData read_spectrum_data(const std::string& path);
RabiData read_rabi_data(const std::string& path);

/// Appends one (noise, n_th, sigma, method) row, creating the file with a
/// header when absent. Returns the whole table after the append.
Table append_calibration_row(const std::string& path, double s_dbm_hz, const ThermalFit& fit);

}  // namespace cqed
