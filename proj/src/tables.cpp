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

#include "cqed/tables.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cqed/errors.hpp"

namespace cqed {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double method_code(ThermalSource s) {
  switch (s) {
    case ThermalSource::applied_noise: return 0.0;
    case ThermalSource::fitted_spectrum: return 1.0;
    case ThermalSource::fitted_rabi: return 2.0;
  }
  return -1.0;
}

}  // namespace

const std::vector<double> Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("table has no column '" + name + "'");
  const size_t c = static_cast<size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw DimensionError("table row width does not match the header");
    for (size_t c = 0; c < r.size(); ++c) {
      if (c) out += ',';
      out += format_number(r[c]);
    }
    out += '\n';
  }
  return out;
}

void write_table(const std::string& path, const Table& t) {
  const std::string text = to_csv(t);
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

Table parse_csv(const std::string& text, const std::vector<std::string>& required,
                const std::vector<std::string>& allowed, const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Table t;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    const std::vector<std::string> fields = split_fields(line);
    if (!have_header) {
      t.columns = fields;
      for (size_t c = 0; c < fields.size(); ++c) {
        if (std::find(allowed.begin(), allowed.end(), fields[c]) == allowed.end()) {
          throw ConfigError(source_name + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                            ": unexpected header '" + fields[c] + "'");
        }
        if (std::count(fields.begin(), fields.end(), fields[c]) > 1) {
          throw ConfigError(source_name + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                            ": duplicate header '" + fields[c] + "'");
        }
      }
      for (const auto& r : required) {
        if (std::find(fields.begin(), fields.end(), r) == fields.end()) {
          throw ConfigError(source_name + ": row " + std::to_string(line_no) + ": missing column '" + r + "'");
        }
      }
      have_header = true;
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw ConfigError(source_name + ": row " + std::to_string(line_no) + ": expected " +
                        std::to_string(t.columns.size()) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (size_t c = 0; c < fields.size(); ++c) {
      const char* s = fields[c].c_str();
      char* end = nullptr;
      errno = 0;
      row[c] = std::strtod(s, &end);
      if (fields[c].empty() || *end != '\0' || errno == ERANGE || !std::isfinite(row[c])) {
        throw ConfigError(source_name + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                          " (" + t.columns[c] + "): '" + fields[c] + "' is not a finite number");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError(source_name + ": missing header row");
  return t;
}

Table read_table(const std::string& path, const std::vector<std::string>& required,
                 const std::vector<std::string>& allowed) {
  return parse_csv(read_file(path), required, allowed, path);
}

namespace schema {
const std::vector<std::string>& spectrum() {
  static const std::vector<std::string> s{"freq_GHz", "re_amp", "im_amp", "power_normalized"};
  return s;
}
const std::vector<std::string>& spectrum_fit_input() {
  static const std::vector<std::string> s{"freq_GHz", "power_normalized"};
  return s;
}
const std::vector<std::string>& rabi() {
  static const std::vector<std::string> s{"tau_ns", "P_e"};
  return s;
}
const std::vector<std::string>& crossover() {
  static const std::vector<std::string> s{"n_th", "lorentzian_r2", "fitted_width_MHz", "classical_flag", "threshold"};
  return s;
}
const std::vector<std::string>& calibration() {
  // method: 0 applied noise, 1 fitted spectrum, 2 fitted Rabi trace
  static const std::vector<std::string> s{"noise_dBm_Hz", "n_th", "sigma", "method"};
  return s;
}
}  // namespace schema

Table spectrum_table(const SpectrumResult& s) {
  Table t{schema::spectrum(), {}};
  t.rows.reserve(s.freqs_ghz.size());
  for (size_t k = 0; k < s.freqs_ghz.size(); ++k) {
    t.rows.push_back({s.freqs_ghz[k], s.amplitude[k].real(), s.amplitude[k].imag(), s.power_normalized[k]});
  }
  return t;
}

Table rabi_table(const std::vector<double>& tau_s, const std::vector<double>& p_e) {
  if (tau_s.size() != p_e.size()) throw DimensionError("rabi_table: length mismatch");
  Table t{schema::rabi(), {}};
  for (size_t k = 0; k < tau_s.size(); ++k) t.rows.push_back({tau_s[k] * 1e9, p_e[k]});
  return t;
}

SpectrumData read_spectrum_data(const std::string& path) {
  const Table t = read_table(path, schema::spectrum_fit_input(), schema::spectrum());
  if (t.rows.empty()) throw ConfigError(path + ": no data rows");
  return {t.column("freq_GHz"), t.column("power_normalized")};
}

RabiData read_rabi_data(const std::string& path) {
  const Table t = read_table(path, schema::rabi(), schema::rabi());
  if (t.rows.empty()) throw ConfigError(path + ": no data rows");
  RabiData d{t.column("tau_ns"), t.column("P_e")};
  for (double& tau : d.tau_s) tau *= 1e-9;
  return d;
}

Table append_calibration_row(const std::string& path, double s_dbm_hz, const ThermalFit& fit) {
  Table t{schema::calibration(), {}};
  if (std::filesystem::exists(path)) t = read_table(path, schema::calibration(), schema::calibration());
  if (!std::isfinite(s_dbm_hz)) throw ConfigError("calibration rows need a finite noise level");
  const std::map<std::string, double> values{
      {"noise_dBm_Hz", s_dbm_hz}, {"n_th", fit.n_th}, {"sigma", fit.sigma}, {"method", method_code(fit.method)}};
  std::vector<double> row;
  for (const auto& c : t.columns) row.push_back(values.at(c));
  t.rows.push_back(std::move(row));
  write_table(path, t);
  return t;
}

}  // namespace cqed
