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

#include <numbers>

namespace cqed {

/// Angular frequency. Stored in rad/s; the named constructors accept the
/// "nu = omega/2pi" conventions used for device parameters.
class Frequency {
 public:
  constexpr Frequency() = default;

  static constexpr Frequency rad_per_s(double w) { return Frequency(w); }
  static constexpr Frequency hz(double nu) { return Frequency(kTwoPi * nu); }
  static constexpr Frequency mhz(double nu) { return hz(nu * 1e6); }
  static constexpr Frequency ghz(double nu) { return hz(nu * 1e9); }

  constexpr double rad_per_s() const { return omega_; }
  constexpr double hz() const { return omega_ / kTwoPi; }
  constexpr double mhz() const { return hz() * 1e-6; }
  constexpr double ghz() const { return hz() * 1e-9; }

  constexpr Frequency operator+(Frequency o) const { return Frequency(omega_ + o.omega_); }
  constexpr Frequency operator-(Frequency o) const { return Frequency(omega_ - o.omega_); }
  constexpr Frequency operator*(double s) const { return Frequency(omega_ * s); }
  constexpr auto operator<=>(const Frequency&) const = default;

 private:
  static constexpr double kTwoPi = 2.0 * std::numbers::pi;
  constexpr explicit Frequency(double w) : omega_(w) {}
  double omega_ = 0.0;
};

}  // namespace cqed
