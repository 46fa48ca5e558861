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

#include <functional>

#include <Eigen/Dense>

namespace cqed {

struct LsqOptions {
  int max_iter = 500;
  double xtol = 1e-13;
  double ftol = 1e-16;
};

struct LsqResult {
  Eigen::VectorXd params;
  double rss = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Levenberg-Marquardt with Marquardt diagonal scaling and a central-difference Jacobian.
LsqResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd p0, const LsqOptions& opts = {});

struct ScalarMin {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
  int iterations = 0;
};

/// Bounded 1-D minimization: coarse scan over [lo, hi] (lo plus log-spaced
/// points) to bracket, then Brent's golden-section/parabolic search.
ScalarMin minimize_bounded(const std::function<double(double)>& f, double lo, double hi, int scan_points = 16,
                           int max_iter = 100);

}  // namespace cqed
