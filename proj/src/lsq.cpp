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
#include "cqed/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "cqed/errors.hpp"

namespace cqed {

namespace {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& p, Eigen::Index m) {
  Eigen::MatrixXd jac(m, p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(p[j]), 1e-9);
    Eigen::VectorXd hi = p, lo = p;
    hi[j] += h;
    lo[j] -= h;
    jac.col(j) = (fn(hi) - fn(lo)) / (hi[j] - lo[j]);
  }
  return jac;
}

}  // namespace

LsqResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd p0, const LsqOptions& opts) {
  LsqResult out;
  Eigen::VectorXd p = std::move(p0);
  Eigen::VectorXd r = residuals(p);
  double rss = r.squaredNorm();
  if (!std::isfinite(rss)) throw NumericalError("least squares: non-finite residuals at the initial point");

  double lambda = -1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd jac = numeric_jacobian(residuals, p, r.size());
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    const Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-300);
    if (lambda < 0.0) lambda = 1e-3;

    bool accepted = false;
    Eigen::VectorXd step;
    for (int inner = 0; inner < 60; ++inner) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      step = a.ldlt().solve(-jtr);
      const Eigen::VectorXd trial = p + step;
      const Eigen::VectorXd r_trial = residuals(trial);
      const double rss_trial = r_trial.squaredNorm();
      if (std::isfinite(rss_trial) && rss_trial <= rss) {
        const double decrease = rss - rss_trial;
        p = trial;
        r = r_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (decrease <= opts.ftol * std::max(rss, 1e-300) || rss_trial == 0.0) out.converged = true;
        rss = rss_trial;
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e16) break;
    }
    if (!accepted) {
      // No descent direction left: at a (numerical) minimum.
      out.converged = true;
      break;
    }
    if (step.norm() <= opts.xtol * (p.norm() + opts.xtol)) out.converged = true;
    if (out.converged) break;
  }
  out.params = p;
  out.rss = rss;
  return out;
}

ScalarMin minimize_bounded(const std::function<double(double)>& f, double lo, double hi, int scan_points,
                           int max_iter) {
  if (!(hi > lo)) throw ConfigError("minimize_bounded: empty interval");
  scan_points = std::max(scan_points, 4);
  std::vector<double> xs{lo};
  const double first = lo > 0.0 ? lo : std::max(hi * 1e-3, 1e-12);
  for (int k = 0; k < scan_points - 1; ++k) {
    const double t = static_cast<double>(k) / (scan_points - 2);
    const double x = first * std::pow(hi / first, t);
    if (x > xs.back()) xs.push_back(x);
  }
  ScalarMin out;
  std::vector<double> fs;
  for (double x : xs) {
    fs.push_back(f(x));
    ++out.evaluations;
  }
  const auto best = static_cast<size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  const double a = xs[best == 0 ? 0 : best - 1];
  const double b = xs[std::min(best + 1, xs.size() - 1)];

  auto counted = [&](double x) {
    ++out.evaluations;
    return f(x);
  };
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  const auto [x, fx] = boost::math::tools::brent_find_minima(counted, a, b, std::numeric_limits<double>::digits / 2, iters);
  out.iterations = static_cast<int>(iters);
  if (fx <= fs[best]) {
    out.x = x;
    out.f = fx;
  } else {
    out.x = xs[best];
    out.f = fs[best];
  }
  return out;
}

}  // namespace cqed
