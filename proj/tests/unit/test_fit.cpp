/* Copyright 2026 The pdmr-sim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"
#include "pdmr/fit.hpp"

using namespace pdmr;
using namespace pdmr::fit;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  }
  return v;
}

std::vector<double> evaluate(Model m, const std::vector<double>& params,
                             const std::vector<double>& xs) {
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = eval_model(m, params, xs[i]);
  return ys;
}

}  // namespace

TEST_CASE("exact data with the exact guess converges immediately") {
  const auto xs = linspace(0.0, 10.0, 20);
  const std::vector<double> truth = {1.5, -0.3};
  const auto ys = evaluate(Model::linear, truth, xs);
  const FitReport r = curve_fit(Model::linear, xs, ys, {}, truth);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.residual_norm < 1e-10);
}

TEST_CASE("linear fit matches the normal-equations oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.5);
  const auto xs = linspace(-3.0, 12.0, 40);
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ys[i] = 2.75 - 0.6 * xs[i] + noise(rng);
  }

  // Closed-form weighted least squares (unit weights).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;

  const FitReport r = curve_fit(Model::linear, xs, ys);
  CHECK(r.converged);
  CHECK(r.parameters[0] == doctest::Approx(intercept).epsilon(1e-12));
  CHECK(r.parameters[1] == doctest::Approx(slope).epsilon(1e-12));
}

TEST_CASE("saturation refit recovers the generating coefficients") {
  const auto xs = linspace(0.5, 8.0, 16);
  const std::vector<double> truth = {1.26, -0.07};
  const auto ys = evaluate(Model::saturation, truth, xs);
  const FitReport r = curve_fit(Model::saturation, xs, ys);
  CHECK(r.converged);
  CHECK(r.parameters[0] == doctest::Approx(1.26).epsilon(1e-6));
  CHECK(r.parameters[1] == doctest::Approx(-0.07).epsilon(1e-6));
}

TEST_CASE("exponential decay refit from the heuristic guess") {
  const auto xs = linspace(0.0, 4e-6, 30);
  const std::vector<double> truth = {1.95e-12, 1.73e-6, 0.0};
  const auto ys = evaluate(Model::exp_decay, truth, xs);
  const FitReport r = curve_fit(Model::exp_decay, xs, ys);
  CHECK(r.converged);
  CHECK(r.parameters[0] == doctest::Approx(truth[0]).epsilon(1e-6));
  CHECK(r.parameters[1] == doctest::Approx(truth[1]).epsilon(1e-6));
}

TEST_CASE("damped sine refit recovers frequency and envelope") {
  const auto xs = linspace(0.0, 600e-9, 61);
  // A Rabi-like trace: offset A, amplitude -A, 25 MHz, 185 ns envelope.
  const std::vector<double> truth = {0.975e-12, -0.975e-12, 25e6, 185e-9, 0.0};
  const auto ys = evaluate(Model::damped_sine, truth, xs);
  const FitReport r = curve_fit(Model::damped_sine, xs, ys);
  CHECK(r.converged);
  CHECK(std::abs(r.parameters[2]) == doctest::Approx(25e6).epsilon(1e-6));
  CHECK(r.parameters[3] == doctest::Approx(185e-9).epsilon(1e-6));
}

TEST_CASE("lowpass refit recovers the cutoff") {
  const std::vector<double> xs = {1e3, 1e4, 1e5, 1e6, 3e6, 1e7};
  const std::vector<double> truth = {2e-12, 5e6};
  const auto ys = evaluate(Model::lowpass, truth, xs);
  const FitReport r = curve_fit(Model::lowpass, xs, ys);
  CHECK(r.converged);
  CHECK(r.parameters[1] == doctest::Approx(5e6).epsilon(1e-6));
}

TEST_CASE("double-dip refit recovers centre, split and width") {
  const auto xs = linspace(2.84e9, 2.90e9, 80);
  const std::vector<double> truth = {0.0, 0.975e-12, 2.87e9, 20e6, 11e6};
  const auto ys = evaluate(Model::gaussian_dips, truth, xs);
  const FitReport r = curve_fit(Model::gaussian_dips, xs, ys);
  CHECK(r.converged);
  CHECK(r.parameters[2] == doctest::Approx(2.87e9).epsilon(1e-9));
  CHECK(r.parameters[3] == doctest::Approx(20e6).epsilon(1e-5));
  CHECK(r.parameters[4] == doctest::Approx(11e6).epsilon(1e-5));
}

TEST_CASE("reported uncertainties calibrate against Monte-Carlo truth") {
  const auto xs = linspace(2.84e9, 2.90e9, 60);
  const std::vector<double> truth = {0.0, 1.0, 2.87e9, 20e6, 11e6};
  const auto clean = evaluate(Model::gaussian_dips, truth, xs);
  const double noise_level = 0.01;  // 1% of the dip amplitude

  int covered = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(trial));
    std::normal_distribution<double> noise(0.0, noise_level);
    std::vector<double> ys(clean);
    for (double& y : ys) y += noise(rng);
    const std::vector<double> sigma(xs.size(), noise_level);
    const FitReport r = curve_fit(Model::gaussian_dips, xs, ys, sigma);
    if (!r.converged) continue;
    bool all_within = true;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (std::abs(r.parameters[j] - truth[j]) > 3.0 * r.uncertainties[j]) {
        all_within = false;
      }
    }
    if (all_within) ++covered;
  }
  CHECK(covered >= 190);  // >= 95% of 200 trials
}

TEST_CASE("residual history never increases across accepted steps") {
  const auto xs = linspace(0.0, 600e-9, 61);
  const std::vector<double> truth = {1e-12, -1e-12, 12.5e6, 185e-9, 0.0};
  auto ys = evaluate(Model::damped_sine, truth, xs);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 2e-14);
  for (double& y : ys) y += noise(rng);
  const FitReport r = curve_fit(Model::damped_sine, xs, ys);
  for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
    CHECK(r.residual_history[i] <= r.residual_history[i - 1]);
  }
}

TEST_CASE("degenerate abscissa yields a rank-deficient report") {
  const std::vector<double> xs = {2.0, 2.0, 2.0, 2.0};
  const std::vector<double> ys = {1.0, 1.1, 0.9, 1.0};
  const FitReport r = curve_fit(Model::linear, xs, ys);
  CHECK(r.rank_deficient);
}

TEST_CASE("too few points are rejected") {
  const std::vector<double> xs = {1.0, 2.0};
  const std::vector<double> ys = {1.0, 2.0};
  CHECK_THROWS_AS(curve_fit(Model::exp_decay, xs, ys), ValidationError);
  const std::vector<double> bad_x = {1.0, 2.0, std::nan(""), 3.0};
  const std::vector<double> bad_y = {1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(curve_fit(Model::linear, bad_x, bad_y), ValidationError);
}

TEST_CASE("spectral guess lands on the carrier bin") {
  const auto xs = linspace(0.0, 1e-6, 64);
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ys[i] = std::cos(kTwoPi * 8e6 * xs[i]);
  }
  const auto guess = initial_guess(Model::damped_sine, xs, ys);
  CHECK(guess[2] == doctest::Approx(8e6).epsilon(0.15));
}

TEST_CASE("sigma weighting floors non-positive entries") {
  const auto xs = linspace(0.0, 10.0, 12);
  const std::vector<double> truth = {2.0, 0.5};
  const auto ys = evaluate(Model::linear, truth, xs);
  std::vector<double> sigma(xs.size(), 0.1);
  sigma[3] = 0.0;  // would be an infinite weight without the floor
  const FitReport r = curve_fit(Model::linear, xs, ys, sigma);
  CHECK(r.converged);
  CHECK(r.parameters[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("uncertainties survive widely spread parameter magnitudes") {
  // Slope ~1e7 against an O(10) intercept; the curvature must still be
  // recognized as full rank and yield finite, nonzero uncertainties.
  const std::vector<double> xs = {0.25, 0.5, 0.75, 1.0};
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = 2.5e7 * xs[i] - 56.0;
  ys[1] += 900.0;  // a little scatter so chi^2 > 0
  const FitReport r = curve_fit(Model::linear, xs, ys);
  CHECK(r.converged);
  CHECK_FALSE(r.rank_deficient);
  CHECK(r.uncertainties[0] > 0.0);
  CHECK(r.uncertainties[1] > 0.0);
  CHECK(std::isfinite(r.uncertainties[0]));

  // Classical closed-form check of the slope uncertainty.
  double sx = 0, sxx = 0;
  for (double x : xs) {
    sx += x;
    sxx += x * x;
  }
  const auto n = static_cast<double>(xs.size());
  const double sxx_c = sxx - sx * sx / n;
  const double dof = n - 2.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = r.parameters[0] + r.parameters[1] * xs[i];
    chi2 += (ys[i] - f) * (ys[i] - f);
  }
  const double sigma_slope = std::sqrt(chi2 / dof / sxx_c);
  CHECK(r.uncertainties[1] == doctest::Approx(sigma_slope).epsilon(1e-3));
}
