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

#pragma once

#include <span>
#include <string>
#include <vector>

namespace pdmr::fit {

// Model functions used across the experiments. Parameter layouts:
//   linear:        {intercept, slope}
//   saturation:    {alpha, beta}                      y = a*x^2/(1+b*x)
//   exp_decay:     {amplitude, tau, offset}           y = A*exp(-x/tau)+C
//   damped_sine:   {offset, amplitude, frequency, tau, phase}
//                                     y = C + A*exp(-x/tau)*cos(2*pi*f*x+phi)
//   lowpass:       {i0, f0}                           y = i0/(1+x/f0)
//   gaussian_dip:  {offset, amplitude, center, fwhm}
//   gaussian_dips: {offset, amplitude, center, split, fwhm}
//                  two equal features at center +/- split/2
enum class Model {
  linear,
  saturation,
  exp_decay,
  damped_sine,
  lowpass,
  gaussian_dip,
  gaussian_dips,
};

std::string_view model_name(Model m);
std::vector<std::string> parameter_names(Model m);
std::size_t parameter_count(Model m);

double eval_model(Model m, std::span<const double> params, double x);

// Data-driven starting point (extrema for centres, discrete spectral peak
// for the damped-sine frequency with the lowest bin winning ties, log-linear
// regression for decays).
std::vector<double> initial_guess(Model m, std::span<const double> xs,
                                  std::span<const double> ys);

struct FitReport {
  Model model = Model::linear;
  std::vector<double> parameters;
  std::vector<double> uncertainties;  // 1-sigma, from residual-scaled inverse curvature
  double residual_norm = 0.0;         // sqrt(chi^2) in sigma units
  bool converged = false;
  bool rank_deficient = false;
  int iterations = 0;
  std::string message;
  // chi^2 after each accepted step, non-increasing by construction.
  std::vector<double> residual_history;
};

// Damped least squares (Levenberg-Marquardt). Accepted steps never increase
// the residual; iteration stops when the relative residual change drops
// below 1e-10 or the gradient norm below 1e-12, capped at 500 iterations.
// sigma may be empty (unit weights); zero/non-finite sigmas fall back to the
// smallest positive sigma present. An empty initial_guess defers to
// initial_guess(m, xs, ys).
FitReport curve_fit(Model m, std::span<const double> xs,
                    std::span<const double> ys,
                    std::span<const double> sigma = {},
                    std::vector<double> guess = {});

}  // namespace pdmr::fit
