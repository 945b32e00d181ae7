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

#include "pdmr/sensitivity.hpp"

#include <cmath>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"

namespace pdmr::sensitivity {

void SensitivityInputs::validate() const {
  if (!(rate > 0.0)) {
    throw ValidationError("sensitivity: rate must be strictly positive");
  }
  if (!(contrast > 0.0 && contrast <= 1.0)) {
    throw ValidationError("sensitivity: contrast must lie in (0, 1]");
  }
  if (!(linewidth_fwhm > 0.0)) {
    throw ValidationError("sensitivity: linewidth must be strictly positive");
  }
  if (attenuation_od < 0.0) {
    throw ValidationError("sensitivity: attenuation_od must be non-negative");
  }
  if (!(gamma > 0.0)) {
    throw ValidationError("sensitivity: gamma must be strictly positive");
  }
}

double sensitivity_cw(const SensitivityInputs& inputs) {
  inputs.validate();
  const double effective_rate = inputs.rate * std::pow(10.0, inputs.attenuation_od);
  const double prefactor =
      (std::sqrt(2.0) / std::cos(inputs.theta)) * (4.0 / (3.0 * std::sqrt(3.0)));
  return prefactor * inputs.linewidth_fwhm /
         (inputs.gamma * inputs.contrast * std::sqrt(effective_rate));
}

double carrier_rate_from_current(double current_a) {
  if (current_a < 0.0) {
    throw DomainError("carrier_rate_from_current: current must be non-negative");
  }
  return current_a / kElementaryCharge;
}

double plsd_penalty(double duty) {
  if (!(duty > 0.0 && duty < 1.0)) {
    throw DomainError("plsd_penalty: duty must lie strictly between 0 and 1");
  }
  return kPi * std::sqrt(duty) / (std::sqrt(2.0) * std::sin(kPi * duty));
}

double sensitivity_plsd(const SensitivityInputs& inputs, double duty) {
  return sensitivity_cw(inputs) * plsd_penalty(duty);
}

double sensor_volume_um3(double rate_unfiltered, double density_ppm,
                         double per_nv_rate) {
  if (rate_unfiltered < 0.0) {
    throw DomainError("sensor_volume: rate must be non-negative");
  }
  if (!(density_ppm > 0.0) || !(per_nv_rate > 0.0)) {
    throw DomainError("sensor_volume: density and per-NV rate must be positive");
  }
  return rate_unfiltered / (per_nv_rate * density_ppm * kDiamondAtomsPerPpmPerUm3);
}

double scaling_projection(double base_sensitivity, double volume_ratio,
                          double current_gain) {
  if (!(volume_ratio > 0.0) || !(current_gain > 0.0)) {
    throw DomainError("scaling_projection: ratios must be strictly positive");
  }
  return base_sensitivity / std::sqrt(volume_ratio * current_gain);
}

}  // namespace pdmr::sensitivity
