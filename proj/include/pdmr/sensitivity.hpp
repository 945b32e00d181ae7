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

namespace pdmr::sensitivity {

// Inputs of the shot-noise-limited CW magnetometry formula. theta is the
// angle between the NV axis and the field; the ensemble default is
// acos(1/sqrt(3)), i.e. a 1/cos(theta) penalty of sqrt(3). attenuation_od
// converts a filtered (raw) detection rate into the nominal one:
// effective rate = rate * 10^attenuation_od.
struct SensitivityInputs {
  double linewidth_fwhm = 11e6;  // Hz
  double contrast = 0.026;
  double rate = 4.7e8;           // detected photons or charge carriers, 1/s
  double theta = 0.9553166181245093;  // rad, acos(1/sqrt(3))
  double attenuation_od = 0.0;
  double gamma = 28e9;           // Hz/T

  void validate() const;
};

// Minimum detectable DC field per sqrt(Hz):
//   (sqrt(2)/cos(theta)) * (4/(3*sqrt(3))) * (1/gamma)
//     * linewidth / (contrast * sqrt(rate * 10^od))
double sensitivity_cw(const SensitivityInputs& inputs);

// Charge carriers per second at a given photocurrent: I/e.
double carrier_rate_from_current(double current_a);

// Stroboscopic readout penalty pi*sqrt(duty)/(sqrt(2)*sin(pi*duty));
// exactly pi/2 at 25 % duty, global minimum ~1.47 near duty 0.371.
double plsd_penalty(double duty);

double sensitivity_plsd(const SensitivityInputs& inputs, double duty);

// Interrogation volume implied by a detection rate, um^3. per_nv_rate is the
// per-centre detection rate; its default is back-solved from the measured
// nominal photon rate and the 3.2 um^3 beam volume, so treat it as a
// calibration constant rather than a measured cross-section.
inline constexpr double kDefaultPerNvRate = 4.88e4;  // 1/s
double sensor_volume_um3(double rate_unfiltered, double density_ppm,
                         double per_nv_rate = kDefaultPerNvRate);

// Square-root scaling of sensitivity with interrogation volume and per-NV
// current gain: base / sqrt(volume_ratio * current_gain).
double scaling_projection(double base_sensitivity, double volume_ratio,
                          double current_gain);

}  // namespace pdmr::sensitivity
