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

#include "pdmr/nv_params.hpp"

#include <cmath>
#include <string>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"

namespace pdmr::nv {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string("nv: ") + name + " must be strictly positive");
  }
}

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string("nv: ") + name + " must lie in [0, 1]");
  }
}

}  // namespace

void NVParams::validate() const {
  require_positive(d_gs, "d_gs");
  require_positive(gamma, "gamma");
  if (!(intrinsic_splitting >= 0.0) || !std::isfinite(intrinsic_splitting)) {
    throw ValidationError("nv: intrinsic_splitting must be non-negative");
  }
  require_positive(tau_shelf, "tau_shelf");
  require_positive(tau_excited, "tau_excited");
  require_unit_interval(branch_shelf, "branch_shelf");
  require_unit_interval(branch_repolarize, "branch_repolarize");
  require_unit_interval(contrast_cw, "contrast_cw");
  require_positive(linewidth_fwhm, "linewidth_fwhm");
  require_positive(t2_star, "t2_star");
  require_positive(t2, "t2");
  require_positive(nv_density_ppm, "nv_density_ppm");
  require_positive(pump_rate_at_8mw, "pump_rate_at_8mw");
  if (mw_mixing_rate < 0.0) {
    throw ValidationError("nv: mw_mixing_rate must be non-negative");
  }
  if (ionization_rate_at_8mw < 0.0) {
    throw ValidationError("nv: ionization_rate_at_8mw must be non-negative");
  }
  require_positive(v_ref, "v_ref");
  if (!std::isfinite(alpha_sat) || !std::isfinite(beta_sat)) {
    throw ValidationError("nv: saturation coefficients must be finite");
  }
}

Eigen::Vector3d MagneticEnvironment::field_at(double t) const {
  Eigen::Vector3d b = b_static;
  for (const AcTone& tone : ac_tones) {
    b += tone.amplitude * std::sin(kTwoPi * tone.frequency * t + tone.phase);
  }
  return b;
}

void MagneticEnvironment::validate() const {
  if (!b_static.allFinite()) {
    throw ValidationError("environment: b_static must be finite");
  }
  for (const AcTone& tone : ac_tones) {
    if (!tone.amplitude.allFinite()) {
      throw ValidationError("environment: ac tone amplitude must be finite");
    }
    if (!(tone.frequency > 0.0) || !std::isfinite(tone.frequency)) {
      throw ValidationError("environment: ac tone frequency must be strictly positive");
    }
    if (!std::isfinite(tone.phase)) {
      throw ValidationError("environment: ac tone phase must be finite");
    }
  }
}

void SpinPopulations::validate(double tol) const {
  const double comps[] = {p_g0, p_g1, p_e0, p_e1, p_shelf};
  for (double c : comps) {
    if (!(c >= -tol)) {
      throw ValidationError("populations: negative occupation");
    }
  }
  if (std::abs(total() - 1.0) > tol) {
    throw ValidationError("populations: occupations do not sum to 1");
  }
  if (!(q_neutral >= 0.0 && q_neutral <= 1.0)) {
    throw ValidationError("populations: q_neutral must lie in [0, 1]");
  }
}

}  // namespace pdmr::nv
