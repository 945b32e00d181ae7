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

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"
#include "pdmr/sensitivity.hpp"

using namespace pdmr;
using namespace pdmr::sensitivity;

namespace {

SensitivityInputs at_rate(double rate) {
  SensitivityInputs in;
  in.rate = rate;
  return in;
}

}  // namespace

TEST_CASE("cw sensitivity at the three reference rates") {
  // Filtered optical rate.
  CHECK(sensitivity_cw(at_rate(4e5)) == doctest::Approx(4.505e-5).epsilon(1e-3));
  // Unfiltered optical rate.
  CHECK(sensitivity_cw(at_rate(2.2e11)) == doctest::Approx(6.074e-8).epsilon(1e-3));
  // Carrier rate at 75 pA.
  CHECK(sensitivity_cw(at_rate(4.7e8)) == doctest::Approx(1.314e-6).epsilon(1e-3));
}

TEST_CASE("cw sensitivity against the measured reference values") {
  // The absolute evaluation lands within ~20% of the measured figures; the
  // residual offset is common to all rates (see the ratio test below).
  CHECK(std::abs(sensitivity_cw(at_rate(4e5)) / 53.2e-6 - 1.0) < 0.20);
  CHECK(std::abs(sensitivity_cw(at_rate(2.2e11)) / 71e-9 - 1.0) < 0.20);
  CHECK(std::abs(sensitivity_cw(at_rate(4.7e8)) / 1.6e-6 - 1.0) < 0.20);
}

TEST_CASE("sensitivity ratios track the measured ratios within 5%") {
  const double s_optical_raw = sensitivity_cw(at_rate(4e5));
  const double s_electrical = sensitivity_cw(at_rate(4.7e8));
  const double s_optical_nominal = sensitivity_cw(at_rate(2.2e11));

  CHECK((s_optical_raw / s_electrical) / (53.2e-6 / 1.6e-6) ==
        doctest::Approx(1.0).epsilon(0.05));
  CHECK((s_optical_raw / s_optical_nominal) / (53.2e-6 / 71e-9) ==
        doctest::Approx(1.0).epsilon(0.05));
  CHECK((s_electrical / s_optical_nominal) / (1.6e-6 / 71e-9) ==
        doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("attenuation offset rescales the rate by powers of ten") {
  SensitivityInputs raw = at_rate(4e5);
  SensitivityInputs corrected = raw;
  corrected.attenuation_od = 5.7;
  CHECK(sensitivity_cw(corrected) ==
        doctest::Approx(sensitivity_cw(raw) / std::sqrt(std::pow(10.0, 5.7)))
            .epsilon(1e-12));
}

TEST_CASE("quadrupled rate halves the sensitivity exactly") {
  const SensitivityInputs base = at_rate(4.7e8);
  SensitivityInputs quad = base;
  quad.rate = 4.0 * base.rate;
  CHECK(sensitivity_cw(quad) == 0.5 * sensitivity_cw(base));
}

TEST_CASE("homogeneity in linewidth and contrast") {
  const SensitivityInputs base = at_rate(4.7e8);
  SensitivityInputs mod = base;
  mod.linewidth_fwhm = 3.0 * base.linewidth_fwhm;
  CHECK(sensitivity_cw(mod) == doctest::Approx(3.0 * sensitivity_cw(base)).epsilon(1e-12));
  mod = base;
  mod.contrast = 2.0 * base.contrast;
  CHECK(sensitivity_cw(mod) == doctest::Approx(0.5 * sensitivity_cw(base)).epsilon(1e-12));
}

TEST_CASE("carrier rate from current") {
  CHECK(carrier_rate_from_current(75e-12) == doctest::Approx(4.681e8).epsilon(1e-3));
  // Within the rounded 4.7e8 reference.
  CHECK(carrier_rate_from_current(75e-12) == doctest::Approx(4.7e8).epsilon(0.01));
  CHECK(carrier_rate_from_current(0.0) == 0.0);
  CHECK(carrier_rate_from_current(kElementaryCharge) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(carrier_rate_from_current(-1.0), DomainError);
}

TEST_CASE("plsd penalty at quarter duty is exactly pi/2") {
  CHECK(plsd_penalty(0.25) == doctest::Approx(kPi / 2.0).epsilon(1e-12));
  CHECK(plsd_penalty(0.25) == doctest::Approx(1.570796).epsilon(1e-6));
}

TEST_CASE("plsd penalty diverges as 1/sqrt(duty) for small duty") {
  for (double duty : {1e-4, 1e-6}) {
    const double asymptote = 1.0 / (std::sqrt(2.0) * std::sqrt(duty));
    CHECK(plsd_penalty(duty) == doctest::Approx(asymptote).epsilon(1e-3));
  }
  CHECK_THROWS_AS(plsd_penalty(0.0), DomainError);
  CHECK_THROWS_AS(plsd_penalty(1.0), DomainError);
}

TEST_CASE("plsd penalty minimum near duty 0.37 by brute force") {
  double best_duty = 0.0, best = 1e300;
  for (double duty = 1e-4; duty < 1.0 - 1e-9; duty += 1e-4) {
    const double v = plsd_penalty(duty);
    if (v < best) {
      best = v;
      best_duty = duty;
    }
  }
  CHECK(best_duty == doctest::Approx(0.371).epsilon(3e-3));
  CHECK(best == doctest::Approx(1.47).epsilon(5e-3));
  // Global-minimum property of the scanned grid.
  CHECK(plsd_penalty(best_duty) <= plsd_penalty(0.25));
  CHECK(plsd_penalty(best_duty) <= plsd_penalty(0.9));
}

TEST_CASE("plsd sensitivity factors out of the cw value") {
  for (double rate : {4e5, 4.7e8, 2.2e11}) {
    const SensitivityInputs in = at_rate(rate);
    CHECK(sensitivity_plsd(in, 0.25) / sensitivity_cw(in) ==
          doctest::Approx(plsd_penalty(0.25)).epsilon(1e-12));
  }
  // Electrical inputs at the reference duty land near 2.1 uT.
  CHECK(sensitivity_plsd(at_rate(4.7e8), 0.25) == doctest::Approx(2.06e-6).epsilon(5e-3));
  CHECK(std::abs(sensitivity_plsd(at_rate(4.7e8), 0.25) / 2.4e-6 - 1.0) < 0.25);
}

TEST_CASE("sensor volume backs out the beam volume") {
  CHECK(sensor_volume_um3(2.2e11, 8.0) == doctest::Approx(3.2).epsilon(2e-3));
  CHECK(sensor_volume_um3(2.0 * 2.2e11, 8.0) ==
        doctest::Approx(2.0 * sensor_volume_um3(2.2e11, 8.0)).epsilon(1e-12));
  CHECK(sensor_volume_um3(0.0, 8.0) == 0.0);
  CHECK_THROWS_AS(sensor_volume_um3(1.0, 0.0), DomainError);
}

TEST_CASE("scaling projection follows the square-root law") {
  CHECK(scaling_projection(1.6e-6, 1.0, 1.0) == 1.6e-6);
  CHECK(scaling_projection(1.6e-6, 1.0, 4.0) == doctest::Approx(0.8e-6).epsilon(1e-12));

  // Full-surface electrode projection: 3 mm x 3 mm x 10 um against the
  // 3.2 um^3 beam volume with the 4 nA / 75 pA current gain.
  const double volume_ratio = 3000.0 * 3000.0 * 10.0 / 3.2;
  const double current_gain = 4e-9 / 75e-12;
  const double projected = scaling_projection(1.6e-6, volume_ratio, current_gain);
  CHECK(projected == doctest::Approx(4.13e-11).epsilon(1e-2));
  // Within a factor of three of the 33 pT projection.
  CHECK(projected / 33e-12 < 3.0);
  CHECK(projected / 33e-12 > 1.0 / 3.0);
  CHECK_THROWS_AS(scaling_projection(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("input validation") {
  SensitivityInputs in;
  in.rate = 0.0;
  CHECK_THROWS_AS(sensitivity_cw(in), ValidationError);
  in = SensitivityInputs{};
  in.contrast = 0.0;
  CHECK_THROWS_AS(sensitivity_cw(in), ValidationError);
  in = SensitivityInputs{};
  in.linewidth_fwhm = -1.0;
  CHECK_THROWS_AS(sensitivity_cw(in), ValidationError);
}
