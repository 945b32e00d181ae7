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

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace pdmr::ipcd {

// Integrated photocurrent detector: amplifier, integrator and digitizer.
// Defaults are the datasheet values of the readout chip: 50 fA per LSB,
// 16 bit signed output, 1.2 LSB output noise, 200 ms integration window,
// ~5 MHz input bandwidth.
struct IPCDConfig {
  double lsb_current = 50e-15;  // A per code
  int bits = 16;
  double noise_rms_lsb = 1.2;   // output-referred Gaussian noise, in LSB
  double t_integrate = 0.2;     // s
  double bandwidth_f0 = 5e6;    // Hz, first-order input low-pass
  std::uint64_t seed = 0;       // noise stream seed for standalone use

  void validate() const;
};

struct PhotocurrentTrace {
  double sample_interval = 0.0;    // s per sample
  std::vector<double> samples;     // A

  double span() const { return sample_interval * static_cast<double>(samples.size()); }
};

// Convenience: a flat trace of exactly one integration window.
PhotocurrentTrace constant_trace(double current_a, double t_integrate,
                                 std::size_t n_samples = 16);

struct DetectorReading {
  std::int64_t code = 0;
  double current_estimate = 0.0;  // A, = code * lsb_current
};

struct NoiseBudget {
  double shot = 0.0;          // A/sqrt(Hz)
  double johnson = 0.0;       // A/sqrt(Hz)
  double quantization = 0.0;  // A/sqrt(Hz)
  double total = 0.0;         // root-sum-square of the above

  // Signal-to-noise-floor ratio per sqrt(Hz) for a given signal current.
  double ratio_to(double signal_a) const;
};

struct BiasFieldCheck {
  bool ok = false;
  double field_v_per_um = 0.0;
};

// One conversion: low-pass the trace with the first-order input filter,
// average over the first t_integrate seconds, add Gaussian output noise of
// noise_rms_lsb LSB, round to the nearest code and clamp to the signed code
// range. Throws DomainError if the trace is shorter than the window.
// The generator is advanced only when noise is enabled.
DetectorReading integrate_and_quantize(const PhotocurrentTrace& trace,
                                       const IPCDConfig& cfg,
                                       std::mt19937_64& rng);

// Differential signal of two segment readings taken with the same config.
double differential_readout(const DetectorReading& a, const DetectorReading& b);

// Reference lock-in emulation: quadrature mixing against sin/cos at f_ref
// followed by a first-order low-pass of the given time constant. Returns the
// in-phase and quadrature outputs at the end of the trace; the outputs carry
// a calibration factor of 2, so a matched input A*sin(2*pi*f_ref*t) yields
// x = A. Requires the trace to span at least five time constants.
std::pair<double, double> lockin_demodulate(const PhotocurrentTrace& trace,
                                            double f_ref_hz,
                                            double time_constant_s);

// Measured signal roll-off of the detection chain, amplitude form
// 1/(1 + f/f0).
double lowpass_gain(double f_hz, double f0_hz);

// sqrt(2 e I)
double shot_noise_density(double current_a);

// sqrt(4 kB T / R)
double johnson_noise_density(double resistance_ohm, double temperature_k);

// Output noise referenced to a 1 Hz differential-sample bandwidth:
// sqrt(2) * noise_rms_lsb * lsb_current. 84.85 fA/sqrt(Hz) at defaults.
double quantization_noise_floor(const IPCDConfig& cfg);

NoiseBudget noise_budget(double current_a, double resistance_ohm,
                         double temperature_k, const IPCDConfig& cfg);

// Paschen-limit safety check on the bias electrode gap. The field must stay
// below the 3 V/um breakdown field of air.
BiasFieldCheck bias_field_check(double voltage_v, double gap_m);

}  // namespace pdmr::ipcd
