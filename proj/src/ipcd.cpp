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

#include "pdmr/ipcd.hpp"

#include <algorithm>
#include <cmath>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"
#include "pdmr/rng.hpp"

namespace pdmr::ipcd {

void IPCDConfig::validate() const {
  if (!(lsb_current > 0.0)) {
    throw ValidationError("ipcd: lsb_current must be positive");
  }
  if (bits < 8 || bits > 24) {
    throw ValidationError("ipcd: bits must lie in [8, 24]");
  }
  if (noise_rms_lsb < 0.0) {
    throw ValidationError("ipcd: noise_rms_lsb must be non-negative");
  }
  if (!(t_integrate > 0.0)) {
    throw ValidationError("ipcd: t_integrate must be positive");
  }
  if (!(bandwidth_f0 > 0.0)) {
    throw ValidationError("ipcd: bandwidth_f0 must be positive");
  }
}

PhotocurrentTrace constant_trace(double current_a, double t_integrate,
                                 std::size_t n_samples) {
  PhotocurrentTrace trace;
  trace.sample_interval = t_integrate / static_cast<double>(n_samples);
  trace.samples.assign(n_samples, current_a);
  return trace;
}

DetectorReading integrate_and_quantize(const PhotocurrentTrace& trace,
                                       const IPCDConfig& cfg,
                                       std::mt19937_64& rng) {
  cfg.validate();
  if (trace.samples.empty() || !(trace.sample_interval > 0.0)) {
    throw DomainError("integrate_and_quantize: empty trace");
  }
  if (trace.span() < cfg.t_integrate * (1.0 - 1e-12)) {
    throw DomainError("integrate_and_quantize: trace shorter than the integration window");
  }

  const double dt = trace.sample_interval;
  const std::size_t window =
      std::min(trace.samples.size(),
               static_cast<std::size_t>(std::ceil(cfg.t_integrate / dt - 1e-9)));

  // First-order input low-pass; for traces sampled far below the filter
  // bandwidth this reduces to a pass-through.
  const double tau_f = 1.0 / (kTwoPi * cfg.bandwidth_f0);
  const double alpha = dt / (tau_f + dt);
  double filtered = trace.samples.front();
  double acc = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    filtered += alpha * (trace.samples[i] - filtered);
    acc += filtered;
  }
  double mean = acc / static_cast<double>(window);

  if (cfg.noise_rms_lsb > 0.0) {
    mean += cfg.noise_rms_lsb * cfg.lsb_current * gaussian(rng);
  }

  const std::int64_t limit = (std::int64_t{1} << (cfg.bits - 1)) - 1;
  std::int64_t code = std::llround(mean / cfg.lsb_current);
  code = std::clamp(code, -limit, limit);
  return DetectorReading{code, static_cast<double>(code) * cfg.lsb_current};
}

double differential_readout(const DetectorReading& a, const DetectorReading& b) {
  return a.current_estimate - b.current_estimate;
}

std::pair<double, double> lockin_demodulate(const PhotocurrentTrace& trace,
                                            double f_ref_hz,
                                            double time_constant_s) {
  if (!(f_ref_hz > 0.0) || !(time_constant_s > 0.0)) {
    throw DomainError("lockin_demodulate: f_ref and time constant must be positive");
  }
  if (trace.span() < 5.0 * time_constant_s) {
    throw DomainError("lockin_demodulate: trace shorter than five time constants");
  }
  const double dt = trace.sample_interval;
  const double alpha = dt / (time_constant_s + dt);
  double x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const double t = (static_cast<double>(i) + 0.5) * dt;
    const double w = kTwoPi * f_ref_hz * t;
    x += alpha * (trace.samples[i] * std::sin(w) - x);
    y += alpha * (trace.samples[i] * std::cos(w) - y);
  }
  return {2.0 * x, 2.0 * y};
}

double lowpass_gain(double f_hz, double f0_hz) {
  if (f_hz < 0.0 || !(f0_hz > 0.0)) {
    throw DomainError("lowpass_gain: f must be >= 0 and f0 > 0");
  }
  return 1.0 / (1.0 + f_hz / f0_hz);
}

double shot_noise_density(double current_a) {
  if (current_a < 0.0) {
    throw DomainError("shot_noise_density: current must be non-negative");
  }
  return std::sqrt(2.0 * kElementaryCharge * current_a);
}

double johnson_noise_density(double resistance_ohm, double temperature_k) {
  if (!(resistance_ohm > 0.0) || !(temperature_k > 0.0)) {
    throw DomainError("johnson_noise_density: resistance and temperature must be positive");
  }
  return std::sqrt(4.0 * kBoltzmann * temperature_k / resistance_ohm);
}

double quantization_noise_floor(const IPCDConfig& cfg) {
  return std::sqrt(2.0) * cfg.noise_rms_lsb * cfg.lsb_current;
}

NoiseBudget noise_budget(double current_a, double resistance_ohm,
                         double temperature_k, const IPCDConfig& cfg) {
  NoiseBudget budget;
  budget.shot = shot_noise_density(current_a);
  budget.johnson = johnson_noise_density(resistance_ohm, temperature_k);
  budget.quantization = quantization_noise_floor(cfg);
  budget.total = std::sqrt(budget.shot * budget.shot +
                           budget.johnson * budget.johnson +
                           budget.quantization * budget.quantization);
  return budget;
}

double NoiseBudget::ratio_to(double signal_a) const {
  return signal_a / total;
}

BiasFieldCheck bias_field_check(double voltage_v, double gap_m) {
  if (!(gap_m > 0.0)) {
    throw DomainError("bias_field_check: gap must be positive");
  }
  const double field = voltage_v / (gap_m * 1e6);  // V per micrometre
  return BiasFieldCheck{field < kAirBreakdownFieldVPerUm, field};
}

}  // namespace pdmr::ipcd
