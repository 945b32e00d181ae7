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
#include <string>
#include <utility>
#include <vector>

#include "pdmr/fit.hpp"
#include "pdmr/ipcd.hpp"
#include "pdmr/nv_params.hpp"

namespace pdmr::experiments {

enum class SweepKind { odmr, saturation, bias, rabi, cpmg, plsd };

std::string_view sweep_kind_name(SweepKind k);
bool sweep_kind_from_name(std::string_view name, SweepKind& out);

// Microwave drive chain: rabi_rate_hz is the on-resonance Rabi frequency at
// unit drive amplitude; the Rabi experiment repeats the sweep for each entry
// of `amplitudes`.
struct DriveConfig {
  double rabi_rate_hz = 25e6;
  std::vector<double> amplitudes = {0.25, 0.5, 0.75, 1.0};
  double detuning_hz = 0.0;
  double laser_pulse_s = 5e-6;
  double gap_s = 1e-6;
};

// Stroboscopic AC readout. The field-to-current conversion factor is a
// calibration input (measured 0.78 pA/mT); see
// nv::naive_conversion_slope_pa_per_mt for the single-orientation estimate.
struct PlsdConfig {
  double duty = 0.25;
  double conversion_pa_per_mt = 0.78;
  bool quadrature = false;
  int axis = 0;  // operating NV orientation, 0..3
};

struct OperatingPoint {
  double laser_power_mw = 8.0;
  double bias_v = 15.0;
  double fluorescence_cps_per_mw = 5e4;  // linear optical-readout model
};

struct ExperimentConfig {
  nv::NVParams nv;
  nv::MagneticEnvironment env;
  ipcd::IPCDConfig ipcd;
  SweepKind kind = SweepKind::odmr;
  std::vector<double> points;  // empty selects the kind default grid
  int cycles_per_point = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  DriveConfig drive;
  PlsdConfig plsd;
  OperatingPoint operating;

  std::vector<double> effective_points() const;
  void validate() const;
};

struct ExperimentResult {
  SweepKind kind = SweepKind::odmr;
  std::vector<double> sweep_values;
  std::vector<double> mean_differential;  // A
  std::vector<double> std_dev;            // A, sample std over cycles
  int cycles = 0;
  fit::FitReport fit;
  std::vector<std::pair<std::string, fit::FitReport>> aux_fits;
  std::vector<std::pair<std::string, std::vector<double>>> aux_series;
};

// Ensemble spin contrast at a microwave frequency: the response averaged
// over the four NV orientations, each holding a quarter of the ensemble.
double ensemble_response(const nv::NVParams& params,
                         const nv::MagneticEnvironment& env, double mw_freq_hz);

// Differential CW sweep of the microwave frequency.
ExperimentResult run_odmr_scan(const ExperimentConfig& cfg);

// Photocurrent and (linear) fluorescence versus laser power; refits the
// saturation law and the linear optical trend.
ExperimentResult run_saturation_scan(const ExperimentConfig& cfg);

// Absolute current and resonant dip depth versus bias voltage, both linear.
ExperimentResult run_bias_scan(const ExperimentConfig& cfg);

// Coherent Rabi oscillations for each configured drive amplitude; reports a
// damped-sine fit per amplitude plus the frequency-versus-amplitude line.
ExperimentResult run_rabi(const ExperimentConfig& cfg);

// Single-refocusing echo decay; fits the exponential coherence envelope.
ExperimentResult run_cpmg(const ExperimentConfig& cfg);

// Stroboscopic AC sweep: for every configured tone the probe frequency scans
// the relative grid in `points` (e.g. 0.8..1.2); on-resonance peaks are
// fitted with the first-order low-pass law when three or more tones exist.
ExperimentResult run_plsd_sweep(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Mean of amplitude*sin(2*pi*f*t + phase) over `count` pulse windows of
// `width_ns` starting at start_ns + k*period_ns. Closed form; exact up to
// rounding for any pulse count.
double pulse_train_average(double amplitude, double frequency_hz,
                           double phase_rad, std::int64_t start_ns,
                           std::int64_t width_ns, std::int64_t period_ns,
                           std::uint64_t count);

}  // namespace pdmr::experiments
