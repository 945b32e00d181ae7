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

#include <string>
#include <string_view>

#include "pdmr/experiments.hpp"

namespace pdmr::io {

// Experiment configuration files are flat INI-style sections of key = value
// lines ('#' comments). Every key has a documented default; unknown sections
// or keys are hard errors. An empty file is a valid all-defaults config.
//
// Sections and keys:
//   [nv]          d_gs gamma intrinsic_splitting tau_shelf tau_excited
//                 branch_shelf branch_repolarize alpha_sat beta_sat
//                 linewidth_fwhm contrast_cw t2_star t2 nv_density_ppm
//                 pump_rate_at_8mw mw_mixing_rate ionization_rate_at_8mw v_ref
//   [environment] b_static (3 numbers), ac_tone (ax ay az freq phase;
//                 repeatable, one tone per line)
//   [ipcd]        lsb_current bits noise_rms_lsb t_integrate bandwidth_f0 seed
//   [sweep]       kind, and either points (list) or start/stop/count
//   [run]         cycles_per_point seed threads
//   [drive]       rabi_rate_hz amplitudes detuning_hz laser_pulse gap
//   [plsd]        duty conversion_pa_per_mt quadrature axis
//   [operating]   laser_power_mw bias_v fluorescence_cps_per_mw

struct LoadedConfig {
  experiments::ExperimentConfig experiment;
  bool kind_present = false;  // [sweep] kind appeared in the file
  std::string canonical;      // canonical text of the parsed file
  std::string digest;         // 16-hex-digit content hash of the canonical text
};

LoadedConfig load_config_text(std::string_view text);
LoadedConfig load_config(const std::string& path);

// Canonical form: fixed section order, keys sorted within a section
// (repeated keys keep their relative order), numeric tokens normalized to
// their shortest round-trip spelling. Idempotent, so the digest is stable
// under reordering of the input file.
std::string canonical_config_text(std::string_view text);
std::string config_digest_hex(std::string_view text);

}  // namespace pdmr::io
