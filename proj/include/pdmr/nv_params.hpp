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

#include <Eigen/Dense>
#include <vector>

namespace pdmr::nv {

// Physical constants and sample properties of the NV ensemble under study.
//
// Defaults describe the measured HPHT sample: 8 ppm NV density, 11 MHz
// CW linewidth, 2.6 % CW readout contrast, T2* = 185 ns, T2 = 1.73 us.
// The saturation coefficients (alpha_sat, beta_sat) parameterize the
// photocurrent power law I(P) = alpha*P^2/(1 + beta*P) in pA and mW.
struct NVParams {
  double d_gs = 2.87e9;              // Hz, zero-field splitting
  double gamma = 28e9;               // Hz/T, gyromagnetic ratio
  double intrinsic_splitting = 8e6;  // Hz, zero-field gap between the two dips
  double tau_shelf = 200e-9;         // s, metastable singlet lifetime
  double tau_excited = 12e-9;        // s, 3E excited-state lifetime
  double branch_shelf = 0.5;         // P(excited m_s=+-1 decays to singlet)
  double branch_repolarize = 0.7;    // P(singlet decays into m_s=0)
  double alpha_sat = 1.26;           // pA/mW^2
  double beta_sat = -0.07;           // 1/mW
  double linewidth_fwhm = 11e6;      // Hz, ODMR dip FWHM
  double contrast_cw = 0.026;        // CW readout contrast
  double t2_star = 185e-9;           // s, inhomogeneous dephasing time
  double t2 = 1.73e-6;               // s, echo coherence time
  double nv_density_ppm = 8.0;

  // Rate-model knobs. The optical pumping and ionization cross-sections are
  // not independently measured; both scale linearly with laser power and are
  // quoted at the 8 mW operating power.
  double pump_rate_at_8mw = 5e7;        // 1/s, ground -> excited
  double mw_mixing_rate = 5e6;          // 1/s, resonant MW ground-state mixing
  double ionization_rate_at_8mw = 1.3e5;  // 1/s, out of the excited states

  // Reference bias voltage of the composed photocurrent model. Calibrated so
  // that 8 mW excitation at 15 V bias reproduces the measured 75 pA average
  // photocurrent: v_ref = I_sat(8 mW) * 15 V / 75 pA.
  double v_ref = 36.654545454545455;  // V

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Static field plus a set of sinusoidal tones. Field evaluation is pure:
// b(t) = b_static + sum_i amplitude_i * sin(2*pi*f_i*t + phase_i).
struct AcTone {
  Eigen::Vector3d amplitude = Eigen::Vector3d::Zero();  // T
  double frequency = 0.0;                               // Hz
  double phase = 0.0;                                   // rad
};

struct MagneticEnvironment {
  Eigen::Vector3d b_static = Eigen::Vector3d::Zero();  // T
  std::vector<AcTone> ac_tones;

  Eigen::Vector3d field_at(double t) const;
  void validate() const;
};

// Occupations of the lumped five-level scheme. The two m_s=+-1 sub-levels
// are treated as one level; q_neutral is the NV0 fraction (not evolved by
// the rate model, see propagate_rate_equations); carriers tallies the
// expected number of two-photon ionization events per NV.
struct SpinPopulations {
  double p_g0 = 1.0;     // ground m_s=0
  double p_g1 = 0.0;     // ground m_s=+-1 (lumped)
  double p_e0 = 0.0;     // excited m_s=0
  double p_e1 = 0.0;     // excited m_s=+-1 (lumped)
  double p_shelf = 0.0;  // singlet shelf
  double q_neutral = 0.0;
  double carriers = 0.0;

  double total() const { return p_g0 + p_g1 + p_e0 + p_e1 + p_shelf; }
  void validate(double tol = 1e-9) const;
};

// Bloch vector of the {m_s=0, m_s=+1} pseudo-spin singled out by the bias
// field. coherence_scale accumulates the dephasing factors applied so far.
struct TwoLevelState {
  Eigen::Vector3d bloch = Eigen::Vector3d(0.0, 0.0, 1.0);
  double coherence_scale = 1.0;
};

}  // namespace pdmr::nv
