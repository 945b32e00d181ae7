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

#include <array>
#include <utility>

#include "pdmr/nv_params.hpp"

namespace pdmr::nv {

// Spin-transition frequencies of one NV orientation under a field projection
// b along its symmetry axis:
//   nu_+/- = d_gs +/- intrinsic_splitting/2 +/- gamma * b.
// first = nu_plus, second = nu_minus; nu_plus >= nu_minus for b >= 0.
std::pair<double, double> resonance_frequencies(const NVParams& params,
                                                double b_projection_t);

// Projection of a lab-frame field onto the four <111> NV axes,
// {(1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)}/sqrt(3), in that order.
std::array<double, 4> axis_projections(const Eigen::Vector3d& b);

// Relative photocurrent contrast at a microwave frequency: two Gaussian dips
// of depth contrast_cw/2 and FWHM linewidth_fwhm centred on the resonance
// pair. Zero far off resonance, -contrast_cw when the dips coincide and the
// drive sits at line centre. Always <= 0.
double odmr_response(const NVParams& params, double mw_frequency_hz,
                     double b_projection_t);

// Maximum |d(response)/d(frequency)| of a single dip of the given depth and
// FWHM; analytic value depth*sqrt(8*ln2/e)/fwhm.
double gaussian_dip_max_slope(double depth, double fwhm_hz);

// Linear response of the photocurrent to a small field change along the
// operating NV axis, evaluated at the steepest point of a single dip,
// in pA/mT. This is the naive single-orientation estimate; the measured
// ensemble value is smaller (0.78 pA/mT) because the four orientations
// overlap spectrally. Experiments therefore take the conversion factor as a
// calibration input and report this estimate for comparison.
double naive_conversion_slope_pa_per_mt(const NVParams& params,
                                        double baseline_current_pa);

// Photocurrent saturation law I(P) = alpha*P^2/(1 + beta*P), pA for P in mW.
// Throws DomainError at (or within 1e-6 of) the pole when beta < 0.
double photocurrent_saturation(const NVParams& params, double power_mw);

// Collected current scales linearly with the applied collection bias.
double bias_scaling(double current_ref_pa, double v_ref, double v);

// One explicit Euler step of the five-level rate model.
//
//   pump:   g0 -> e0 and g1 -> e1 at pump_rate_at_8mw * (P / 8 mW)
//   decay:  e0 -> g0 radiatively at 1/tau_excited;
//           e1 -> g1 at (1 - branch_shelf)/tau_excited,
//           e1 -> shelf at branch_shelf/tau_excited
//   shelf:  -> g0 at branch_repolarize/tau_shelf, rest to g1
//   mw:     resonant drive mixes the ground populations at mw_mixing_rate
//   ionization: second photon empties the excited states into the conduction
//           band at ionization_rate_at_8mw * (P / 8 mW); only the carrier
//           tally is incremented, the spin populations are preserved
//           (recombination is folded into an effective duty factor).
//
// The step must satisfy dt <= tau_excited/10; violations throw.
SpinPopulations propagate_rate_equations(const SpinPopulations& state,
                                         const NVParams& params,
                                         double laser_power_mw,
                                         bool mw_resonant, double dt_s);

// Mean photocurrent of the composed steady-state model, pA:
//   I = I_sat(P) * (bias_v / v_ref) * (1 + spin_contrast).
// spin_contrast must lie in [-contrast_cw, 0].
double steady_state_photocurrent(const NVParams& params, double power_mw,
                                 double bias_v, double spin_contrast);

// Pseudo-spin rotation about the axis (W*cos(phase), W*sin(phase), detuning)
// through the angle 2*pi*sqrt(W^2 + detuning^2)*duration, W = rabi_rate.
// The Bloch components perpendicular to the rotation axis decay with
// exp(-duration/t2_star); the parallel component is preserved. With no drive
// and no detuning the damping acts on the transverse (x,y) plane.
TwoLevelState evolve_two_level(const TwoLevelState& state, double rabi_rate_hz,
                               double phase_rad, double detuning_hz,
                               double duration_s, const NVParams& params);

// Echo envelope after a refocusing sequence with n_pi >= 1 pi pulses:
// exp(-total_tau/t2), single-exponential. n_pi = 0 is plain free precession,
// governed by t2_star instead.
double echo_coherence(const NVParams& params, double total_tau_s,
                      unsigned n_pi);

}  // namespace pdmr::nv
