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

#include "pdmr/nv_model.hpp"

#include <cmath>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"

namespace pdmr::nv {

namespace {

// Unit-peak Gaussian with the given full width at half maximum.
double gaussian_peak(double delta, double fwhm) {
  const double u = delta / fwhm;
  return std::exp(-4.0 * kLn2 * u * u);
}

constexpr double kReferencePowerMw = 8.0;

}  // namespace

std::pair<double, double> resonance_frequencies(const NVParams& params,
                                                double b_projection_t) {
  const double half_split = 0.5 * params.intrinsic_splitting;
  const double zeeman = params.gamma * b_projection_t;
  return {params.d_gs + half_split + zeeman, params.d_gs - half_split - zeeman};
}

std::array<double, 4> axis_projections(const Eigen::Vector3d& b) {
  static const double s = 1.0 / std::sqrt(3.0);
  return {
      s * (b.x() + b.y() + b.z()),
      s * (b.x() - b.y() - b.z()),
      s * (-b.x() + b.y() - b.z()),
      s * (-b.x() - b.y() + b.z()),
  };
}

double odmr_response(const NVParams& params, double mw_frequency_hz,
                     double b_projection_t) {
  const auto [nu_plus, nu_minus] = resonance_frequencies(params, b_projection_t);
  const double half_depth = 0.5 * params.contrast_cw;
  return -half_depth * (gaussian_peak(mw_frequency_hz - nu_plus, params.linewidth_fwhm) +
                        gaussian_peak(mw_frequency_hz - nu_minus, params.linewidth_fwhm));
}

double gaussian_dip_max_slope(double depth, double fwhm_hz) {
  // Steepest point of depth*exp(-4 ln2 (x/w)^2) sits at x = w/sqrt(8 ln2).
  return depth * std::sqrt(8.0 * kLn2 / std::exp(1.0)) / fwhm_hz;
}

double naive_conversion_slope_pa_per_mt(const NVParams& params,
                                        double baseline_current_pa) {
  // Merged-line operating point: the full CW contrast sits in one dip.
  const double slope_per_hz =
      gaussian_dip_max_slope(params.contrast_cw, params.linewidth_fwhm);
  // gamma is Hz/T; 1 mT = 1e-3 T.
  return baseline_current_pa * slope_per_hz * params.gamma * 1e-3;
}

double photocurrent_saturation(const NVParams& params, double power_mw) {
  if (power_mw < 0.0) {
    throw DomainError("photocurrent_saturation: power must be non-negative");
  }
  const double denom = 1.0 + params.beta_sat * power_mw;
  if (denom <= 1e-6) {
    throw DomainError("photocurrent_saturation: power at or beyond the pole of the saturation law");
  }
  return params.alpha_sat * power_mw * power_mw / denom;
}

double bias_scaling(double current_ref_pa, double v_ref, double v) {
  if (!(v_ref > 0.0)) {
    throw DomainError("bias_scaling: reference voltage must be positive");
  }
  if (v < 0.0) {
    throw DomainError("bias_scaling: bias voltage must be non-negative");
  }
  return current_ref_pa * v / v_ref;
}

SpinPopulations propagate_rate_equations(const SpinPopulations& state,
                                         const NVParams& params,
                                         double laser_power_mw,
                                         bool mw_resonant, double dt_s) {
  if (!(dt_s > 0.0) || dt_s > params.tau_excited / 10.0) {
    throw DomainError("propagate_rate_equations: dt must satisfy 0 < dt <= tau_excited/10");
  }
  const double power_ratio = laser_power_mw / kReferencePowerMw;
  const double pump = params.pump_rate_at_8mw * power_ratio;
  const double decay = 1.0 / params.tau_excited;
  const double shelf_out = 1.0 / params.tau_shelf;
  const double mix = mw_resonant ? params.mw_mixing_rate : 0.0;
  const double ion = params.ionization_rate_at_8mw * power_ratio;

  const double bs = params.branch_shelf;
  const double br = params.branch_repolarize;

  SpinPopulations next = state;
  const double d_g0 = -pump * state.p_g0 + decay * state.p_e0 +
                      shelf_out * br * state.p_shelf - mix * (state.p_g0 - state.p_g1);
  const double d_g1 = -pump * state.p_g1 + decay * (1.0 - bs) * state.p_e1 +
                      shelf_out * (1.0 - br) * state.p_shelf +
                      mix * (state.p_g0 - state.p_g1);
  const double d_e0 = pump * state.p_g0 - decay * state.p_e0;
  const double d_e1 = pump * state.p_g1 - decay * state.p_e1;
  const double d_shelf = decay * bs * state.p_e1 - shelf_out * state.p_shelf;

  next.p_g0 += dt_s * d_g0;
  next.p_g1 += dt_s * d_g1;
  next.p_e0 += dt_s * d_e0;
  next.p_e1 += dt_s * d_e1;
  next.p_shelf += dt_s * d_shelf;
  next.carriers += dt_s * ion * (state.p_e0 + state.p_e1);
  return next;
}

double steady_state_photocurrent(const NVParams& params, double power_mw,
                                 double bias_v, double spin_contrast) {
  if (spin_contrast > 1e-12 || spin_contrast < -params.contrast_cw - 1e-12) {
    throw DomainError("steady_state_photocurrent: spin contrast must lie in [-contrast_cw, 0]");
  }
  const double current = bias_scaling(photocurrent_saturation(params, power_mw),
                                      params.v_ref, bias_v);
  return current * (1.0 + spin_contrast);
}

TwoLevelState evolve_two_level(const TwoLevelState& state, double rabi_rate_hz,
                               double phase_rad, double detuning_hz,
                               double duration_s, const NVParams& params) {
  if (duration_s < 0.0) {
    throw DomainError("evolve_two_level: duration must be non-negative");
  }
  if (duration_s == 0.0) {
    return state;
  }
  const double damp = std::exp(-duration_s / params.t2_star);

  Eigen::Vector3d axis(rabi_rate_hz * std::cos(phase_rad),
                       rabi_rate_hz * std::sin(phase_rad), detuning_hz);
  const double omega_gen = axis.norm();

  TwoLevelState next = state;
  if (omega_gen == 0.0) {
    // Idle spin: plain transverse dephasing about the quantization axis.
    next.bloch.x() *= damp;
    next.bloch.y() *= damp;
    next.coherence_scale *= damp;
    return next;
  }

  const Eigen::Vector3d n = axis / omega_gen;
  const double angle = kTwoPi * omega_gen * duration_s;
  const Eigen::Vector3d parallel = n * n.dot(state.bloch);
  const Eigen::Vector3d perp = state.bloch - parallel;
  const Eigen::Vector3d perp_rotated =
      perp * std::cos(angle) + n.cross(perp) * std::sin(angle);
  next.bloch = parallel + damp * perp_rotated;
  next.coherence_scale *= damp;
  return next;
}

double echo_coherence(const NVParams& params, double total_tau_s,
                      unsigned n_pi) {
  if (total_tau_s < 0.0) {
    throw DomainError("echo_coherence: total_tau must be non-negative");
  }
  const double tau_c = (n_pi >= 1) ? params.t2 : params.t2_star;
  return std::exp(-total_tau_s / tau_c);
}

}  // namespace pdmr::nv
