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

#include "pdmr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"
#include "pdmr/nv_model.hpp"
#include "pdmr/rng.hpp"
#include "pdmr/sequence.hpp"

namespace pdmr::experiments {

namespace {

// Index-stable parallel map; the first worker exception is rethrown on the
// caller thread after the join.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct CycleStats {
  double mean = 0.0;
  double std_dev = 0.0;
};

CycleStats stats(const std::vector<double>& values) {
  CycleStats s;
  const auto n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(acc / (n - 1.0));
  }
  return s;
}

double quantize_constant_segment(double current_pa, const ipcd::IPCDConfig& cfg,
                                 std::mt19937_64& rng) {
  const ipcd::PhotocurrentTrace trace =
      ipcd::constant_trace(current_pa * 1e-12, cfg.t_integrate);
  return ipcd::integrate_and_quantize(trace, cfg, rng).current_estimate;
}

// Differential readout of a two-level (signal, reference) segment pair at
// constant segment currents, averaged over the configured cycles.
CycleStats differential_cycles(double i_signal_pa, double i_reference_pa,
                               const ExperimentConfig& cfg, std::size_t job) {
  std::mt19937_64 rng_sig = derive_stream(cfg.seed, job, 0);
  std::mt19937_64 rng_ref = derive_stream(cfg.seed, job, 1);
  std::vector<double> diffs(static_cast<std::size_t>(cfg.cycles_per_point));
  for (double& d : diffs) {
    const double ref = quantize_constant_segment(i_reference_pa, cfg.ipcd, rng_ref);
    const double sig = quantize_constant_segment(i_signal_pa, cfg.ipcd, rng_sig);
    d = ref - sig;
  }
  return stats(diffs);
}

// Per-point fit weights: sample std of the mean with a quantization floor.
std::vector<double> fit_sigmas(const std::vector<double>& std_dev, int cycles,
                               double lsb_current) {
  const double floor = lsb_current / std::sqrt(12.0);
  std::vector<double> sigmas(std_dev.size());
  for (std::size_t i = 0; i < std_dev.size(); ++i) {
    sigmas[i] = std::max(std_dev[i], floor) / std::sqrt(static_cast<double>(cycles));
  }
  return sigmas;
}

// Fits need #parameters + 1 points; short sweeps skip the fit instead of
// failing the run.
fit::FitReport fit_or_skip(fit::Model model, const std::vector<double>& xs,
                           const std::vector<double>& ys,
                           const std::vector<double>& sigmas) {
  if (xs.size() < fit::parameter_count(model) + 1) {
    fit::FitReport report;
    report.model = model;
    report.converged = false;
    report.message = "too few sweep points for the fit";
    return report;
  }
  return fit::curve_fit(model, xs, ys, sigmas);
}

void require_valid_protocol(const seq::Sequence& sequence) {
  const std::vector<seq::Violation> violations = seq::validate_sequence(sequence);
  if (!violations.empty()) {
    throw ValidationError("generated sequence failed validation: " +
                          violations.front().message);
  }
}

seq::ProtocolTimings protocol_timings(const ExperimentConfig& cfg) {
  seq::ProtocolTimings t;
  t.laser_power_mw = cfg.operating.laser_power_mw;
  t.laser_pulse_ns = std::llround(cfg.drive.laser_pulse_s * 1e9);
  t.gap_ns = std::llround(cfg.drive.gap_s * 1e9);
  t.rabi_rate_hz = cfg.drive.rabi_rate_hz;
  return t;
}

std::array<Eigen::Vector3d, 4> nv_axes() {
  const double s = 1.0 / std::sqrt(3.0);
  return {Eigen::Vector3d(s, s, s), Eigen::Vector3d(s, -s, -s),
          Eigen::Vector3d(-s, s, -s), Eigen::Vector3d(-s, -s, s)};
}

// Microwave frequency of deepest ensemble response, located by a fine scan
// over the resonance band; this is where the bias scan parks the drive.
double deepest_response_frequency(const nv::NVParams& params,
                                  const nv::MagneticEnvironment& env) {
  const auto projections = nv::axis_projections(env.b_static);
  double lo = 1e300, hi = -1e300;
  for (double p : projections) {
    const auto [plus, minus] = nv::resonance_frequencies(params, p);
    lo = std::min(lo, std::min(plus, minus));
    hi = std::max(hi, std::max(plus, minus));
  }
  lo -= 2.0 * params.linewidth_fwhm;
  hi += 2.0 * params.linewidth_fwhm;
  double best_f = params.d_gs, best = 1.0;
  const int n = 2001;
  for (int i = 0; i < n; ++i) {
    const double f = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    const double r = ensemble_response(params, env, f);
    if (r < best) {
      best = r;
      best_f = f;
    }
  }
  return best_f;
}

double clamp_contrast(double contrast, const nv::NVParams& params) {
  return std::clamp(contrast, -params.contrast_cw, 0.0);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (n - 1);
  }
  return v;
}

}  // namespace

std::string_view sweep_kind_name(SweepKind k) {
  switch (k) {
    case SweepKind::odmr: return "odmr";
    case SweepKind::saturation: return "saturation";
    case SweepKind::bias: return "bias";
    case SweepKind::rabi: return "rabi";
    case SweepKind::cpmg: return "cpmg";
    case SweepKind::plsd: return "plsd";
  }
  return "?";
}

bool sweep_kind_from_name(std::string_view name, SweepKind& out) {
  for (SweepKind k : {SweepKind::odmr, SweepKind::saturation, SweepKind::bias,
                      SweepKind::rabi, SweepKind::cpmg, SweepKind::plsd}) {
    if (name == sweep_kind_name(k)) {
      out = k;
      return true;
    }
  }
  return false;
}

std::vector<double> ExperimentConfig::effective_points() const {
  if (!points.empty()) return points;
  switch (kind) {
    case SweepKind::odmr:
      return linspace(nv.d_gs - 2.5 * nv.linewidth_fwhm,
                      nv.d_gs + 2.5 * nv.linewidth_fwhm, 50);
    case SweepKind::saturation:
      return linspace(0.5, 8.0, 16);
    case SweepKind::bias:
      return linspace(0.0, 24.0, 9);
    case SweepKind::rabi:
      return linspace(0.0, 600e-9, 61);
    case SweepKind::cpmg:
      return linspace(0.1e-6, 4.0e-6, 27);
    case SweepKind::plsd:
      return {0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2};
  }
  return {};
}

void ExperimentConfig::validate() const {
  nv.validate();
  env.validate();
  ipcd.validate();
  const std::vector<double> pts = effective_points();
  if (pts.empty()) {
    throw ValidationError("sweep: points must not be empty");
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i] > pts[i - 1])) {
      throw ValidationError("sweep: points must be strictly increasing");
    }
  }
  if (cycles_per_point < 1) {
    throw ValidationError("run: cycles_per_point must be at least 1");
  }
  if (threads < 1) {
    throw ValidationError("run: threads must be at least 1");
  }
  if (!(drive.rabi_rate_hz > 0.0)) {
    throw ValidationError("drive: rabi_rate_hz must be positive");
  }
  if (drive.amplitudes.empty()) {
    throw ValidationError("drive: amplitudes must not be empty");
  }
  for (double a : drive.amplitudes) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ValidationError("drive: amplitudes must be non-negative");
    }
  }
  if (!(drive.laser_pulse_s > 0.0) || drive.gap_s < 0.0) {
    throw ValidationError("drive: laser_pulse must be positive and gap non-negative");
  }
  if (!(plsd.duty > 0.0 && plsd.duty < 1.0)) {
    throw ValidationError("plsd: duty must lie strictly between 0 and 1");
  }
  if (plsd.conversion_pa_per_mt < 0.0) {
    throw ValidationError("plsd: conversion_pa_per_mt must be non-negative");
  }
  if (plsd.axis < 0 || plsd.axis > 3) {
    throw ValidationError("plsd: axis must lie in 0..3");
  }
  if (operating.laser_power_mw < 0.0 || operating.bias_v < 0.0) {
    throw ValidationError("operating: power and bias must be non-negative");
  }
  if (nv.beta_sat < 0.0 &&
      operating.laser_power_mw >= 1.0 / std::abs(nv.beta_sat)) {
    throw ValidationError("operating: laser power beyond the saturation-law pole");
  }
}

double ensemble_response(const nv::NVParams& params,
                         const nv::MagneticEnvironment& env, double mw_freq_hz) {
  const auto projections = nv::axis_projections(env.b_static);
  double acc = 0.0;
  for (double p : projections) {
    acc += nv::odmr_response(params, mw_freq_hz, p);
  }
  return acc / 4.0;
}

ExperimentResult run_odmr_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points = cfg.effective_points();
  const double i_ref =
      nv::steady_state_photocurrent(cfg.nv, cfg.operating.laser_power_mw,
                                    cfg.operating.bias_v, 0.0);

  ExperimentResult result;
  result.kind = SweepKind::odmr;
  result.cycles = cfg.cycles_per_point;
  result.sweep_values = points;
  result.mean_differential.assign(points.size(), 0.0);
  result.std_dev.assign(points.size(), 0.0);

  parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
    const double f = points[i];
    require_valid_protocol(gen_odmr({f}, true, protocol_timings(cfg))[0].second);
    const double contrast =
        clamp_contrast(ensemble_response(cfg.nv, cfg.env, f), cfg.nv);
    const double i_sig = nv::steady_state_photocurrent(
        cfg.nv, cfg.operating.laser_power_mw, cfg.operating.bias_v, contrast);
    const CycleStats s = differential_cycles(i_sig, i_ref, cfg, i);
    result.mean_differential[i] = s.mean;
    result.std_dev[i] = s.std_dev;
  });

  // Two resolved features call for the double-dip model; a merged line for
  // the single-dip one.
  const auto projections = nv::axis_projections(cfg.env.b_static);
  double lo = 1e300, hi = -1e300;
  for (double p : projections) {
    const auto [plus, minus] = nv::resonance_frequencies(cfg.nv, p);
    lo = std::min(lo, minus);
    hi = std::max(hi, plus);
  }
  const fit::Model model = (hi - lo >= 0.5 * cfg.nv.linewidth_fwhm)
                               ? fit::Model::gaussian_dips
                               : fit::Model::gaussian_dip;
  result.fit = fit_or_skip(model, result.sweep_values, result.mean_differential,
                           fit_sigmas(result.std_dev, cfg.cycles_per_point,
                                      cfg.ipcd.lsb_current));
  return result;
}

ExperimentResult run_saturation_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points = cfg.effective_points();

  ExperimentResult result;
  result.kind = SweepKind::saturation;
  result.cycles = cfg.cycles_per_point;
  result.sweep_values = points;
  result.mean_differential.assign(points.size(), 0.0);
  result.std_dev.assign(points.size(), 0.0);
  std::vector<double> fluorescence(points.size(), 0.0);

  parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
    const double power = points[i];
    const double current_pa = nv::steady_state_photocurrent(
        cfg.nv, power, cfg.operating.bias_v, 0.0);
    std::mt19937_64 rng = derive_stream(cfg.seed, i, 0);
    std::vector<double> readings(static_cast<std::size_t>(cfg.cycles_per_point));
    for (double& r : readings) {
      r = quantize_constant_segment(current_pa, cfg.ipcd, rng);
    }
    const CycleStats s = stats(readings);
    result.mean_differential[i] = s.mean;
    result.std_dev[i] = s.std_dev;
    fluorescence[i] = cfg.operating.fluorescence_cps_per_mw * power;
  });

  // Refit in the units of the saturation law itself (pA at the reference
  // bias), so the recovered alpha is comparable to the law coefficients.
  const double to_law_units = 1e12 * cfg.nv.v_ref / cfg.operating.bias_v;
  std::vector<double> ys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    ys[i] = result.mean_differential[i] * to_law_units;
  }
  std::vector<double> sigmas =
      fit_sigmas(result.std_dev, cfg.cycles_per_point, cfg.ipcd.lsb_current);
  for (double& s : sigmas) s *= to_law_units;
  result.fit = fit_or_skip(fit::Model::saturation, points, ys, sigmas);
  result.aux_series.emplace_back("fluorescence_cps", fluorescence);
  result.aux_fits.emplace_back(
      "fluorescence_linear",
      fit::curve_fit(fit::Model::linear, points, fluorescence));
  return result;
}

ExperimentResult run_bias_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points = cfg.effective_points();
  const double f_op = deepest_response_frequency(cfg.nv, cfg.env);
  const double contrast =
      clamp_contrast(ensemble_response(cfg.nv, cfg.env, f_op), cfg.nv);

  ExperimentResult result;
  result.kind = SweepKind::bias;
  result.cycles = cfg.cycles_per_point;
  result.sweep_values = points;
  result.mean_differential.assign(points.size(), 0.0);
  result.std_dev.assign(points.size(), 0.0);
  std::vector<double> absolute(points.size(), 0.0);

  parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
    const double bias = points[i];
    const double i_ref = nv::steady_state_photocurrent(
        cfg.nv, cfg.operating.laser_power_mw, bias, 0.0);
    const double i_sig = nv::steady_state_photocurrent(
        cfg.nv, cfg.operating.laser_power_mw, bias, contrast);
    const CycleStats s = differential_cycles(i_sig, i_ref, cfg, i);
    result.mean_differential[i] = s.mean;
    result.std_dev[i] = s.std_dev;

    std::mt19937_64 rng = derive_stream(cfg.seed, i, 2);
    std::vector<double> readings(static_cast<std::size_t>(cfg.cycles_per_point));
    for (double& r : readings) {
      r = quantize_constant_segment(i_ref, cfg.ipcd, rng);
    }
    absolute[i] = stats(readings).mean;
  });

  result.fit = fit_or_skip(fit::Model::linear, points, result.mean_differential,
                           fit_sigmas(result.std_dev, cfg.cycles_per_point,
                                      cfg.ipcd.lsb_current));
  result.aux_series.emplace_back("absolute_current_a", absolute);
  result.aux_fits.emplace_back(
      "absolute_linear", fit_or_skip(fit::Model::linear, points, absolute, {}));
  return result;
}

ExperimentResult run_rabi(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points = cfg.effective_points();
  const std::size_t n_points = points.size();
  const std::size_t n_amps = cfg.drive.amplitudes.size();
  const double i_ref = nv::steady_state_photocurrent(
      cfg.nv, cfg.operating.laser_power_mw, cfg.operating.bias_v, 0.0);

  std::vector<std::vector<double>> means(n_amps, std::vector<double>(n_points));
  std::vector<std::vector<double>> stds(n_amps, std::vector<double>(n_points));

  parallel_for(n_amps * n_points, cfg.threads, [&](std::size_t job) {
    const std::size_t a = job / n_points;
    const std::size_t i = job % n_points;
    const double amplitude = cfg.drive.amplitudes[a];
    const double tau = points[i];
    if (tau > 0.0 && amplitude > 0.0) {
      require_valid_protocol(
          seq::gen_rabi({tau}, cfg.drive.laser_pulse_s, amplitude,
                        protocol_timings(cfg))[0]);
    }
    nv::TwoLevelState state;
    state = nv::evolve_two_level(state, cfg.drive.rabi_rate_hz * amplitude, 0.0,
                                 cfg.drive.detuning_hz, tau, cfg.nv);
    const double transfer = 0.5 * (1.0 - state.bloch.z());
    const double contrast = clamp_contrast(-cfg.nv.contrast_cw * transfer, cfg.nv);
    const double i_sig = nv::steady_state_photocurrent(
        cfg.nv, cfg.operating.laser_power_mw, cfg.operating.bias_v, contrast);
    const CycleStats s = differential_cycles(i_sig, i_ref, cfg, job);
    means[a][i] = s.mean;
    stds[a][i] = s.std_dev;
  });

  ExperimentResult result;
  result.kind = SweepKind::rabi;
  result.cycles = cfg.cycles_per_point;
  result.sweep_values = points;
  result.mean_differential = means.back();
  result.std_dev = stds.back();

  std::vector<double> frequencies(n_amps, 0.0);
  for (std::size_t a = 0; a < n_amps; ++a) {
    fit::FitReport report =
        fit_or_skip(fit::Model::damped_sine, points, means[a],
                    fit_sigmas(stds[a], cfg.cycles_per_point, cfg.ipcd.lsb_current));
    frequencies[a] = std::abs(report.parameters[2]);
    const std::string label =
        "damped_sine_amplitude_" + std::to_string(cfg.drive.amplitudes[a]);
    if (a + 1 == n_amps) {
      result.fit = report;
    }
    result.aux_fits.emplace_back(label, std::move(report));
  }
  result.aux_series.emplace_back("amplitude", cfg.drive.amplitudes);
  result.aux_series.emplace_back("rabi_frequency_hz", frequencies);
  if (n_amps >= 3) {
    result.aux_fits.emplace_back(
        "frequency_vs_amplitude",
        fit_or_skip(fit::Model::linear, cfg.drive.amplitudes, frequencies, {}));
  }
  return result;
}

ExperimentResult run_cpmg(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points = cfg.effective_points();
  const double i_ref = nv::steady_state_photocurrent(
      cfg.nv, cfg.operating.laser_power_mw, cfg.operating.bias_v, 0.0);

  ExperimentResult result;
  result.kind = SweepKind::cpmg;
  result.cycles = cfg.cycles_per_point;
  result.sweep_values = points;
  result.mean_differential.assign(points.size(), 0.0);
  result.std_dev.assign(points.size(), 0.0);

  parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
    const double tau = points[i];
    require_valid_protocol(seq::gen_cpmg({tau}, protocol_timings(cfg))[0]);
    const double transfer = nv::echo_coherence(cfg.nv, tau, 1);
    const double contrast = clamp_contrast(-cfg.nv.contrast_cw * transfer, cfg.nv);
    const double i_sig = nv::steady_state_photocurrent(
        cfg.nv, cfg.operating.laser_power_mw, cfg.operating.bias_v, contrast);
    const CycleStats s = differential_cycles(i_sig, i_ref, cfg, i);
    result.mean_differential[i] = s.mean;
    result.std_dev[i] = s.std_dev;
  });

  result.fit = fit_or_skip(fit::Model::exp_decay, points, result.mean_differential,
                           fit_sigmas(result.std_dev, cfg.cycles_per_point,
                                      cfg.ipcd.lsb_current));
  return result;
}

double pulse_train_average(double amplitude, double frequency_hz,
                           double phase_rad, std::int64_t start_ns,
                           std::int64_t width_ns, std::int64_t period_ns,
                           std::uint64_t count) {
  if (count == 0 || width_ns <= 0) return 0.0;
  const double w = static_cast<double>(width_ns) * 1e-9;
  const double p = static_cast<double>(period_ns) * 1e-9;
  const double s = static_cast<double>(start_ns) * 1e-9;

  // Window factor: time average of a unit sinusoid over one pulse.
  const double x = frequency_hz * w;  // cycles per window
  const double window = std::abs(x) < 1e-12 ? 1.0 : std::sin(kPi * x) / (kPi * x);

  // Pulse-centre phases advance by delta per period; only the fractional
  // part matters, so reduce before the Dirichlet sum.
  const double delta = kTwoPi * std::remainder(frequency_hz * p, 1.0);
  const double theta0 =
      kTwoPi * std::remainder(frequency_hz * (s + 0.5 * w), 1.0) + phase_rad;
  const auto n = static_cast<double>(count);

  const double half = 0.5 * delta;
  double sum;
  if (std::abs(std::sin(half)) < 1e-15) {
    sum = n * std::sin(theta0 + (n - 1.0) * half);
  } else {
    sum = std::sin(n * half) / std::sin(half) * std::sin(theta0 + (n - 1.0) * half);
  }
  return amplitude * window * sum / n;
}

ExperimentResult run_plsd_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.env.ac_tones.empty()) {
    throw ValidationError("plsd: at least one ac tone must be configured");
  }
  const std::vector<double> ratios = cfg.effective_points();
  const std::size_t n_tones = cfg.env.ac_tones.size();
  const std::size_t n_jobs = n_tones * ratios.size();
  const Eigen::Vector3d axis = nv_axes()[static_cast<std::size_t>(cfg.plsd.axis)];
  const double i_op =
      nv::steady_state_photocurrent(cfg.nv, cfg.operating.laser_power_mw,
                                    cfg.operating.bias_v, 0.0);
  const double b_dc_mt = cfg.env.b_static.dot(axis) * 1e3;
  const std::size_t n_segments = cfg.plsd.quadrature ? 4 : 2;

  ExperimentResult result;
  result.kind = SweepKind::plsd;
  result.cycles = cfg.cycles_per_point;
  result.sweep_values.assign(n_jobs, 0.0);
  result.mean_differential.assign(n_jobs, 0.0);
  result.std_dev.assign(n_jobs, 0.0);

  parallel_for(n_jobs, cfg.threads, [&](std::size_t job) {
    const std::size_t t = job / ratios.size();
    const nv::AcTone& tone = cfg.env.ac_tones[t];
    const double f_probe = tone.frequency * ratios[job % ratios.size()];
    const seq::Sequence sequence =
        seq::gen_plsd(f_probe, cfg.plsd.duty, cfg.operating.laser_power_mw,
                      cfg.plsd.quadrature, protocol_timings(cfg));
    require_valid_protocol(sequence);

    // Mean segment current: the pulses gate the steady-state current plus
    // the linearized field response; the detector bandwidth attenuates each
    // tone by the first-order roll-off at its own frequency.
    std::vector<double> seg_currents_pa;
    for (const seq::Segment& segment : sequence.segments) {
      double width_total = 0.0;
      double b_ac_weighted = 0.0;
      for (const seq::PulseEvent& e : segment.events) {
        const double wd = static_cast<double>(e.duration_ns);
        double b_pulse = 0.0;
        for (const nv::AcTone& any : cfg.env.ac_tones) {
          const double proj_mt = any.amplitude.dot(axis) * 1e3;
          b_pulse += ipcd::lowpass_gain(any.frequency, cfg.ipcd.bandwidth_f0) *
                     pulse_train_average(proj_mt, any.frequency, any.phase,
                                         e.t_start_ns, e.duration_ns,
                                         segment.duration_ns, segment.repeat);
        }
        width_total += wd;
        b_ac_weighted += wd * b_pulse;
      }
      const double duty_actual =
          width_total / static_cast<double>(segment.duration_ns);
      const double b_avg_mt = b_ac_weighted / width_total;
      seg_currents_pa.push_back(
          duty_actual * (i_op + cfg.plsd.conversion_pa_per_mt * (b_dc_mt + b_avg_mt)));
    }

    std::vector<std::mt19937_64> streams;
    for (std::size_t s = 0; s < n_segments; ++s) {
      streams.push_back(derive_stream(cfg.seed, job, s));
    }
    std::vector<double> diffs(static_cast<std::size_t>(cfg.cycles_per_point));
    for (double& d : diffs) {
      std::vector<double> readings(n_segments);
      for (std::size_t s = 0; s < n_segments; ++s) {
        readings[s] = quantize_constant_segment(seg_currents_pa[s], cfg.ipcd,
                                                streams[s]);
      }
      if (cfg.plsd.quadrature) {
        d = std::hypot(readings[0] - readings[2], readings[1] - readings[3]);
      } else {
        d = readings[0] - readings[1];
      }
    }
    const CycleStats s = stats(diffs);
    result.sweep_values[job] = f_probe;
    result.mean_differential[job] = s.mean;
    result.std_dev[job] = s.std_dev;
  });

  // On-resonance peak per tone, then the low-pass fit across tones.
  std::vector<double> tone_freqs, peaks;
  for (std::size_t t = 0; t < n_tones; ++t) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < ratios.size(); ++j) {
      if (std::abs(ratios[j] - 1.0) < std::abs(ratios[best] - 1.0)) best = j;
    }
    tone_freqs.push_back(cfg.env.ac_tones[t].frequency);
    peaks.push_back(std::abs(result.mean_differential[t * ratios.size() + best]));
  }
  result.aux_series.emplace_back("tone_frequency_hz", tone_freqs);
  result.aux_series.emplace_back("peak_differential_a", peaks);
  if (n_tones >= 3) {
    result.fit = fit_or_skip(fit::Model::lowpass, tone_freqs, peaks, {});
  } else {
    result.fit.model = fit::Model::lowpass;
    result.fit.converged = false;
    result.fit.message = "low-pass fit needs at least three tones";
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case SweepKind::odmr: return run_odmr_scan(cfg);
    case SweepKind::saturation: return run_saturation_scan(cfg);
    case SweepKind::bias: return run_bias_scan(cfg);
    case SweepKind::rabi: return run_rabi(cfg);
    case SweepKind::cpmg: return run_cpmg(cfg);
    case SweepKind::plsd: return run_plsd_sweep(cfg);
  }
  throw ValidationError("unknown sweep kind");
}

}  // namespace pdmr::experiments
