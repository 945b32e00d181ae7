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

// End-to-end acceptance suite. Each numbered check prints one PASS/FAIL
// line; the process exits with the number of failed checks. The optional
// argv[1] is the CLI binary used for the process-level determinism check.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pdmr/config.hpp"
#include "pdmr/constants.hpp"
#include "pdmr/experiments.hpp"
#include "pdmr/fit.hpp"
#include "pdmr/ipcd.hpp"
#include "pdmr/nv_model.hpp"
#include "pdmr/results_io.hpp"
#include "pdmr/rng.hpp"
#include "pdmr/sensitivity.hpp"
#include "pdmr/sequence.hpp"

using namespace pdmr;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %s  (%s)\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

bool within(double value, double target, double rel_tol) {
  return std::abs(value - target) <= rel_tol * std::abs(target);
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// --- 1. Zeeman shift -------------------------------------------------------

void criterion_resonance_shift() {
  nv::NVParams p;
  p.intrinsic_splitting = 0.0;
  const auto [plus0, minus0] = nv::resonance_frequencies(p, 0.0);
  const auto [plus1, minus1] = nv::resonance_frequencies(p, 1e-3);
  const double up = plus1 - plus0;
  const double down = minus1 - minus0;
  const bool ok = std::abs(up - 28e6) < 1e-3 && std::abs(down + 28e6) < 1e-3;
  report("1. resonance shift +/-28 MHz/mT", ok,
         "shift " + fmt(up) + " / " + fmt(down) + " Hz");
}

// --- 2. Saturation refit ----------------------------------------------------

void criterion_saturation_refit() {
  const auto xs = linspace(0.5, 8.0, 16);
  std::vector<double> clean(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    clean[i] = 1.26 * xs[i] * xs[i] / (1.0 - 0.07 * xs[i]);
  }
  const fit::FitReport noise_free = fit::curve_fit(fit::Model::saturation, xs, clean);
  const bool clean_ok = noise_free.converged &&
                        within(noise_free.parameters[0], 1.26, 0.01) &&
                        within(noise_free.parameters[1], -0.07, 0.01);

  // 2% additive noise, 50 seeds; the mean recovery must stay within 5%.
  double alpha_sum = 0.0, beta_sum = 0.0;
  int converged = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng = derive_stream(20260810, seed);
    std::vector<double> noisy(clean);
    std::vector<double> sigma(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sigma[i] = 0.02 * clean[i];
      noisy[i] += sigma[i] * gaussian(rng);
    }
    const fit::FitReport r = fit::curve_fit(fit::Model::saturation, xs, noisy, sigma);
    if (r.converged) {
      alpha_sum += r.parameters[0];
      beta_sum += r.parameters[1];
      ++converged;
    }
  }
  const double alpha_mean = alpha_sum / converged;
  const double beta_mean = beta_sum / converged;
  const bool noisy_ok = converged == 50 && within(alpha_mean, 1.26, 0.05) &&
                        within(beta_mean, -0.07, 0.05);
  report("2. saturation law refit", clean_ok && noisy_ok,
         "noise-free a=" + fmt(noise_free.parameters[0]) + " b=" +
             fmt(noise_free.parameters[1]) + "; 50-seed mean a=" + fmt(alpha_mean) +
             " b=" + fmt(beta_mean));
}

// --- 3. IPCD code and output noise -----------------------------------------

void criterion_ipcd() {
  ipcd::IPCDConfig quiet;
  quiet.noise_rms_lsb = 0.0;
  std::mt19937_64 rng(1);
  const auto trace = ipcd::constant_trace(75e-12, quiet.t_integrate);
  const auto reading = ipcd::integrate_and_quantize(trace, quiet, rng);

  ipcd::IPCDConfig noisy;
  std::mt19937_64 rng2(20260810);
  std::vector<double> codes(10000);
  for (double& c : codes) {
    c = static_cast<double>(ipcd::integrate_and_quantize(trace, noisy, rng2).code);
  }
  double mean = 0.0;
  for (double c : codes) mean += c;
  mean /= static_cast<double>(codes.size());
  double var = 0.0;
  for (double c : codes) var += (c - mean) * (c - mean);
  const double std_lsb = std::sqrt(var / (static_cast<double>(codes.size()) - 1.0));

  const bool ok = reading.code == 1500 && within(std_lsb, 1.2, 0.05);
  report("3. IPCD quantization and 1.2 LSB noise", ok,
         "code " + std::to_string(reading.code) + ", std " + fmt(std_lsb) + " LSB");
}

// --- 4. Noise budget --------------------------------------------------------

void criterion_noise_budget() {
  ipcd::IPCDConfig cfg;
  const double shot = ipcd::shot_noise_density(75e-12);
  const double quant = ipcd::quantization_noise_floor(cfg);
  const double johnson = ipcd::johnson_noise_density(46e9, 300.0);
  const bool ok = within(shot, 4.8e-15, 0.03) && within(quant, 84e-15, 0.02) &&
                  within(johnson, 0.6e-15, 0.01);
  report("4. noise budget (shot/quantization/johnson)", ok,
         fmt(shot * 1e15) + " / " + fmt(quant * 1e15) + " / " + fmt(johnson * 1e15) +
             " fA/sqrt(Hz)");
}

// --- 5. Differential CW-PDMR ------------------------------------------------

void criterion_cw_pdmr() {
  experiments::ExperimentConfig cfg;
  cfg.kind = experiments::SweepKind::odmr;
  cfg.nv.intrinsic_splitting = 0.0;  // bias-merged line carries the full contrast
  cfg.cycles_per_point = 1000;
  cfg.seed = 20260810;
  cfg.threads = 4;
  const experiments::ExperimentResult result = experiments::run_odmr_scan(cfg);
  const bool fit_ok = result.fit.converged &&
                      result.fit.model == fit::Model::gaussian_dip;
  const double depth = fit_ok ? result.fit.parameters[1] : 0.0;
  const double fwhm = fit_ok ? result.fit.parameters[3] : 0.0;
  const bool ok = fit_ok && within(depth, 2e-12, 0.10) && within(fwhm, 11e6, 0.05);
  report("5. differential CW-PDMR dip", ok,
         "depth " + fmt(depth * 1e12) + " pA, FWHM " + fmt(fwhm / 1e6) + " MHz");
}

// --- 6. PLSD ----------------------------------------------------------------

void criterion_plsd() {
  experiments::ExperimentConfig cfg;
  cfg.kind = experiments::SweepKind::plsd;
  cfg.cycles_per_point = 4000;
  cfg.seed = 20260810;
  cfg.threads = 4;
  const double b0 = 5e-3;  // T, large against one LSB of conversion
  for (double f : {1e3, 1e5, 1e6, 1e7}) {
    nv::AcTone tone;
    tone.amplitude = b0 * Eigen::Vector3d(1, 1, 1).normalized();
    tone.frequency = f;
    tone.phase = kPi / 2.0 - kPi * cfg.plsd.duty;  // phase-matched
    cfg.env.ac_tones.push_back(tone);
  }
  const experiments::ExperimentResult result = experiments::run_plsd_sweep(cfg);

  const std::size_t n_ratios = cfg.effective_points().size();
  bool peaks_ok = true, detuned_ok = true;
  for (std::size_t t = 0; t < 4; ++t) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t j = 0; j < n_ratios; ++j) {
      const double v = std::abs(result.mean_differential[t * n_ratios + j]);
      if (v > best_abs) {
        best_abs = v;
        best = j;
      }
    }
    const double on_res = std::abs(
        result.mean_differential[t * n_ratios + (n_ratios / 2)]);  // ratio 1.0
    if (best_abs <= 0.0 ||
        std::abs(cfg.effective_points()[best] - 1.0) > 1e-9 || on_res <= 0.0) {
      peaks_ok = false;
    }
    const double lo = std::abs(result.mean_differential[t * n_ratios + 0]);
    const double hi = std::abs(result.mean_differential[t * n_ratios + n_ratios - 1]);
    if (lo >= 0.05 * on_res || hi >= 0.05 * on_res) detuned_ok = false;
  }

  // Noise-free fine-grained run for the duty-cycle averaging factor.
  experiments::ExperimentConfig quiet = cfg;
  quiet.env.ac_tones = {cfg.env.ac_tones[0]};
  quiet.env.ac_tones[0].amplitude = 1.6e-4 * Eigen::Vector3d(1, 1, 1).normalized();
  quiet.cycles_per_point = 1;
  quiet.ipcd.noise_rms_lsb = 0.0;
  quiet.ipcd.lsb_current = 1e-17;
  quiet.ipcd.bits = 24;
  quiet.points = {1.0};
  const experiments::ExperimentResult clean = experiments::run_plsd_sweep(quiet);
  const double gain = ipcd::lowpass_gain(1e3, quiet.ipcd.bandwidth_f0);
  const double dc_equivalent = 2.0 * quiet.plsd.duty * quiet.plsd.conversion_pa_per_mt *
                               (1.6e-4 * 1e3) * gain * 1e-12;
  const double ratio = std::abs(clean.mean_differential[0]) / dc_equivalent;
  const bool ratio_ok = std::abs(ratio - 0.900) <= 0.01;

  const bool f0_ok = result.fit.converged && within(result.fit.parameters[1], 5e6, 0.20);
  report("6. PLSD peaks, rejection, duty factor, f0",
         peaks_ok && detuned_ok && ratio_ok && f0_ok,
         "ratio " + fmt(ratio) + ", f0 " + fmt(result.fit.parameters[1] / 1e6) + " MHz");
}

// --- 7. Rabi ----------------------------------------------------------------

void criterion_rabi() {
  experiments::ExperimentConfig cfg;
  cfg.kind = experiments::SweepKind::rabi;
  cfg.cycles_per_point = 1000;
  cfg.seed = 20260810;
  cfg.threads = 4;
  const experiments::ExperimentResult result = experiments::run_rabi(cfg);

  const auto& amplitudes = result.aux_series[0].second;
  const auto& freqs = result.aux_series[1].second;
  const fit::FitReport line =
      fit::curve_fit(fit::Model::linear, amplitudes, freqs);
  double mean = 0.0;
  for (double f : freqs) mean += f;
  mean /= static_cast<double>(freqs.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const double model = line.parameters[0] + line.parameters[1] * amplitudes[i];
    ss_res += (freqs[i] - model) * (freqs[i] - model);
    ss_tot += (freqs[i] - mean) * (freqs[i] - mean);
  }
  const double r2 = 1.0 - ss_res / ss_tot;

  const double envelope = result.fit.parameters[3];
  const bool envelope_ok = within(envelope, 185e-9, 0.10);

  // Off-resonant control at tenfold detuning.
  nv::NVParams params = cfg.nv;
  params.t2_star = 1e3;  // negligible damping across one generalized period
  const double omega = cfg.drive.rabi_rate_hz;
  const double detuning = 10.0 * omega;
  const double omega_gen = std::hypot(omega, detuning);
  double max_transfer = 0.0;
  for (int i = 0; i <= 500; ++i) {
    nv::TwoLevelState s;
    const double t = static_cast<double>(i) / 500.0 / omega_gen;
    const auto evolved = nv::evolve_two_level(s, omega, 0.0, detuning, t, params);
    max_transfer = std::max(max_transfer, 0.5 * (1.0 - evolved.bloch.z()));
  }
  const bool off_res_ok = max_transfer < 1.02 * (omega * omega) / (detuning * detuning);

  report("7. Rabi linearity, envelope, off-resonant control",
         r2 > 0.99 && envelope_ok && off_res_ok,
         "R2 " + fmt(r2) + ", envelope " + fmt(envelope * 1e9) + " ns, transfer " +
             fmt(max_transfer));
}

// --- 8. CPMG ----------------------------------------------------------------

void criterion_cpmg() {
  experiments::ExperimentConfig cfg;
  cfg.kind = experiments::SweepKind::cpmg;
  cfg.cycles_per_point = 10000;
  cfg.seed = 20260810;
  cfg.threads = 4;
  const experiments::ExperimentResult result = experiments::run_cpmg(cfg);
  const double t2 = result.fit.parameters[1];
  const bool ok = result.fit.converged && within(t2, 1.73e-6, 0.05) &&
                  t2 / cfg.nv.t2_star >= 9.0;
  report("8. CPMG coherence time", ok,
         "T2 " + fmt(t2 * 1e6) + " us, T2/T2* " + fmt(t2 / cfg.nv.t2_star));
}

// --- 9. Sensitivity arithmetic ----------------------------------------------

void criterion_sensitivity() {
  using namespace pdmr::sensitivity;
  SensitivityInputs in;
  in.rate = 4e5;
  const double raw_optical = sensitivity_cw(in);
  in.rate = 2.2e11;
  const double nominal_optical = sensitivity_cw(in);
  in.rate = 4.7e8;
  const double electrical = sensitivity_cw(in);
  const double plsd = sensitivity_plsd(in, 0.25);
  const double penalty = plsd_penalty(0.25);

  const bool absolute_ok = within(raw_optical, 53.2e-6, 0.25) &&
                           within(nominal_optical, 71e-9, 0.25) &&
                           within(electrical, 1.6e-6, 0.25) &&
                           within(plsd, 2.4e-6, 0.25);
  const bool ratios_ok =
      within(raw_optical / electrical, 53.2e-6 / 1.6e-6, 0.05) &&
      within(raw_optical / nominal_optical, 53.2e-6 / 71e-9, 0.05) &&
      within(electrical / nominal_optical, 1.6e-6 / 71e-9, 0.05) &&
      within(plsd / electrical, 2.4e-6 / 1.6e-6, 0.05);
  const bool penalty_ok = std::abs(penalty - 1.570796) < 1e-6;

  report("9. sensitivity arithmetic", absolute_ok && ratios_ok && penalty_ok,
         "cw " + fmt(raw_optical * 1e6) + "/" + fmt(nominal_optical * 1e9) + "/" +
             fmt(electrical * 1e6) + ", plsd " + fmt(plsd * 1e6) + ", penalty " +
             fmt(penalty));
}

// --- 10. Paschen check ------------------------------------------------------

void criterion_paschen() {
  const auto ok_case = ipcd::bias_field_check(24.0, 15e-6);
  const auto boundary = ipcd::bias_field_check(45.0, 15e-6);  // exactly 3 V/um
  const bool ok = ok_case.ok && within(ok_case.field_v_per_um, 1.6, 1e-9) &&
                  !boundary.ok;
  report("10. Paschen bias-field check", ok,
         "24 V / 15 um -> " + fmt(ok_case.field_v_per_um) + " V/um");
}

// --- 11. Property suites ----------------------------------------------------

bool fuzz_round_trip() {
  std::mt19937_64 rng(20260810);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int diffs = 0;
  for (int i = 0; i < 1000; ++i) {
    seq::Sequence s;
    switch (i % 4) {
      case 0: {
        const double f = 2.8e9 + 2e8 * u(rng);
        s = seq::gen_odmr({f}, u(rng) < 0.5)[0].second;
        break;
      }
      case 1: {
        const double f = std::pow(10.0, 3.0 + 4.0 * u(rng));
        s = seq::gen_plsd(f, 0.05 + 0.7 * u(rng), 1.0 + 8.0 * u(rng), u(rng) < 0.5);
        break;
      }
      case 2: {
        const double tau = 1e-9 * std::floor(1.0 + 600.0 * u(rng));
        s = seq::gen_rabi({tau}, 5e-6, 0.1 + u(rng))[0];
        break;
      }
      default: {
        const double tau = 2e-9 * std::floor(1.0 + 2000.0 * u(rng));
        s = seq::gen_cpmg({tau})[0];
        break;
      }
    }
    const seq::Sequence reparsed = seq::parse_sequence(seq::print_sequence(s));
    if (!seq::structurally_equal(s, reparsed)) ++diffs;
    if (!seq::validate_sequence(s).empty()) ++diffs;
  }
  return diffs == 0;
}

bool determinism_bytes(const std::string& cli) {
  experiments::ExperimentConfig cfg;
  cfg.kind = experiments::SweepKind::odmr;
  cfg.cycles_per_point = 200;
  cfg.seed = 77;
  io::RunManifest manifest;
  manifest.seed = cfg.seed;

  cfg.threads = 1;
  const auto serial = experiments::run_odmr_scan(cfg);
  io::write_results(serial, "/tmp/pdmr_acc_serial.csv", manifest);
  cfg.threads = 4;
  const auto parallel = experiments::run_odmr_scan(cfg);
  io::write_results(parallel, "/tmp/pdmr_acc_parallel.csv", manifest);
  bool ok = slurp("/tmp/pdmr_acc_serial.csv") == slurp("/tmp/pdmr_acc_parallel.csv") &&
            slurp("/tmp/pdmr_acc_serial.csv.json") == slurp("/tmp/pdmr_acc_parallel.csv.json");

  if (!cli.empty()) {
    std::ofstream config("/tmp/pdmr_acc.ini", std::ios::trunc);
    config << "[run]\ncycles_per_point = 200\nseed = 77\n";
    config.close();
    const std::string base = cli + " odmr --config /tmp/pdmr_acc.ini";
    const int rc1 = std::system(
        (base + " --out /tmp/pdmr_acc_cli1.csv --threads 1 > /dev/null").c_str());
    const int rc2 = std::system(
        (base + " --out /tmp/pdmr_acc_cli2.csv --threads 4 > /dev/null").c_str());
    ok = ok && rc1 == 0 && rc2 == 0 &&
         slurp("/tmp/pdmr_acc_cli1.csv") == slurp("/tmp/pdmr_acc_cli2.csv");
  }
  return ok;
}

bool population_conservation() {
  nv::NVParams p;
  nv::SpinPopulations s;
  s.p_g0 = 0.6;
  s.p_g1 = 0.4;
  const double dt = p.tau_excited / 10.0;
  for (int i = 0; i < 1000000; ++i) {
    s = nv::propagate_rate_equations(s, p, 8.0, (i / 1000) % 2 == 0, dt);
  }
  return std::abs(s.total() - 1.0) < 1e-3;
}

void criterion_properties(const std::string& cli) {
  const bool round_trip = fuzz_round_trip();
  const bool deterministic = determinism_bytes(cli);
  const bool conserved = population_conservation();
  report("11. property suites (round-trip, determinism, conservation)",
         round_trip && deterministic && conserved,
         std::string("round-trip ") + (round_trip ? "ok" : "FAIL") + ", bytes " +
             (deterministic ? "ok" : "FAIL") + ", population " +
             (conserved ? "ok" : "FAIL"));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  criterion_resonance_shift();
  criterion_saturation_refit();
  criterion_ipcd();
  criterion_noise_budget();
  criterion_cw_pdmr();
  criterion_plsd();
  criterion_rabi();
  criterion_cpmg();
  criterion_sensitivity();
  criterion_paschen();
  criterion_properties(cli);
  if (g_failures == 0) {
    std::printf("all acceptance checks passed\n");
  } else {
    std::printf("%d acceptance check(s) FAILED\n", g_failures);
  }
  return g_failures;
}
