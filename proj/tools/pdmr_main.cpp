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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pdmr/config.hpp"
#include "pdmr/errors.hpp"
#include "pdmr/nv_model.hpp"
#include "pdmr/results_io.hpp"
#include "pdmr/sensitivity.hpp"
#include "pdmr/sequence.hpp"

namespace {

using pdmr::experiments::SweepKind;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  bool threads_given = false;
  bool stamp = false;
};

void add_common(CLI::App* sub, CommonArgs& args, bool out_required) {
  sub->add_option("--config", args.config_path, "configuration file");
  auto* out = sub->add_option("--out", args.out_path, "output table path");
  if (out_required) out->required();
  sub->add_option("--seed", args.seed, "override the run seed")
      ->each([&args](const std::string&) { args.seed_given = true; });
  sub->add_option("--threads", args.threads, "worker threads for sweep points")
      ->each([&args](const std::string&) { args.threads_given = true; });
  sub->add_flag("--stamp", args.stamp, "record wall-clock timestamps in the sidecar");
}

pdmr::io::LoadedConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    return pdmr::io::load_config_text("");
  }
  return pdmr::io::load_config(path);
}

int run_experiment_command(SweepKind kind, const CommonArgs& args) {
  pdmr::io::LoadedConfig loaded = load_or_default(args.config_path);
  if (loaded.kind_present && loaded.experiment.kind != kind) {
    throw pdmr::ValidationError(
        std::string("config sweep kind '") +
        std::string(pdmr::experiments::sweep_kind_name(loaded.experiment.kind)) +
        "' conflicts with subcommand '" +
        std::string(pdmr::experiments::sweep_kind_name(kind)) + "'");
  }
  loaded.experiment.kind = kind;
  if (args.seed_given) loaded.experiment.seed = args.seed;
  if (args.threads_given) loaded.experiment.threads = args.threads;

  pdmr::io::RunManifest manifest;
  manifest.config_digest = loaded.digest;
  manifest.seed = loaded.experiment.seed;
  manifest.table_path = args.out_path;
  manifest.sidecar_path = pdmr::io::sidecar_path_for(args.out_path);
  if (args.stamp) manifest.started_at = pdmr::io::utc_timestamp_now();

  const pdmr::experiments::ExperimentResult result =
      pdmr::experiments::run_experiment(loaded.experiment);

  if (args.stamp) manifest.finished_at = pdmr::io::utc_timestamp_now();
  pdmr::io::write_results(result, args.out_path, manifest);

  std::cout << "wrote " << manifest.table_path << " and " << manifest.sidecar_path
            << "\n";
  std::cout << "fit: " << pdmr::fit::model_name(result.fit.model)
            << (result.fit.converged ? " converged" : " NOT converged");
  const auto names = pdmr::fit::parameter_names(result.fit.model);
  for (std::size_t i = 0; i < result.fit.parameters.size(); ++i) {
    std::cout << " " << names[i] << "=" << result.fit.parameters[i];
  }
  std::cout << "\n";
  return 0;
}

void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      throw std::runtime_error("cannot write '" + out_path + "'");
    }
    file << text;
  }
}

// NaN reference prints as "-".
std::string table_row(const std::string& label, double computed,
                      double reference, const std::string& unit) {
  char buf[160];
  if (!std::isnan(reference)) {
    std::snprintf(buf, sizeof buf, "%-34s %14.6g %14.6g  %s\n", label.c_str(),
                  computed, reference, unit.c_str());
  } else {
    std::snprintf(buf, sizeof buf, "%-34s %14.6g %14s  %s\n", label.c_str(),
                  computed, "-", unit.c_str());
  }
  return buf;
}

int run_noise_command(const CommonArgs& args, double resistance, double temperature) {
  const pdmr::io::LoadedConfig loaded = load_or_default(args.config_path);
  const auto& cfg = loaded.experiment;
  const double current_pa = pdmr::nv::steady_state_photocurrent(
      cfg.nv, cfg.operating.laser_power_mw, cfg.operating.bias_v, 0.0);
  const double current_a = current_pa * 1e-12;
  const auto budget =
      pdmr::ipcd::noise_budget(current_a, resistance, temperature, cfg.ipcd);
  const double signal_a = current_a * cfg.nv.contrast_cw;

  std::ostringstream out;
  out << "noise budget at " << current_pa << " pA (R = " << resistance / 1e9
      << " GOhm, T = " << temperature << " K)\n";
  char header[160];
  std::snprintf(header, sizeof header, "%-34s %14s %14s  %s\n", "quantity",
                "computed", "reference", "unit");
  out << header;
  out << table_row("shot_noise", budget.shot * 1e15, 4.8, "fA/sqrt(Hz)");
  out << table_row("johnson_noise", budget.johnson * 1e15, 0.6, "fA/sqrt(Hz)");
  out << table_row("quantization_floor", budget.quantization * 1e15, 84.0,
                   "fA/sqrt(Hz)");
  out << table_row("total_floor", budget.total * 1e15,
                   std::nan(""), "fA/sqrt(Hz)");
  out << table_row("differential_signal", signal_a * 1e12, 2.0, "pA");
  out << table_row("signal_to_floor", budget.ratio_to(signal_a), std::nan(""),
                   "per sqrt(Hz)");
  emit(out.str(), args.out_path);
  return 0;
}

int run_sensitivity_command(const CommonArgs& args) {
  const pdmr::io::LoadedConfig loaded = load_or_default(args.config_path);
  const auto& cfg = loaded.experiment;
  namespace sens = pdmr::sensitivity;

  const double current_pa = pdmr::nv::steady_state_photocurrent(
      cfg.nv, cfg.operating.laser_power_mw, cfg.operating.bias_v, 0.0);
  const double carrier_rate = sens::carrier_rate_from_current(current_pa * 1e-12);

  sens::SensitivityInputs inputs;
  inputs.linewidth_fwhm = cfg.nv.linewidth_fwhm;
  inputs.contrast = cfg.nv.contrast_cw;
  inputs.gamma = cfg.nv.gamma;

  // Detection rates of the characterized setup: ND-filtered and unfiltered
  // photon rates of the reference measurement.
  const double optical_raw_rate = 4e5;
  const double optical_nominal_rate = 2.2e11;

  inputs.rate = optical_raw_rate;
  const double optical_raw = sens::sensitivity_cw(inputs);
  inputs.rate = optical_nominal_rate;
  const double optical_nominal = sens::sensitivity_cw(inputs);
  inputs.rate = carrier_rate;
  const double electrical = sens::sensitivity_cw(inputs);
  const double penalty = sens::plsd_penalty(cfg.plsd.duty);
  const double plsd = sens::sensitivity_plsd(inputs, cfg.plsd.duty);

  const double volume =
      sens::sensor_volume_um3(optical_nominal_rate, cfg.nv.nv_density_ppm);
  const double target_volume_um3 = 3000.0 * 3000.0 * 10.0;
  const double current_gain = 4e-9 / (current_pa * 1e-12);
  const double projected = sens::scaling_projection(
      electrical, target_volume_um3 / volume, current_gain);

  std::ostringstream out;
  char header[160];
  std::snprintf(header, sizeof header, "%-34s %14s %14s  %s\n", "quantity",
                "computed", "reference", "unit");
  out << header;
  out << table_row("optical_raw_sensitivity", optical_raw * 1e6, 53.2, "uT/sqrt(Hz)");
  out << table_row("optical_nominal_sensitivity", optical_nominal * 1e9, 71.0,
                   "nT/sqrt(Hz)");
  out << table_row("electrical_cw_sensitivity", electrical * 1e6, 1.6, "uT/sqrt(Hz)");
  out << table_row("plsd_sensitivity", plsd * 1e6, 2.4, "uT/sqrt(Hz)");
  out << table_row("plsd_duty_penalty", penalty, std::nan(""), "1");
  out << table_row("carrier_rate", carrier_rate, 4.7e8, "1/s");
  out << table_row("sensor_volume", volume, 3.2, "um^3");
  out << table_row("projected_large_volume", projected * 1e12, 33.0, "pT/sqrt(Hz)");
  out << table_row("naive_conversion_slope",
                   pdmr::nv::naive_conversion_slope_pa_per_mt(cfg.nv, current_pa),
                   0.78, "pA/mT");
  out << "computed values follow from the configured line parameters; reference\n"
         "values are the measured figures of the characterized device.\n";
  emit(out.str(), args.out_path);
  return 0;
}

int run_parse_command(const CommonArgs& args) {
  std::ifstream file(args.config_path, std::ios::binary);
  if (!file) {
    throw pdmr::ValidationError("cannot open sequence file '" + args.config_path + "'");
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  const pdmr::seq::Sequence sequence = pdmr::seq::parse_sequence(buffer.str());
  emit(pdmr::seq::print_sequence(sequence), args.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV ensemble magnetometer simulator with photoelectric readout"};
  app.require_subcommand(1);

  CommonArgs args;
  double resistance = 46e9;
  double temperature = 300.0;

  CLI::App* sub_odmr = app.add_subcommand("odmr", "differential CW resonance sweep");
  CLI::App* sub_sat = app.add_subcommand("saturation", "photocurrent vs laser power");
  CLI::App* sub_bias = app.add_subcommand("bias", "current and dip depth vs bias voltage");
  CLI::App* sub_rabi = app.add_subcommand("rabi", "coherent oscillation sweep");
  CLI::App* sub_cpmg = app.add_subcommand("cpmg", "echo coherence decay sweep");
  CLI::App* sub_plsd = app.add_subcommand("plsd", "stroboscopic AC field sweep");
  for (CLI::App* sub : {sub_odmr, sub_sat, sub_bias, sub_rabi, sub_cpmg, sub_plsd}) {
    add_common(sub, args, true);
  }

  CLI::App* sub_noise = app.add_subcommand("noise", "print the detector noise budget");
  add_common(sub_noise, args, false);
  sub_noise->add_option("--resistance", resistance, "effective input resistance, Ohm");
  sub_noise->add_option("--temperature", temperature, "temperature, K");

  CLI::App* sub_sens = app.add_subcommand("sensitivity", "print the sensitivity table");
  add_common(sub_sens, args, false);

  CLI::App* sub_parse =
      app.add_subcommand("parse", "validate a sequence file and print its canonical form");
  add_common(sub_parse, args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(sub_odmr)) return run_experiment_command(SweepKind::odmr, args);
    if (app.got_subcommand(sub_sat)) return run_experiment_command(SweepKind::saturation, args);
    if (app.got_subcommand(sub_bias)) return run_experiment_command(SweepKind::bias, args);
    if (app.got_subcommand(sub_rabi)) return run_experiment_command(SweepKind::rabi, args);
    if (app.got_subcommand(sub_cpmg)) return run_experiment_command(SweepKind::cpmg, args);
    if (app.got_subcommand(sub_plsd)) return run_experiment_command(SweepKind::plsd, args);
    if (app.got_subcommand(sub_noise)) return run_noise_command(args, resistance, temperature);
    if (app.got_subcommand(sub_sens)) return run_sensitivity_command(args);
    if (app.got_subcommand(sub_parse)) {
      if (args.config_path.empty()) {
        throw pdmr::ValidationError("parse: --config <sequence file> is required");
      }
      return run_parse_command(args);
    }
  } catch (const pdmr::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pdmr::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pdmr::seq::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
