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

#include "pdmr/results_io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "pdmr/errors.hpp"

namespace pdmr::io {

namespace {

// 17 significant digits; round-trips any double.
std::string format_17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

nlohmann::json fit_to_json(const fit::FitReport& report) {
  nlohmann::json j;
  j["model"] = std::string(fit::model_name(report.model));
  j["parameter_names"] = fit::parameter_names(report.model);
  j["parameters"] = report.parameters;
  j["uncertainties"] = report.uncertainties;
  j["residual_norm"] = report.residual_norm;
  j["converged"] = report.converged;
  j["rank_deficient"] = report.rank_deficient;
  j["iterations"] = report.iterations;
  j["message"] = report.message;
  j["residual_history"] = report.residual_history;
  return j;
}

}  // namespace

std::string sidecar_path_for(const std::string& table_path) {
  return table_path + ".json";
}

std::string utc_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_results(const experiments::ExperimentResult& result,
                   const std::string& path, const RunManifest& manifest) {
  const std::size_t n = result.sweep_values.size();
  if (n == 0) {
    throw ValidationError("write_results: result has no sweep points");
  }
  if (result.mean_differential.size() != n || result.std_dev.size() != n) {
    throw ValidationError("write_results: column lengths differ");
  }

  std::ofstream table(path, std::ios::binary | std::ios::trunc);
  if (!table) {
    throw std::runtime_error("write_results: cannot write '" + path + "'");
  }
  table << "sweep_value,mean_diff_current_A,std_A,n_cycles\n";
  for (std::size_t i = 0; i < n; ++i) {
    table << format_17(result.sweep_values[i]) << ","
          << format_17(result.mean_differential[i]) << ","
          << format_17(result.std_dev[i]) << "," << result.cycles << "\n";
  }
  table.flush();
  if (!table) {
    throw std::runtime_error("write_results: failed writing '" + path + "'");
  }

  nlohmann::json j;
  j["manifest"] = {
      {"config_digest", manifest.config_digest},
      {"seed", manifest.seed},
      {"tool_version", manifest.tool_version},
      {"started_at", manifest.started_at},
      {"finished_at", manifest.finished_at},
      {"table_path", manifest.table_path},
      {"sidecar_path", manifest.sidecar_path},
  };
  j["sweep"] = {
      {"kind", std::string(experiments::sweep_kind_name(result.kind))},
      {"n_points", n},
      {"cycles_per_point", result.cycles},
  };
  j["fit"] = fit_to_json(result.fit);
  nlohmann::json aux_fits = nlohmann::json::object();
  for (const auto& [label, report] : result.aux_fits) {
    aux_fits[label] = fit_to_json(report);
  }
  j["aux_fits"] = aux_fits;
  nlohmann::json aux_series = nlohmann::json::object();
  for (const auto& [label, series] : result.aux_series) {
    aux_series[label] = series;
  }
  j["aux_series"] = aux_series;

  const std::string sidecar = sidecar_path_for(path);
  std::ofstream side(sidecar, std::ios::binary | std::ios::trunc);
  if (!side) {
    throw std::runtime_error("write_results: cannot write '" + sidecar + "'");
  }
  side << j.dump(2) << "\n";
  side.flush();
  if (!side) {
    throw std::runtime_error("write_results: failed writing '" + sidecar + "'");
  }
}

}  // namespace pdmr::io
