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

#include "pdmr/experiments.hpp"

namespace pdmr::io {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Run provenance written into the sidecar. Timestamps stay empty unless the
// caller opts in (--stamp); by default every output byte is a pure function
// of config + seed.
struct RunManifest {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string tool_version = std::string(kToolVersion);
  std::string started_at;   // ISO 8601 UTC, optional
  std::string finished_at;  // ISO 8601 UTC, optional
  std::string table_path;
  std::string sidecar_path;
};

// Writes the sweep table to `path` as delimited text with header
//   sweep_value,mean_diff_current_A,std_A,n_cycles
// (one row per point, 17 significant digits) and a structured JSON sidecar
// to `path`.json carrying the fit reports, auxiliary series and the
// manifest. Rejects empty results; throws on unwritable paths.
void write_results(const experiments::ExperimentResult& result,
                   const std::string& path, const RunManifest& manifest);

std::string sidecar_path_for(const std::string& table_path);

// ISO 8601 UTC wall-clock time, for opt-in manifest stamping.
std::string utc_timestamp_now();

}  // namespace pdmr::io
