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

#include "pdmr/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "pdmr/errors.hpp"

namespace pdmr::io {

namespace {

struct RawEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct RawSection {
  std::string name;
  std::vector<RawEntry> entries;
};

struct RawConfig {
  std::vector<RawSection> sections;

  RawSection& section(const std::string& name) {
    for (RawSection& s : sections) {
      if (s.name == name) return s;
    }
    sections.push_back(RawSection{name, {}});
    return sections.back();
  }
};

const char* const kSectionOrder[] = {"nv",  "environment", "ipcd",     "sweep",
                                     "run", "drive",       "plsd",     "operating"};

bool known_section(const std::string& name) {
  for (const char* s : kSectionOrder) {
    if (name == s) return true;
  }
  return false;
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, b - a + 1);
}

RawConfig parse_raw(std::string_view text) {
  RawConfig raw;
  std::istringstream stream{std::string(text)};
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": malformed section header '" + line + "'");
      }
      current = strip(line.substr(1, line.size() - 2));
      if (!known_section(current)) {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": unknown section [" + current + "]");
      }
      raw.section(current);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value, got '" + line + "'");
    }
    if (current.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": key outside of any section");
    }
    RawEntry entry;
    entry.key = strip(line.substr(0, eq));
    entry.value = strip(line.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
    }
    raw.section(current).entries.push_back(std::move(entry));
  }
  return raw;
}

std::vector<std::string> split_tokens(const std::string& value) {
  std::vector<std::string> tokens;
  std::string token;
  for (char c : value) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!token.empty()) tokens.push_back(std::move(token));
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) tokens.push_back(std::move(token));
  return tokens;
}

std::optional<double> try_parse_double(const std::string& token) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

std::string normalize_value(const std::string& value) {
  std::string out;
  for (const std::string& token : split_tokens(value)) {
    if (!out.empty()) out += " ";
    if (auto v = try_parse_double(token)) {
      out += format_double(*v);
    } else {
      out += token;
    }
  }
  return out;
}

std::string canonical_text(const RawConfig& raw) {
  std::string out;
  for (const char* name : kSectionOrder) {
    const RawSection* section = nullptr;
    for (const RawSection& s : raw.sections) {
      if (s.name == name) section = &s;
    }
    if (section == nullptr || section->entries.empty()) continue;
    std::vector<RawEntry> entries = section->entries;
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RawEntry& a, const RawEntry& b) { return a.key < b.key; });
    out += "[" + std::string(name) + "]\n";
    for (const RawEntry& e : entries) {
      out += e.key + " = " + normalize_value(e.value) + "\n";
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (char c : data) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

[[noreturn]] void bad_key(const RawSection& section, const RawEntry& entry,
                          const std::string& why) {
  throw ValidationError("config line " + std::to_string(entry.line) + ": " + why +
                        " for key '" + entry.key + "' in section [" + section.name + "]");
}

double parse_scalar(const RawSection& section, const RawEntry& entry) {
  const auto tokens = split_tokens(entry.value);
  if (tokens.size() != 1) bad_key(section, entry, "expected a single number");
  if (auto v = try_parse_double(tokens[0])) return *v;
  bad_key(section, entry, "bad number");
}

std::uint64_t parse_unsigned(const RawSection& section, const RawEntry& entry) {
  const auto tokens = split_tokens(entry.value);
  std::uint64_t v = 0;
  if (tokens.size() == 1) {
    const char* begin = tokens[0].data();
    const char* end = begin + tokens[0].size();
    auto [p, ec] = std::from_chars(begin, end, v);
    if (ec == std::errc{} && p == end) return v;
  }
  bad_key(section, entry, "expected a non-negative integer");
}

bool parse_bool(const RawSection& section, const RawEntry& entry) {
  if (entry.value == "true" || entry.value == "1") return true;
  if (entry.value == "false" || entry.value == "0") return false;
  bad_key(section, entry, "expected true/false");
}

std::vector<double> parse_list(const RawSection& section, const RawEntry& entry,
                               std::size_t exact = 0) {
  std::vector<double> out;
  for (const std::string& token : split_tokens(entry.value)) {
    if (auto v = try_parse_double(token)) {
      out.push_back(*v);
    } else {
      bad_key(section, entry, "bad number '" + token + "'");
    }
  }
  if (exact != 0 && out.size() != exact) {
    bad_key(section, entry, "expected exactly " + std::to_string(exact) + " numbers");
  }
  if (out.empty()) bad_key(section, entry, "expected at least one number");
  return out;
}

struct SweepRange {
  std::optional<double> start, stop;
  std::optional<std::uint64_t> count;
  bool points_given = false;
};

void apply_section(const RawSection& section, LoadedConfig& loaded, SweepRange& range) {
  experiments::ExperimentConfig& cfg = loaded.experiment;
  for (const RawEntry& e : section.entries) {
    const std::string& k = e.key;
    if (section.name == "nv") {
      auto& nv = cfg.nv;
      if (k == "d_gs") nv.d_gs = parse_scalar(section, e);
      else if (k == "gamma") nv.gamma = parse_scalar(section, e);
      else if (k == "intrinsic_splitting") nv.intrinsic_splitting = parse_scalar(section, e);
      else if (k == "tau_shelf") nv.tau_shelf = parse_scalar(section, e);
      else if (k == "tau_excited") nv.tau_excited = parse_scalar(section, e);
      else if (k == "branch_shelf") nv.branch_shelf = parse_scalar(section, e);
      else if (k == "branch_repolarize") nv.branch_repolarize = parse_scalar(section, e);
      else if (k == "alpha_sat") nv.alpha_sat = parse_scalar(section, e);
      else if (k == "beta_sat") nv.beta_sat = parse_scalar(section, e);
      else if (k == "linewidth_fwhm") nv.linewidth_fwhm = parse_scalar(section, e);
      else if (k == "contrast_cw") nv.contrast_cw = parse_scalar(section, e);
      else if (k == "t2_star") nv.t2_star = parse_scalar(section, e);
      else if (k == "t2") nv.t2 = parse_scalar(section, e);
      else if (k == "nv_density_ppm") nv.nv_density_ppm = parse_scalar(section, e);
      else if (k == "pump_rate_at_8mw") nv.pump_rate_at_8mw = parse_scalar(section, e);
      else if (k == "mw_mixing_rate") nv.mw_mixing_rate = parse_scalar(section, e);
      else if (k == "ionization_rate_at_8mw") nv.ionization_rate_at_8mw = parse_scalar(section, e);
      else if (k == "v_ref") nv.v_ref = parse_scalar(section, e);
      else bad_key(section, e, "unknown key");
    } else if (section.name == "environment") {
      if (k == "b_static") {
        const auto v = parse_list(section, e, 3);
        cfg.env.b_static = Eigen::Vector3d(v[0], v[1], v[2]);
      } else if (k == "ac_tone") {
        const auto v = parse_list(section, e, 5);
        nv::AcTone tone;
        tone.amplitude = Eigen::Vector3d(v[0], v[1], v[2]);
        tone.frequency = v[3];
        tone.phase = v[4];
        cfg.env.ac_tones.push_back(tone);
      } else {
        bad_key(section, e, "unknown key");
      }
    } else if (section.name == "ipcd") {
      auto& det = cfg.ipcd;
      if (k == "lsb_current") det.lsb_current = parse_scalar(section, e);
      else if (k == "bits") det.bits = static_cast<int>(parse_unsigned(section, e));
      else if (k == "noise_rms_lsb") det.noise_rms_lsb = parse_scalar(section, e);
      else if (k == "t_integrate") det.t_integrate = parse_scalar(section, e);
      else if (k == "bandwidth_f0") det.bandwidth_f0 = parse_scalar(section, e);
      else if (k == "seed") det.seed = parse_unsigned(section, e);
      else bad_key(section, e, "unknown key");
    } else if (section.name == "sweep") {
      if (k == "kind") {
        experiments::SweepKind kind;
        if (!experiments::sweep_kind_from_name(e.value, kind)) {
          bad_key(section, e, "unknown sweep kind '" + e.value + "'");
        }
        cfg.kind = kind;
        loaded.kind_present = true;
      } else if (k == "points") {
        cfg.points = parse_list(section, e);
        range.points_given = true;
      } else if (k == "start") {
        range.start = parse_scalar(section, e);
      } else if (k == "stop") {
        range.stop = parse_scalar(section, e);
      } else if (k == "count") {
        range.count = parse_unsigned(section, e);
      } else {
        bad_key(section, e, "unknown key");
      }
    } else if (section.name == "run") {
      if (k == "cycles_per_point") cfg.cycles_per_point = static_cast<int>(parse_unsigned(section, e));
      else if (k == "seed") cfg.seed = parse_unsigned(section, e);
      else if (k == "threads") cfg.threads = static_cast<int>(parse_unsigned(section, e));
      else bad_key(section, e, "unknown key");
    } else if (section.name == "drive") {
      auto& drive = cfg.drive;
      if (k == "rabi_rate_hz") drive.rabi_rate_hz = parse_scalar(section, e);
      else if (k == "amplitudes") drive.amplitudes = parse_list(section, e);
      else if (k == "detuning_hz") drive.detuning_hz = parse_scalar(section, e);
      else if (k == "laser_pulse") drive.laser_pulse_s = parse_scalar(section, e);
      else if (k == "gap") drive.gap_s = parse_scalar(section, e);
      else bad_key(section, e, "unknown key");
    } else if (section.name == "plsd") {
      auto& plsd = cfg.plsd;
      if (k == "duty") plsd.duty = parse_scalar(section, e);
      else if (k == "conversion_pa_per_mt") plsd.conversion_pa_per_mt = parse_scalar(section, e);
      else if (k == "quadrature") plsd.quadrature = parse_bool(section, e);
      else if (k == "axis") plsd.axis = static_cast<int>(parse_unsigned(section, e));
      else bad_key(section, e, "unknown key");
    } else if (section.name == "operating") {
      auto& op = cfg.operating;
      if (k == "laser_power_mw") op.laser_power_mw = parse_scalar(section, e);
      else if (k == "bias_v") op.bias_v = parse_scalar(section, e);
      else if (k == "fluorescence_cps_per_mw") op.fluorescence_cps_per_mw = parse_scalar(section, e);
      else bad_key(section, e, "unknown key");
    }
  }
}

}  // namespace

LoadedConfig load_config_text(std::string_view text) {
  const RawConfig raw = parse_raw(text);
  LoadedConfig loaded;
  SweepRange range;
  for (const RawSection& section : raw.sections) {
    apply_section(section, loaded, range);
  }
  if (range.points_given &&
      (range.start.has_value() || range.stop.has_value() || range.count.has_value())) {
    throw ValidationError("config: give either sweep points or start/stop/count, not both");
  }
  if (range.start.has_value() || range.stop.has_value() || range.count.has_value()) {
    if (!(range.start && range.stop && range.count)) {
      throw ValidationError("config: sweep start/stop/count must be given together");
    }
    if (*range.count < 2) {
      throw ValidationError("config: sweep count must be at least 2");
    }
    const auto n = static_cast<std::size_t>(*range.count);
    loaded.experiment.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      loaded.experiment.points[i] =
          *range.start + (*range.stop - *range.start) * static_cast<double>(i) /
                             static_cast<double>(n - 1);
    }
  }
  loaded.canonical = canonical_text(raw);
  loaded.digest = to_hex(fnv1a64(loaded.canonical));
  return loaded;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw ValidationError("config: cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return load_config_text(buffer.str());
}

std::string canonical_config_text(std::string_view text) {
  return canonical_text(parse_raw(text));
}

std::string config_digest_hex(std::string_view text) {
  return to_hex(fnv1a64(canonical_config_text(text)));
}

}  // namespace pdmr::io
