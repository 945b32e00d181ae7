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

#include "pdmr/sequence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"

namespace pdmr::seq {

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    if (line[i] == '#') {
      break;
    }
    std::size_t begin = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r' && line[i] != '#') {
      ++i;
    }
    tokens.push_back({line.substr(begin, i - begin), static_cast<int>(begin) + 1});
  }
  return tokens;
}

// Shortest round-trip decimal form; stable across runs and platforms.
std::string format_double(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

// Parses the numeric head of `text`, returning the unit suffix in `suffix`.
bool parse_number(std::string_view text, double& value, std::string_view& suffix) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [p, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || p == begin) {
    return false;
  }
  suffix = std::string_view(p, static_cast<std::size_t>(end - p));
  return true;
}

std::int64_t parse_timespan(const Token& tok, int line) {
  double value = 0.0;
  std::string_view suffix;
  if (!parse_number(tok.text, value, suffix)) {
    throw ParseError(line, tok.column, "expected a time value, got '" + tok.text + "'");
  }
  double mult = 0.0;
  if (suffix == "ns") {
    mult = 1.0;
  } else if (suffix == "us") {
    mult = 1e3;
  } else if (suffix == "ms") {
    mult = 1e6;
  } else if (suffix == "s") {
    mult = 1e9;
  } else if (suffix.empty()) {
    throw ParseError(line, tok.column, "missing time unit on '" + tok.text + "' (use ns/us/ms/s)");
  } else {
    throw ParseError(line, tok.column, "unknown time unit '" + std::string(suffix) + "'");
  }
  const double scaled = value * mult;
  if (!(scaled >= 0.0) || !std::isfinite(scaled)) {
    throw ParseError(line, tok.column, "time value must be non-negative and finite");
  }
  if (std::abs(scaled - std::round(scaled)) > 1e-6) {
    throw ParseError(line, tok.column, "'" + tok.text + "' is not on the 1 ns grid");
  }
  return static_cast<std::int64_t>(std::llround(scaled));
}

bool channel_from_name(std::string_view name, Channel& out) {
  if (name == "laser") {
    out = Channel::laser;
  } else if (name == "mw") {
    out = Channel::mw;
  } else if (name == "sync") {
    out = Channel::sync;
  } else {
    return false;
  }
  return true;
}

double parse_attr_value(const Token& tok, std::string_view key,
                        std::string_view raw, int line) {
  double value = 0.0;
  std::string_view suffix;
  if (!parse_number(raw, value, suffix)) {
    throw ParseError(line, tok.column, "bad value for '" + std::string(key) + "'");
  }
  double mult = 1.0;
  if (suffix.empty()) {
    mult = 1.0;
  } else if (key == "power" && suffix == "mW") {
    mult = 1.0;
  } else if (key == "phase" && suffix == "rad") {
    mult = 1.0;
  } else if (key == "detuning" && suffix == "Hz") {
    mult = 1.0;
  } else if (key == "detuning" && suffix == "kHz") {
    mult = 1e3;
  } else if (key == "detuning" && suffix == "MHz") {
    mult = 1e6;
  } else if (key == "detuning" && suffix == "GHz") {
    mult = 1e9;
  } else {
    throw ParseError(line, tok.column,
                     "unit '" + std::string(suffix) + "' not valid for key '" + std::string(key) + "'");
  }
  return value * mult;
}

bool attr_present(double v) { return !std::isnan(v); }

bool attr_equal(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b;
}

PulseEvent sorted_key_copy(const PulseEvent& e) { return e; }

bool event_less(const PulseEvent& a, const PulseEvent& b) {
  if (a.t_start_ns != b.t_start_ns) return a.t_start_ns < b.t_start_ns;
  if (a.channel != b.channel) return static_cast<int>(a.channel) < static_cast<int>(b.channel);
  return a.duration_ns < b.duration_ns;
}

std::string event_locus(const PulseEvent& e) {
  std::string s(channel_name(e.channel));
  s += "@" + std::to_string(e.t_start_ns) + "ns";
  if (e.source_line > 0) {
    s += " (line " + std::to_string(e.source_line) + ")";
  }
  return s;
}

PulseEvent make_laser(std::int64_t t, std::int64_t d, double power_mw) {
  PulseEvent e;
  e.channel = Channel::laser;
  e.t_start_ns = t;
  e.duration_ns = d;
  e.power = power_mw;
  return e;
}

PulseEvent make_mw(std::int64_t t, std::int64_t d, double amplitude, double phase) {
  PulseEvent e;
  e.channel = Channel::mw;
  e.t_start_ns = t;
  e.duration_ns = d;
  e.amplitude = amplitude;
  e.phase = phase;
  return e;
}

}  // namespace

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::laser: return "laser";
    case Channel::mw: return "mw";
    case Channel::sync: return "sync";
  }
  return "?";
}

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

Sequence parse_sequence(std::string_view text) {
  Sequence sequence;
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::vector<Token> tokens = tokenize(line);
    if (tokens.empty()) {
      continue;
    }
    if (tokens[0].text == "segment") {
      if (tokens.size() < 3) {
        throw ParseError(line_no, tokens[0].column, "segment header needs a label and a duration");
      }
      Segment segment;
      segment.label = tokens[1].text;
      for (char c : segment.label) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
          throw ParseError(line_no, tokens[1].column,
                           "segment label must be alphanumeric/underscore");
        }
      }
      segment.duration_ns = parse_timespan(tokens[2], line_no);
      if (tokens.size() == 5 && tokens[3].text == "repeat") {
        std::uint64_t n = 0;
        auto [p, ec] = std::from_chars(tokens[4].text.data(),
                                       tokens[4].text.data() + tokens[4].text.size(), n);
        if (ec != std::errc{} || p != tokens[4].text.data() + tokens[4].text.size() || n == 0) {
          throw ParseError(line_no, tokens[4].column, "repeat count must be a positive integer");
        }
        segment.repeat = n;
      } else if (tokens.size() != 3) {
        throw ParseError(line_no, tokens[3].column, "unexpected tokens after segment duration");
      }
      sequence.segments.push_back(std::move(segment));
      continue;
    }

    Channel channel;
    if (!channel_from_name(tokens[0].text, channel)) {
      throw ParseError(line_no, tokens[0].column, "unknown channel '" + tokens[0].text + "'");
    }
    if (sequence.segments.empty()) {
      throw ParseError(line_no, tokens[0].column, "event before any segment header");
    }
    if (tokens.size() < 3 || tokens[1].text.empty() || tokens[1].text[0] != '@') {
      throw ParseError(line_no, tokens[0].column,
                       "event syntax is: <channel> @<time> <duration> [key=value]...");
    }
    PulseEvent event;
    event.channel = channel;
    event.source_line = line_no;
    Token time_tok{tokens[1].text.substr(1), tokens[1].column + 1};
    event.t_start_ns = parse_timespan(time_tok, line_no);
    event.duration_ns = parse_timespan(tokens[2], line_no);

    for (std::size_t i = 3; i < tokens.size(); ++i) {
      const std::string& t = tokens[i].text;
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 >= t.size()) {
        throw ParseError(line_no, tokens[i].column, "expected key=value, got '" + t + "'");
      }
      const std::string key = t.substr(0, eq);
      const std::string raw = t.substr(eq + 1);
      double* slot = nullptr;
      if (key == "power" && channel == Channel::laser) {
        slot = &event.power;
      } else if (key == "amplitude" && channel == Channel::mw) {
        slot = &event.amplitude;
      } else if (key == "phase" && channel == Channel::mw) {
        slot = &event.phase;
      } else if (key == "detuning" && channel == Channel::mw) {
        slot = &event.detuning;
      } else {
        throw ParseError(line_no, tokens[i].column,
                         "key '" + key + "' not allowed on channel " +
                             std::string(channel_name(channel)));
      }
      if (attr_present(*slot)) {
        throw ParseError(line_no, tokens[i].column, "duplicate key '" + key + "'");
      }
      *slot = parse_attr_value(tokens[i], key, raw, line_no);
    }
    sequence.segments.back().events.push_back(event);
  }

  const std::vector<Violation> violations = validate_sequence(sequence);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw ParseError(line_no, 1, "invalid sequence: " + v.message);
  }
  return sequence;
}

std::string print_sequence(const Sequence& sequence) {
  std::string out;
  for (const Segment& segment : sequence.segments) {
    out += "segment " + segment.label + " " + std::to_string(segment.duration_ns) +
           "ns repeat " + std::to_string(segment.repeat) + "\n";
    std::vector<PulseEvent> events = segment.events;
    std::stable_sort(events.begin(), events.end(), event_less);
    for (const PulseEvent& e : events) {
      out += std::string(channel_name(e.channel)) + " @" +
             std::to_string(e.t_start_ns) + "ns " + std::to_string(e.duration_ns) + "ns";
      // Keys in sorted order: amplitude, detuning, phase, power.
      if (attr_present(e.amplitude)) out += " amplitude=" + format_double(e.amplitude);
      if (attr_present(e.detuning)) out += " detuning=" + format_double(e.detuning);
      if (attr_present(e.phase)) out += " phase=" + format_double(e.phase);
      if (attr_present(e.power)) out += " power=" + format_double(e.power);
      out += "\n";
    }
  }
  return out;
}

std::vector<Violation> validate_sequence(const Sequence& sequence) {
  std::vector<Violation> violations;
  auto add = [&](const Segment* seg, Channel ch, std::int64_t t0, std::int64_t t1,
                 std::string message) {
    violations.push_back(Violation{seg ? seg->label : std::string(), ch, t0, t1,
                                   std::move(message)});
  };

  if (sequence.segments.empty()) {
    add(nullptr, Channel::laser, 0, 0, "sequence has no segments");
    return violations;
  }
  const std::size_t n = sequence.segments.size();
  if (n != 1 && n != 2 && n != 4) {
    add(nullptr, Channel::laser, 0, 0,
        "segment count must be 1, 2 or 4, got " + std::to_string(n));
  }

  for (const Segment& segment : sequence.segments) {
    if (segment.label.empty()) {
      add(&segment, Channel::laser, 0, 0, "segment label must not be empty");
    }
    if (segment.duration_ns <= 0) {
      add(&segment, Channel::laser, 0, 0,
          "segment '" + segment.label + "' duration must be positive");
    }
    if (segment.repeat == 0) {
      add(&segment, Channel::laser, 0, 0,
          "segment '" + segment.label + "' repeat must be at least 1");
    }

    for (const PulseEvent& e : segment.events) {
      if (e.t_start_ns < 0) {
        add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
            event_locus(e) + ": start time must be non-negative");
      }
      if (e.duration_ns <= 0) {
        add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
            event_locus(e) + ": duration must be positive");
      }
      if (e.t_end_ns() > segment.duration_ns) {
        add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
            event_locus(e) + ": event exceeds segment '" + segment.label + "' duration");
      }
      if (e.channel == Channel::laser) {
        if (!attr_present(e.power)) {
          add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
              event_locus(e) + ": laser event missing power");
        } else if (!(e.power >= 0.0) || !std::isfinite(e.power)) {
          add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
              event_locus(e) + ": laser power must be finite and non-negative");
        }
        if (attr_present(e.amplitude) || attr_present(e.phase) || attr_present(e.detuning)) {
          add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
              event_locus(e) + ": microwave keys not allowed on a laser event");
        }
      } else if (e.channel == Channel::mw) {
        if (attr_present(e.power)) {
          add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
              event_locus(e) + ": power not allowed on a microwave event");
        }
        for (double v : {e.amplitude, e.phase, e.detuning}) {
          if (attr_present(v) && !std::isfinite(v)) {
            add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
                event_locus(e) + ": attribute values must be finite");
          }
        }
      } else {
        if (attr_present(e.power) || attr_present(e.amplitude) ||
            attr_present(e.phase) || attr_present(e.detuning)) {
          add(&segment, e.channel, e.t_start_ns, e.t_end_ns(),
              event_locus(e) + ": sync events carry no attributes");
        }
      }
    }

    // Same-channel overlap scan.
    for (Channel ch : {Channel::laser, Channel::mw, Channel::sync}) {
      std::vector<const PulseEvent*> on_channel;
      for (const PulseEvent& e : segment.events) {
        if (e.channel == ch) on_channel.push_back(&e);
      }
      std::sort(on_channel.begin(), on_channel.end(),
                [](const PulseEvent* a, const PulseEvent* b) { return event_less(*a, *b); });
      for (std::size_t i = 1; i < on_channel.size(); ++i) {
        const PulseEvent& prev = *on_channel[i - 1];
        const PulseEvent& cur = *on_channel[i];
        if (cur.t_start_ns < prev.t_end_ns()) {
          add(&segment, ch, cur.t_start_ns, prev.t_end_ns(),
              "overlap on channel " + std::string(channel_name(ch)) + " in segment '" +
                  segment.label + "': " + event_locus(prev) + " and " + event_locus(cur));
        }
      }
    }
  }
  return violations;
}

bool structurally_equal(const Sequence& a, const Sequence& b) {
  if (a.segments.size() != b.segments.size()) return false;
  for (std::size_t s = 0; s < a.segments.size(); ++s) {
    const Segment& sa = a.segments[s];
    const Segment& sb = b.segments[s];
    if (sa.label != sb.label || sa.duration_ns != sb.duration_ns ||
        sa.repeat != sb.repeat || sa.events.size() != sb.events.size()) {
      return false;
    }
    std::vector<PulseEvent> ea = sa.events, eb = sb.events;
    std::stable_sort(ea.begin(), ea.end(), event_less);
    std::stable_sort(eb.begin(), eb.end(), event_less);
    for (std::size_t i = 0; i < ea.size(); ++i) {
      const PulseEvent& x = sorted_key_copy(ea[i]);
      const PulseEvent& y = sorted_key_copy(eb[i]);
      if (x.channel != y.channel || x.t_start_ns != y.t_start_ns ||
          x.duration_ns != y.duration_ns || !attr_equal(x.power, y.power) ||
          !attr_equal(x.amplitude, y.amplitude) || !attr_equal(x.phase, y.phase) ||
          !attr_equal(x.detuning, y.detuning)) {
        return false;
      }
    }
  }
  return true;
}

Timeline render_timeline(const Sequence& sequence, double dt_s) {
  if (!(dt_s > 0.0)) {
    throw DomainError("render_timeline: dt must be positive");
  }
  const double dt_ns = dt_s * 1e9;
  auto aligned_index = [&](std::int64_t t_ns, const std::string& what) {
    const double k = std::round(static_cast<double>(t_ns) / dt_ns);
    if (std::abs(static_cast<double>(t_ns) - k * dt_ns) > 1.0) {
      throw DomainError("render_timeline: " + what + " not aligned to dt within 1 ns");
    }
    return static_cast<std::size_t>(k);
  };

  Timeline timeline;
  timeline.dt_s = dt_s;
  for (const Segment& segment : sequence.segments) {
    Timeline::SegmentWave wave;
    wave.label = segment.label;
    wave.repeat = segment.repeat;
    const std::size_t n =
        aligned_index(segment.duration_ns, "segment '" + segment.label + "' duration");
    wave.laser.assign(n, 0.0);
    wave.mw.assign(n, 0.0);
    wave.sync.assign(n, 0.0);
    for (const PulseEvent& e : segment.events) {
      const std::size_t i0 = aligned_index(e.t_start_ns, "event " + event_locus(e));
      const std::size_t i1 = aligned_index(e.t_end_ns(), "event " + event_locus(e));
      std::vector<double>& target = e.channel == Channel::laser  ? wave.laser
                                    : e.channel == Channel::mw ? wave.mw
                                                               : wave.sync;
      const double value = e.channel == Channel::laser ? e.power
                           : e.channel == Channel::mw
                               ? (attr_present(e.amplitude) ? e.amplitude : 1.0)
                               : 1.0;
      for (std::size_t i = i0; i < i1 && i < n; ++i) {
        target[i] = value;
      }
    }
    timeline.segments.push_back(std::move(wave));
  }
  return timeline;
}

std::vector<std::pair<double, Sequence>> gen_odmr(
    const std::vector<double>& f_points, bool cw, const ProtocolTimings& timings) {
  std::vector<std::pair<double, Sequence>> out;
  out.reserve(f_points.size());
  for (double f : f_points) {
    Sequence s;
    s.name = "odmr";
    if (cw) {
      Segment on;
      on.label = "mw_on";
      on.duration_ns = timings.segment_ns;
      on.events.push_back(make_laser(0, timings.segment_ns, timings.laser_power_mw));
      on.events.push_back(make_mw(0, timings.segment_ns, 1.0, 0.0));
      Segment off;
      off.label = "mw_off";
      off.duration_ns = timings.segment_ns;
      off.events.push_back(make_laser(0, timings.segment_ns, timings.laser_power_mw));
      s.segments = {std::move(on), std::move(off)};
    } else {
      // Pulsed variant: interleaved init/readout laser and a pi pulse.
      const std::int64_t t_pi =
          std::llround(1e9 / (2.0 * timings.rabi_rate_hz));
      const std::int64_t shot =
          timings.laser_pulse_ns + timings.gap_ns + t_pi + timings.gap_ns;
      const std::uint64_t repeat =
          static_cast<std::uint64_t>(timings.segment_ns / shot);
      if (repeat == 0) {
        throw DomainError("gen_odmr: pulsed shot longer than the segment");
      }
      Segment on;
      on.label = "mw_on";
      on.duration_ns = shot;
      on.repeat = repeat;
      on.events.push_back(make_laser(0, timings.laser_pulse_ns, timings.laser_power_mw));
      on.events.push_back(
          make_mw(timings.laser_pulse_ns + timings.gap_ns, t_pi, 1.0, 0.0));
      Segment off;
      off.label = "mw_off";
      off.duration_ns = shot;
      off.repeat = repeat;
      off.events.push_back(make_laser(0, timings.laser_pulse_ns, timings.laser_power_mw));
      s.segments = {std::move(on), std::move(off)};
    }
    out.emplace_back(f, std::move(s));
  }
  return out;
}

Sequence gen_plsd(double f_probe_hz, double duty, double laser_power_mw,
                  bool quadrature, const ProtocolTimings& timings) {
  if (!(duty > 0.0 && duty < 1.0)) {
    throw DomainError("gen_plsd: duty must lie strictly between 0 and 1");
  }
  if (!(f_probe_hz > 0.0)) {
    throw DomainError("gen_plsd: probe frequency must be positive");
  }
  const std::int64_t period_ns = std::llround(1e9 / f_probe_hz);
  if (period_ns < 4) {
    throw DomainError("gen_plsd: probe period below the 4 ns quadrature grid");
  }
  const double pulses_exact = static_cast<double>(timings.segment_ns) * 1e-9 * f_probe_hz;
  const auto pulses = static_cast<std::uint64_t>(std::floor(pulses_exact + 1e-9));
  if (pulses < 1) {
    throw DomainError("gen_plsd: probe frequency too low for one pulse per segment");
  }
  std::int64_t width_ns = std::llround(duty * static_cast<double>(period_ns));
  width_ns = std::max<std::int64_t>(1, std::min(width_ns, period_ns - 1));

  std::vector<std::pair<std::string, std::int64_t>> phases;
  if (quadrature) {
    phases = {{"q0", 0},
              {"q90", std::llround(period_ns / 4.0)},
              {"q180", std::llround(period_ns / 2.0)},
              {"q270", std::llround(3.0 * period_ns / 4.0)}};
  } else {
    phases = {{"q0", 0}, {"q180", std::llround(period_ns / 2.0)}};
  }

  Sequence s;
  s.name = "plsd";
  for (const auto& [label, offset] : phases) {
    Segment segment;
    segment.label = label;
    segment.duration_ns = period_ns;
    segment.repeat = pulses;
    if (offset + width_ns <= period_ns) {
      segment.events.push_back(make_laser(offset, width_ns, laser_power_mw));
    } else {
      // Pulse wraps the period boundary; split into tail + head.
      segment.events.push_back(make_laser(offset, period_ns - offset, laser_power_mw));
      segment.events.push_back(make_laser(0, offset + width_ns - period_ns, laser_power_mw));
    }
    s.segments.push_back(std::move(segment));
  }
  return s;
}

std::vector<Sequence> gen_rabi(const std::vector<double>& tau_points_s,
                               double laser_pulse_s, double mw_amplitude,
                               const ProtocolTimings& timings) {
  const std::int64_t laser_ns = std::llround(laser_pulse_s * 1e9);
  if (laser_ns <= 0) {
    throw DomainError("gen_rabi: laser pulse must be positive");
  }
  std::vector<Sequence> out;
  out.reserve(tau_points_s.size());
  for (double tau : tau_points_s) {
    if (tau < 0.0) {
      throw DomainError("gen_rabi: pulse width must be non-negative");
    }
    const std::int64_t tau_ns = std::llround(tau * 1e9);
    const std::int64_t shot = laser_ns + timings.gap_ns + tau_ns + timings.gap_ns;
    const auto repeat = static_cast<std::uint64_t>(timings.segment_ns / shot);
    if (repeat == 0) {
      throw DomainError("gen_rabi: shot longer than the segment");
    }
    Sequence s;
    s.name = "rabi";
    Segment drive;
    drive.label = "drive";
    drive.duration_ns = shot;
    drive.repeat = repeat;
    drive.events.push_back(make_laser(0, laser_ns, timings.laser_power_mw));
    if (tau_ns > 0) {
      drive.events.push_back(make_mw(laser_ns + timings.gap_ns, tau_ns, mw_amplitude, 0.0));
    }
    Segment reference;
    reference.label = "reference";
    reference.duration_ns = shot;
    reference.repeat = repeat;
    reference.events.push_back(make_laser(0, laser_ns, timings.laser_power_mw));
    s.segments = {std::move(drive), std::move(reference)};
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sequence> gen_cpmg(const std::vector<double>& tau_points_s,
                               const ProtocolTimings& timings) {
  const std::int64_t t_pi = std::llround(1e9 / (2.0 * timings.rabi_rate_hz));
  const std::int64_t t_pi2 = std::llround(1e9 / (4.0 * timings.rabi_rate_hz));
  if (t_pi < 1 || t_pi2 < 1) {
    throw DomainError("gen_cpmg: rabi rate too high for the 1 ns grid");
  }
  std::vector<Sequence> out;
  out.reserve(tau_points_s.size());
  for (double tau : tau_points_s) {
    if (tau < 0.0) {
      throw DomainError("gen_cpmg: free-precession time must be non-negative");
    }
    const std::int64_t half = std::llround(tau * 0.5e9);
    const std::int64_t t1 = timings.laser_pulse_ns + timings.gap_ns;  // pi/2 (x)
    const std::int64_t t2 = t1 + t_pi2 + half;                       // pi (y)
    const std::int64_t t3 = t2 + t_pi + half;                        // pi/2 (x)
    const std::int64_t t4 = t3 + t_pi2 + timings.gap_ns;             // readout laser
    const std::int64_t shot = t4 + timings.laser_pulse_ns + timings.gap_ns;
    const auto repeat = static_cast<std::uint64_t>(timings.segment_ns / shot);
    if (repeat == 0) {
      throw DomainError("gen_cpmg: shot longer than the segment");
    }
    Sequence s;
    s.name = "cpmg";
    Segment echo;
    echo.label = "echo";
    echo.duration_ns = shot;
    echo.repeat = repeat;
    echo.events.push_back(make_laser(0, timings.laser_pulse_ns, timings.laser_power_mw));
    echo.events.push_back(make_mw(t1, t_pi2, 1.0, 0.0));
    echo.events.push_back(make_mw(t2, t_pi, 1.0, kPi / 2.0));
    echo.events.push_back(make_mw(t3, t_pi2, 1.0, 0.0));
    echo.events.push_back(make_laser(t4, timings.laser_pulse_ns, timings.laser_power_mw));
    Segment reference;
    reference.label = "reference";
    reference.duration_ns = shot;
    reference.repeat = repeat;
    reference.events.push_back(make_laser(0, timings.laser_pulse_ns, timings.laser_power_mw));
    reference.events.push_back(make_laser(t4, timings.laser_pulse_ns, timings.laser_power_mw));
    s.segments = {std::move(echo), std::move(reference)};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pdmr::seq
