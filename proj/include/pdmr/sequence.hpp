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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pdmr::seq {

// Pulse programs live on an integer nanosecond grid so that overlap checks,
// printing and re-parsing are exact. A program is a short list of segments,
// each a timeline of non-overlapping per-channel events repeated `repeat`
// times back to back. Differential readout uses two segments, quadrature
// readout four.
//
// Textual form (one statement per line, '#' starts a comment):
//
//   segment <label> <duration> [repeat <n>]
//   <channel> @<time> <duration> [key=value]...
//
// channel is laser | mw | sync. Times and durations take an ns/us/ms/s
// suffix. laser events carry power (mW); mw events may carry amplitude,
// phase (rad) and detuning (Hz/kHz/MHz/GHz); sync events carry nothing.

enum class Channel { laser, mw, sync };

std::string_view channel_name(Channel c);

struct PulseEvent {
  Channel channel = Channel::laser;
  std::int64_t t_start_ns = 0;
  std::int64_t duration_ns = 0;
  // Attribute slots; NaN marks an absent key.
  double power = 0.0 / 0.0;      // mW (laser)
  double amplitude = 0.0 / 0.0;  // relative drive strength (mw)
  double phase = 0.0 / 0.0;      // rad (mw)
  double detuning = 0.0 / 0.0;   // Hz (mw)
  int source_line = 0;           // 1-based line in the parsed text, 0 if generated

  std::int64_t t_end_ns() const { return t_start_ns + duration_ns; }
};

struct Segment {
  std::string label;
  std::int64_t duration_ns = 0;
  std::uint64_t repeat = 1;
  std::vector<PulseEvent> events;
};

struct Sequence {
  std::string name;  // metadata only; not part of the textual format
  std::vector<Segment> segments;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Violation {
  std::string segment_label;
  Channel channel = Channel::laser;
  std::int64_t t_start_ns = 0;
  std::int64_t t_end_ns = 0;
  std::string message;
};

// Parses and validates; throws ParseError for syntax errors (with line and
// column) and for semantic violations (with the offending line).
Sequence parse_sequence(std::string_view text);

// Canonical form: one statement per line, times in ns, attribute keys in
// sorted order, shortest round-trip float values. Stable byte-for-byte.
std::string print_sequence(const Sequence& sequence);

// Empty result iff all structural invariants hold.
std::vector<Violation> validate_sequence(const Sequence& sequence);

// Segment/event equality ignoring metadata (name, source lines).
bool structurally_equal(const Sequence& a, const Sequence& b);

// Sampled per-channel waveforms of one repeat of each segment. laser carries
// power in mW, mw the drive amplitude, sync 0/1. dt must divide every event
// boundary within 1 ns; a misaligned boundary throws DomainError naming the
// event.
struct Timeline {
  struct SegmentWave {
    std::string label;
    std::uint64_t repeat = 1;
    std::vector<double> laser, mw, sync;
  };
  double dt_s = 0.0;
  std::vector<SegmentWave> segments;
};

Timeline render_timeline(const Sequence& sequence, double dt_s);

// Shared protocol timing defaults. The 1 us inter-pulse gap and the pi-pulse
// time derived from the drive strength (t_pi = 1/(2*rabi_rate)) are
// conventions of this toolkit, not measured properties.
struct ProtocolTimings {
  std::int64_t segment_ns = 200'000'000;  // 200 ms readout segment
  double laser_power_mw = 8.0;
  std::int64_t laser_pulse_ns = 5'000;    // 5 us init/readout pulse
  std::int64_t gap_ns = 1'000;            // 1 us between pulses
  double rabi_rate_hz = 25e6;
};

// CW-ODMR/PDMR: per frequency a two-segment program, segment "mw_on" with
// CW laser plus CW microwave, segment "mw_off" with the laser alone. With
// cw = false the same differential pair is built from interleaved laser and
// pi pulses instead (pulsed variant).
std::vector<std::pair<double, Sequence>> gen_odmr(
    const std::vector<double>& f_points, bool cw,
    const ProtocolTimings& timings = {});

// Stroboscopic AC readout: square laser pulses of width duty/f_probe on a
// 1/f_probe grid, as one single-period segment repeated to fill the readout
// window. The second segment is delayed by half a probe period; with
// quadrature = true four segments at {0, T/4, T/2, 3T/4} are emitted.
Sequence gen_plsd(double f_probe_hz, double duty, double laser_power_mw,
                  bool quadrature, const ProtocolTimings& timings = {});

// Rabi protocol: per pulse width tau, segment "drive" alternating laser and
// microwave pulses, segment "reference" with the microwave omitted.
std::vector<Sequence> gen_rabi(const std::vector<double>& tau_points_s,
                               double laser_pulse_s, double mw_amplitude,
                               const ProtocolTimings& timings = {});

// Single-refocusing CPMG: init laser, pi/2 about x, tau/2, pi about y,
// tau/2, pi/2 about x, readout laser; the reference segment keeps the laser
// timing and omits the microwave pulses.
std::vector<Sequence> gen_cpmg(const std::vector<double>& tau_points_s,
                               const ProtocolTimings& timings = {});

}  // namespace pdmr::seq
