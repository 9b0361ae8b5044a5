#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edgeboost::energy {

// Piecewise-constant harvested power: power[i] holds on [time[i], time[i+1]),
// the last sample holds until end_time.
struct PowerTrace {
  std::vector<double> time;
  std::vector<double> power;
  double end_time = 0.0;
  std::string source;

  double start_time() const { return time.empty() ? 0.0 : time.front(); }
  double horizon() const { return end_time - start_time(); }
  std::size_t size() const { return time.size(); }
  /// Index of the segment containing t (clamped to the trace).
  std::size_t segment_at(double t) const;
  double power_at(double t) const { return power[segment_at(t)]; }
  double segment_end(std::size_t i) const { return i + 1 < time.size() ? time[i + 1] : end_time; }
};

void validate(const PowerTrace& trace);

/// CSV with header `timestamp_s,voltage_V,current_A` or `timestamp_s,power_W`.
PowerTrace load_trace(const std::string& path, double efficiency);
PowerTrace parse_trace(const std::string& text, double efficiency, const std::string& name = "<memory>");

enum class Profile { constant, day_night, bursty };

struct SynthProfile {
  Profile kind = Profile::day_night;
  double power = 1e-3;       // constant level, day peak, or burst mean
  double period = 86400.0;   // day-night cycle length
  double noise = 0.2;        // lognormal sigma on day samples
  double burst_on = 600.0;   // mean burst length
  double burst_off = 1800.0; // mean gap length
  double resolution = 60.0;  // sample spacing
};

void validate(const SynthProfile& profile);
const char* profile_name(Profile p);
Profile parse_profile(const std::string& name);

PowerTrace synth_trace(std::uint64_t seed, const SynthProfile& profile, double duration, double efficiency = 1.0);

struct PowerThresholds {
  double low = 0.0;   // t1
  double high = 0.0;  // t2
};

/// Sample terciles of the trace power values.
PowerThresholds power_terciles(const PowerTrace& trace);

}  // namespace edgeboost::energy
