#include "energy/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace edgeboost::energy {

std::size_t PowerTrace::segment_at(double t) const {
  auto it = std::upper_bound(time.begin(), time.end(), t);
  if (it == time.begin()) return 0;
  return static_cast<std::size_t>(it - time.begin()) - 1;
}

void validate(const PowerTrace& trace) {
  require(!trace.time.empty(), ErrorCode::validation_error, "power trace is empty");
  require(trace.time.size() == trace.power.size(), ErrorCode::validation_error, "power trace column mismatch");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    require(std::isfinite(trace.time[i]), ErrorCode::validation_error, "power trace: non-finite timestamp");
    require(std::isfinite(trace.power[i]) && trace.power[i] >= 0.0, ErrorCode::validation_error,
            "power trace: power must be finite and >= 0 at sample " + std::to_string(i));
    if (i > 0)
      require(trace.time[i] > trace.time[i - 1], ErrorCode::validation_error,
              "power trace: timestamps not strictly increasing at sample " + std::to_string(i));
  }
  require(trace.end_time > trace.time.back(), ErrorCode::validation_error, "power trace: end before last sample");
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return out;
}

}  // namespace

PowerTrace parse_trace(const std::string& text, double efficiency, const std::string& name) {
  require(std::isfinite(efficiency) && efficiency >= 0.0, ErrorCode::invalid_config,
          "harvester efficiency must be >= 0");
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int columns = 0;
  PowerTrace trace;
  trace.source = name;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (columns == 0) {
      if (fields.size() == 3 && fields[0] == "timestamp_s" && fields[1] == "voltage_V" && fields[2] == "current_A") {
        columns = 3;
      } else if (fields.size() == 2 && fields[0] == "timestamp_s" && fields[1] == "power_W") {
        columns = 2;
      } else {
        fail(ErrorCode::parse_error, name + ":" + std::to_string(line_no) +
                                         ": expected header 'timestamp_s,voltage_V,current_A' or 'timestamp_s,power_W'");
      }
      continue;
    }
    const std::string where = name + ":" + std::to_string(line_no);
    require(static_cast<int>(fields.size()) == columns, ErrorCode::parse_error,
            where + ": expected " + std::to_string(columns) + " fields");
    double v[3] = {0, 0, 0};
    for (int c = 0; c < columns; ++c)
      require(parse_double(fields[static_cast<std::size_t>(c)], v[c]) && std::isfinite(v[c]), ErrorCode::parse_error,
              where + ": bad number '" + std::string(fields[static_cast<std::size_t>(c)]) + "'");
    const double p = (columns == 3 ? v[1] * v[2] : v[1]) * efficiency;
    require(p >= 0.0, ErrorCode::validation_error, where + ": negative power");
    if (!trace.time.empty())
      require(v[0] > trace.time.back(), ErrorCode::validation_error, where + ": timestamp not strictly increasing");
    trace.time.push_back(v[0]);
    trace.power.push_back(p);
  }
  require(columns != 0, ErrorCode::parse_error, name + ": missing header");
  require(!trace.time.empty(), ErrorCode::validation_error, name + ": no samples");
  // Last sample lasts one typical spacing.
  const std::size_t n = trace.size();
  const double last_gap = n > 1 ? trace.time[n - 1] - trace.time[n - 2] : 1.0;
  trace.end_time = trace.time.back() + last_gap;
  return trace;
}

PowerTrace load_trace(const std::string& path, double efficiency) {
  return parse_trace(read_file(path), efficiency, path);
}

const char* profile_name(Profile p) {
  switch (p) {
    case Profile::constant: return "constant";
    case Profile::day_night: return "day-night";
    case Profile::bursty: return "bursty";
  }
  return "?";
}

Profile parse_profile(const std::string& name) {
  if (name == "constant") return Profile::constant;
  if (name == "day-night") return Profile::day_night;
  if (name == "bursty") return Profile::bursty;
  fail(ErrorCode::invalid_config, "unknown trace profile '" + name + "' (constant | day-night | bursty)");
}

void validate(const SynthProfile& p) {
  require(std::isfinite(p.power) && p.power >= 0.0, ErrorCode::invalid_config, "trace power must be >= 0");
  require(std::isfinite(p.resolution) && p.resolution > 0.0, ErrorCode::invalid_config,
          "trace resolution must be positive");
  require(std::isfinite(p.noise) && p.noise >= 0.0, ErrorCode::invalid_config, "trace noise must be >= 0");
  if (p.kind == Profile::day_night) {
    require(std::isfinite(p.period) && p.period > 0.0, ErrorCode::invalid_config, "day-night period must be positive");
    const double half = p.period / 2.0 / p.resolution;
    require(std::abs(half - std::round(half)) < 1e-9 && half >= 1.0, ErrorCode::invalid_config,
            "day-night half period must be a whole number of samples");
  }
  if (p.kind == Profile::bursty)
    require(p.burst_on > 0.0 && p.burst_off > 0.0, ErrorCode::invalid_config, "burst lengths must be positive");
}

PowerTrace synth_trace(std::uint64_t seed, const SynthProfile& p, double duration, double efficiency) {
  validate(p);
  require(std::isfinite(duration) && duration > 0.0, ErrorCode::invalid_input, "trace duration must be positive");
  require(std::isfinite(efficiency) && efficiency >= 0.0, ErrorCode::invalid_config,
          "harvester efficiency must be >= 0");
  std::mt19937_64 rng(seed);
  PowerTrace trace;
  trace.source = std::string("synthetic:") + profile_name(p.kind) + ":" + std::to_string(seed);
  const auto count = static_cast<std::size_t>(std::ceil(duration / p.resolution - 1e-9));
  trace.time.reserve(count);
  trace.power.reserve(count);

  std::lognormal_distribution<double> noise(-0.5 * p.noise * p.noise, p.noise);  // mean 1
  std::exponential_distribution<double> on_len(1.0 / p.burst_on), off_len(1.0 / p.burst_off);
  std::uniform_real_distribution<double> level(0.5, 1.5);
  bool bursting = false;
  double switch_at = off_len(rng);
  double burst_level = 0.0;
  const auto half_steps = static_cast<std::int64_t>(std::llround(p.period / 2.0 / p.resolution));

  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) * p.resolution;
    double w = 0.0;
    switch (p.kind) {
      case Profile::constant: w = p.power; break;
      case Profile::day_night: {
        const auto k = static_cast<std::int64_t>(i) % (2 * half_steps);
        if (k < half_steps) {
          // Half-sine sampled at segment midpoints, so every day sample is positive.
          const double phase = (static_cast<double>(k) + 0.5) / static_cast<double>(half_steps);
          w = p.power * std::sin(std::numbers::pi * phase) * (p.noise > 0.0 ? noise(rng) : 1.0);
        }
        break;
      }
      case Profile::bursty: {
        while (t >= switch_at) {
          bursting = !bursting;
          if (bursting) burst_level = p.power * level(rng);
          switch_at += bursting ? on_len(rng) : off_len(rng);
        }
        w = bursting ? burst_level : 0.0;
        break;
      }
    }
    trace.time.push_back(t);
    trace.power.push_back(w * efficiency);
  }
  trace.end_time = duration;
  return trace;
}

PowerThresholds power_terciles(const PowerTrace& trace) {
  require(!trace.power.empty(), ErrorCode::invalid_input, "terciles of an empty trace");
  std::vector<double> p = trace.power;
  std::sort(p.begin(), p.end());
  const std::size_t n = p.size();
  return {p[n / 3], p[(2 * n) / 3]};
}

}  // namespace edgeboost::energy
