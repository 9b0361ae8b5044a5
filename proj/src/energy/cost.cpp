#include "energy/cost.hpp"

#include <cmath>

#include "common/error.hpp"

namespace edgeboost::energy {

void validate(const CostModel& c) {
  auto nonneg = [](double v, const char* name) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::invalid_config, std::string(name) + " must be >= 0");
  };
  nonneg(c.energy_per_mac, "energy_per_mac");
  nonneg(c.per_inference_overhead, "per_inference_overhead");
  nonneg(c.sleep_power, "sleep_power");
  nonneg(c.active_idle_power, "active_idle_power");
  nonneg(c.fc_retrain_energy_fraction, "fc_retrain_energy_fraction");
  require(std::isfinite(c.macs_per_second) && c.macs_per_second > 0.0, ErrorCode::invalid_config,
          "macs_per_second must be positive");
}

double inference_cost(std::uint64_t macs, const CostModel& c) {
  return static_cast<double>(macs) * c.energy_per_mac + c.per_inference_overhead;
}

double execution_time(std::uint64_t macs, const CostModel& c) { return static_cast<double>(macs) / c.macs_per_second; }

double execution_energy(std::uint64_t macs, const CostModel& c) {
  return inference_cost(macs, c) + c.active_idle_power * execution_time(macs, c);
}

double retrain_energy(std::uint64_t macs, const CostModel& c) {
  return c.fc_retrain_energy_fraction * execution_energy(macs, c);
}

void validate(const RequestPattern& p) {
  require(std::isfinite(p.period) && p.period > 0.0, ErrorCode::invalid_config, "request period must be positive");
  require(std::isfinite(p.horizon) && p.horizon > 0.0, ErrorCode::invalid_config, "request horizon must be positive");
}

std::vector<double> request_times(const RequestPattern& p, double start) {
  validate(p);
  std::vector<double> out;
  for (std::size_t k = 1;; ++k) {
    const double offset = static_cast<double>(k) * p.period;
    if (offset >= p.horizon) break;
    out.push_back(start + offset);
  }
  return out;
}

int energy_level(double usable, double capacity, double one_learner_cost) {
  if (usable < one_learner_cost) return 0;
  if (std::abs(usable - capacity) <= kFullTolerance) return 3;
  return usable < 0.5 * capacity ? 1 : 2;
}

int discretize_energy(const Capacitor& cap, double one_learner_cost) {
  return energy_level(cap.usable_energy(), cap.usable_capacity(), one_learner_cost);
}

int discretize_power(double power, const PowerThresholds& t) {
  if (power < t.low) return 0;
  return power < t.high ? 1 : 2;
}

void validate(const PowerThresholds& t) {
  require(std::isfinite(t.low) && std::isfinite(t.high) && t.low >= 0.0 && t.low <= t.high,
          ErrorCode::invalid_config, "power thresholds must satisfy 0 <= low <= high");
}

}  // namespace edgeboost::energy
