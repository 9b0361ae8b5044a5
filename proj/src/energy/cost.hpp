#pragma once

#include <cstdint>
#include <vector>

#include "energy/capacitor.hpp"
#include "energy/trace.hpp"

namespace edgeboost::energy {

struct CostModel {
  double energy_per_mac = 1e-9;           // J
  double per_inference_overhead = 1e-4;   // J
  double sleep_power = 5e-6;              // W
  double active_idle_power = 1e-3;        // W, drawn while a learner executes
  double fc_retrain_energy_fraction = 0.05;
  double macs_per_second = 1e6;           // execution speed
};

void validate(const CostModel& cost);

/// macs * energy_per_mac + per_inference_overhead.
double inference_cost(std::uint64_t macs, const CostModel& cost);
double execution_time(std::uint64_t macs, const CostModel& cost);
/// Inference cost plus active-idle draw over the execution time.
double execution_energy(std::uint64_t macs, const CostModel& cost);
/// FC-only backward step for one sample, relative to the learner's forward cost.
double retrain_energy(std::uint64_t macs, const CostModel& cost);

struct RequestPattern {
  double period = 5.0;
  double horizon = 86400.0;
};

void validate(const RequestPattern& pattern);

/// Request times start + k*period, k >= 1, strictly inside the horizon.
std::vector<double> request_times(const RequestPattern& pattern, double start);

inline constexpr double kFullTolerance = 1e-9;  // J

/// 0 depleted (< one learner), 3 full, 1 below half the usable capacity, else 2.
int energy_level(double usable, double capacity, double one_learner_cost);
int discretize_energy(const Capacitor& cap, double one_learner_cost);

/// 0 if P < t1, 1 if t1 <= P < t2, else 2.
int discretize_power(double power, const PowerThresholds& thresholds);

void validate(const PowerThresholds& thresholds);

}  // namespace edgeboost::energy
