#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "energy/device.hpp"
#include "sched/qtable.hpp"

namespace edgeboost::sched {

// Per-learner execution cost in ensemble order.
struct LearnerCosts {
  std::vector<double> energy;
  std::vector<double> duration;
  double one_learner = 0.0;  // depleted-level threshold: the dearest single learner
};

LearnerCosts learner_costs(const std::vector<std::uint64_t>& macs, const energy::CostModel& cost);

// Mean post-inference usable fraction over the last 10 served requests.
class EnergyHistory {
 public:
  static constexpr std::size_t kWindow = 10;
  void push(double fraction);
  bool empty() const { return window_.empty(); }
  double mean() const;

 private:
  std::deque<double> window_;
};

SchedulerState observe(const energy::Device& device, const EnergyHistory& history,
                       const energy::PowerThresholds& thresholds, double one_learner_cost, int executed);

struct EnvConfig {
  energy::Capacitor capacitor;  // voltage is drawn per episode
  energy::CostModel cost;
  energy::RequestPattern requests;  // horizon unused; episodes last clip_seconds
  energy::PowerThresholds thresholds;
  double clip_seconds = 2400.0;
};

void validate(const EnvConfig& env);

inline constexpr double kFullStartShare = 0.25;

struct TrainingResult {
  QTable table;
  std::vector<double> curve;  // cumulative reward per episode
  std::uint64_t updates = 0;
};

/// Episodes are clips with a random start in the trace and a random initial charge
/// (full with probability kFullStartShare, otherwise uniform over the usable window).
/// Each request is a sub-episode that ends at a = 0, at brown-out, or after the last learner.
TrainingResult train_offline(const EnvConfig& env, const energy::PowerTrace& trace,
                             const std::vector<std::uint64_t>& learner_macs, const RewardParams& reward_params,
                             const QHyper& hyper, int episodes, std::uint64_t seed);

}  // namespace edgeboost::sched
