#include "sched/trainer.hpp"

#include <algorithm>
#include <random>

#include "common/error.hpp"

namespace edgeboost::sched {

LearnerCosts learner_costs(const std::vector<std::uint64_t>& macs, const energy::CostModel& cost) {
  LearnerCosts c;
  for (auto m : macs) {
    c.energy.push_back(energy::execution_energy(m, cost));
    c.duration.push_back(energy::execution_time(m, cost));
    c.one_learner = std::max(c.one_learner, c.energy.back());
  }
  return c;
}

void EnergyHistory::push(double fraction) {
  window_.push_back(fraction);
  if (window_.size() > kWindow) window_.pop_front();
}

double EnergyHistory::mean() const {
  double s = 0.0;
  for (double f : window_) s += f;
  return window_.empty() ? 0.0 : s / static_cast<double>(window_.size());
}

SchedulerState observe(const energy::Device& device, const EnergyHistory& history,
                       const energy::PowerThresholds& thresholds, double one_learner_cost, int executed) {
  const double capacity = device.capacitor().usable_capacity();
  SchedulerState s;
  s.e_now = device.energy_level(one_learner_cost);
  s.e_last = history.empty() ? s.e_now : energy::energy_level(history.mean() * capacity, capacity, one_learner_cost);
  s.p_harv = energy::discretize_power(device.harvest_power(), thresholds);
  s.l = executed;
  s.r = executed == 0 ? 1 : 0;
  return s;
}

void validate(const EnvConfig& env) {
  energy::validate(env.capacitor);
  energy::validate(env.cost);
  energy::validate(env.requests);
  energy::validate(env.thresholds);
  require(env.clip_seconds > 0.0, ErrorCode::invalid_config, "clip_seconds must be positive");
}

TrainingResult train_offline(const EnvConfig& env, const energy::PowerTrace& trace,
                             const std::vector<std::uint64_t>& learner_macs, const RewardParams& reward_params,
                             const QHyper& hyper, int episodes, std::uint64_t seed) {
  validate(env);
  validate(hyper);
  energy::validate(trace);
  const int n = static_cast<int>(learner_macs.size());
  require(n >= 1, ErrorCode::invalid_input, "scheduler training needs at least one learner");
  require(static_cast<int>(reward_params.delta_acc.size()) == n, ErrorCode::invalid_input,
          "delta_acc length does not match the ensemble size");
  require(episodes >= 0, ErrorCode::invalid_config, "episodes must be >= 0");
  require(trace.horizon() >= env.clip_seconds, ErrorCode::invalid_config,
          "power trace is shorter than one training clip");

  const LearnerCosts costs = learner_costs(learner_macs, env.cost);
  TrainingResult out;
  out.table = make_scheduler_table(n, hyper);
  QTable& table = out.table;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double latest_start = trace.end_time - env.clip_seconds;

  for (int ep = 0; ep < episodes; ++ep) {
    const double eps = epsilon_at(hyper, ep, episodes);
    const double start = trace.start_time() + unit(rng) * (latest_start - trace.start_time());
    // A full store is a common operating point (it sits at v_max whenever harvest covers the
    // load), so it gets its own share of starts next to uniformly drawn charges.
    const double charge = unit(rng) < kFullStartShare ? 1.0 : unit(rng);
    energy::Device device(energy::at_usable_fraction(env.capacitor, charge), trace, env.cost, start);
    EnergyHistory history;
    double total = 0.0;
    energy::RequestPattern pattern = env.requests;
    pattern.horizon = env.clip_seconds;
    for (double t : energy::request_times(pattern, start)) {
      if (device.time() > t) continue;  // still busy: dropped
      device.advance_to(t);
      if (!device.on()) continue;  // nothing to decide while off
      int l = 0;
      bool served = false;
      while (true) {
        const SchedulerState s = observe(device, history, env.thresholds, costs.one_learner, l);
        const std::size_t si = encode_state(s, n);
        const int a = epsilon_greedy(table, si, l < n, eps, rng);
        double r = reward(s, a, reward_params, device.usable_fraction());
        if (a == 0) {
          q_update(table, si, a, r, si, false, true);
          total += r;
          served = l > 0;
          break;
        }
        const bool ok = device.execute(costs.energy[static_cast<std::size_t>(l)],
                                       costs.duration[static_cast<std::size_t>(l)], energy::Drain::inference);
        if (!ok) {
          r -= reward_params.p_miss;
          q_update(table, si, a, r, si, false, true);
          total += r;
          break;
        }
        ++l;
        const SchedulerState next = observe(device, history, env.thresholds, costs.one_learner, l);
        q_update(table, si, a, r, encode_state(next, n), l < n, false);
        total += r;
        ++out.updates;
      }
      ++out.updates;
      if (served) history.push(device.usable_fraction());
    }
    out.curve.push_back(total);
  }
  return out;
}

}  // namespace edgeboost::sched
