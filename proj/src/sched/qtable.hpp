#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace edgeboost::sched {

struct SchedulerState {
  int e_now = 0;   // 0..3
  int e_last = 0;  // 0..3
  int p_harv = 0;  // 0..2
  int l = 0;       // learners already executed, 0..N
  int r = 0;       // 1 while the request still has no prediction

  bool operator==(const SchedulerState&) const = default;
};

std::size_t state_count(int n);
std::size_t encode_state(const SchedulerState& s, int n);
SchedulerState decode_state(std::size_t index, int n);

struct QHyper {
  double learning_rate = 0.1;  // eta_q
  double discount = 0.9;       // gamma
  double epsilon_start = 0.3;
  double epsilon_end = 0.01;
  double anneal_fraction = 0.8;  // share of episodes over which epsilon decays linearly
  double beta = 0.05;
  double p_miss = 0.5;
};

void validate(const QHyper& h);

/// Linear epsilon decay, then flat.
double epsilon_at(const QHyper& h, int episode, int episodes);

// Two-action value table. `ensemble_size` > 0 marks a scheduler table whose states
// follow encode_state; 0 is a plain table (used for toy problems).
struct QTable {
  int ensemble_size = 0;
  std::size_t states = 0;
  std::vector<double> values;  // [state * 2 + action]
  QHyper hyper;

  double q(std::size_t s, int a) const { return values[s * 2 + static_cast<std::size_t>(a)]; }
  double& q(std::size_t s, int a) { return values[s * 2 + static_cast<std::size_t>(a)]; }
};

QTable make_table(std::size_t states, const QHyper& hyper = {});
QTable make_scheduler_table(int n, const QHyper& hyper = {});

/// Greedy over the allowed actions; ties resolve to 0. `can_continue` false masks a = 1.
int greedy_action(const QTable& t, std::size_t s, bool can_continue);
double state_value(const QTable& t, std::size_t s, bool can_continue);
int epsilon_greedy(const QTable& t, std::size_t s, bool can_continue, double epsilon, std::mt19937_64& rng);

/// Q <- Q + eta (r + gamma max_a' Q(s',a') - Q); terminal transitions bootstrap 0.
void q_update(QTable& t, std::size_t s, int a, double reward, std::size_t s_next, bool next_can_continue,
              bool terminal);

/// Scheduler view: a = 1 masked at l = N.
int act(const QTable& t, const SchedulerState& s);

struct RewardParams {
  double beta = 0.05;
  double p_miss = 0.5;
  std::vector<double> delta_acc;  // delta_acc[k-1] = gain of the k-th learner
};

/// a = 1: delta_acc(l+1) - beta (1 - f); a = 0 with no prediction yet: -p_miss; else 0.
/// `energy_fraction` is the usable-energy fraction in [0,1].
double reward(const SchedulerState& s, int a, const RewardParams& p, double energy_fraction);

inline constexpr int kTableVersion = 1;

std::string to_json(const QTable& t);
QTable qtable_from_json(const std::string& text, const std::string& name = "<memory>");
void save_qtable(const QTable& t, const std::string& path);
/// expected_n < 0 skips the ensemble-size check.
QTable load_qtable(const std::string& path, int expected_n = -1);

}  // namespace edgeboost::sched
