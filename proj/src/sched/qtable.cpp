#include "sched/qtable.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

namespace edgeboost::sched {

using nlohmann::json;

std::size_t state_count(int n) {
  require(n >= 1, ErrorCode::validation_error, "ensemble size must be >= 1");
  return static_cast<std::size_t>(4 * 4 * 3 * (n + 1) * 2);
}

std::size_t encode_state(const SchedulerState& s, int n) {
  auto in = [](int v, int hi, const char* name) {
    require(v >= 0 && v <= hi, ErrorCode::validation_error,
            std::string("state field ") + name + " = " + std::to_string(v) + " out of range [0," + std::to_string(hi) +
                "]");
  };
  require(n >= 1, ErrorCode::validation_error, "ensemble size must be >= 1");
  in(s.e_now, 3, "e_now");
  in(s.e_last, 3, "e_last");
  in(s.p_harv, 2, "p_harv");
  in(s.l, n, "l");
  in(s.r, 1, "r");
  std::size_t idx = static_cast<std::size_t>(s.e_now);
  idx = idx * 4 + static_cast<std::size_t>(s.e_last);
  idx = idx * 3 + static_cast<std::size_t>(s.p_harv);
  idx = idx * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(s.l);
  return idx * 2 + static_cast<std::size_t>(s.r);
}

SchedulerState decode_state(std::size_t index, int n) {
  require(index < state_count(n), ErrorCode::validation_error, "state index out of range");
  SchedulerState s;
  s.r = static_cast<int>(index % 2);
  index /= 2;
  s.l = static_cast<int>(index % static_cast<std::size_t>(n + 1));
  index /= static_cast<std::size_t>(n + 1);
  s.p_harv = static_cast<int>(index % 3);
  index /= 3;
  s.e_last = static_cast<int>(index % 4);
  s.e_now = static_cast<int>(index / 4);
  return s;
}

void validate(const QHyper& h) {
  auto finite = [](double v) { return std::isfinite(v); };
  require(finite(h.learning_rate) && h.learning_rate >= 0.0 && h.learning_rate <= 1.0, ErrorCode::invalid_config,
          "scheduler learning_rate must lie in [0,1]");
  require(finite(h.discount) && h.discount >= 0.0 && h.discount <= 1.0, ErrorCode::invalid_config,
          "scheduler discount must lie in [0,1]");
  require(finite(h.epsilon_start) && h.epsilon_start >= 0.0 && h.epsilon_start <= 1.0 && finite(h.epsilon_end) &&
              h.epsilon_end >= 0.0 && h.epsilon_end <= 1.0,
          ErrorCode::invalid_config, "epsilon values must lie in [0,1]");
  require(finite(h.anneal_fraction) && h.anneal_fraction >= 0.0 && h.anneal_fraction <= 1.0,
          ErrorCode::invalid_config, "anneal_fraction must lie in [0,1]");
  require(finite(h.beta) && h.beta >= 0.0, ErrorCode::invalid_config, "beta must be >= 0");
  require(finite(h.p_miss) && h.p_miss >= 0.0, ErrorCode::invalid_config, "p_miss must be >= 0");
}

double epsilon_at(const QHyper& h, int episode, int episodes) {
  const double span = h.anneal_fraction * episodes;
  if (span <= 0.0 || episode >= span) return h.epsilon_end;
  return h.epsilon_start + (h.epsilon_end - h.epsilon_start) * (episode / span);
}

QTable make_table(std::size_t states, const QHyper& hyper) {
  QTable t;
  t.states = states;
  t.values.assign(states * 2, 0.0);
  t.hyper = hyper;
  return t;
}

QTable make_scheduler_table(int n, const QHyper& hyper) {
  QTable t = make_table(state_count(n), hyper);
  t.ensemble_size = n;
  return t;
}

int greedy_action(const QTable& t, std::size_t s, bool can_continue) {
  return can_continue && t.q(s, 1) > t.q(s, 0) ? 1 : 0;
}

double state_value(const QTable& t, std::size_t s, bool can_continue) {
  return can_continue ? std::max(t.q(s, 0), t.q(s, 1)) : t.q(s, 0);
}

int epsilon_greedy(const QTable& t, std::size_t s, bool can_continue, double epsilon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (can_continue && u(rng) < epsilon) return u(rng) < 0.5 ? 0 : 1;
  return greedy_action(t, s, can_continue);
}

void q_update(QTable& t, std::size_t s, int a, double reward, std::size_t s_next, bool next_can_continue,
              bool terminal) {
  const double target = reward + (terminal ? 0.0 : t.hyper.discount * state_value(t, s_next, next_can_continue));
  double& cell = t.q(s, a);
  cell += t.hyper.learning_rate * (target - cell);
}

int act(const QTable& t, const SchedulerState& s) {
  return greedy_action(t, encode_state(s, t.ensemble_size), s.l < t.ensemble_size);
}

double reward(const SchedulerState& s, int a, const RewardParams& p, double energy_fraction) {
  const int n = static_cast<int>(p.delta_acc.size());
  if (a == 1) {
    require(s.l < n, ErrorCode::masked_action, "action 1 is masked: all learners already executed");
    const double deficit = 1.0 - std::clamp(energy_fraction, 0.0, 1.0);
    return p.delta_acc[static_cast<std::size_t>(s.l)] - p.beta * deficit;
  }
  return s.r == 1 ? -p.p_miss : 0.0;
}

std::string to_json(const QTable& t) {
  json j;
  j["format"] = "edgeboost-qtable";
  j["version"] = kTableVersion;
  j["ensemble_size"] = t.ensemble_size;
  j["state_count"] = t.states;
  j["hyper"] = {{"learning_rate", t.hyper.learning_rate}, {"discount", t.hyper.discount},
                {"epsilon_start", t.hyper.epsilon_start}, {"epsilon_end", t.hyper.epsilon_end},
                {"anneal_fraction", t.hyper.anneal_fraction}, {"beta", t.hyper.beta},
                {"p_miss", t.hyper.p_miss}};
  j["values"] = t.values;
  return j.dump(1) + "\n";
}

QTable qtable_from_json(const std::string& text, const std::string& name) {
  QTable t;
  try {
    const json j = json::parse(text);
    require(j.value("format", "") == "edgeboost-qtable", ErrorCode::load_error, name + ": not a Q-table file");
    require(j.at("version").get<int>() == kTableVersion, ErrorCode::load_error,
            name + ": unsupported Q-table version " + j.at("version").dump());
    t.ensemble_size = j.at("ensemble_size").get<int>();
    t.states = j.at("state_count").get<std::size_t>();
    const json& h = j.at("hyper");
    t.hyper.learning_rate = h.at("learning_rate").get<double>();
    t.hyper.discount = h.at("discount").get<double>();
    t.hyper.epsilon_start = h.at("epsilon_start").get<double>();
    t.hyper.epsilon_end = h.at("epsilon_end").get<double>();
    t.hyper.anneal_fraction = h.at("anneal_fraction").get<double>();
    t.hyper.beta = h.at("beta").get<double>();
    t.hyper.p_miss = h.at("p_miss").get<double>();
    t.values = j.at("values").get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::load_error, name + ": corrupt Q-table: " + e.what());
  }
  require(t.ensemble_size >= 0, ErrorCode::load_error, name + ": bad ensemble_size");
  if (t.ensemble_size > 0)
    require(t.states == state_count(t.ensemble_size), ErrorCode::load_error, name + ": state_count does not match N");
  require(t.values.size() == t.states * 2, ErrorCode::load_error, name + ": value array has wrong length");
  for (double v : t.values) require(std::isfinite(v), ErrorCode::load_error, name + ": non-finite Q-value");
  return t;
}

void save_qtable(const QTable& t, const std::string& path) { write_file(path, to_json(t)); }

QTable load_qtable(const std::string& path, int expected_n) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::load_error, e.what());
  }
  QTable t = qtable_from_json(text, path);
  if (expected_n >= 0)
    require(t.ensemble_size == expected_n, ErrorCode::load_error,
            path + ": Q-table was trained for N=" + std::to_string(t.ensemble_size) + ", ensemble has N=" +
                std::to_string(expected_n));
  return t;
}

}  // namespace edgeboost::sched
