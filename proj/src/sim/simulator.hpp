#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "energy/device.hpp"
#include "ensemble/ensemble.hpp"
#include "sched/qtable.hpp"

namespace edgeboost::sim {

enum class PolicyKind { qtable, fixed, all };

struct Policy {
  PolicyKind kind = PolicyKind::all;
  int k = 0;                              // fixed:k
  const sched::QTable* table = nullptr;  // qtable, not owned
  std::string name = "all";
};

Policy all_policy();
Policy fixed_policy(int k);
Policy qtable_policy(const sched::QTable& table, std::string name);

enum class RetrainMode { off, high, low, automatic };

const char* retrain_mode_name(RetrainMode m);
RetrainMode parse_retrain_mode(const std::string& s);

struct SimConfig {
  energy::Capacitor capacitor;       // voltage is the initial charge
  energy::CostModel cost;
  energy::RequestPattern requests;   // horizon = simulated duration
  energy::PowerThresholds thresholds;
  double start_time = 0.0;
  RetrainMode retrain = RetrainMode::off;
  double retrain_learning_rate = 0.05;
  std::uint64_t seed = 1;            // request sample order
};

void validate(const SimConfig& cfg, const energy::PowerTrace& trace);

enum class Outcome { served, off, busy, declined, brownout };

const char* outcome_name(Outcome o);

struct RequestRecord {
  std::size_t index = 0;
  double time = 0.0;
  double voltage = 0.0;  // at arrival
  double power = 0.0;    // harvested power at arrival
  int learners_run = 0;
  int predicted = -1;
  int label = -1;
  Outcome outcome = Outcome::off;
  bool correct = false;
  int retrained = -1;  // ensemble position updated after this request, -1 for none
  double inference_energy = 0.0;
  double retrain_energy = 0.0;

  bool success() const { return outcome == Outcome::served; }
};

struct EventRecord {
  double time = 0.0;
  double voltage = 0.0;
  double power = 0.0;
  int action = -1;  // -1 when not a scheduler decision
  int learners_run = 0;
  int correct = -1;  // -1 unknown / not applicable
  std::string type;
};

struct SimReport {
  std::string policy;
  std::string retrain_mode = "off";
  int ensemble_size = 0;
  double v_max = 0.0;
  std::size_t requests = 0;
  std::size_t failures = 0;
  std::size_t successes = 0;
  std::size_t correct = 0;
  std::size_t retrain_events = 0;
  std::vector<RequestRecord> log;
  std::vector<EventRecord> events;
  std::vector<std::size_t> learners_histogram;  // [k] = requests that executed k learners
  std::vector<std::size_t> voltage_histogram;   // arrival voltage, kVoltageBin wide
  energy::EnergyLedger ledger;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double accounting_error = 0.0;
  // Filled by concurrent-training runs: per ensemble position, on the drifted eval split.
  std::vector<double> retrained_accuracy_before;
  std::vector<double> retrained_accuracy_after;

  static constexpr double kVoltageBin = 0.25;

  double failure_rate() const;   // NaN without requests
  double mean_accuracy() const;  // NaN without successes
  double mean_learners() const;  // over successes
};

// Called once per served request, before any retraining update is applied.
using Observer = std::function<void(const RequestRecord& record, const ensemble::EnsembleModel& model,
                                    std::span<const double> input, const ensemble::Vote& vote)>;

struct SimResult {
  SimReport report;
  ensemble::EnsembleModel model;  // after any retraining
  std::vector<std::size_t> retrain_counts;
};

/// Requests draw samples from `samples` in a seeded order indexed by request number.
SimResult run(const SimConfig& cfg, const ensemble::EnsembleModel& model, const energy::PowerTrace& trace,
              const Policy& policy, std::span<const nn::Sample> samples, const Observer& observer = {});

struct ConcurrentResult {
  SimResult sim;
  std::vector<double> accuracy_before;  // per ensemble position, on the drifted eval split
  std::vector<double> accuracy_after;
};

/// Requests come from drift.train; accuracy is measured on drift.eval.
ConcurrentResult run_concurrent_training(const SimConfig& cfg, const ensemble::EnsembleModel& model,
                                         const energy::PowerTrace& trace, const Policy& policy,
                                         const nn::Dataset& drift, const Observer& observer = {});

}  // namespace edgeboost::sim
