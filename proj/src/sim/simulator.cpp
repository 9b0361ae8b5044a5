#include "sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "common/error.hpp"
#include "sched/trainer.hpp"

namespace edgeboost::sim {

Policy all_policy() { return {PolicyKind::all, 0, nullptr, "all"}; }

Policy fixed_policy(int k) {
  require(k >= 1, ErrorCode::invalid_config, "fixed policy needs k >= 1");
  return {PolicyKind::fixed, k, nullptr, "fixed:" + std::to_string(k)};
}

Policy qtable_policy(const sched::QTable& table, std::string name) {
  return {PolicyKind::qtable, 0, &table, std::move(name)};
}

const char* retrain_mode_name(RetrainMode m) {
  switch (m) {
    case RetrainMode::off: return "off";
    case RetrainMode::high: return "high";
    case RetrainMode::low: return "low";
    case RetrainMode::automatic: return "auto";
  }
  return "?";
}

RetrainMode parse_retrain_mode(const std::string& s) {
  if (s == "off") return RetrainMode::off;
  if (s == "high") return RetrainMode::high;
  if (s == "low") return RetrainMode::low;
  if (s == "auto") return RetrainMode::automatic;
  fail(ErrorCode::invalid_config, "unknown retrain mode '" + s + "' (off | high | low | auto)");
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::served: return "served";
    case Outcome::off: return "fail-off";
    case Outcome::busy: return "fail-busy";
    case Outcome::declined: return "declined";
    case Outcome::brownout: return "brownout";
  }
  return "?";
}

double SimReport::failure_rate() const {
  return requests == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : static_cast<double>(failures) / static_cast<double>(requests);
}

double SimReport::mean_accuracy() const {
  return successes == 0 ? std::numeric_limits<double>::quiet_NaN()
                        : static_cast<double>(correct) / static_cast<double>(successes);
}

double SimReport::mean_learners() const {
  if (successes == 0) return std::numeric_limits<double>::quiet_NaN();
  std::size_t total = 0;
  for (const auto& r : log)
    if (r.success()) total += static_cast<std::size_t>(r.learners_run);
  return static_cast<double>(total) / static_cast<double>(successes);
}

void validate(const SimConfig& cfg, const energy::PowerTrace& trace) {
  energy::validate(cfg.capacitor);
  energy::validate(cfg.cost);
  energy::validate(cfg.requests);
  energy::validate(cfg.thresholds);
  energy::validate(trace);
  require(cfg.start_time >= trace.start_time() && cfg.start_time + cfg.requests.horizon <= trace.end_time + 1e-9,
          ErrorCode::invalid_config, "simulated window exceeds the power trace horizon");
  require(std::isfinite(cfg.retrain_learning_rate) && cfg.retrain_learning_rate >= 0.0, ErrorCode::invalid_config,
          "retrain learning rate must be >= 0");
}

namespace {

class Runner {
 public:
  Runner(const SimConfig& cfg, const ensemble::EnsembleModel& model, const energy::PowerTrace& trace,
         const Policy& policy, std::span<const nn::Sample> samples, const Observer& observer)
      : cfg_(cfg), model_(model), trace_(trace), policy_(policy), samples_(samples), observer_(observer),
        device_(cfg.capacitor, trace, cfg.cost, cfg.start_time), n_(static_cast<int>(model.size())) {
    std::vector<std::uint64_t> macs;
    for (const auto& l : model_.learners) macs.push_back(l.macs);
    costs_ = sched::learner_costs(macs, cfg.cost);
    order_.resize(samples.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order_.begin(), order_.end(), rng);
    retrain_counts_.assign(static_cast<std::size_t>(n_), 0);
  }

  SimResult run() {
    SimReport& rep = result_.report;
    rep.policy = policy_.name;
    rep.retrain_mode = retrain_mode_name(cfg_.retrain);
    rep.ensemble_size = n_;
    rep.v_max = cfg_.capacitor.v_max;
    rep.learners_histogram.assign(static_cast<std::size_t>(n_) + 1, 0);
    rep.voltage_histogram.assign(
        static_cast<std::size_t>(std::ceil(cfg_.capacitor.v_max / SimReport::kVoltageBin - 1e-12)), 0);
    rep.initial_energy = device_.stored_energy();

    const auto times = energy::request_times(cfg_.requests, cfg_.start_time);
    for (std::size_t i = 0; i < times.size(); ++i) serve(i, times[i]);
    device_.advance_to(cfg_.start_time + cfg_.requests.horizon);

    rep.ledger = device_.ledger();
    rep.final_energy = device_.stored_energy();
    rep.accounting_error = device_.accounting_error();
    result_.model = std::move(model_);
    result_.retrain_counts = retrain_counts_;
    return std::move(result_);
  }

 private:
  struct Plan {
    int learners = 0;  // fixed count, 0 means ask the policy
    bool retrain = false;
  };

  Plan plan() const {
    auto fixed_count = [&]() {
      if (policy_.kind == PolicyKind::all) return n_;
      if (policy_.kind == PolicyKind::fixed) return std::min(policy_.k, n_);
      return 0;
    };
    switch (cfg_.retrain) {
      case RetrainMode::off: return {fixed_count(), false};
      case RetrainMode::high: return {n_, true};
      case RetrainMode::low: return {std::max(1, n_ - 1), true};
      case RetrainMode::automatic: {
        const int level = device_.energy_level(costs_.one_learner);
        if (level >= 2) return {n_, true};
        if (level == 1) return {std::max(1, n_ - 1), true};
        return {fixed_count(), false};
      }
    }
    return {};
  }

  void event(double t, int action, int learners, int correct, const std::string& type) {
    result_.report.events.push_back(
        {t, device_.capacitor().voltage, device_.harvest_power(), action, learners, correct, type});
  }

  bool run_learner(int l, RequestRecord& rec) {
    const double e = costs_.energy[static_cast<std::size_t>(l)];
    const bool ok = device_.execute(e, costs_.duration[static_cast<std::size_t>(l)], energy::Drain::inference);
    rec.inference_energy += ok ? e : 0.0;
    return ok;
  }

  void serve(std::size_t index, double t) {
    SimReport& rep = result_.report;
    RequestRecord rec;
    rec.index = index;
    rec.time = t;
    const nn::Sample& sample = samples_[order_[index % order_.size()]];
    rec.label = sample.label;

    const bool busy = device_.time() > t;
    device_.advance_to(t);
    rec.voltage = device_.capacitor().voltage;
    rec.power = device_.harvest_power();
    const auto vbin = std::min(rep.voltage_histogram.size() - 1,
                               static_cast<std::size_t>(rec.voltage / SimReport::kVoltageBin));
    ++rep.voltage_histogram[vbin];

    if (busy) {
      finish(rec, Outcome::busy);
      return;
    }
    if (!device_.on()) {
      finish(rec, Outcome::off);
      return;
    }

    const Plan p = plan();
    int executed = 0;
    if (p.learners > 0) {
      // Fixed prefix: only start when the whole prefix is affordable.
      double need = 0.0;
      for (int l = 0; l < p.learners; ++l) need += costs_.energy[static_cast<std::size_t>(l)];
      if (device_.usable_energy() < need) {
        event(t, 0, 0, -1, "decide");
        finish(rec, Outcome::declined);
        return;
      }
      for (; executed < p.learners; ++executed) {
        event(device_.time(), 1, executed, -1, "decide");
        if (!run_learner(executed, rec)) {
          rec.learners_run = executed;
          finish(rec, Outcome::brownout);
          return;
        }
      }
    } else {
      const sched::QTable& table = *policy_.table;
      while (true) {
        const auto s = sched::observe(device_, history_, cfg_.thresholds, costs_.one_learner, executed);
        const int a = sched::act(table, s);
        event(device_.time(), a, executed, -1, "decide");
        if (a == 0) break;
        if (!run_learner(executed, rec)) {
          rec.learners_run = executed;
          finish(rec, Outcome::brownout);
          return;
        }
        ++executed;
      }
      if (executed == 0) {
        finish(rec, Outcome::declined);
        return;
      }
    }
    rec.learners_run = executed;

    // Forward passes: the retrained learner's pass comes out of train_fc_only on the
    // pre-update parameters, so the vote is the same as a plain inference.
    const int victim = p.retrain ? static_cast<int>(rr_++ % static_cast<std::size_t>(executed)) : -1;
    std::vector<std::vector<double>> probs;
    std::optional<nn::FcUpdate> update;
    for (int l = 0; l < executed; ++l) {
      const auto& learner = model_.learners[static_cast<std::size_t>(l)];
      if (l == victim) {
        const double w = 1.0;
        update = nn::train_fc_only(learner, std::span<const nn::Sample>(&sample, 1), std::span<const double>(&w, 1),
                                   cfg_.retrain_learning_rate);
        probs.push_back(update->outputs.front());
      } else {
        probs.push_back(nn::forward(learner, sample.input));
      }
    }
    const auto vote = ensemble::weighted_vote(probs, std::span<const double>(model_.vote_weights.data(),
                                                                             static_cast<std::size_t>(executed)));
    rec.predicted = vote.label;
    rec.correct = vote.label == sample.label;
    if (observer_) observer_(rec, model_, sample.input, vote);

    if (update) {
      const auto& learner = model_.learners[static_cast<std::size_t>(victim)];
      const double e = energy::retrain_energy(learner.macs, cfg_.cost);
      if (e == 0.0 || device_.execute(e, 0.0, energy::Drain::retrain)) {
        model_.learners[static_cast<std::size_t>(victim)] = std::move(update->learner);
        ++retrain_counts_[static_cast<std::size_t>(victim)];
        rec.retrained = victim;
        rec.retrain_energy = e;
        ++rep.retrain_events;
        event(device_.time(), -1, executed, -1, "retrain");
      }
    }
    history_.push(device_.usable_fraction());
    finish(rec, Outcome::served);
  }

  void finish(RequestRecord& rec, Outcome outcome) {
    SimReport& rep = result_.report;
    rec.outcome = outcome;
    ++rep.requests;
    if (rec.success()) {
      ++rep.successes;
      if (rec.correct) ++rep.correct;
      ++rep.learners_histogram[static_cast<std::size_t>(rec.learners_run)];
    } else {
      ++rep.failures;
      ++rep.learners_histogram[0];
    }
    event(rec.time, -1, rec.learners_run, rec.success() ? static_cast<int>(rec.correct) : -1, outcome_name(outcome));
    rep.log.push_back(rec);
  }

  const SimConfig& cfg_;
  ensemble::EnsembleModel model_;
  const energy::PowerTrace& trace_;
  const Policy& policy_;
  std::span<const nn::Sample> samples_;
  const Observer& observer_;
  energy::Device device_;
  int n_;
  sched::LearnerCosts costs_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> retrain_counts_;
  sched::EnergyHistory history_;
  std::size_t rr_ = 0;
  SimResult result_;
};

}  // namespace

SimResult run(const SimConfig& cfg, const ensemble::EnsembleModel& model, const energy::PowerTrace& trace,
              const Policy& policy, std::span<const nn::Sample> samples, const Observer& observer) {
  validate(cfg, trace);
  require(model.size() >= 1, ErrorCode::invalid_input, "simulation needs a non-empty ensemble");
  require(!samples.empty(), ErrorCode::invalid_input, "simulation needs request samples");
  if (policy.kind == PolicyKind::qtable) {
    require(policy.table != nullptr, ErrorCode::invalid_config, "qtable policy without a table");
    require(policy.table->ensemble_size == static_cast<int>(model.size()), ErrorCode::load_error,
            "Q-table was trained for N=" + std::to_string(policy.table->ensemble_size) + ", ensemble has N=" +
                std::to_string(model.size()));
  }
  if (policy.kind == PolicyKind::fixed) require(policy.k >= 1, ErrorCode::invalid_config, "fixed policy needs k >= 1");
  return Runner(cfg, model, trace, policy, samples, observer).run();
}

ConcurrentResult run_concurrent_training(const SimConfig& cfg, const ensemble::EnsembleModel& model,
                                         const energy::PowerTrace& trace, const Policy& policy,
                                         const nn::Dataset& drift, const Observer& observer) {
  require(cfg.retrain != RetrainMode::off, ErrorCode::invalid_config, "concurrent training needs a retrain mode");
  ConcurrentResult out;
  for (const auto& l : model.learners) out.accuracy_before.push_back(nn::accuracy(l, drift.eval));
  out.sim = run(cfg, model, trace, policy, drift.train, observer);
  for (const auto& l : out.sim.model.learners) out.accuracy_after.push_back(nn::accuracy(l, drift.eval));
  return out;
}

}  // namespace edgeboost::sim
