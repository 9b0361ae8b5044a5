#include "app/config.hpp"

#include <filesystem>
#include <set>

#include <json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

namespace edgeboost::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads keys from one JSON object and rejects anything it was not asked about.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j.is_object(), ErrorCode::invalid_config, where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::invalid_config, where_ + "." + key + ": wrong type");
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    T v{};
    if (has(key)) {
      get(key, v);
      out = v;
    } else {
      seen_.insert(key);
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, where_ + "." + key);
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(seen_.count(it.key()) != 0, ErrorCode::invalid_config, "unknown key '" + where_ + "." + it.key() + "'");
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string resolve(const std::string& base_file, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_file).parent_path() / p).lexically_normal().string();
}

void read_dataset(Section s, ProjectConfig& cfg) {
  s.get("seed", cfg.dataset.seed);
  if (auto g = s.child("generator")) {
    auto& o = cfg.dataset.generator;
    g->get("classes", o.classes);
    g->get("channels", o.shape.channels);
    g->get("height", o.shape.height);
    g->get("width", o.shape.width);
    g->get("train", o.train_size);
    g->get("eval", o.eval_size);
    g->get("test", o.test_size);
    g->get("blobs_per_class", o.blobs_per_class);
    g->get("noise", o.noise);
    g->get("jitter", o.jitter);
    g->get("distractor", o.distractor);
    g->finish();
  }
  if (auto c = s.child("csv")) {
    auto& o = cfg.dataset.generator;  // shape and class count still come from here
    c->get("train", cfg.dataset.train_csv);
    c->get("eval", cfg.dataset.eval_csv);
    c->get("test", cfg.dataset.test_csv);
    c->get("classes", o.classes);
    c->get("channels", o.shape.channels);
    c->get("height", o.shape.height);
    c->get("width", o.shape.width);
    c->finish();
    require(!cfg.dataset.train_csv.empty() && !cfg.dataset.eval_csv.empty() && !cfg.dataset.test_csv.empty(),
            ErrorCode::invalid_config, s.where() + ".csv: train, eval and test paths are required");
    cfg.dataset.train_csv = resolve(cfg.path, cfg.dataset.train_csv);
    cfg.dataset.eval_csv = resolve(cfg.path, cfg.dataset.eval_csv);
    cfg.dataset.test_csv = resolve(cfg.path, cfg.dataset.test_csv);
  }
  s.finish();
}

void read_pool(Section s, ProjectConfig& cfg) {
  auto& p = cfg.pool;
  s.get("pool_size", p.pool_size);
  s.get("alpha", p.alpha);
  if (auto t = s.child("train")) {
    t->get("epochs", p.train.epochs);
    t->get("learning_rate", p.train.learning_rate);
    t->get("batch_size", p.train.batch_size);
    t->finish();
  }
  if (auto pr = s.child("prune")) {
    pr->get("filters_removed_per_step", p.prune.filters_removed_per_step);
    pr->get("retrain_epochs_per_step", p.prune.retrain_epochs_per_step);
    pr->finish();
  }
  s.finish();
}

void read_energy(Section s, ProjectConfig& cfg) {
  auto& e = cfg.energy;
  if (auto c = s.child("capacitor")) {
    c->get("capacitance", e.capacitor.capacitance);
    c->get("v_max", e.capacitor.v_max);
    c->get("v_cutoff", e.capacitor.v_cutoff);
    c->finish();
  }
  if (auto c = s.child("cost")) {
    c->get("energy_per_mac", e.cost.energy_per_mac);
    c->get("per_inference_overhead", e.cost.per_inference_overhead);
    c->get("sleep_power", e.cost.sleep_power);
    c->get("active_idle_power", e.cost.active_idle_power);
    c->get("fc_retrain_energy_fraction", e.cost.fc_retrain_energy_fraction);
    c->get("macs_per_second", e.cost.macs_per_second);
    c->finish();
  }
  if (auto t = s.child("trace")) {
    t->get("csv", e.trace.csv);
    e.trace.csv = resolve(cfg.path, e.trace.csv);
    std::string profile = energy::profile_name(e.trace.profile.kind);
    t->get("profile", profile);
    e.trace.profile.kind = energy::parse_profile(profile);
    t->get("power", e.trace.profile.power);
    t->get("period", e.trace.profile.period);
    t->get("noise", e.trace.profile.noise);
    t->get("burst_on", e.trace.profile.burst_on);
    t->get("burst_off", e.trace.profile.burst_off);
    t->get("resolution", e.trace.profile.resolution);
    t->get("duration", e.trace.duration);
    t->get("efficiency", e.trace.efficiency);
    t->finish();
  }
  if (s.has("thresholds")) {
    const json& th = s.raw("thresholds");
    if (th.is_string()) {
      require(th.get<std::string>() == "terciles", ErrorCode::invalid_config,
              s.where() + ".thresholds: expected \"terciles\" or {low, high}");
    } else {
      Section t(th, s.where() + ".thresholds");
      energy::PowerThresholds v;
      t.get("low", v.low);
      t.get("high", v.high);
      t.finish();
      require(v.low < v.high, ErrorCode::invalid_config, s.where() + ".thresholds: low must be < high");
      e.thresholds = v;
    }
  }
  s.finish();
}

void read_scheduler(Section s, ProjectConfig& cfg) {
  auto& c = cfg.scheduler;
  s.get("episodes", c.episodes);
  s.get("clip_seconds", c.clip_seconds);
  s.get("learning_rate", c.hyper.learning_rate);
  s.get("discount", c.hyper.discount);
  s.get("epsilon_start", c.hyper.epsilon_start);
  s.get("epsilon_end", c.hyper.epsilon_end);
  s.get("anneal_fraction", c.hyper.anneal_fraction);
  s.get("beta", c.hyper.beta);
  s.get("p_miss", c.hyper.p_miss);
  s.finish();
}

void read_simulation(Section s, ProjectConfig& cfg) {
  auto& c = cfg.simulation;
  s.get("request_period", c.request_period);
  s.get("duration", c.duration);
  s.get("start_time", c.start_time);
  s.get("initial_voltage", c.initial_voltage);
  std::string mode = sim::retrain_mode_name(c.retrain);
  s.get("retrain", mode);
  c.retrain = sim::parse_retrain_mode(mode);
  s.get("retrain_learning_rate", c.retrain_learning_rate);
  s.get("drift_shift", c.drift_shift);
  s.finish();
}

}  // namespace

ProjectConfig parse_config(const std::string& text, const std::string& path) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, path + ": invalid JSON: " + e.what());
  }
  ProjectConfig cfg;
  cfg.path = path;
  Section root(j, "config");
  // Top-level typos first, before complaints about missing sections.
  static const std::set<std::string> kSections = {"seed",   "dataset", "network",   "pool",
                                                  "ensemble", "energy", "scheduler", "simulation"};
  for (auto it = j.begin(); it != j.end(); ++it)
    require(kSections.count(it.key()) != 0, ErrorCode::invalid_config, "unknown key 'config." + it.key() + "'");
  root.get("seed", cfg.seed);
  if (auto d = root.child("dataset")) read_dataset(*d, cfg);
  require(root.has("network"), ErrorCode::invalid_config, "config: missing 'network'");
  {
    const json& n = root.raw("network");
    if (n.is_string()) {
      cfg.network = nn::load_network_spec(resolve(path, n.get<std::string>()));
    } else {
      try {
        cfg.network = nn::network_spec_from_json(n);
      } catch (const Error& e) {
        fail(ErrorCode::invalid_config, std::string("config.network: ") + e.what());
      }
    }
  }
  if (auto p = root.child("pool")) read_pool(*p, cfg);
  if (auto e = root.child("ensemble")) {
    e->get("size", cfg.pool.ensemble_size);
    e->finish();
  }
  if (auto e = root.child("energy")) read_energy(*e, cfg);
  if (auto s = root.child("scheduler")) read_scheduler(*s, cfg);
  if (auto s = root.child("simulation")) read_simulation(*s, cfg);
  root.finish();
  validate(cfg);
  return cfg;
}

ProjectConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

void validate(const ProjectConfig& cfg) {
  const auto& g = cfg.dataset.generator;
  require(g.classes >= 2, ErrorCode::invalid_config, "dataset: classes must be >= 2");
  require(g.shape.channels >= 1 && g.shape.height >= 1 && g.shape.width >= 1, ErrorCode::invalid_config,
          "dataset: shape dimensions must be >= 1");
  require(g.train_size >= 1 && g.eval_size >= 1 && g.test_size >= 1, ErrorCode::invalid_config,
          "dataset: every split needs at least one sample");
  nn::validate(cfg.network);
  require(cfg.network.input == g.shape, ErrorCode::invalid_config, "network input shape does not match the dataset");
  require(cfg.network.class_count == g.classes, ErrorCode::invalid_config,
          "network class_count does not match the dataset");
  boost::validate(cfg.pool);
  energy::validate(cfg.energy.capacitor);
  energy::validate(cfg.energy.cost);
  energy::validate(cfg.energy.trace.profile);
  require(cfg.energy.trace.duration > 0.0 && cfg.energy.trace.efficiency >= 0.0, ErrorCode::invalid_config,
          "energy.trace: duration must be positive and efficiency >= 0");
  require(cfg.scheduler.episodes >= 0, ErrorCode::invalid_config, "scheduler.episodes must be >= 0");
  require(cfg.scheduler.clip_seconds > 0.0, ErrorCode::invalid_config, "scheduler.clip_seconds must be positive");
  sched::validate(cfg.scheduler.hyper);
  const auto& s = cfg.simulation;
  require(s.request_period > 0.0 && s.duration > 0.0, ErrorCode::invalid_config,
          "simulation: request_period and duration must be positive");
  require(s.initial_voltage >= 0.0 && s.initial_voltage <= cfg.energy.capacitor.v_max, ErrorCode::invalid_config,
          "simulation.initial_voltage must lie in [0, v_max]");
  require(s.retrain_learning_rate >= 0.0, ErrorCode::invalid_config, "simulation.retrain_learning_rate must be >= 0");
  require(s.drift_shift >= 0, ErrorCode::invalid_config, "simulation.drift_shift must be >= 0");
  if (cfg.energy.trace.csv.empty())
    require(s.start_time >= 0.0 && s.start_time + s.duration <= cfg.energy.trace.duration + 1e-9,
            ErrorCode::invalid_config, "simulation window exceeds the synthetic trace duration");
}

void set_option(ProjectConfig& cfg, const std::string& key, const std::string& value) {
  auto number = [&] {
    double v = 0.0;
    require(parse_double(value, v), ErrorCode::invalid_input, key + ": '" + value + "' is not a number");
    return v;
  };
  auto integer = [&] {
    const double v = number();
    require(v == static_cast<int>(v), ErrorCode::invalid_input, key + ": '" + value + "' is not an integer");
    return static_cast<int>(v);
  };
  auto& h = cfg.scheduler.hyper;
  auto& sim = cfg.simulation;
  if (key == "scheduler.episodes") cfg.scheduler.episodes = integer();
  else if (key == "scheduler.clip_seconds") cfg.scheduler.clip_seconds = number();
  else if (key == "scheduler.learning_rate") h.learning_rate = number();
  else if (key == "scheduler.discount") h.discount = number();
  else if (key == "scheduler.epsilon_start") h.epsilon_start = number();
  else if (key == "scheduler.epsilon_end") h.epsilon_end = number();
  else if (key == "scheduler.anneal_fraction") h.anneal_fraction = number();
  else if (key == "scheduler.beta") h.beta = number();
  else if (key == "scheduler.p_miss") h.p_miss = number();
  else if (key == "simulation.request_period") sim.request_period = number();
  else if (key == "simulation.duration") sim.duration = number();
  else if (key == "simulation.start_time") sim.start_time = number();
  else if (key == "simulation.initial_voltage") sim.initial_voltage = number();
  else if (key == "simulation.retrain") sim.retrain = sim::parse_retrain_mode(value);
  else if (key == "simulation.retrain_learning_rate") sim.retrain_learning_rate = number();
  else if (key == "simulation.drift_shift") sim.drift_shift = integer();
  else fail(ErrorCode::invalid_input, "unknown option '" + key + "'");
}

}  // namespace edgeboost::app
