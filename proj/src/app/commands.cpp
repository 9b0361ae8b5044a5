#include "app/commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"
#include "io/model_io.hpp"
#include "prune/pruner.hpp"

namespace edgeboost::app {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

nn::Dataset make_dataset(const ProjectConfig& cfg) {
  const auto& g = cfg.dataset.generator;
  if (!cfg.dataset.train_csv.empty()) {
    nn::Dataset ds;
    ds.shape = g.shape;
    ds.class_count = g.classes;
    ds.train = nn::load_csv_samples(cfg.dataset.train_csv, g.shape, g.classes);
    ds.eval = nn::load_csv_samples(cfg.dataset.eval_csv, g.shape, g.classes);
    ds.test = nn::load_csv_samples(cfg.dataset.test_csv, g.shape, g.classes);
    nn::validate(ds);
    return ds;
  }
  nn::BlobDatasetOptions o = g;
  o.seed = cfg.dataset_seed();
  return nn::make_blob_dataset(o);
}

namespace {

energy::PowerTrace make_trace(const ProjectConfig& cfg, const std::string& trace_override, std::uint64_t seed) {
  const std::string csv = trace_override.empty() ? cfg.energy.trace.csv : trace_override;
  if (!csv.empty()) return energy::load_trace(csv, cfg.energy.trace.efficiency);
  return energy::synth_trace(seed, cfg.energy.trace.profile, cfg.energy.trace.duration, cfg.energy.trace.efficiency);
}

std::vector<std::uint64_t> macs_of(const ensemble::EnsembleModel& m) {
  std::vector<std::uint64_t> out;
  for (const auto& l : m.learners) out.push_back(l.macs);
  return out;
}

std::string learner_stem(std::size_t i) { return "learner_" + std::string(i < 10 ? "0" : "") + std::to_string(i); }

}  // namespace

energy::PowerTrace training_trace(const ProjectConfig& cfg, const std::string& trace_override) {
  return make_trace(cfg, trace_override, cfg.training_trace_seed());
}

energy::PowerTrace simulation_trace(const ProjectConfig& cfg, const std::string& trace_override) {
  return make_trace(cfg, trace_override, cfg.simulation_trace_seed());
}

energy::PowerThresholds power_thresholds(const ProjectConfig& cfg, const energy::PowerTrace& training,
                                         Warnings* warnings) {
  if (cfg.energy.thresholds) return *cfg.energy.thresholds;
  const auto t = energy::power_terciles(training);
  if (warnings && t.low >= t.high)
    warnings->push_back("power terciles coincide (" + format_double(t.low) +
                        " W); the mid power level is unreachable, consider explicit thresholds");
  return t;
}

sched::EnvConfig env_config(const ProjectConfig& cfg, const energy::PowerThresholds& thresholds) {
  sched::EnvConfig env;
  env.capacitor = cfg.energy.capacitor;
  env.cost = cfg.energy.cost;
  env.requests.period = cfg.simulation.request_period;
  env.requests.horizon = cfg.scheduler.clip_seconds;
  env.thresholds = thresholds;
  env.clip_seconds = cfg.scheduler.clip_seconds;
  return env;
}

sim::SimConfig sim_config(const ProjectConfig& cfg, const energy::PowerThresholds& thresholds) {
  sim::SimConfig s;
  s.capacitor = cfg.energy.capacitor;
  s.capacitor.voltage = cfg.simulation.initial_voltage;
  s.cost = cfg.energy.cost;
  s.requests.period = cfg.simulation.request_period;
  s.requests.horizon = cfg.simulation.duration;
  s.thresholds = thresholds;
  s.start_time = cfg.simulation.start_time;
  s.retrain = cfg.simulation.retrain;
  s.retrain_learning_rate = cfg.simulation.retrain_learning_rate;
  s.seed = cfg.request_seed();
  return s;
}

BuildResult build_ensemble(const ProjectConfig& cfg) {
  validate(cfg);
  BuildResult out;
  out.data = make_dataset(cfg);
  boost::PoolConfig pc = cfg.pool;
  pc.seed = cfg.pool_seed();
  out.pool = boost::build_pool(cfg.network, out.data, pc);
  out.model = ensemble::backfit_select(out.pool.learners, static_cast<std::size_t>(pc.ensemble_size), out.data.eval);
  out.max_single_filter_macs = prune::max_single_filter_macs(cfg.network);
  return out;
}

sched::TrainingResult train_scheduler(const ProjectConfig& cfg, const ensemble::EnsembleModel& model,
                                      const std::string& trace_override) {
  const auto trace = training_trace(cfg, trace_override);
  const auto thresholds = power_thresholds(cfg, trace);
  sched::RewardParams rp;
  rp.beta = cfg.scheduler.hyper.beta;
  rp.p_miss = cfg.scheduler.hyper.p_miss;
  rp.delta_acc = model.delta_acc;
  return sched::train_offline(env_config(cfg, thresholds), trace, macs_of(model), rp, cfg.scheduler.hyper,
                              cfg.scheduler.episodes, cfg.scheduler_seed());
}

sim::Policy parse_policy(const std::string& spec, int n, std::vector<std::unique_ptr<sched::QTable>>& storage) {
  if (spec == "all") return sim::all_policy();
  if (spec.rfind("fixed:", 0) == 0) {
    int k = 0;
    const std::string v = spec.substr(6);
    std::size_t used = 0;
    try {
      k = std::stoi(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == v.size() && !v.empty() && k >= 1, ErrorCode::invalid_config,
            "policy '" + spec + "': k must be a positive integer");
    return sim::fixed_policy(k);
  }
  if (spec.rfind("qtable:", 0) == 0) {
    storage.push_back(std::make_unique<sched::QTable>(sched::load_qtable(spec.substr(7), n)));
    return sim::qtable_policy(*storage.back(), spec);
  }
  fail(ErrorCode::invalid_config, "unknown policy '" + spec + "' (all | fixed:k | qtable:PATH)");
}

std::string policy_slug(const std::string& spec) {
  if (spec.rfind("qtable:", 0) == 0) return "qtable-" + fs::path(spec.substr(7)).stem().string();
  std::string s = spec;
  for (char& c : s)
    if (c == ':') c = '-';
  return s;
}

std::string cmd_build_ensemble(const ProjectConfig& cfg, const std::string& out_dir, Warnings& warnings) {
  BuildResult b = build_ensemble(cfg);
  const auto& pool = b.pool;
  const auto& model = b.model;
  for (const double w : model.vote_weights)
    if (w <= 0.0) warnings.push_back("a selected learner has non-positive vote weight (eval error >= 0.5)");

  std::vector<std::string> files;
  for (std::size_t i = 0; i < pool.learners.size(); ++i) files.push_back(learner_stem(i) + ".json");
  io::PoolInfo info{pool.learners, files, pool.baseline_macs, pool.baseline_parameters};
  io::save_pool(info, (fs::path(out_dir) / "pool").string());
  std::vector<std::string> member_files;
  for (std::size_t idx : model.pool_indices) member_files.push_back("pool/" + files[idx]);
  io::save_ensemble(model, member_files, pool.baseline_macs, (fs::path(out_dir) / "ensemble.json").string());

  const std::size_t n = model.size();
  const std::uint64_t budget = prune::mac_budget(pool.baseline_macs, 1.0 / static_cast<double>(n));
  std::uint64_t total = 0;
  for (const auto& l : model.learners) total += l.macs;

  ordered_json j;
  j["baseline_macs"] = pool.baseline_macs;
  j["baseline_parameters"] = pool.baseline_parameters;
  j["pool_size"] = pool.learners.size();
  j["ensemble_size"] = n;
  j["learner_mac_budget"] = budget;
  j["max_single_filter_macs"] = b.max_single_filter_macs;
  ordered_json rows = ordered_json::array();
  std::ostringstream text;
  text << "baseline: " << pool.baseline_macs << " MACs, " << pool.baseline_parameters << " parameters\n";
  text << "pool (M=" << pool.learners.size() << ", per-learner budget " << budget << " MACs):\n";
  for (std::size_t i = 0; i < pool.learners.size(); ++i) {
    const auto& l = pool.learners[i];
    const auto params = nn::count_parameters(l.spec);
    const double test_acc = nn::accuracy(l, b.data.test);
    int rank = -1;
    for (std::size_t r = 0; r < n; ++r)
      if (model.pool_indices[r] == i) rank = static_cast<int>(r);
    rows.push_back({{"file", "pool/" + files[i]},
                    {"id", l.id},
                    {"macs", l.macs},
                    {"parameters", params},
                    {"eval_accuracy", l.eval_accuracy},
                    {"test_accuracy", test_acc},
                    {"selected_rank", rank}});
    text << "  " << learner_stem(i) << "  macs " << l.macs << "  params " << params << "  eval "
         << format_fixed(l.eval_accuracy, 4) << "  test " << format_fixed(test_acc, 4);
    if (rank >= 0) text << "  [ensemble #" << rank + 1 << "]";
    text << "\n";
  }
  j["learners"] = rows;
  std::vector<double> test_profile;
  for (std::size_t k = 1; k <= n; ++k) test_profile.push_back(ensemble::ensemble_accuracy(model, b.data.test, k));
  j["ensemble_total_macs"] = total;
  j["ensemble_within_baseline"] = total <= pool.baseline_macs;
  j["vote_weights"] = model.vote_weights;
  j["acc_profile"] = model.acc_profile;
  j["delta_acc"] = model.delta_acc;
  j["test_accuracy_profile"] = test_profile;
  text << "ensemble (N=" << n << "): total " << total << " MACs vs baseline " << pool.baseline_macs << " ("
       << format_fixed(100.0 * static_cast<double>(total) / static_cast<double>(pool.baseline_macs), 2) << "%)\n";
  text << "  eval acc(k):";
  for (double a : model.acc_profile) text << " " << format_fixed(a, 4);
  text << "\n  test acc(k):";
  for (double a : test_profile) text << " " << format_fixed(a, 4);
  text << "\n";
  write_file((fs::path(out_dir) / "summary.json").string(), j.dump(2) + "\n");
  write_file((fs::path(out_dir) / "summary.txt").string(), text.str());
  return text.str();
}

std::string cmd_train_scheduler(const ProjectConfig& cfg, const std::string& ensemble_dir, const std::string& out_path,
                                const std::string& trace_override, Warnings& warnings) {
  validate(cfg);
  const auto info = io::load_ensemble((fs::path(ensemble_dir) / "ensemble.json").string());
  const auto trace = training_trace(cfg, trace_override);
  const auto thresholds = power_thresholds(cfg, trace, &warnings);
  if (cfg.scheduler.episodes == 0) warnings.push_back("episodes = 0: writing an all-zero Q-table");
  sched::RewardParams rp;
  rp.beta = cfg.scheduler.hyper.beta;
  rp.p_miss = cfg.scheduler.hyper.p_miss;
  rp.delta_acc = info.model.delta_acc;
  const auto result = sched::train_offline(env_config(cfg, thresholds), trace, macs_of(info.model), rp,
                                           cfg.scheduler.hyper, cfg.scheduler.episodes, cfg.scheduler_seed());
  if (auto parent = fs::path(out_path).parent_path(); !parent.empty()) fs::create_directories(parent);
  sched::save_qtable(result.table, out_path);
  std::string curve = "episode,reward\n";
  for (std::size_t i = 0; i < result.curve.size(); ++i)
    curve += std::to_string(i) + "," + format_double(result.curve[i]) + "\n";
  const std::string curve_path = fs::path(out_path).replace_extension(".curve.csv").string();
  write_file(curve_path, curve);

  std::ostringstream out;
  out << "episodes: " << result.curve.size() << "\nupdates: " << result.updates << "\nthresholds_W: "
      << format_double(thresholds.low) << " " << format_double(thresholds.high) << "\n";
  if (result.curve.size() >= 10) {
    double first = 0, last = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      first += result.curve[i];
      last += result.curve[result.curve.size() - 10 + i];
    }
    out << "mean reward, first 10 episodes: " << format_fixed(first / 10, 4)
        << "\nmean reward, last 10 episodes: " << format_fixed(last / 10, 4) << "\n";
  }
  out << "qtable: " << out_path << "\ncurve: " << curve_path << "\n";
  return out.str();
}

std::string cmd_simulate(const ProjectConfig& cfg, const std::string& ensemble_dir,
                         const std::vector<std::string>& policies, const std::string& out_dir, sim::Format format,
                         int jobs, const std::string& trace_override, Warnings& warnings) {
  validate(cfg);
  require(jobs >= 1, ErrorCode::invalid_config, "--jobs must be >= 1");
  const auto info = io::load_ensemble((fs::path(ensemble_dir) / "ensemble.json").string());
  const int n = static_cast<int>(info.model.size());
  std::vector<std::string> specs = policies.empty() ? std::vector<std::string>{"all"} : policies;
  std::vector<std::unique_ptr<sched::QTable>> tables;
  std::vector<sim::Policy> parsed;
  for (const auto& s : specs) parsed.push_back(parse_policy(s, n, tables));
  // The all-N baseline always runs (once) so every report can state its reduction.
  std::size_t baseline_index = specs.size();
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (specs[i] == "all") baseline_index = i;
  if (baseline_index == specs.size()) {
    specs.push_back("all");
    parsed.push_back(sim::all_policy());
  }
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t k = i + 1; k < specs.size(); ++k)
      require(policy_slug(specs[i]) != policy_slug(specs[k]), ErrorCode::invalid_config,
              "policies '" + specs[i] + "' and '" + specs[k] + "' map to the same run directory");

  const auto train = training_trace(cfg, trace_override);
  const auto thresholds = power_thresholds(cfg, train, &warnings);
  const auto trace = simulation_trace(cfg, trace_override);
  const sim::SimConfig sc = sim_config(cfg, thresholds);
  sim::validate(sc, trace);
  const nn::Dataset data = make_dataset(cfg);
  const nn::Dataset drift = nn::shift_labels(data, cfg.simulation.drift_shift);
  const bool retrain = sc.retrain != sim::RetrainMode::off;

  std::vector<sim::SimReport> reports(specs.size());
  std::vector<std::string> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next++) < specs.size();) {
      try {
        if (retrain) {
          auto r = sim::run_concurrent_training(sc, info.model, trace, parsed[i], drift);
          reports[i] = std::move(r.sim.report);
          reports[i].retrained_accuracy_before = r.accuracy_before;
          reports[i].retrained_accuracy_after = r.accuracy_after;
        } else {
          const auto& samples = cfg.simulation.drift_shift > 0 ? drift.test : data.test;
          reports[i] = sim::run(sc, info.model, trace, parsed[i], samples).report;
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), specs.size());
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!errors[i].empty()) fail(ErrorCode::internal, "policy '" + specs[i] + "': " + errors[i]);

  const sim::SimReport& base = reports[baseline_index < specs.size() ? baseline_index : specs.size() - 1];
  std::vector<sim::RunSummary> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const fs::path dir = fs::path(out_dir) / policy_slug(specs[i]);
    fs::create_directories(dir);
    const std::string json_text = sim::render_report(reports[i], &base, sim::Format::json);
    write_file((dir / "report.json").string(), json_text);
    if (format != sim::Format::json)
      write_file((dir / (std::string("report.") + sim::format_extension(format))).string(),
                 sim::render_report(reports[i], &base, format));
    write_file((dir / "events.csv").string(), sim::events_csv(reports[i]));
    rows.push_back(sim::summary_from_json(json_text, policy_slug(specs[i])));
    const double err = reports[i].accounting_error;
    if (!(err < 1e-6)) warnings.push_back(specs[i] + ": energy accounting error " + format_double(err) + " J");
  }
  const std::string table = sim::render_comparison(rows, format);
  write_file((fs::path(out_dir) / (std::string("comparison.") + sim::format_extension(format))).string(), table);
  return table;
}

std::string cmd_report(const std::vector<std::string>& run_dirs, sim::Format format) {
  require(!run_dirs.empty(), ErrorCode::invalid_input, "report needs at least one run directory");
  std::vector<sim::RunSummary> rows;
  for (const auto& d : run_dirs) {
    const fs::path dir(d);
    if (fs::exists(dir / "report.json")) {
      rows.push_back(sim::summary_from_json(read_file((dir / "report.json").string()), dir.filename().string()));
      continue;
    }
    // A simulate output directory: one run per subdirectory.
    std::vector<fs::path> subs;
    if (fs::is_directory(dir))
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / "report.json")) subs.push_back(e.path());
    require(!subs.empty(), ErrorCode::io_error, "missing report file: " + (dir / "report.json").string());
    std::sort(subs.begin(), subs.end());
    for (const auto& s : subs)
      rows.push_back(sim::summary_from_json(read_file((s / "report.json").string()),
                                            dir.filename().string() + "/" + s.filename().string()));
  }
  return sim::render_comparison(rows, format);
}

}  // namespace edgeboost::app
