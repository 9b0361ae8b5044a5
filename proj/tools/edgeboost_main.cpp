// edgeboost command-line front end; talks to the library only through the C API.
#include <edgeboost/edgeboost.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

int exit_code(eb_status st) {
  switch (st) {
    case EB_OK: return 0;
    case EB_ERR_INVALID_ARGUMENT:
    case EB_ERR_INVALID_CONFIG:
    case EB_ERR_PARSE:
    case EB_ERR_VALIDATION: return 1;
    default: return 2;
  }
}

int report_failure(eb_status st) {
  std::cerr << "edgeboost: error [" << eb_status_name(st) << "]: " << eb_last_error() << "\n";
  return exit_code(st);
}

void flush_warnings() {
  const std::string w = eb_last_warnings();
  std::size_t pos = 0;
  while (pos < w.size()) {
    auto nl = w.find('\n', pos);
    if (nl == std::string::npos) nl = w.size();
    if (nl > pos) std::cerr << "edgeboost: warning: " << w.substr(pos, nl - pos) << "\n";
    pos = nl + 1;
  }
}

// Prints and frees a library-owned string.
void print_owned(char* s) {
  if (!s) return;
  std::cout << s;
  eb_string_free(s);
}

struct ConfigHandle {
  eb_config* ptr = nullptr;
  ~ConfigHandle() { eb_config_free(ptr); }
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> overrides;  // dotted key -> value
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "project config JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "override the project seed");
}

// Registers a flag that becomes an eb_config_set override.
template <class T>
void add_override(CLI::App* sub, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(flag, [&c, key](const std::string& v) { c.overrides[key] = v; }, help)
      ->type_name(std::is_same_v<T, std::string> ? "TEXT" : (std::is_integral_v<T> ? "INT" : "FLOAT"));
}

int open_config(const Common& c, ConfigHandle& h) {
  eb_status st = eb_config_load(c.config.c_str(), &h.ptr);
  if (st != EB_OK) return report_failure(st);
  if (c.seed) {
    st = eb_config_set_seed(h.ptr, *c.seed);
    if (st != EB_OK) return report_failure(st);
  }
  for (const auto& [key, value] : c.overrides) {
    st = eb_config_set(h.ptr, key.c_str(), value.c_str());
    if (st != EB_OK) return report_failure(st);
  }
  return 0;
}

eb_format to_format(const std::string& f) {
  if (f == "csv") return EB_FORMAT_CSV;
  if (f == "json") return EB_FORMAT_JSON;
  return EB_FORMAT_TEXT;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgeboost: energy-adaptive boosted CNN ensembles for harvesting devices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(eb_version()));

  Common build_c, train_c, sim_c;
  std::string build_out;
  auto* build = app.add_subcommand("build-ensemble", "train the pruned learner pool and select the ensemble");
  add_common(build, build_c);
  build->add_option("--out", build_out, "output directory")->required();

  std::string train_ens, train_out, train_trace;
  auto* train = app.add_subcommand("train-scheduler", "train the Q-learning scheduler offline");
  add_common(train, train_c);
  train->add_option("--ensemble", train_ens, "directory written by build-ensemble")->required();
  train->add_option("--out", train_out, "Q-table output path")->required();
  train->add_option("--trace", train_trace, "harvesting trace CSV (overrides the configured trace)")
      ->check(CLI::ExistingFile);
  add_override<int>(train, train_c, "--episodes", "scheduler.episodes", "training episodes");
  add_override<double>(train, train_c, "--clip-seconds", "scheduler.clip_seconds", "episode clip length");
  add_override<double>(train, train_c, "--learning-rate", "scheduler.learning_rate", "Q learning rate");
  add_override<double>(train, train_c, "--discount", "scheduler.discount", "discount factor");
  add_override<double>(train, train_c, "--epsilon-start", "scheduler.epsilon_start", "initial exploration rate");
  add_override<double>(train, train_c, "--epsilon-end", "scheduler.epsilon_end", "final exploration rate");
  add_override<double>(train, train_c, "--anneal-fraction", "scheduler.anneal_fraction",
                       "share of episodes spent decaying epsilon");
  add_override<double>(train, train_c, "--beta", "scheduler.beta", "energy penalty weight");
  add_override<double>(train, train_c, "--p-miss", "scheduler.p_miss", "penalty for a request left unanswered");

  std::string sim_ens, sim_out, sim_trace, sim_format = "text";
  std::vector<std::string> sim_policies;
  int sim_jobs = 1;
  auto* simulate = app.add_subcommand("simulate", "run policies on the simulated device");
  add_common(simulate, sim_c);
  simulate->add_option("--ensemble", sim_ens, "directory written by build-ensemble")->required();
  simulate->add_option("--policy", sim_policies, "qtable:PATH | fixed:k | all (repeatable)");
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--format", sim_format, "report format")->check(CLI::IsMember({"text", "csv", "json"}));
  simulate->add_option("--jobs", sim_jobs, "parallel policy evaluations")->check(CLI::Range(1, 256));
  simulate->add_option("--trace", sim_trace, "harvesting trace CSV (overrides the configured trace)")
      ->check(CLI::ExistingFile);
  add_override<std::string>(simulate, sim_c, "--retrain", "simulation.retrain", "off | high | low | auto");
  add_override<double>(simulate, sim_c, "--duration", "simulation.duration", "simulated seconds");
  add_override<double>(simulate, sim_c, "--request-period", "simulation.request_period", "seconds between requests");
  add_override<double>(simulate, sim_c, "--initial-voltage", "simulation.initial_voltage", "starting capacitor voltage");
  add_override<int>(simulate, sim_c, "--drift-shift", "simulation.drift_shift", "cyclic label shift of requests");

  std::vector<std::string> report_runs;
  std::string report_format = "text", report_out;
  auto* report = app.add_subcommand("report", "compare finished runs");
  report->add_option("runs", report_runs, "run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", report_format, "table format")->check(CLI::IsMember({"text", "csv", "json"}));
  report->add_option("--out", report_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  char* text = nullptr;
  eb_status st = EB_OK;

  if (*build) {
    ConfigHandle cfg;
    if (int rc = open_config(build_c, cfg)) return rc;
    st = eb_build_ensemble(cfg.ptr, build_out.c_str(), &text);
  } else if (*train) {
    ConfigHandle cfg;
    if (int rc = open_config(train_c, cfg)) return rc;
    st = eb_train_scheduler(cfg.ptr, train_ens.c_str(), train_out.c_str(),
                            train_trace.empty() ? nullptr : train_trace.c_str(), &text);
  } else if (*simulate) {
    ConfigHandle cfg;
    if (int rc = open_config(sim_c, cfg)) return rc;
    std::vector<const char*> specs;
    for (const auto& p : sim_policies) specs.push_back(p.c_str());
    st = eb_simulate(cfg.ptr, sim_ens.c_str(), specs.data(), specs.size(), sim_out.c_str(), to_format(sim_format),
                     sim_jobs, sim_trace.empty() ? nullptr : sim_trace.c_str(), &text);
  } else if (*report) {
    std::vector<const char*> dirs;
    for (const auto& d : report_runs) dirs.push_back(d.c_str());
    st = eb_report(dirs.data(), dirs.size(), to_format(report_format), &text);
    if (st == EB_OK && !report_out.empty()) {
      std::ofstream out(report_out, std::ios::binary);
      if (!out) {
        eb_string_free(text);
        std::cerr << "edgeboost: error [io-error]: cannot write '" << report_out << "'\n";
        return 2;
      }
      out << text;
      eb_string_free(text);
      text = nullptr;
    }
  }

  flush_warnings();
  if (st != EB_OK) return report_failure(st);
  print_owned(text);
  return 0;
}
