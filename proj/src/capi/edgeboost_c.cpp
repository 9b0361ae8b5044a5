#include "edgeboost/edgeboost.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "app/commands.hpp"
#include "common/error.hpp"
#include "io/model_io.hpp"

using namespace edgeboost;

struct eb_config {
  app::ProjectConfig cfg;
};

struct eb_ensemble {
  ensemble::EnsembleModel model;
};

struct eb_qtable {
  sched::QTable table;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_warnings;

eb_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_input: return EB_ERR_INVALID_ARGUMENT;
    case ErrorCode::invalid_config: return EB_ERR_INVALID_CONFIG;
    case ErrorCode::parse_error: return EB_ERR_PARSE;
    case ErrorCode::validation_error: return EB_ERR_VALIDATION;
    case ErrorCode::io_error: return EB_ERR_IO;
    case ErrorCode::load_error: return EB_ERR_LOAD;
    case ErrorCode::budget_infeasible: return EB_ERR_BUDGET_INFEASIBLE;
    case ErrorCode::training_diverged: return EB_ERR_TRAINING_DIVERGED;
    case ErrorCode::masked_action: return EB_ERR_MASKED_ACTION;
    case ErrorCode::internal: return EB_ERR_INTERNAL;
  }
  return EB_ERR_INTERNAL;
}

// Runs f, translating exceptions into a status plus thread-local message.
template <class F>
eb_status guarded(F&& f) {
  g_error.clear();
  g_warnings.clear();
  try {
    f();
    return EB_OK;
  } catch (const Error& e) {
    g_error = e.what();
    return to_status(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    g_error = e.what();
    return EB_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return EB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return EB_ERR_INTERNAL;
  }
}

eb_status bad_arg(const char* what) {
  g_error = what;
  g_warnings.clear();
  return EB_ERR_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_warnings(const app::Warnings& w) {
  for (const auto& line : w) g_warnings += line + "\n";
}

sim::Format to_format(eb_format f) {
  switch (f) {
    case EB_FORMAT_TEXT: return sim::Format::text;
    case EB_FORMAT_CSV: return sim::Format::csv;
    case EB_FORMAT_JSON: return sim::Format::json;
  }
  fail(ErrorCode::invalid_input, "unknown report format");
}

void emit(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

}  // namespace

extern "C" {

const char* eb_version(void) { return "0.1.0"; }

const char* eb_status_name(eb_status status) {
  switch (status) {
    case EB_OK: return "ok";
    case EB_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case EB_ERR_INVALID_CONFIG: return "invalid-config";
    case EB_ERR_PARSE: return "parse-error";
    case EB_ERR_VALIDATION: return "validation-error";
    case EB_ERR_IO: return "io-error";
    case EB_ERR_LOAD: return "load-error";
    case EB_ERR_BUDGET_INFEASIBLE: return "budget-infeasible";
    case EB_ERR_TRAINING_DIVERGED: return "training-diverged";
    case EB_ERR_MASKED_ACTION: return "masked-action";
    case EB_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* eb_last_error(void) { return g_error.c_str(); }
const char* eb_last_warnings(void) { return g_warnings.c_str(); }

void eb_string_free(char* s) { std::free(s); }

eb_status eb_config_load(const char* path, eb_config** out) {
  if (!path || !out) return bad_arg("eb_config_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new eb_config{app::load_config(path)}; });
}

eb_status eb_config_set_seed(eb_config* cfg, uint64_t seed) {
  if (!cfg) return bad_arg("eb_config_set_seed: null config");
  return guarded([&] {
    cfg->cfg.seed = seed;
    app::validate(cfg->cfg);
  });
}

eb_status eb_config_set(eb_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return bad_arg("eb_config_set: null argument");
  return guarded([&] {
    app::ProjectConfig next = cfg->cfg;
    app::set_option(next, key, value);
    app::validate(next);
    cfg->cfg = std::move(next);
  });
}

uint64_t eb_config_seed(const eb_config* cfg) { return cfg ? cfg->cfg.seed : 0; }

void eb_config_free(eb_config* cfg) { delete cfg; }

eb_status eb_build_ensemble(const eb_config* cfg, const char* out_dir, char** summary) {
  if (!cfg || !out_dir) return bad_arg("eb_build_ensemble: null argument");
  app::Warnings w;
  const eb_status st = guarded([&] { emit(summary, app::cmd_build_ensemble(cfg->cfg, out_dir, w)); });
  set_warnings(w);
  return st;
}

eb_status eb_train_scheduler(const eb_config* cfg, const char* ensemble_dir, const char* out_path,
                             const char* trace_csv, char** summary) {
  if (!cfg || !ensemble_dir || !out_path) return bad_arg("eb_train_scheduler: null argument");
  app::Warnings w;
  const eb_status st = guarded([&] {
    emit(summary, app::cmd_train_scheduler(cfg->cfg, ensemble_dir, out_path, trace_csv ? trace_csv : "", w));
  });
  set_warnings(w);
  return st;
}

eb_status eb_simulate(const eb_config* cfg, const char* ensemble_dir, const char* const* policies,
                      size_t policy_count, const char* out_dir, eb_format format, int jobs, const char* trace_csv,
                      char** table) {
  if (!cfg || !ensemble_dir || !out_dir || (policy_count > 0 && !policies))
    return bad_arg("eb_simulate: null argument");
  std::vector<std::string> specs;
  for (size_t i = 0; i < policy_count; ++i) {
    if (!policies[i]) return bad_arg("eb_simulate: null policy string");
    specs.emplace_back(policies[i]);
  }
  app::Warnings w;
  const eb_status st = guarded([&] {
    emit(table, app::cmd_simulate(cfg->cfg, ensemble_dir, specs, out_dir, to_format(format), jobs,
                                  trace_csv ? trace_csv : "", w));
  });
  set_warnings(w);
  return st;
}

eb_status eb_report(const char* const* run_dirs, size_t count, eb_format format, char** table) {
  if (count > 0 && !run_dirs) return bad_arg("eb_report: null run list");
  std::vector<std::string> dirs;
  for (size_t i = 0; i < count; ++i) {
    if (!run_dirs[i]) return bad_arg("eb_report: null run directory");
    dirs.emplace_back(run_dirs[i]);
  }
  return guarded([&] { emit(table, app::cmd_report(dirs, to_format(format))); });
}

eb_status eb_ensemble_load(const char* ensemble_dir, eb_ensemble** out) {
  if (!ensemble_dir || !out) return bad_arg("eb_ensemble_load: null argument");
  *out = nullptr;
  return guarded([&] {
    auto info = io::load_ensemble((std::filesystem::path(ensemble_dir) / "ensemble.json").string());
    *out = new eb_ensemble{std::move(info.model)};
  });
}

size_t eb_ensemble_size(const eb_ensemble* e) { return e ? e->model.size() : 0; }

size_t eb_ensemble_input_size(const eb_ensemble* e) {
  return e && !e->model.learners.empty() ? e->model.learners.front().spec.input.size() : 0;
}

int eb_ensemble_class_count(const eb_ensemble* e) { return e ? e->model.class_count : 0; }

uint64_t eb_ensemble_learner_macs(const eb_ensemble* e, size_t index) {
  return e && index < e->model.size() ? e->model.learners[index].macs : 0;
}

eb_status eb_ensemble_predict(const eb_ensemble* e, const double* input, size_t input_len, size_t k, int* label,
                              double* scores) {
  if (!e || !input || !label) return bad_arg("eb_ensemble_predict: null argument");
  return guarded([&] {
    require(input_len == eb_ensemble_input_size(e), ErrorCode::invalid_input,
            "input length " + std::to_string(input_len) + " does not match the network input " +
                std::to_string(eb_ensemble_input_size(e)));
    const auto vote = ensemble::predict(e->model, std::span<const double>(input, input_len), k);
    *label = vote.label;
    if (scores) std::copy(vote.scores.begin(), vote.scores.end(), scores);
    if (vote.degenerate) g_warnings = "every vote weight is <= 0\n";
  });
}

void eb_ensemble_free(eb_ensemble* e) { delete e; }

eb_status eb_qtable_load(const char* path, eb_qtable** out) {
  if (!path || !out) return bad_arg("eb_qtable_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new eb_qtable{sched::load_qtable(path)}; });
}

int eb_qtable_ensemble_size(const eb_qtable* q) { return q ? q->table.ensemble_size : 0; }

eb_status eb_qtable_value(const eb_qtable* q, int e_now, int e_last, int p_harv, int l, int r, int action,
                          double* value) {
  if (!q || !value) return bad_arg("eb_qtable_value: null argument");
  if (action != 0 && action != 1) return bad_arg("eb_qtable_value: action must be 0 or 1");
  return guarded([&] {
    const auto s = sched::encode_state({e_now, e_last, p_harv, l, r}, q->table.ensemble_size);
    *value = q->table.q(s, action);
  });
}

eb_status eb_qtable_act(const eb_qtable* q, int e_now, int e_last, int p_harv, int l, int r, int* action) {
  if (!q || !action) return bad_arg("eb_qtable_act: null argument");
  return guarded([&] { *action = sched::act(q->table, {e_now, e_last, p_harv, l, r}); });
}

void eb_qtable_free(eb_qtable* q) { delete q; }

}  // extern "C"
