#include "sim/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

namespace edgeboost::sim {

using nlohmann::ordered_json;

Format parse_format(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  fail(ErrorCode::invalid_config, "unknown format '" + s + "' (text | csv | json)");
}

const char* format_extension(Format f) {
  switch (f) {
    case Format::text: return "txt";
    case Format::csv: return "csv";
    case Format::json: return "json";
  }
  return "txt";
}

double failure_rate_reduction(double baseline_rate, double rate) {
  if (!std::isfinite(baseline_rate) || !std::isfinite(rate) || baseline_rate <= 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return (baseline_rate - rate) / baseline_rate;
}

namespace {

std::string num(double v, int digits = 6) { return std::isfinite(v) ? format_fixed(v, digits) : "n/a"; }

ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string bin_label(std::size_t i) {
  return "[" + format_fixed(static_cast<double>(i) * SimReport::kVoltageBin, 2) + "," +
         format_fixed(static_cast<double>(i + 1) * SimReport::kVoltageBin, 2) + ")";
}

struct Summary {
  std::vector<std::pair<std::string, std::string>> rows;
  void add(std::string k, std::string v) { rows.emplace_back(std::move(k), std::move(v)); }
};

Summary summarize(const SimReport& r, const SimReport* base) {
  Summary s;
  s.add("policy", r.policy);
  s.add("retrain_mode", r.retrain_mode);
  s.add("ensemble_size", std::to_string(r.ensemble_size));
  s.add("requests", std::to_string(r.requests));
  s.add("failures", std::to_string(r.failures));
  s.add("successes", std::to_string(r.successes));
  s.add("failure_rate", num(r.failure_rate()));
  s.add("mean_accuracy", num(r.mean_accuracy()));
  s.add("mean_learners", num(r.mean_learners(), 4));
  s.add("retrain_events", std::to_string(r.retrain_events));
  s.add("baseline", base ? base->policy : "n/a");
  s.add("baseline_failure_rate", base ? num(base->failure_rate()) : "n/a");
  s.add("baseline_mean_accuracy", base ? num(base->mean_accuracy()) : "n/a");
  s.add("failure_rate_reduction", base ? num(failure_rate_reduction(base->failure_rate(), r.failure_rate())) : "n/a");
  auto joined = [](const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + num(v[i]);
    return out;
  };
  if (!r.retrained_accuracy_before.empty()) {
    s.add("drift_accuracy_before", joined(r.retrained_accuracy_before));
    s.add("drift_accuracy_after", joined(r.retrained_accuracy_after));
  }
  return s;
}

std::vector<std::pair<std::string, double>> energy_rows(const SimReport& r) {
  return {{"initial", r.initial_energy},         {"final", r.final_energy},
          {"harvested", r.ledger.harvested},     {"spilled", r.ledger.spilled},
          {"inference", r.ledger.inference},     {"retrain", r.ledger.retrain},
          {"sleep", r.ledger.sleep},             {"idle", r.ledger.idle},
          {"accounting_error", r.accounting_error}};
}

}  // namespace

std::string render_report(const SimReport& r, const SimReport* base, Format format) {
  const Summary s = summarize(r, base);
  std::ostringstream out;
  switch (format) {
    case Format::text: {
      for (const auto& [k, v] : s.rows) out << k << ": " << v << "\n";
      out << "energy_J:\n";
      for (const auto& [k, v] : energy_rows(r)) out << "  " << k << ": " << format_fixed(v, 9) << "\n";
      out << "learners_per_request:\n";
      for (std::size_t k = 0; k < r.learners_histogram.size(); ++k)
        out << "  " << k << ": " << r.learners_histogram[k] << "\n";
      out << "arrival_voltage_V:\n";
      for (std::size_t i = 0; i < r.voltage_histogram.size(); ++i)
        out << "  " << bin_label(i) << ": " << r.voltage_histogram[i] << "\n";
      break;
    }
    case Format::csv: {
      out << "section,key,value\n";
      for (const auto& [k, v] : s.rows) out << "summary," << k << "," << v << "\n";
      for (const auto& [k, v] : energy_rows(r)) out << "energy_J," << k << "," << format_fixed(v, 9) << "\n";
      for (std::size_t k = 0; k < r.learners_histogram.size(); ++k)
        out << "learners_per_request," << k << "," << r.learners_histogram[k] << "\n";
      for (std::size_t i = 0; i < r.voltage_histogram.size(); ++i)
        out << "arrival_voltage_V,\"" << bin_label(i) << "\"," << r.voltage_histogram[i] << "\n";
      break;
    }
    case Format::json: {
      ordered_json j;
      j["policy"] = r.policy;
      j["retrain_mode"] = r.retrain_mode;
      j["ensemble_size"] = r.ensemble_size;
      j["requests"] = r.requests;
      j["failures"] = r.failures;
      j["successes"] = r.successes;
      j["failure_rate"] = jnum(r.failure_rate());
      j["mean_accuracy"] = jnum(r.mean_accuracy());
      j["mean_learners"] = jnum(r.mean_learners());
      j["retrain_events"] = r.retrain_events;
      if (!r.retrained_accuracy_before.empty()) {
        j["drift_accuracy_before"] = r.retrained_accuracy_before;
        j["drift_accuracy_after"] = r.retrained_accuracy_after;
      }
      if (base) {
        j["baseline"] = {{"policy", base->policy},
                         {"failure_rate", jnum(base->failure_rate())},
                         {"mean_accuracy", jnum(base->mean_accuracy())},
                         {"failure_rate_reduction", jnum(failure_rate_reduction(base->failure_rate(),
                                                                                r.failure_rate()))}};
      } else {
        j["baseline"] = nullptr;
      }
      ordered_json e;
      for (const auto& [k, v] : energy_rows(r)) e[k] = v;
      j["energy_J"] = e;
      j["learners_per_request"] = r.learners_histogram;
      j["arrival_voltage_bin_V"] = SimReport::kVoltageBin;
      j["arrival_voltage_V"] = r.voltage_histogram;
      out << j.dump(2) << "\n";
      break;
    }
  }
  return out.str();
}

std::string events_csv(const SimReport& r) {
  std::string out = "time,voltage,P_harv,action,learners_run,correct_flag,event_type\n";
  out.reserve(r.events.size() * 64);
  for (const auto& e : r.events) {
    out += format_fixed(e.time, 6);
    out += ',';
    out += format_fixed(e.voltage, 9);
    out += ',';
    out += format_double(e.power);
    out += ',';
    if (e.action >= 0) out += std::to_string(e.action);
    out += ',';
    out += std::to_string(e.learners_run);
    out += ',';
    if (e.correct >= 0) out += std::to_string(e.correct);
    out += ',';
    out += e.type;
    out += '\n';
  }
  return out;
}

RunSummary summary_from_json(const std::string& text, const std::string& run) {
  RunSummary s;
  s.run = run;
  auto real = [](const ordered_json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  try {
    const auto j = ordered_json::parse(text);
    s.policy = j.at("policy").get<std::string>();
    s.retrain_mode = j.at("retrain_mode").get<std::string>();
    s.requests = j.at("requests").get<std::size_t>();
    s.failures = j.at("failures").get<std::size_t>();
    s.failure_rate = real(j.at("failure_rate"));
    s.mean_accuracy = real(j.at("mean_accuracy"));
    s.mean_learners = real(j.at("mean_learners"));
    const auto& b = j.at("baseline");
    if (b.is_null()) {
      s.baseline = "n/a";
      s.baseline_failure_rate = s.reduction = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.baseline = b.at("policy").get<std::string>();
      s.baseline_failure_rate = real(b.at("failure_rate"));
      s.reduction = real(b.at("failure_rate_reduction"));
    }
  } catch (const ordered_json::exception& e) {
    fail(ErrorCode::parse_error, run + ": malformed report: " + e.what());
  }
  return s;
}

std::string render_comparison(std::vector<RunSummary> rows, Format format) {
  std::stable_sort(rows.begin(), rows.end(), [](const RunSummary& a, const RunSummary& b) {
    const bool fa = std::isfinite(a.reduction), fb = std::isfinite(b.reduction);
    if (fa != fb) return fa;
    if (fa && a.reduction != b.reduction) return a.reduction > b.reduction;
    return a.run < b.run;
  });
  static const char* kCols[] = {"run", "policy", "retrain_mode", "requests", "failures", "failure_rate",
                                "mean_accuracy", "mean_learners", "baseline", "failure_rate_reduction"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.run, r.policy, r.retrain_mode, std::to_string(r.requests), std::to_string(r.failures),
                     num(r.failure_rate), num(r.mean_accuracy), num(r.mean_learners, 4), r.baseline,
                     num(r.reduction)});
  std::ostringstream out;
  switch (format) {
    case Format::csv: {
      for (std::size_t c = 0; c < std::size(kCols); ++c) out << (c ? "," : "") << kCols[c];
      out << "\n";
      for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << "\n";
      }
      break;
    }
    case Format::text: {
      std::vector<std::size_t> width(std::size(kCols));
      for (std::size_t c = 0; c < width.size(); ++c) width[c] = std::string(kCols[c]).size();
      for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
      auto line = [&](auto get) {
        for (std::size_t c = 0; c < width.size(); ++c) {
          std::string v = get(c);
          out << v;
          if (c + 1 < width.size()) out << std::string(width[c] - v.size() + 2, ' ');
        }
        out << "\n";
      };
      line([&](std::size_t c) { return std::string(kCols[c]); });
      for (const auto& row : cells) line([&](std::size_t c) { return row[c]; });
      break;
    }
    case Format::json: {
      ordered_json arr = ordered_json::array();
      for (const auto& r : rows)
        arr.push_back({{"run", r.run},
                       {"policy", r.policy},
                       {"retrain_mode", r.retrain_mode},
                       {"requests", r.requests},
                       {"failures", r.failures},
                       {"failure_rate", jnum(r.failure_rate)},
                       {"mean_accuracy", jnum(r.mean_accuracy)},
                       {"mean_learners", jnum(r.mean_learners)},
                       {"baseline", r.baseline},
                       {"failure_rate_reduction", jnum(r.reduction)}});
      out << arr.dump(2) << "\n";
      break;
    }
  }
  return out.str();
}

}  // namespace edgeboost::sim
