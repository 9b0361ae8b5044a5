#pragma once

#include <string>
#include <vector>

#include "sim/simulator.hpp"

namespace edgeboost::sim {

enum class Format { text, csv, json };

Format parse_format(const std::string& s);
const char* format_extension(Format f);

/// (base - rate) / base; NaN when the baseline never failed or is undefined.
double failure_rate_reduction(double baseline_rate, double rate);

/// `baseline` may be null; the comparison rows then read n/a.
std::string render_report(const SimReport& report, const SimReport* baseline, Format format);

/// time,voltage,P_harv,action,learners_run,correct_flag,event_type
std::string events_csv(const SimReport& report);

// One row of the cross-run comparison, read back from a report.json.
struct RunSummary {
  std::string run;  // directory label
  std::string policy;
  std::string retrain_mode;
  std::size_t requests = 0;
  std::size_t failures = 0;
  double failure_rate = 0.0;
  double mean_accuracy = 0.0;
  double mean_learners = 0.0;
  std::string baseline;
  double baseline_failure_rate = 0.0;
  double reduction = 0.0;
};

RunSummary summary_from_json(const std::string& text, const std::string& run);

/// Rows sorted by failure-rate reduction, highest first; undefined reductions last.
std::string render_comparison(std::vector<RunSummary> rows, Format format);

}  // namespace edgeboost::sim
