#pragma once

#include <iosfwd>
#include <string>

#include "fdlm/cli/config.hpp"

namespace fdlm::cli {

// Each subcommand validates everything up front, computes its outputs in memory and only then
// writes them (plus manifest.json) into cfg.output. Errors propagate as exceptions.

/// data.csv (timestamp,value), truth_states.csv, truth.json
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
/// draws.csv (or draws_chain<k>.csv), summary.txt, summary.json, bands.csv when states are saved
void cmd_fit(const RunConfig& cfg, std::ostream& log);
/// filter_moments.csv, filter.json (log-likelihood, ingest report)
void cmd_filter(const RunConfig& cfg, std::ostream& log);
/// smooth_moments.csv
void cmd_smooth(const RunConfig& cfg, std::ostream& log);
/// summary.txt, summary.json from an existing draws CSV
void cmd_summarize(const RunConfig& cfg, std::ostream& log);
/// verify_report.txt; returns false if any check failed. `full` adds the long recovery run.
bool cmd_verify(const RunConfig& cfg, bool full, std::ostream& log);

/// Dispatches by name, converting exceptions into a diagnostic on `err` and a nonzero exit code.
int run_command(const std::string& command, const RunConfig& cfg, bool full_verify, std::ostream& log,
                std::ostream& err);

nlohmann::json summary_to_json(const ChainSummary& summary);

}  // namespace fdlm::cli
