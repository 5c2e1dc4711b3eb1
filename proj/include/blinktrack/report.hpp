#pragma once

#include "blinktrack/eval.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace blinktrack {

nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const AlertEvent& e);
nlohmann::json to_json(const SamplerSummary& s);

// Header record shared by every report file: format tag, config hash, and
// the meaning of the blink columns.
nlohmann::json report_header(const std::string& kind, const std::string& config_hash);

// One JSON record per line after the header.
void write_run_report(std::ostream& out, const RunReport& r, const std::string& config_hash);
void write_events(std::ostream& out, const std::vector<AlertEvent>& events, const std::string& config_hash);
void write_comparison(std::ostream& out, const ComparisonTable& table, const std::string& config_hash);

// Fixed-width text table of the per-sampler means and breakdowns.
void write_summary(std::ostream& out, const ComparisonTable& table, const std::string& config_hash);

}  // namespace blinktrack
