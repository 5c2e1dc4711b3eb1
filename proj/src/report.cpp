#include "blinktrack/report.hpp"

#include "blinktrack/config_io.hpp"

#include <cstdio>
#include <ostream>

namespace blinktrack {

using nlohmann::json;

namespace {

constexpr const char* kPowerNote =
    "blink_count and blink_fraction are the power proxy: each blink is one camera frame plus one detector pass, "
    "so sensing energy scales with the number of blinks; blink_fraction is relative to sampling every tick";

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

json to_json(const RunReport& r) {
  return {{"scenario", r.scenario},
          {"sampler", r.sampler},
          {"seed", r.seed},
          {"n_ticks", r.n_ticks},
          {"n_assessments", r.n_assessments},
          {"n_fp", r.n_fp},
          {"n_fn", r.n_fn},
          {"n_danger", r.n_danger},
          {"n_alert", r.n_alert},
          {"fpr", r.fpr},
          {"fnr", r.fnr},
          {"danger_events", r.danger_events},
          {"missed_events", r.missed_events},
          {"alert_events", r.alert_events},
          {"false_alert_events", r.false_alert_events},
          {"event_fnr", r.event_fnr},
          {"event_fpr", r.event_fpr},
          {"blink_count", r.blink_count},
          {"warmup_blink_count", r.warmup_blink_count},
          {"scored_blink_count", r.scored_blink_count},
          {"blink_fraction", r.blink_fraction},
          {"mean_tracking_error", r.mean_tracking_error},
          {"tracking_samples", r.tracking_samples},
          {"untracked_samples", r.untracked_samples},
          {"accuracy_violation_fraction", r.accuracy_violation_fraction}};
}

json to_json(const AlertEvent& e) {
  return {{"t", e.t}, {"overall", e.overall}, {"tracks", e.track_ids}, {"truth_danger", e.truth_danger}};
}

json to_json(const SamplerSummary& s) {
  return {{"group", s.group},
          {"runs", s.runs},
          {"fpr", s.fpr},
          {"fnr", s.fnr},
          {"event_fpr", s.event_fpr},
          {"event_fnr", s.event_fnr},
          {"blink_fraction", s.blink_fraction},
          {"mean_tracking_error", s.mean_tracking_error}};
}

json report_header(const std::string& kind, const std::string& config_hash) {
  return {{"format", "blinktrack-" + kind}, {"version", 1}, {"config_hash", config_hash}, {"power_proxy", kPowerNote}};
}

void write_run_report(std::ostream& out, const RunReport& r, const std::string& config_hash) {
  out << report_header("report", config_hash).dump() << '\n' << to_json(r).dump() << '\n';
}

void write_events(std::ostream& out, const std::vector<AlertEvent>& events, const std::string& config_hash) {
  out << report_header("events", config_hash).dump() << '\n';
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

void write_comparison(std::ostream& out, const ComparisonTable& table, const std::string& config_hash) {
  out << report_header("comparison", config_hash).dump() << '\n';
  for (const auto& row : table.rows) {
    json j = to_json(row.report);
    j["run_seed"] = row.seed;
    j["tags"] = {{"mode", row.tags.mode},
                 {"road", row.tags.road},
                 {"light", row.tags.light},
                 {"class_mix", row.tags.class_mix},
                 {"n_vehicles", row.tags.n_vehicles}};
    j["spec"] = to_json(row.spec);
    out << j.dump() << '\n';
  }
  for (const auto& s : table.summary) {
    json j = to_json(s);
    j["summary"] = true;
    out << j.dump() << '\n';
  }
  for (const auto& s : table.breakdown) {
    json j = to_json(s);
    j["breakdown"] = true;
    out << j.dump() << '\n';
  }
}

void write_summary(std::ostream& out, const ComparisonTable& table, const std::string& config_hash) {
  out << "config_hash " << config_hash << '\n';
  out << "power proxy: " << kPowerNote << "\n\n";
  auto section = [&](const std::vector<SamplerSummary>& rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-36s %5s %8s %8s %8s %8s %8s %8s\n", "group", "runs", "fpr", "fnr", "ev_fpr",
                  "ev_fnr", "blinks", "err_m");
    out << line;
    for (const auto& s : rows) {
      std::snprintf(line, sizeof line, "%-36s %5zu %8s %8s %8s %8s %8s %8s\n", s.group.c_str(), s.runs,
                    fixed(s.fpr, 4).c_str(), fixed(s.fnr, 4).c_str(), fixed(s.event_fpr, 4).c_str(),
                    fixed(s.event_fnr, 4).c_str(), fixed(s.blink_fraction, 4).c_str(),
                    fixed(s.mean_tracking_error, 3).c_str());
      out << line;
    }
  };
  section(table.summary);
  if (!table.breakdown.empty()) {
    out << '\n';
    section(table.breakdown);
  }
}

}  // namespace blinktrack
