#pragma once

#include "blinktrack/risk.hpp"
#include "blinktrack/sampler.hpp"
#include "blinktrack/scenario.hpp"
#include "blinktrack/tracker.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blinktrack {

enum class SamplerKind { every_frame, interval, random, confidence, sarsa };

std::string_view to_string(SamplerKind kind);
// Throws ConfigError for unknown names.
SamplerKind sampler_kind_from_string(std::string_view name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::sarsa;
  double interval_s = 0.5;   // interval
  double probability = 0.3;  // random
  double c_min = 0.1;        // confidence
  SamplerConfig sarsa;       // sarsa; dt_max also drives the confidence baseline

  void validate() const;
};

struct EvalConfig {
  TrackerConfig tracker;  // intrinsics and camera height come from the trace header
  RiskConfig risk;
  double warmup_s = 60.0;
  double error_gate = 5.0;          // m, truth-to-track association for tracking error
  double accuracy_threshold = 2.0;  // m, summed tracking error allowed per tick

  void validate() const;
};

// Danger label for one ground-truth tick: the alert rule applied to the
// true relative states.
bool ground_truth_danger(const GroundTruthTick& tick, double t_r, double alert_threshold);

struct AlertEvent {
  double t = 0.0;
  double overall = 0.0;
  std::vector<int> track_ids;  // tracks at or above the alert threshold
  bool truth_danger = false;
};

struct RunReport {
  std::string scenario;
  std::string sampler;
  std::uint64_t seed = 0;

  std::size_t n_ticks = 0;
  std::size_t n_assessments = 0;  // scored ticks (after warm-up)
  std::size_t n_fp = 0;
  std::size_t n_fn = 0;
  std::size_t n_danger = 0;
  std::size_t n_alert = 0;
  double fpr = 0.0;
  double fnr = 0.0;

  // Episode-level view: maximal runs of danger / alert ticks.
  std::size_t danger_events = 0;
  std::size_t missed_events = 0;
  std::size_t alert_events = 0;
  std::size_t false_alert_events = 0;
  double event_fnr = 0.0;
  double event_fpr = 0.0;

  std::size_t blink_count = 0;  // whole run, warm-up included
  std::size_t warmup_blink_count = 0;
  std::size_t scored_blink_count = 0;
  double blink_fraction = 0.0;  // scored blinks / scored ticks (every-frame = 1)

  double mean_tracking_error = 0.0;  // m, over truth objects within d_max matched to a track
  std::size_t tracking_samples = 0;
  std::size_t untracked_samples = 0;  // truth objects within d_max with no track in the gate
  double accuracy_violation_fraction = 0.0;  // scored ticks whose summed error exceeds the threshold
};

struct RunOutput {
  RunReport report;
  std::vector<AlertEvent> events;
  std::optional<QTable> qtable;  // final table for sarsa runs
};

// Per-tick loop: the sampler decides; on a blink the tracker consumes the
// frame, otherwise tracks are only predicted; risk is assessed every tick
// and scored against ground truth after the warm-up.
RunOutput run_pipeline(const Trace& trace, const Truth& truth, const SamplerSpec& sampler,
                       const EvalConfig& config, std::uint64_t seed, const QTable* initial_table = nullptr);

struct ScenarioTags {
  std::string name;
  std::string mode;
  std::string road;
  std::string light;
  std::string class_mix;
  int n_vehicles = 0;
};

ScenarioTags tags_of(const ScenarioConfig& config);

struct CompareOptions {
  std::vector<std::uint64_t> seeds{1};
  // Re-tune interval / random / confidence per run to the sarsa blink
  // fraction on the same scenario and seed (requires sarsa in the list).
  bool match_budget = false;
  int workers = 1;
  std::optional<QTable> sarsa_initial;
};

struct ComparisonRow {
  ScenarioTags tags;
  std::uint64_t seed = 0;
  SamplerSpec spec;  // as run, after budget matching
  RunReport report;
};

struct SamplerSummary {
  std::string group;  // sampler, or "axis=value/sampler" in breakdowns
  std::size_t runs = 0;
  double fpr = 0.0;
  double fnr = 0.0;
  double event_fpr = 0.0;
  double event_fnr = 0.0;
  double blink_fraction = 0.0;
  double mean_tracking_error = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<SamplerSummary> summary;    // one per sampler
  std::vector<SamplerSummary> breakdown;  // per axis value and sampler
};

// Runs every (scenario, seed, sampler) combination. The run seed also
// perturbs the scenario's noise seed, so each seed is a fresh realization.
// Throws ConfigError on an empty sampler or scenario list.
ComparisonTable compare(const std::vector<ScenarioConfig>& scenarios, const std::vector<SamplerSpec>& samplers,
                        const CompareOptions& options, const EvalConfig& config);

// Mean-aggregates rows per group; independent of row order.
std::vector<SamplerSummary> summarize(const std::vector<ComparisonRow>& rows);
std::vector<SamplerSummary> breakdown(const std::vector<ComparisonRow>& rows);

std::uint64_t scenario_seed_for_run(std::uint64_t scenario_seed, std::uint64_t run_seed);

}  // namespace blinktrack
