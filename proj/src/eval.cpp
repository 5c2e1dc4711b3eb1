#include "blinktrack/eval.hpp"

#include "blinktrack/assignment.hpp"
#include "blinktrack/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>
#include <tuple>

namespace blinktrack {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t policy_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

std::unique_ptr<BlinkPolicy> make_policy(const SamplerSpec& spec, double tick_rate, std::uint64_t seed,
                                         const QTable* initial) {
  switch (spec.kind) {
    case SamplerKind::every_frame:
      return std::make_unique<EveryFramePolicy>();
    case SamplerKind::interval:
      return std::make_unique<IntervalPolicy>(spec.interval_s, tick_rate);
    case SamplerKind::random:
      return std::make_unique<RandomPolicy>(spec.probability, policy_seed(seed, 1));
    case SamplerKind::confidence:
      return std::make_unique<ConfidenceThresholdPolicy>(spec.c_min, spec.sarsa.dt_max);
    case SamplerKind::sarsa:
      return std::make_unique<SarsaPolicy>(spec.sarsa, policy_seed(seed, 2), initial ? *initial : QTable{});
  }
  throw ConfigError("sampler: unknown kind");
}

std::vector<TrackSnapshot> truth_snapshots(const GroundTruthTick& tick) {
  std::vector<TrackSnapshot> out;
  out.reserve(tick.objects.size());
  for (const auto& o : tick.objects) {
    TrackSnapshot s;
    s.id = o.id;
    s.cls = o.cls;
    s.x = o.x;
    s.z = o.z;
    s.vx = o.vx;
    s.vz = o.vz;
    s.confidence = 1.0;
    s.range = std::hypot(o.x, o.z);
    out.push_back(s);
  }
  return out;
}

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Summed position error of matched truth objects within d_max; counts the
// matched and the unmatched ones.
struct TickError {
  double sum = 0.0;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

TickError tracking_error(const GroundTruthTick& tick, std::span<const TrackSnapshot> tracks, double d_max,
                         double gate) {
  std::vector<const TruthObject*> near;
  for (const auto& o : tick.objects) {
    if (std::hypot(o.x, o.z) <= d_max) near.push_back(&o);
  }
  TickError err;
  if (near.empty()) return err;
  if (tracks.empty()) {
    err.unmatched = near.size();
    return err;
  }
  Eigen::MatrixXd w(static_cast<Eigen::Index>(near.size()), static_cast<Eigen::Index>(tracks.size()));
  for (std::size_t i = 0; i < near.size(); ++i) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          gate - std::hypot(near[i]->x - tracks[j].x, near[i]->z - tracks[j].z);
    }
  }
  const auto m = max_weight_matching(w, 0.0);
  for (std::size_t i = 0; i < near.size(); ++i) {
    const int j = m.row_to_col[i];
    if (j < 0) {
      ++err.unmatched;
      continue;
    }
    err.sum += gate - w(static_cast<Eigen::Index>(i), j);
    ++err.matched;
  }
  return err;
}

// Maximal runs of true ticks; each run reports whether `other` was true
// anywhere inside it.
std::pair<std::size_t, std::size_t> episodes(const std::vector<char>& flags, const std::vector<char>& other) {
  std::size_t runs = 0;
  std::size_t without = 0;
  std::size_t i = 0;
  while (i < flags.size()) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    bool hit = false;
    while (i < flags.size() && flags[i]) {
      hit = hit || other[i];
      ++i;
    }
    ++runs;
    if (!hit) ++without;
  }
  return {runs, without};
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::every_frame: return "every_frame";
    case SamplerKind::interval: return "interval";
    case SamplerKind::random: return "random";
    case SamplerKind::confidence: return "confidence";
    case SamplerKind::sarsa: return "sarsa";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  for (auto k : {SamplerKind::every_frame, SamplerKind::interval, SamplerKind::random, SamplerKind::confidence,
                 SamplerKind::sarsa}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("sampler: unknown kind '" + std::string(name) +
                    "' (expected every_frame, interval, random, confidence or sarsa)");
}

void SamplerSpec::validate() const {
  if (!(interval_s > 0.0)) throw ConfigError("sampler.interval_s: must be > 0");
  if (!(probability >= 0.0 && probability <= 1.0)) throw ConfigError("sampler.probability: must be in [0,1]");
  if (!(c_min >= 0.0)) throw ConfigError("sampler.c_min: must be >= 0");
  sarsa.validate();
}

void EvalConfig::validate() const {
  risk.validate();
  if (!(warmup_s >= 0.0)) throw ConfigError("warmup_s: must be >= 0");
  if (!(error_gate > 0.0)) throw ConfigError("error_gate: must be > 0");
  if (!(accuracy_threshold > 0.0)) throw ConfigError("accuracy_threshold: must be > 0");
}

bool ground_truth_danger(const GroundTruthTick& tick, double t_r, double alert_threshold) {
  const auto snaps = truth_snapshots(tick);
  return assess(snaps, RiskConfig{t_r, alert_threshold}, tick.t).alert;
}

RunOutput run_pipeline(const Trace& trace, const Truth& truth, const SamplerSpec& sampler, const EvalConfig& config,
                       std::uint64_t seed, const QTable* initial_table) {
  sampler.validate();
  config.validate();
  if (trace.frames.size() != truth.ticks.size()) {
    throw ConfigError("truth: " + std::to_string(truth.ticks.size()) + " ticks for " +
                      std::to_string(trace.frames.size()) + " trace frames");
  }

  TrackerConfig tcfg = config.tracker;
  tcfg.intr = trace.header.intr;
  tcfg.camera_height = trace.header.camera_height;
  Tracker tracker(tcfg);
  auto policy = make_policy(sampler, trace.header.tick_rate, seed, initial_table);

  RunOutput out;
  RunReport& r = out.report;
  r.scenario = trace.header.scenario;
  r.sampler = std::string(to_string(sampler.kind));
  r.seed = seed;
  r.n_ticks = trace.frames.size();

  const double t0 = trace.frames.empty() ? 0.0 : trace.frames.front().t;
  double last_blink = -std::numeric_limits<double>::infinity();
  std::vector<char> danger_flags;
  std::vector<char> alert_flags;
  double error_sum = 0.0;
  std::size_t violations = 0;

  for (std::size_t k = 0; k < trace.frames.size(); ++k) {
    const Frame& frame = trace.frames[k];
    const GroundTruthTick& gt = truth.ticks[k];
    if (std::abs(gt.t - frame.t) > 1e-9) {
      throw ConfigError("truth: tick " + std::to_string(k) + " is not aligned with the trace");
    }
    const double now = frame.t;
    const bool scored = now - t0 >= config.warmup_s - 1e-9;

    tracker.advance(now);
    auto snaps = tracker.snapshots();
    const Action action = policy->decide(TickContext{k, now, last_blink, snaps});
    if (action == Action::blink) {
      snaps = tracker.step(frame);
      last_blink = now;
      ++r.blink_count;
      if (scored) {
        ++r.scored_blink_count;
      } else {
        ++r.warmup_blink_count;
      }
    }

    const auto risk = assess(snaps, config.risk, now);
    const bool danger = ground_truth_danger(gt, config.risk.t_r, config.risk.alert_threshold);
    if (risk.alert) {
      AlertEvent ev;
      ev.t = now;
      ev.overall = risk.overall;
      for (const auto& o : risk.per_object) {
        if (o.kappa >= config.risk.alert_threshold) ev.track_ids.push_back(o.id);
      }
      ev.truth_danger = danger;
      out.events.push_back(std::move(ev));
    }
    if (!scored) continue;

    ++r.n_assessments;
    if (danger) ++r.n_danger;
    if (risk.alert) ++r.n_alert;
    if (risk.alert && !danger) ++r.n_fp;
    if (!risk.alert && danger) ++r.n_fn;
    danger_flags.push_back(danger ? 1 : 0);
    alert_flags.push_back(risk.alert ? 1 : 0);

    const auto err = tracking_error(gt, snaps, tcfg.d_max, config.error_gate);
    error_sum += err.sum;
    r.tracking_samples += err.matched;
    r.untracked_samples += err.unmatched;
    if (err.sum > config.accuracy_threshold) ++violations;
  }

  r.fpr = safe_ratio(r.n_fp, r.n_assessments);
  r.fnr = safe_ratio(r.n_fn, r.n_assessments);
  std::tie(r.danger_events, r.missed_events) = episodes(danger_flags, alert_flags);
  std::tie(r.alert_events, r.false_alert_events) = episodes(alert_flags, danger_flags);
  r.event_fnr = safe_ratio(r.missed_events, r.danger_events);
  r.event_fpr = safe_ratio(r.false_alert_events, r.alert_events);
  r.blink_fraction = safe_ratio(r.scored_blink_count, r.n_assessments);
  r.mean_tracking_error = r.tracking_samples == 0 ? 0.0 : error_sum / static_cast<double>(r.tracking_samples);
  r.accuracy_violation_fraction = safe_ratio(violations, r.n_assessments);

  if (const auto* sarsa = dynamic_cast<const SarsaPolicy*>(policy.get())) out.qtable = sarsa->table();
  return out;
}

ScenarioTags tags_of(const ScenarioConfig& config) {
  ScenarioTags t;
  t.name = config.name;
  t.mode = std::string(to_string(config.user.mode));
  t.road = std::string(to_string(config.road));
  t.light = std::string(to_string(config.light));
  t.n_vehicles = static_cast<int>(config.vehicles.size());
  const auto cars = std::count_if(config.vehicles.begin(), config.vehicles.end(),
                                  [](const VehicleConfig& v) { return v.cls == ObjectClass::car; });
  if (config.vehicles.empty()) {
    t.class_mix = "none";
  } else if (cars == t.n_vehicles) {
    t.class_mix = "car";
  } else if (cars == 0) {
    t.class_mix = "cycle";
  } else {
    t.class_mix = "mixed";
  }
  return t;
}

std::uint64_t scenario_seed_for_run(std::uint64_t scenario_seed, std::uint64_t run_seed) {
  return splitmix64(scenario_seed * 0x100000001b3ULL + splitmix64(run_seed));
}

namespace {

// Lowest-c_min setting whose blink fraction reaches `target`, by bisection
// on log c_min. Blink fraction is nondecreasing in c_min up to noise.
SamplerSpec match_confidence(const GeneratedScenario& g, SamplerSpec spec, double target, const EvalConfig& config,
                             std::uint64_t seed) {
  auto fraction = [&](double c) {
    spec.c_min = c;
    return run_pipeline(g.trace, g.truth, spec, config, seed).report.blink_fraction;
  };
  double lo = std::log(1e-5);
  double hi = std::log(1e3);
  for (int i = 0; i < 24; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fraction(std::exp(mid)) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double f_lo = fraction(std::exp(lo));
  const double f_hi = fraction(std::exp(hi));
  spec.c_min = std::abs(f_lo - target) <= std::abs(f_hi - target) ? std::exp(lo) : std::exp(hi);
  return spec;
}

std::vector<ComparisonRow> run_job(const ScenarioConfig& base, std::uint64_t run_seed,
                                   const std::vector<SamplerSpec>& samplers, const CompareOptions& options,
                                   const EvalConfig& config) {
  ScenarioConfig sc = base;
  sc.seed = scenario_seed_for_run(base.seed, run_seed);
  const auto g = generate(sc);
  const auto tags = tags_of(base);
  const QTable* initial = options.sarsa_initial ? &*options.sarsa_initial : nullptr;

  std::vector<ComparisonRow> rows(samplers.size());
  std::optional<double> budget;
  auto run_one = [&](std::size_t i, SamplerSpec spec) {
    rows[i].tags = tags;
    rows[i].seed = run_seed;
    rows[i].report = run_pipeline(g.trace, g.truth, spec, config, run_seed, initial).report;
    rows[i].spec = spec;
  };

  if (options.match_budget) {
    for (std::size_t i = 0; i < samplers.size(); ++i) {
      if (samplers[i].kind != SamplerKind::sarsa) continue;
      run_one(i, samplers[i]);
      if (!budget) budget = rows[i].report.blink_fraction;
    }
    if (!budget) throw ConfigError("compare.match_budget: requires a sarsa sampler");
  }
  for (std::size_t i = 0; i < samplers.size(); ++i) {
    SamplerSpec spec = samplers[i];
    if (options.match_budget) {
      if (spec.kind == SamplerKind::sarsa) continue;
      const double f = std::clamp(*budget, 1e-6, 1.0);
      if (spec.kind == SamplerKind::interval) spec.interval_s = 1.0 / (f * g.trace.header.tick_rate);
      if (spec.kind == SamplerKind::random) spec.probability = f;
      if (spec.kind == SamplerKind::confidence) spec = match_confidence(g, spec, f, config, run_seed);
    }
    run_one(i, spec);
  }
  return rows;
}

void add_summary(std::vector<SamplerSummary>& out, const std::string& group,
                std::vector<const ComparisonRow*>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ComparisonRow* a, const ComparisonRow* b) {
    return std::tie(a->tags.name, a->seed, a->report.sampler) < std::tie(b->tags.name, b->seed, b->report.sampler);
  });
  SamplerSummary s;
  s.group = group;
  s.runs = rows.size();
  for (const auto* r : rows) {
    s.fpr += r->report.fpr;
    s.fnr += r->report.fnr;
    s.event_fpr += r->report.event_fpr;
    s.event_fnr += r->report.event_fnr;
    s.blink_fraction += r->report.blink_fraction;
    s.mean_tracking_error += r->report.mean_tracking_error;
  }
  if (s.runs > 0) {
    const double n = static_cast<double>(s.runs);
    s.fpr /= n;
    s.fnr /= n;
    s.event_fpr /= n;
    s.event_fnr /= n;
    s.blink_fraction /= n;
    s.mean_tracking_error /= n;
  }
  out.push_back(std::move(s));
}

}  // namespace

std::vector<SamplerSummary> summarize(const std::vector<ComparisonRow>& rows) {
  std::map<std::string, std::vector<const ComparisonRow*>> groups;
  for (const auto& r : rows) groups[r.report.sampler].push_back(&r);
  std::vector<SamplerSummary> out;
  for (auto& [name, members] : groups) add_summary(out, name, members);
  return out;
}

std::vector<SamplerSummary> breakdown(const std::vector<ComparisonRow>& rows) {
  std::map<std::string, std::vector<const ComparisonRow*>> groups;
  for (const auto& r : rows) {
    const auto& t = r.tags;
    const std::string& s = r.report.sampler;
    groups["mode=" + t.mode + "/" + s].push_back(&r);
    groups["road=" + t.road + "/" + s].push_back(&r);
    groups["light=" + t.light + "/" + s].push_back(&r);
    groups["class=" + t.class_mix + "/" + s].push_back(&r);
    groups["vehicles=" + std::to_string(t.n_vehicles) + "/" + s].push_back(&r);
  }
  std::vector<SamplerSummary> out;
  for (auto& [name, members] : groups) add_summary(out, name, members);
  return out;
}

ComparisonTable compare(const std::vector<ScenarioConfig>& scenarios, const std::vector<SamplerSpec>& samplers,
                        const CompareOptions& options, const EvalConfig& config) {
  if (scenarios.empty()) throw ConfigError("compare: scenario list is empty");
  if (samplers.empty()) throw ConfigError("compare: sampler list is empty");
  if (options.seeds.empty()) throw ConfigError("compare: seed list is empty");
  for (const auto& s : samplers) s.validate();
  for (const auto& s : scenarios) s.validate();
  config.validate();

  const std::size_t n_jobs = scenarios.size() * options.seeds.size();
  std::vector<std::vector<ComparisonRow>> results(n_jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= n_jobs) return;
      try {
        results[j] = run_job(scenarios[j / options.seeds.size()], options.seeds[j % options.seeds.size()], samplers,
                             options, config);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const auto n_workers = static_cast<std::size_t>(std::clamp(options.workers, 1, 64));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < std::min(n_workers, n_jobs); ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ComparisonTable table;
  for (auto& job : results) {
    for (auto& row : job) table.rows.push_back(std::move(row));
  }
  table.summary = summarize(table.rows);
  table.breakdown = breakdown(table.rows);
  return table;
}

}  // namespace blinktrack
