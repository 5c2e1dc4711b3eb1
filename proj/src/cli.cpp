#include "blinktrack/cli.hpp"

#include "blinktrack/errors.hpp"
#include "blinktrack/report.hpp"
#include "blinktrack/trace_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace blinktrack {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void check_tracker(const TrackerConfig& t) {
  // Intrinsics come from the trace, so only the tracker's own fields matter here.
  TrackerConfig probe = t;
  probe.intr = CameraIntrinsics{};
  probe.camera_height = 1.0;
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("eval.") + e.what());
  }
}

// Where the outputs go is not part of what was run.
std::string output_hash(nlohmann::json j) {
  j.erase("out");
  return config_hash(j);
}

std::string base_dir_of(const std::string& path) { return fs::path(path).parent_path().string(); }

}  // namespace

GenerateResult cmd_generate(const ScenarioConfig& config, const std::string& out_dir) {
  const auto g = generate(config);
  ensure_dir(out_dir);
  GenerateResult r;
  r.trace_path = (fs::path(out_dir) / (config.name + ".trace.jsonl")).string();
  r.truth_path = (fs::path(out_dir) / (config.name + ".truth.jsonl")).string();
  write_trace_file(r.trace_path, g.trace);
  write_truth_file(r.truth_path, g.truth);
  return r;
}

RunResult cmd_run(const RunConfig& config) {
  config.sampler.validate();
  config.eval.validate();
  check_tracker(config.eval.tracker);

  Trace trace;
  Truth truth;
  if (config.scenario) {
    ScenarioConfig sc = *config.scenario;
    sc.seed = scenario_seed_for_run(sc.seed, config.seed);
    auto g = generate(sc);
    trace = std::move(g.trace);
    truth = std::move(g.truth);
  } else {
    trace = read_trace_file(*config.trace_path);
    truth = read_truth_file(*config.truth_path);
  }
  std::optional<QTable> initial;
  if (config.qtable_path && config.sampler.kind == SamplerKind::sarsa) initial = QTable::load_file(*config.qtable_path);

  const auto output = run_pipeline(trace, truth, config.sampler, config.eval, config.seed, initial ? &*initial : nullptr);
  const auto hash = output_hash(to_json(config));

  ensure_dir(config.out_dir);
  RunResult r;
  r.report = output.report;
  r.report_path = (fs::path(config.out_dir) / "report.jsonl").string();
  r.events_path = (fs::path(config.out_dir) / "events.jsonl").string();
  {
    auto out = open_out(r.report_path);
    write_run_report(out, output.report, hash);
  }
  {
    auto out = open_out(r.events_path);
    write_events(out, output.events, hash);
  }
  if (output.qtable) {
    r.qtable_path = (fs::path(config.out_dir) / "qtable.txt").string();
    output.qtable->save_file(r.qtable_path);
  }
  return r;
}

CompareResult cmd_compare(const SuiteConfig& config) {
  check_tracker(config.eval.tracker);
  CompareOptions options = config.options;
  if (config.qtable_path) options.sarsa_initial = QTable::load_file(*config.qtable_path);

  CompareResult r;
  r.table = compare(config.scenarios, config.samplers, options, config.eval);
  const auto hash = output_hash(to_json(config));

  ensure_dir(config.out_dir);
  r.report_path = (fs::path(config.out_dir) / "comparison.jsonl").string();
  r.summary_path = (fs::path(config.out_dir) / "summary.txt").string();
  {
    auto out = open_out(r.report_path);
    write_comparison(out, r.table, hash);
  }
  {
    auto out = open_out(r.summary_path);
    write_summary(out, r.table, hash);
  }
  return r;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"blinktrack: sparse-frame tracking, adaptive sampling and collision risk"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> sampler;
  std::optional<double> warmup_s;
  std::optional<int> workers;

  auto* gen = app.add_subcommand("generate", "Simulate a scenario into trace and truth files");
  auto* run = app.add_subcommand("run", "Run one sampler over a trace (or a scenario) and write a report");
  auto* cmp = app.add_subcommand("compare", "Run samplers over a scenario suite and write a comparison");
  for (auto* sub : {gen, run, cmp}) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "Seed override (generate: scenario seed; run: run seed; compare: single seed)");
    sub->add_option("--out", out_dir, "Output directory (default: config 'out', else ./out)");
  }
  for (auto* sub : {run, cmp}) {
    sub->add_option("--sampler", sampler,
                    "Sampler override: every_frame, interval, random, confidence or sarsa "
                    "(compare: comma-separated list)");
    sub->add_option("--warmup-s", warmup_s, "Warm-up seconds before scoring (default 60)");
  }
  cmp->add_option("--workers", workers, "Parallel scenario runs (default 1)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto json = read_json_file(config_path);
    const auto base_dir = base_dir_of(config_path);
    if (gen->parsed()) {
      auto sc = scenario_from_json(json);
      if (seed) sc.seed = *seed;
      const auto r = cmd_generate(sc, out_dir.value_or("out"));
      out << r.trace_path << '\n' << r.truth_path << '\n';
    } else if (run->parsed()) {
      auto cfg = run_config_from_json(json, base_dir);
      if (seed) cfg.seed = *seed;
      if (out_dir) cfg.out_dir = *out_dir;
      if (sampler) cfg.sampler.kind = sampler_kind_from_string(*sampler);
      if (warmup_s) cfg.eval.warmup_s = *warmup_s;
      const auto r = cmd_run(cfg);
      out << r.report_path << '\n' << r.events_path << '\n';
      if (!r.qtable_path.empty()) out << r.qtable_path << '\n';
    } else {
      auto cfg = suite_config_from_json(json, base_dir);
      if (seed) cfg.options.seeds = {*seed};
      if (out_dir) cfg.out_dir = *out_dir;
      if (sampler) {
        cfg.samplers.clear();
        std::stringstream names(*sampler);
        std::string name;
        while (std::getline(names, name, ',')) {
          SamplerSpec spec;
          spec.kind = sampler_kind_from_string(name);
          cfg.samplers.push_back(spec);
        }
      }
      if (warmup_s) cfg.eval.warmup_s = *warmup_s;
      if (workers) cfg.options.workers = *workers;
      const auto r = cmd_compare(cfg);
      out << r.report_path << '\n' << r.summary_path << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const VersionMismatch& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace blinktrack
