#pragma once

#include "blinktrack/tracker.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace blinktrack {

enum class Action : int { skip = 0, blink = 1 };

// Discretized MDP state: lowest track confidence, range of that track, and
// time since the last blink.
struct SamplerState {
  int conf_bin = 0;
  int dist_bin = 0;
  int dt_bin = 0;

  auto operator<=>(const SamplerState&) const = default;
};

// Right-closed binning: a value equal to an edge lands in the upper bin.
struct BinEdges {
  std::vector<double> confidence{0.02, 0.1, 0.5};
  std::vector<double> distance{5.0, 10.0, 20.0};
  std::vector<double> elapsed{0.2, 0.5, 1.0};

  int no_tracks_bin() const { return static_cast<int>(confidence.size()) + 1; }
  int farthest_distance_bin() const { return static_cast<int>(distance.size()); }
};

int bin_index(std::span<const double> edges, double value);

struct SamplerConfig {
  double sample_cost = -0.05;
  double epsilon0 = 1.0;
  double eta = 0.1;
  double beta = 0.9;
  BinEdges bins;
  double dt_max = 2.0;  // forced blink after this long without one
  bool learning = true;

  void validate() const;
};

class QTable {
 public:
  struct Entry {
    double value = 0.0;
    std::uint64_t visits = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };
  using Key = std::pair<SamplerState, Action>;

  double value(const SamplerState& s, Action a) const;
  std::uint64_t visits(const SamplerState& s, Action a) const;
  Entry& entry(const SamplerState& s, Action a) { return entries_[{s, a}]; }
  void set_value(const SamplerState& s, Action a, double value) { entries_[{s, a}].value = value; }

  std::uint64_t tick() const { return tick_; }
  void set_tick(std::uint64_t t) { tick_ = t; }
  void advance_tick() { ++tick_; }

  const std::map<Key, Entry>& entries() const { return entries_; }

  // Versioned text format, one sorted line per (state, action).
  void save(std::ostream& out) const;
  static QTable load(std::istream& in);
  void save_file(const std::string& path) const;
  static QTable load_file(const std::string& path);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::map<Key, Entry> entries_;
  std::uint64_t tick_ = 0;
};

// eps0 / (1 + eta t)
double exploration_rate(double epsilon0, double eta, std::uint64_t t);

std::optional<double> min_confidence(std::span<const TrackSnapshot> tracks);

SamplerState observe_state(std::span<const TrackSnapshot> tracks, double now, double last_blink,
                           const BinEdges& bins);

// argmax_a Q(s, a); ties go to blink.
Action greedy_action(const QTable& q, const SamplerState& s);

Action choose_action(const QTable& q, const SamplerState& s, double epsilon, std::mt19937_64& rng);

// A * C_s + delta_c
double reward(Action action, double delta_conf, double sample_cost);

// Visit count first, then Q += (r + beta Q(s', a') - Q) / N(s, a).
void sarsa_update(QTable& q, const SamplerState& s, Action a, double r, const SamplerState& s_next,
                  Action a_next, double beta);

class SarsaAgent {
 public:
  SarsaAgent(SamplerConfig config, std::uint64_t seed, QTable table = {});

  double epsilon() const;

  // Observe and act at the current decision tick; advances the table's
  // global step counter.
  std::pair<SamplerState, Action> tick(std::span<const TrackSnapshot> tracks, double now,
                                       double last_blink);

  void learn(const SamplerState& s, Action a, double r, const SamplerState& s_next, Action a_next);

  const QTable& table() const { return table_; }
  QTable& table() { return table_; }
  const SamplerConfig& config() const { return config_; }

 private:
  SamplerConfig config_;
  QTable table_;
  std::mt19937_64 rng_;
};

// Everything a blink policy may look at when deciding.
struct TickContext {
  std::uint64_t index = 0;  // tick number since the start of the run
  double now = 0.0;
  double last_blink = 0.0;
  std::span<const TrackSnapshot> tracks;
};

class BlinkPolicy {
 public:
  virtual ~BlinkPolicy() = default;
  virtual Action decide(const TickContext& ctx) = 0;
  virtual std::string name() const = 0;
};

class EveryFramePolicy final : public BlinkPolicy {
 public:
  Action decide(const TickContext&) override { return Action::blink; }
  std::string name() const override { return "every_frame"; }
};

// Blinks on the first tick and then once per `period_s`; the period need
// not be a whole number of ticks.
class IntervalPolicy final : public BlinkPolicy {
 public:
  IntervalPolicy(double period_s, double tick_rate);
  Action decide(const TickContext& ctx) override;
  std::string name() const override { return "interval"; }

 private:
  double ticks_per_blink_;
};

class RandomPolicy final : public BlinkPolicy {
 public:
  RandomPolicy(double probability, std::uint64_t seed);
  Action decide(const TickContext& ctx) override;
  std::string name() const override { return "random"; }

 private:
  double probability_;
  std::mt19937_64 rng_;
};

// Blinks while the lowest track confidence is below `c_min`; with nothing
// tracked it falls back to the `dt_max` discovery blink.
class ConfidenceThresholdPolicy final : public BlinkPolicy {
 public:
  ConfidenceThresholdPolicy(double c_min, double dt_max);
  Action decide(const TickContext& ctx) override;
  std::string name() const override { return "confidence"; }

 private:
  double c_min_;
  double dt_max_;
};

// Online SARSA: each decision closes the previous transition with reward
// A * C_s + (c_now - c_prev) measured on the minimum track confidence.
class SarsaPolicy final : public BlinkPolicy {
 public:
  SarsaPolicy(SamplerConfig config, std::uint64_t seed, QTable table = {});
  Action decide(const TickContext& ctx) override;
  std::string name() const override { return "sarsa"; }

  const QTable& table() const { return agent_.table(); }
  const SarsaAgent& agent() const { return agent_; }

 private:
  struct Pending {
    SamplerState state;
    Action action;
    std::optional<double> conf;
  };

  SarsaAgent agent_;
  std::optional<Pending> pending_;
};

}  // namespace blinktrack
