#include "blinktrack/sampler.hpp"

#include "blinktrack/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace blinktrack {

namespace {

constexpr int kQTableVersion = 1;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view token, std::size_t line) {
  T value{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(line, "bad number '" + std::string(token) + "'");
  }
  return value;
}

void check_edges(const std::vector<double>& edges, const char* field) {
  if (edges.empty()) throw ConfigError(std::string(field) + ": at least one edge required");
  if (!std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ConfigError(std::string(field) + ": edges must be strictly increasing");
  }
}

}  // namespace

int bin_index(std::span<const double> edges, double value) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

void SamplerConfig::validate() const {
  if (!(sample_cost <= 0.0)) throw ConfigError("sampler.sample_cost: must be <= 0");
  if (!(epsilon0 > 0.0 && epsilon0 <= 1.0)) throw ConfigError("sampler.epsilon0: must be in (0,1]");
  if (!(eta > 0.0)) throw ConfigError("sampler.eta: must be > 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("sampler.beta: must be in [0,1)");
  if (!(dt_max > 0.0)) throw ConfigError("sampler.dt_max: must be > 0");
  check_edges(bins.confidence, "sampler.bins.confidence");
  check_edges(bins.distance, "sampler.bins.distance");
  check_edges(bins.elapsed, "sampler.bins.elapsed");
}

double QTable::value(const SamplerState& s, Action a) const {
  const auto it = entries_.find({s, a});
  return it == entries_.end() ? 0.0 : it->second.value;
}

std::uint64_t QTable::visits(const SamplerState& s, Action a) const {
  const auto it = entries_.find({s, a});
  return it == entries_.end() ? 0 : it->second.visits;
}

void QTable::save(std::ostream& out) const {
  out << "blinktrack-qtable " << kQTableVersion << "\n";
  out << "tick " << tick_ << "\n";
  out << "entries " << entries_.size() << "\n";
  for (const auto& [key, e] : entries_) {
    const auto& [s, a] = key;
    out << s.conf_bin << ' ' << s.dist_bin << ' ' << s.dt_bin << ' ' << static_cast<int>(a) << ' '
        << format_double(e.value) << ' ' << e.visits << "\n";
  }
}

QTable QTable::load(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_fields = [&](std::size_t expected) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "unexpected end of file");
    ++lineno;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.size() != expected) {
      throw ParseError(lineno, "expected " + std::to_string(expected) + " fields");
    }
    return fields;
  };

  auto header = next_fields(2);
  if (header[0] != "blinktrack-qtable") throw ParseError(lineno, "not a q-table file");
  if (parse_number<int>(header[1], lineno) != kQTableVersion) {
    throw VersionMismatch("q-table version " + header[1] + " not supported");
  }
  QTable table;
  auto tick = next_fields(2);
  if (tick[0] != "tick") throw ParseError(lineno, "expected 'tick'");
  table.tick_ = parse_number<std::uint64_t>(tick[1], lineno);
  auto count = next_fields(2);
  if (count[0] != "entries") throw ParseError(lineno, "expected 'entries'");
  const auto n = parse_number<std::size_t>(count[1], lineno);
  for (std::size_t i = 0; i < n; ++i) {
    auto f = next_fields(6);
    SamplerState s{parse_number<int>(f[0], lineno), parse_number<int>(f[1], lineno),
                   parse_number<int>(f[2], lineno)};
    const int a = parse_number<int>(f[3], lineno);
    if (a != 0 && a != 1) throw ParseError(lineno, "action must be 0 or 1");
    Entry e{parse_number<double>(f[4], lineno), parse_number<std::uint64_t>(f[5], lineno)};
    table.entries_[{s, static_cast<Action>(a)}] = e;
  }
  return table;
}

void QTable::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  save(out);
}

QTable QTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return load(in);
}

double exploration_rate(double epsilon0, double eta, std::uint64_t t) {
  return epsilon0 / (1.0 + eta * static_cast<double>(t));
}

std::optional<double> min_confidence(std::span<const TrackSnapshot> tracks) {
  if (tracks.empty()) return std::nullopt;
  double c = tracks.front().confidence;
  for (const auto& t : tracks) c = std::min(c, t.confidence);
  return c;
}

SamplerState observe_state(std::span<const TrackSnapshot> tracks, double now, double last_blink,
                           const BinEdges& bins) {
  if (now < last_blink) throw std::invalid_argument("observe_state: now precedes last blink");
  SamplerState s;
  s.dt_bin = bin_index(bins.elapsed, now - last_blink);
  if (tracks.empty()) {
    s.conf_bin = bins.no_tracks_bin();
    s.dist_bin = bins.farthest_distance_bin();
    return s;
  }
  // First minimum wins so equal confidences resolve by track order.
  const auto lowest = std::min_element(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
    return a.confidence < b.confidence;
  });
  s.conf_bin = bin_index(bins.confidence, lowest->confidence);
  s.dist_bin = bin_index(bins.distance, lowest->range);
  return s;
}

Action greedy_action(const QTable& q, const SamplerState& s) {
  return q.value(s, Action::skip) > q.value(s, Action::blink) ? Action::skip : Action::blink;
}

Action choose_action(const QTable& q, const SamplerState& s, double epsilon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) return unit(rng) < 0.5 ? Action::skip : Action::blink;
  return greedy_action(q, s);
}

double reward(Action action, double delta_conf, double sample_cost) {
  return static_cast<double>(static_cast<int>(action)) * sample_cost + delta_conf;
}

void sarsa_update(QTable& q, const SamplerState& s, Action a, double r, const SamplerState& s_next,
                  Action a_next, double beta) {
  const double next = q.value(s_next, a_next);
  auto& e = q.entry(s, a);
  ++e.visits;
  const double alpha = 1.0 / static_cast<double>(e.visits);
  e.value += alpha * (r + beta * next - e.value);
}

SarsaAgent::SarsaAgent(SamplerConfig config, std::uint64_t seed, QTable table)
    : config_(std::move(config)), table_(std::move(table)), rng_(seed) {
  config_.validate();
}

double SarsaAgent::epsilon() const {
  return exploration_rate(config_.epsilon0, config_.eta, table_.tick());
}

std::pair<SamplerState, Action> SarsaAgent::tick(std::span<const TrackSnapshot> tracks, double now,
                                                 double last_blink) {
  const auto s = observe_state(tracks, now, last_blink, config_.bins);
  const auto a = config_.learning ? choose_action(table_, s, epsilon(), rng_) : greedy_action(table_, s);
  table_.advance_tick();
  return {s, a};
}

void SarsaAgent::learn(const SamplerState& s, Action a, double r, const SamplerState& s_next,
                       Action a_next) {
  sarsa_update(table_, s, a, r, s_next, a_next, config_.beta);
}

IntervalPolicy::IntervalPolicy(double period_s, double tick_rate) : ticks_per_blink_(period_s * tick_rate) {
  if (!(period_s > 0.0) || !(tick_rate > 0.0)) throw ConfigError("interval.period_s: must be > 0");
}

Action IntervalPolicy::decide(const TickContext& ctx) {
  if (ctx.index == 0) return Action::blink;
  const auto k = static_cast<double>(ctx.index);
  return std::floor(k / ticks_per_blink_) != std::floor((k - 1.0) / ticks_per_blink_) ? Action::blink
                                                                                       : Action::skip;
}

RandomPolicy::RandomPolicy(double probability, std::uint64_t seed) : probability_(probability), rng_(seed) {
  if (!(probability >= 0.0 && probability <= 1.0)) throw ConfigError("random.probability: must be in [0,1]");
}

Action RandomPolicy::decide(const TickContext&) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng_) < probability_ ? Action::blink : Action::skip;
}

ConfidenceThresholdPolicy::ConfidenceThresholdPolicy(double c_min, double dt_max)
    : c_min_(c_min), dt_max_(dt_max) {
  if (!(c_min >= 0.0)) throw ConfigError("confidence.c_min: must be >= 0");
  if (!(dt_max > 0.0)) throw ConfigError("confidence.dt_max: must be > 0");
}

Action ConfidenceThresholdPolicy::decide(const TickContext& ctx) {
  const auto c = min_confidence(ctx.tracks);
  if (c) return *c < c_min_ ? Action::blink : Action::skip;
  return ctx.now - ctx.last_blink >= dt_max_ ? Action::blink : Action::skip;
}

SarsaPolicy::SarsaPolicy(SamplerConfig config, std::uint64_t seed, QTable table)
    : agent_(std::move(config), seed, std::move(table)) {}

Action SarsaPolicy::decide(const TickContext& ctx) {
  const auto conf = min_confidence(ctx.tracks);
  auto [state, action] = agent_.tick(ctx.tracks, ctx.now, ctx.last_blink);
  if (ctx.now - ctx.last_blink >= agent_.config().dt_max) action = Action::blink;

  if (pending_ && agent_.config().learning) {
    const double delta = (pending_->conf && conf) ? *conf - *pending_->conf : 0.0;
    agent_.learn(pending_->state, pending_->action, reward(pending_->action, delta, agent_.config().sample_cost),
                 state, action);
  }
  pending_ = Pending{state, action, conf};
  return action;
}

}  // namespace blinktrack
