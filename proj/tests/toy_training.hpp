#pragma once

// Drives the library's SARSA primitives on the three-state toy MDP from
// oracles.hpp. States are expressed as sampler states so a trained table
// can be handed to a SarsaAgent afterwards.

#include "blinktrack/sampler.hpp"
#include "oracles.hpp"

#include <cstdint>
#include <random>

namespace toy {

using blinktrack::Action;
using blinktrack::SamplerState;

// 0: nothing tracked, just blinked
// 1: lowest-confidence track near (< 5 m) with low confidence
// 2: lowest-confidence track far (> 20 m) with high confidence
inline SamplerState state_of(int s) {
  switch (s) {
    case 0: return {4, 3, 0};
    case 1: return {1, 0, 0};
    default: return {3, 3, 0};
  }
}

// Skip = 0, blink = 1. With nothing tracked a blink only costs; a near,
// poorly tracked object pays off when observed and is lost when ignored; a
// well-tracked far object drifts closer if left alone.
// A small discount keeps the 1/N step size from lagging far behind its
// bootstrapped targets.
inline oracle::ToyMdp mdp() {
  oracle::ToyMdp m;
  m.beta = 0.2;
  m.next = {{{0, 2}, {0, 2}, {1, 2}}};
  m.reward = {{{0.0, -0.3}, {-0.5, 0.5}, {0.0, -0.3}}};
  return m;
}

inline blinktrack::SamplerConfig config() {
  blinktrack::SamplerConfig c;
  c.epsilon0 = 1.0;
  c.eta = 0.01;
  c.beta = 0.2;
  return c;
}

inline blinktrack::QTable train(std::uint64_t seed, std::uint64_t steps) {
  const auto m = mdp();
  const auto c = config();
  blinktrack::QTable q;
  std::mt19937_64 rng(seed);
  auto act = [&](int s) {
    const double eps = blinktrack::exploration_rate(c.epsilon0, c.eta, q.tick());
    q.advance_tick();
    return blinktrack::choose_action(q, state_of(s), eps, rng);
  };
  int s = 0;
  Action a = act(s);
  for (std::uint64_t i = 0; i < steps; ++i) {
    const int ai = static_cast<int>(a);
    const int s2 = m.next[s][ai];
    const double r = m.reward[s][ai];
    const Action a2 = act(s2);
    blinktrack::sarsa_update(q, state_of(s), a, r, state_of(s2), a2, m.beta);
    s = s2;
    a = a2;
  }
  return q;
}

inline double max_error(const blinktrack::QTable& q) {
  const auto star = mdp().q_star();
  double err = 0.0;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) err = std::max(err, std::abs(q.value(state_of(s), static_cast<Action>(a)) - star[s][a]));
  }
  return err;
}

inline bool greedy_matches(const blinktrack::QTable& q) {
  const auto star = mdp().q_star();
  for (int s = 0; s < 3; ++s) {
    const Action want = star[s][0] > star[s][1] ? Action::skip : Action::blink;
    if (blinktrack::greedy_action(q, state_of(s)) != want) return false;
  }
  return true;
}

}  // namespace toy
