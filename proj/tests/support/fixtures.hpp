#pragma once

#include <random>
#include <vector>

#include "pt/config.hpp"
#include "pt/data.hpp"

namespace pt::testing {

// Random-walk trajectory with occasional stationary stretches (repeated
// states exercise the distance samplers' tie handling).
inline Trajectory random_trajectory(Rng& rng, std::size_t length, std::size_t state_dim,
                                    std::size_t action_dim) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution stay(0.2);
  std::vector<Real> states(length * state_dim), actions(length * action_dim), rewards(length);
  std::vector<double> s(state_dim);
  for (auto& v : s) v = noise(rng);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0 && !stay(rng)) {
      for (auto& v : s) v += noise(rng);
    }
    for (std::size_t i = 0; i < state_dim; ++i) states[t * state_dim + i] = static_cast<Real>(s[i]);
    for (std::size_t i = 0; i < action_dim; ++i) {
      actions[t * action_dim + i] = static_cast<Real>(noise(rng));
    }
    rewards[t] = static_cast<Real>(stay(rng) ? 1.0 : 0.0);
  }
  return make_trajectory(state_dim, action_dim, std::move(states), std::move(actions),
                         std::move(rewards), false);
}

// Constant-velocity straight line through R^state_dim.
inline Trajectory line_trajectory(std::size_t length, std::size_t state_dim) {
  std::vector<Real> states(length * state_dim), actions(length, Real(1)), rewards(length, 0);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < state_dim; ++i) {
      states[t * state_dim + i] = static_cast<Real>(0.5 * t * (i + 1));
    }
  }
  return make_trajectory(state_dim, 1, std::move(states), std::move(actions),
                         std::move(rewards), false);
}

inline PTConfig small_config(std::size_t state_dim, std::size_t action_dim) {
  PTConfig cfg;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_model = 16;
  cfg.context_len = 4;
  cfg.n_plan_tokens = 3;
  cfg.replan_interval = 4;
  cfg.state_dim = state_dim;
  cfg.action_dim = action_dim;
  cfg.goal_indices = {0, 1};
  cfg.plan.state_indices = {0, 1};
  return cfg;
}

}  // namespace pt::testing
