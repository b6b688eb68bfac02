#pragma once

// Whole-model finite-difference check: the combined loss of an eval-mode
// forward pass, differentiated against every parameter entry (or a random
// subset of large tensors). The error is measured on the concatenated
// gradient vector, since individual tensors such as the key bias have an
// exactly zero true gradient.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pt/model.hpp"
#include "pt/plan.hpp"
#include "support/fixtures.hpp"

namespace pt::testing {

inline PTConfig tiny_model_config() {
  PTConfig cfg = small_config(3, 2);
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_model = 8;
  cfg.context_len = 3;
  cfg.replan_interval = 3;
  cfg.n_plan_tokens = 2;
  cfg.use_timestep_embedding = true;
  cfg.max_timesteps = 64;
  cfg.dropout_attn = cfg.dropout_resid = cfg.dropout_embd = 0.0;
  return cfg;
}

// Random batch of training sequences for `cfg`.
inline std::vector<TokenSequence> random_batch(const PTConfig& cfg, std::size_t size, Rng& rng,
                                               std::size_t traj_len = 12) {
  std::vector<TokenSequence> batch;
  for (std::size_t b = 0; b < size; ++b) {
    auto traj = random_trajectory(rng, traj_len, cfg.state_dim, cfg.action_dim);
    for (auto& a : traj.actions.values()) a = std::tanh(a);
    const std::size_t t0 =
        std::uniform_int_distribution<std::size_t>(0, traj_len - 1)(rng);
    Plan plan;
    if (cfg.plan_tokens() > 0) {
      auto idx = sample_plan_indices(traj, t0, cfg.plan_tokens(), cfg.sampling, cfg.plan);
      plan = make_relative(extract_plan(traj, idx, cfg.plan, traj.rtg), traj.state(t0), cfg.plan);
    }
    std::vector<Real> goal;
    for (std::size_t i : cfg.goal_indices) goal.push_back(traj.state(traj_len - 1)[i]);
    batch.push_back(build_training_sequence(traj, t0, plan, goal, cfg));
  }
  return batch;
}

inline void randomize(ModelParams& params, Rng& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& p : params.all()) {
    for (auto& v : p.value.values()) v = static_cast<Real>(dist(rng));
  }
  for (auto& p : params.all()) {
    if (p.name.find("gain") != std::string::npos) {
      for (auto& v : p.value.values()) v += Real(1);
    }
  }
}

inline double model_loss(const std::vector<TokenSequence>& batch, ModelParams& params,
                         const PTConfig& cfg) {
  Graph g(false);
  const ModelParams& cp = params;
  auto out = forward(g, batch, cp, cfg);
  return combined_loss(out, batch, cfg).total.item();
}

// Relative error ||a - n|| / max(||a||, ||n||) over all sampled entries.
inline double model_grad_check(const PTConfig& cfg, std::uint64_t seed, double step,
                               std::size_t max_entries_per_tensor = 24) {
  Rng rng(seed);
  ModelParams params = init_params(cfg, rng);
  randomize(params, rng);
  auto batch = random_batch(cfg, 3, rng);

  {
    Graph g;
    auto out = forward(g, batch, params, cfg, Mode::kEval, nullptr);
    g.backward(combined_loss(out, batch, cfg).total);
  }
  std::vector<double> analytic, numeric;
  for (auto& p : params.all()) {
    std::vector<std::size_t> entries(p.value.size());
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i] = i;
    std::shuffle(entries.begin(), entries.end(), rng);
    if (entries.size() > max_entries_per_tensor) entries.resize(max_entries_per_tensor);
    for (std::size_t i : entries) {
      const Real orig = p.value[i];
      p.value[i] = static_cast<Real>(orig + step);
      const Real hi = p.value[i];
      const double up = model_loss(batch, params, cfg);
      p.value[i] = static_cast<Real>(orig - step);
      const Real lo = p.value[i];
      const double down = model_loss(batch, params, cfg);
      p.value[i] = orig;
      numeric.push_back((up - down) / (static_cast<double>(hi) - lo));
      analytic.push_back(p.grad.empty() ? 0.0 : static_cast<double>(p.grad[i]));
    }
  }
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
}

}  // namespace pt::testing
