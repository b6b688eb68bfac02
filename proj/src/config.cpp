#include "pt/config.hpp"

#include "pt/errors.hpp"

namespace pt {

std::string_view to_string(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::kFixedTime:
      return "fixed_time";
    case SamplingMethod::kFixedDistance:
      return "fixed_distance";
    case SamplingMethod::kLogTime:
      return "log_time";
    case SamplingMethod::kLogDistance:
      return "log_distance";
  }
  return "?";
}

std::string_view to_string(GoalMode m) {
  switch (m) {
    case GoalMode::kNoGoal:
      return "none";
    case GoalMode::kAbsolute:
      return "absolute";
    case GoalMode::kRelative:
      return "relative";
    case GoalMode::kProjAbsolute:
      return "proj_absolute";
    case GoalMode::kProjRelative:
      return "proj_relative";
  }
  return "?";
}

SamplingMethod parse_sampling_method(std::string_view s) {
  for (auto m : {SamplingMethod::kFixedTime, SamplingMethod::kFixedDistance,
                 SamplingMethod::kLogTime, SamplingMethod::kLogDistance}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("plan_sampling", "unknown plan sampling method '" + std::string(s) +
                                         "' (fixed_time|fixed_distance|log_time|log_distance)");
}

GoalMode parse_goal_mode(std::string_view s) {
  for (auto m : {GoalMode::kNoGoal, GoalMode::kAbsolute, GoalMode::kRelative,
                 GoalMode::kProjAbsolute, GoalMode::kProjRelative}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("goal_representation",
                    "unknown goal representation '" + std::string(s) +
                        "' (none|absolute|relative|proj_absolute|proj_relative)");
}

void PlanFeatureSpec::validate(std::size_t state_dim) const {
  if (state_indices.empty()) {
    throw ConfigError("plan_state_indices", "plan_state_indices must not be empty");
  }
  for (std::size_t i = 0; i < state_indices.size(); ++i) {
    if (state_indices[i] >= state_dim) {
      throw ConfigError("plan_state_indices",
                        "plan_state_indices entry " + std::to_string(state_indices[i]) +
                            " is outside state_dim " + std::to_string(state_dim));
    }
    if (i > 0 && state_indices[i] <= state_indices[i - 1]) {
      throw ConfigError("plan_state_indices", "plan_state_indices must be strictly increasing");
    }
  }
}

std::size_t PTConfig::goal_token_dim() const {
  switch (goal_mode) {
    case GoalMode::kNoGoal:
      return 0;
    case GoalMode::kAbsolute:
    case GoalMode::kRelative:
      return goal_indices.size();
    case GoalMode::kProjAbsolute:
    case GoalMode::kProjRelative:
      return 2 * goal_indices.size();
  }
  return 0;
}

void PTConfig::validate() const {
  auto require = [](bool ok, const char* key, const std::string& msg) {
    if (!ok) throw ConfigError(key, std::string(key) + ": " + msg);
  };
  require(n_layers >= 1, "transformer_layers", "must be >= 1");
  require(n_heads >= 1, "transformer_heads", "must be >= 1");
  require(d_model >= 1 && d_model % n_heads == 0, "embedding_dim",
          "must be a positive multiple of transformer_heads");
  for (auto [v, key] : {std::pair{dropout_attn, "dropout_attn"},
                        std::pair{dropout_resid, "dropout_resid"},
                        std::pair{dropout_embd, "dropout_embd"}}) {
    require(v >= 0.0 && v < 1.0, key, "must be in [0, 1)");
  }
  require(context_len >= 1, "sequence_length", "must be >= 1");
  require(replan_interval >= 1, "replanning_interval", "must be >= 1");
  require(replan_interval <= context_len, "replanning_interval",
          "must not exceed sequence_length so no history is lost between replans");
  require(max_timesteps >= 1, "max_timesteps", "must be >= 1");
  require(state_dim >= 1, "state_dim", "must be >= 1");
  require(action_dim >= 1, "action_dim", "must be >= 1");
  require(alpha >= 0.0, "alpha", "must be >= 0");
  require(beta >= 0.0, "beta", "must be >= 0");
  require(alpha + beta > 0.0, "beta", "alpha + beta must be positive");
  require(action_noise_scale >= 0.0 && action_noise_scale <= 1.0, "action_noise_scale",
          "must be in [0, 1]");
  require(max_trajectory_ratio >= 0.0 && max_trajectory_ratio <= 1.0, "max_trajectory_ratio",
          "must be in [0, 1]");
  require((goal_mode == GoalMode::kNoGoal) == goal_indices.empty(), "goal_indices",
          "must be empty exactly when goal_representation is 'none'");
  for (std::size_t g : goal_indices) {
    require(g < state_dim, "goal_indices", "entries must be below state_dim");
  }
  plan.validate(state_dim);
}

}  // namespace pt
