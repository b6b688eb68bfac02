#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pt {

enum class SamplingMethod { kFixedTime, kFixedDistance, kLogTime, kLogDistance };
enum class GoalMode { kNoGoal, kAbsolute, kRelative, kProjAbsolute, kProjRelative };

std::string_view to_string(SamplingMethod m);
std::string_view to_string(GoalMode m);
SamplingMethod parse_sampling_method(std::string_view s);
GoalMode parse_goal_mode(std::string_view s);

// Which trajectory features make up one planning token.
struct PlanFeatureSpec {
  std::vector<std::size_t> state_indices;
  bool include_actions = false;
  bool include_rtg = false;

  std::size_t feature_dim(std::size_t action_dim) const {
    return state_indices.size() + (include_actions ? action_dim : 0) +
           (include_rtg ? 1 : 0);
  }
  // Throws ConfigError unless indices are non-empty, strictly increasing and
  // below state_dim.
  void validate(std::size_t state_dim) const;
};

// Architecture, plan, goal and inference settings of one model.
struct PTConfig {
  std::size_t n_layers = 3;
  std::size_t n_heads = 2;
  std::size_t d_model = 128;
  double dropout_attn = 0.15;
  double dropout_resid = 0.15;
  double dropout_embd = 0.1;

  std::size_t context_len = 10;      // K: (r, s, a) timesteps per window
  std::size_t n_plan_tokens = 10;    // n; 0 disables planning
  std::size_t replan_interval = 10;  // rho
  bool use_timestep_embedding = false;
  std::size_t max_timesteps = 1024;

  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> goal_indices;
  GoalMode goal_mode = GoalMode::kProjAbsolute;

  PlanFeatureSpec plan;
  SamplingMethod sampling = SamplingMethod::kFixedDistance;
  bool relative_plans = true;

  double alpha = 0.5;  // action loss weight
  double beta = 0.5;   // plan loss weight
  double target_return = 1.0;
  double action_noise_scale = 0.0;
  double max_trajectory_ratio = 0.5;

  // Planning is active only with at least one token and a non-zero plan loss
  // weight; otherwise the model is a goal-conditioned decision transformer.
  bool planning_enabled() const { return n_plan_tokens > 0 && beta > 0.0; }
  std::size_t plan_tokens() const { return planning_enabled() ? n_plan_tokens : 0; }
  std::size_t plan_feature_dim() const { return plan.feature_dim(action_dim); }
  std::size_t goal_token_dim() const;
  std::size_t goal_tokens() const { return goal_mode == GoalMode::kNoGoal ? 0 : 1; }
  // goal tokens + n + 3K.
  std::size_t max_sequence_len() const {
    return goal_tokens() + plan_tokens() + 3 * context_len;
  }

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

}  // namespace pt
