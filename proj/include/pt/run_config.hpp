#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pt/config.hpp"
#include "pt/data.hpp"
#include "pt/envs.hpp"

namespace pt {

// Everything one CLI run needs. JSON keys match the field names.
struct RunConfig {
  // architecture
  std::size_t transformer_layers = 3;
  std::size_t transformer_heads = 2;
  double dropout_attn = 0.15;
  double dropout_resid = 0.15;
  double dropout_embd = 0.1;
  std::size_t embedding_dim = 128;
  // optimisation
  double learning_rate = 2e-4;
  std::size_t gradient_update_steps = 100000;
  std::size_t batch_size = 128;
  double grad_clip = 0.25;
  // sequence and plan
  std::size_t sequence_length = 10;
  bool timestep_embedding = false;
  std::size_t max_timesteps = 1024;
  double action_noise_scale = 0.0;
  double max_trajectory_ratio = 0.5;
  SamplingMethod plan_sampling = SamplingMethod::kFixedDistance;
  bool plan_actions = false;
  bool plan_rtg = false;
  std::vector<std::size_t> plan_state_indices;  // empty: every state feature
  std::size_t num_planning_tokens = 10;
  std::size_t replanning_interval = 10;
  bool relative_plans = true;
  GoalMode goal_representation = GoalMode::kProjAbsolute;
  std::vector<std::size_t> goal_indices;  // empty: the environment's
  double alpha = 0.5;
  double beta = 0.5;
  std::optional<double> target_return;  // raw units; unset: environment default
  // workflow
  std::string env = "maze-umaze";
  std::string dataset = "data/maze-umaze.jsonl";
  std::size_t dataset_trajectories = 2000;
  std::uint64_t dataset_seed = 0;
  std::size_t maze_segments = 1;  // see MazeDataOptions::max_segments
  std::string output_dir = "runs/maze-umaze";
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::size_t eval_rollouts = 100;
};

// Defaults for one environment: the hyperparameter table's AntMaze column
// for mazes, its MuJoCo column for the chain.
RunConfig default_run_config(const std::string& env);

std::vector<std::string> run_config_keys();

// Keys present in `json_text` override `base`. Unknown keys and type errors
// raise ConfigError naming the key.
RunConfig parse_run_config(const std::string& json_text, const RunConfig& base);
// Defaults come from the file's "env" entry (maze-umaze when absent).
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string to_json(const RunConfig& cfg);

// "key=value"; value is parsed as JSON, falling back to a plain string.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Resolves environment-dependent defaults (goal indices, plan features,
// target return) and validates the result.
PTConfig make_model_config(const RunConfig& run, const EnvSpec& env, const DatasetStats& stats);

// Environment default target return in raw units: 1.0 for success-scored
// environments, 1.1 x the dataset's best return otherwise.
double default_target_return(const EnvSpec& env, const DatasetStats& stats);

std::string to_json(const PTConfig& cfg);
PTConfig model_config_from_json(const std::string& json_text);
std::string to_json(const DatasetStats& stats);
DatasetStats stats_from_json(const std::string& json_text);

}  // namespace pt
