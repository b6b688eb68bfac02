#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pt/data.hpp"
#include "pt/envs.hpp"
#include "pt/model.hpp"
#include "pt/plan.hpp"
#include "pt/run_config.hpp"

namespace pt {

// A trained policy together with what inference needs to use it.
struct Model {
  std::string env_name;
  PTConfig cfg;
  DatasetStats stats;
  ModelParams params;
};

// Checkpoint metadata holds the env name, model config and dataset stats.
void save_model(const std::string& path, const Model& model,
                const std::string& run_config_json = "{}");
Model load_model(const std::string& path);

struct TrainRecord {
  std::size_t step = 0;  // 1-based
  double total = 0;
  double action = 0;
  double plan = 0;
};

struct TrainReport {
  std::uint64_t seed = 0;
  std::vector<TrainRecord> records;
  std::vector<std::string> checkpoints;
  double wall_seconds = 0;

  // Header "step,total,action,plan"; values printed with 17 significant digits.
  void write_csv(const std::string& path) const;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  std::size_t updates = 0;  // 0: run.gradient_update_steps
  // Empty: no checkpoints. Otherwise one every 10% of the updates, named
  // step_<n>.ckpt, and the last one also written as final.ckpt.
  std::string checkpoint_dir = {};
  bool verbose = false;
};

struct TrainResult {
  Model model;
  TrainReport report;
};

// Samples a batch, runs the combined loss, backpropagates and takes one Adam
// step per update. Batch and dropout seeds derive from (seed, step), so a run
// is reproducible. Throws NumericalError naming the step and batch seed on a
// non-finite loss.
TrainResult train(const Dataset& dataset, const RunConfig& run, const TrainOptions& options);

// Seed of the batch drawn at `step` of a run started with `seed`.
std::uint64_t batch_seed(std::uint64_t seed, std::size_t step);

// Autoregressive plan generation for one normalised start state: slot i is
// the planning-head output at s_0 (i = 0) or at slot i-1, with later slots
// sent as zeros. Returned in the model's plan space (relative when
// cfg.relative_plans).
Plan generate_plan(const Model& model, std::span<const Real> state, Real rtg,
                   std::span<const Real> goal, std::size_t timestep = 0);

// Same for a batch of starts; rows [B][n][plan_dim].
std::vector<std::vector<std::vector<Real>>> generate_plans(
    const Model& model, std::span<const std::vector<Real>> states, std::span<const Real> rtgs,
    std::span<const std::vector<Real>> goals, std::size_t timestep);

struct PlanEvent {
  std::size_t step = 0;
  std::vector<double> anchor;               // raw state at the replan
  std::vector<std::vector<double>> points;  // n rows, absolute raw units
};

struct AttentionSnapshot {
  std::size_t step = 0;
  std::vector<Modality> layout;
  AttentionCapture capture;  // batch 1
};

struct RolloutRecord {
  std::string env_name;
  std::uint64_t seed = 0;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> states;  // [steps + 1, state_dim], raw
  std::vector<double> actions; // [steps, action_dim]
  std::vector<double> rewards;
  std::vector<PlanEvent> plans;
  std::vector<AttentionSnapshot> attention;
  bool success = false;
  double episode_return = 0;
  double score = 0;
  // Plan state columns, for drawing.
  std::vector<std::size_t> plan_state_indices;

  std::size_t steps() const { return rewards.size(); }
  std::string to_json() const;
  static RolloutRecord from_json(const std::string& text);
};

struct RolloutOptions {
  std::size_t max_steps = 0;           // 0: the environment horizon
  std::optional<double> target_return = {}; // raw; unset: model cfg.target_return
  std::optional<double> action_noise = {};  // unset: model cfg.action_noise_scale
  bool capture_attention = false;      // one snapshot at step rho - 1
};

// Runs one episode per seed in lockstep (batched forward passes). Each
// episode resets its own clone of `env` with its seed and draws action noise
// from its own generator. Replans at every step that is a multiple of rho and
// restarts the (r, s, a) window there.
std::vector<RolloutRecord> rollout_batch(const Model& model, const Env& env,
                                         std::span<const std::uint64_t> seeds,
                                         const RolloutOptions& options = {});
RolloutRecord rollout(const Model& model, const Env& env, std::uint64_t seed,
                      const RolloutOptions& options = {});

struct EvalSummary {
  std::string env_name;
  std::vector<std::uint64_t> seeds;  // training seeds
  std::vector<double> per_seed;      // mean score over the rollouts
  double mean = 0;
  double std = 0;  // population std across seeds

  std::string to_json() const;
};

// Mean and population standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

// Rollout seeds 1000*k + i for training seed index k and rollout i.
EvalSummary evaluate(std::span<const Model> models, std::span<const std::uint64_t> train_seeds,
                     const Env& env, std::size_t n_rollouts, const RolloutOptions& options = {});

enum class AblationAxis { kSampling, kRelative, kGoal, kPlanActions };
std::string_view to_string(AblationAxis axis);
AblationAxis parse_ablation_axis(std::string_view s);

struct AblationVariant {
  std::string axis;   // "default" for the empty-axes run
  std::string value;
  RunConfig run;
};

// One variant per value of each axis, the others held at `base`.
std::vector<AblationVariant> ablation_variants(const RunConfig& base,
                                               std::span<const AblationAxis> axes);

struct AblationRow {
  AblationVariant variant;
  EvalSummary summary;
};

struct AblationBudget {
  std::size_t updates = 0;  // 0: each run's gradient_update_steps
  std::size_t rollouts = 0; // 0: each run's eval_rollouts
};

std::vector<AblationRow> run_ablation(const Dataset& dataset, const RunConfig& base,
                                      std::span<const AblationAxis> axes,
                                      const AblationBudget& budget, bool verbose = false);

std::string ablation_markdown(std::span<const AblationRow> rows);
std::string ablation_csv(std::span<const AblationRow> rows);

// gen-data: the scripted dataset for run.env.
Dataset generate_dataset(const RunConfig& run);

}  // namespace pt
