#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pt/config.hpp"
#include "pt/tensor.hpp"

namespace pt {

// One episode. `rtg` is derived from `rewards` and kept in sync by
// make_trajectory / load_dataset.
struct Trajectory {
  Tensor states;   // [T, state_dim]
  Tensor actions;  // [T, action_dim]
  std::vector<Real> rewards;
  std::vector<Real> rtg;
  bool terminal = false;

  std::size_t length() const { return rewards.size(); }
  std::span<const Real> state(std::size_t t) const {
    return {states.data() + t * states.cols(), states.cols()};
  }
  std::span<const Real> action(std::size_t t) const {
    return {actions.data() + t * actions.cols(), actions.cols()};
  }
};

// Returns-to-go: rtg[t] = rewards[t] + rtg[t+1], rtg[T-1] = rewards[T-1].
std::vector<Real> compute_rtg(std::span<const Real> rewards);

// Builds a trajectory from flat arrays and fills in its returns-to-go.
Trajectory make_trajectory(std::size_t state_dim, std::size_t action_dim,
                           std::vector<Real> states, std::vector<Real> actions,
                           std::vector<Real> rewards, bool terminal);

struct Dataset {
  std::string env_name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double return_scale = 1.0;
  std::vector<Trajectory> trajectories;

  std::size_t total_steps() const;
};

struct DatasetStats {
  std::vector<double> state_mean;
  std::vector<double> state_std;  // floored at 1e-6
  double return_scale = 1.0;
  double max_return = 0.0;
  double min_return = 0.0;

  std::vector<Real> normalize_state(std::span<const Real> s) const;
  std::vector<Real> denormalize_state(std::span<const Real> s) const;
  // Goal vectors use the state statistics restricted to `goal_indices`.
  std::vector<Real> normalize_goal(std::span<const Real> g,
                                   std::span<const std::size_t> goal_indices) const;
};

inline constexpr double kMinStateStd = 1e-6;

// Throws SchemaError on an empty dataset (statistics are undefined).
DatasetStats compute_stats(const Dataset& dataset);

// JSON Lines. Line 1 is a header object
//   {"format":"pt-trajectories","version":1,"env_name":...,"state_dim":...,
//    "action_dim":...,"return_scale":...}
// followed by one object per trajectory:
//   {"states":[T*state_dim floats],"actions":[T*action_dim floats],
//    "rewards":[T floats],"terminal":bool}
void save_dataset(const std::string& path, const Dataset& dataset);
// An empty file yields an empty dataset. Malformed lines raise SchemaError
// with the 1-based line number; returns-to-go are recomputed and checked.
Dataset load_dataset(const std::string& path);

// Normalised copy used for training: states z-scored, rewards and returns-to-go
// divided by return_scale.
struct TrainingData {
  DatasetStats stats;
  std::vector<Trajectory> trajectories;
  std::vector<std::size_t> cumulative_steps;  // prefix sums of lengths
};

TrainingData prepare_training_data(const Dataset& dataset);

struct BatchSpec {
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
};

struct TokenSequence;

// Trajectory chosen with probability proportional to its length.
std::size_t sample_trajectory_index(const TrainingData& data, Rng& rng);

// Window start: uniform over [0, floor(ratio * (T - 1))].
std::size_t sample_window_start(std::size_t length, double max_trajectory_ratio, Rng& rng);

// Deterministic for a fixed seed. Each window gets a freshly sampled plan
// anchored at its first state and the trajectory's final state as goal.
std::vector<TokenSequence> sample_batch(const TrainingData& data, const PTConfig& cfg,
                                        const BatchSpec& spec);

}  // namespace pt
