#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pt/data.hpp"

namespace pt {

enum class ScoreKind { kSuccess, kReturn };

struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> goal_indices;
  std::size_t horizon = 0;
  Real action_low = -1;
  Real action_high = 1;
  ScoreKind score = ScoreKind::kSuccess;
  double return_scale = 1.0;
  // Scripted-policy reference returns for ScoreKind::kReturn.
  double random_return = 0.0;
  double expert_return = 1.0;
};

struct StepResult {
  std::vector<Real> state;
  Real reward = 0;
  bool done = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual std::vector<Real> reset(std::uint64_t seed) = 0;
  // Actions outside the bounds are clipped. Throws ContractViolation once the
  // episode is done.
  virtual StepResult step(std::span<const Real> action) = 0;
  // Evaluation goal in goal space (spec().goal_indices); empty without one.
  virtual std::vector<Real> goal() const = 0;
  virtual bool success() const { return false; }
  virtual std::unique_ptr<Env> clone() const = 0;
};

// ASCII grid: '#' wall, '.' free, 'S' evaluation start, 'G' evaluation goal.
// Row 0 is the top of the file; world coordinates put cell (row, col) at
// x in [col, col+1), y in [rows-1-row, rows-row).
struct MazeLayout {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> wall;  // row-major
  std::array<std::size_t, 2> start{};  // (row, col)
  std::array<std::size_t, 2> goal{};

  bool is_wall(std::size_t row, std::size_t col) const { return wall[row * cols + col] != 0; }
  // False for points outside the grid or inside a wall cell.
  bool free_at(double x, double y) const;
  std::array<double, 2> center(std::size_t row, std::size_t col) const;
  std::vector<std::array<std::size_t, 2>> free_cells() const;
  // 4-connected shortest cell path from `from` to `to` inclusive; empty if
  // unreachable.
  std::vector<std::array<std::size_t, 2>> shortest_path(std::array<std::size_t, 2> from,
                                                        std::array<std::size_t, 2> to) const;
  std::string to_string() const;
};

// Throws SchemaError on ragged rows, unknown characters, a missing or repeated
// S/G, or an open border.
MazeLayout parse_maze_layout(const std::string& text, const std::string& name = "custom");
MazeLayout load_maze_layout(const std::string& path);
// "umaze", "medium", "large".
MazeLayout builtin_maze_layout(const std::string& size);

struct MazeParams {
  double dt = 0.1;
  double goal_radius = 0.5;
  double start_jitter = 0.1;  // uniform half-width around the start centre
  std::size_t horizon = 0;    // 0 selects the size default
};

// Point mass in a grid maze. State (x, y); action is a velocity (dx, dy) with
// |a|_inf <= 1, applied for dt with axis-separated collision handling.
class MazeWorld : public Env {
 public:
  MazeWorld(MazeLayout layout, MazeParams params = {});

  const EnvSpec& spec() const override { return spec_; }
  std::vector<Real> reset(std::uint64_t seed) override;
  StepResult step(std::span<const Real> action) override;
  std::vector<Real> goal() const override;
  bool success() const override { return success_; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<MazeWorld>(*this); }

  const MazeLayout& layout() const { return layout_; }
  const MazeParams& params() const { return params_; }
  // Places the agent at an arbitrary free point and starts a new episode.
  void set_position(double x, double y);
  std::array<double, 2> position() const { return {x_, y_}; }
  // One dynamics step from (x, y) without touching the episode state.
  std::array<double, 2> move(std::array<double, 2> pos, double ax, double ay) const;

 private:
  MazeLayout layout_;
  MazeParams params_;
  EnvSpec spec_;
  double x_ = 0, y_ = 0;
  std::size_t t_ = 0;
  bool done_ = true;
  bool success_ = false;
};

struct ChainParams {
  double dt = 0.1;
  double v_max = 1.0;
  std::size_t horizon = 100;
};

// 1-D point with velocity. v += a dt (clipped to [-v_max, v_max]), then
// x += v dt; reward = v dt.
class DenseChain : public Env {
 public:
  explicit DenseChain(ChainParams params = {});

  const EnvSpec& spec() const override { return spec_; }
  std::vector<Real> reset(std::uint64_t seed) override;
  StepResult step(std::span<const Real> action) override;
  std::vector<Real> goal() const override { return {}; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<DenseChain>(*this); }

  const ChainParams& params() const { return params_; }

 private:
  ChainParams params_;
  EnvSpec spec_;
  double pos_ = 0, vel_ = 0;
  std::size_t t_ = 0;
  bool done_ = true;
};

// Episode return of the scripted policies on DenseChain.
double chain_expert_return(const ChainParams& params);
double chain_random_return(const ChainParams& params, std::size_t episodes = 4000,
                           std::uint64_t seed = 0);

// "maze-umaze", "maze-medium", "maze-large" or "dense-chain".
std::unique_ptr<Env> make_env(const std::string& name);
std::vector<std::string> env_names();

// 100 * success for mazes; return-based environments map the random return
// to 0 and the expert return to 100, clipped to [0, 110].
double normalized_score(const EnvSpec& spec, double episode_return, bool success);

struct MazeDataOptions {
  std::size_t n_trajectories = 2000;
  std::uint64_t seed = 0;
  double action_noise = 0.3;   // std of Gaussian noise added to the controller
  double waypoint_tolerance = 0.25;
  // Each trajectory visits 1..max_segments random cells in turn; the last one
  // is its goal.
  std::size_t max_segments = 1;
  std::size_t max_steps = 1000;
};

// Noisy waypoint following along shortest cell paths from a random start
// through random intermediate cells. Each trajectory ends on reaching its
// final cell (reward 1 on that step, terminal) or after max_steps.
Dataset generate_maze_dataset(const MazeWorld& env, const MazeDataOptions& options);

// True when the trajectory starts in the evaluation start cell and comes
// within the goal radius of the evaluation goal.
bool joins_eval_pair(const MazeWorld& env, const Trajectory& traj);

struct ChainDataOptions {
  std::size_t n_trajectories = 1000;
  std::array<double, 3> quality_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};  // low, medium, high
  std::uint64_t seed = 0;
  double action_noise = 0.2;
};

// Target velocity bands for the scripted controllers.
inline constexpr std::array<std::array<double, 2>, 3> kChainBands = {
    {{0.1, 0.3}, {0.4, 0.6}, {0.7, 0.9}}};

Dataset generate_chain_dataset(const DenseChain& env, const ChainDataOptions& options);

}  // namespace pt
