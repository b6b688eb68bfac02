#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pt/config.hpp"
#include "pt/data.hpp"
#include "pt/plan.hpp"

namespace pt {

enum class Modality : std::uint8_t { kGoal = 0, kRtg = 1, kState = 2, kPlan = 3, kAction = 4 };
inline constexpr std::size_t kNumModalities = 5;

std::string_view to_string(Modality m);

struct Token {
  Modality modality = Modality::kRtg;
  std::vector<Real> features;
  std::size_t timestep = 0;
  bool padding = false;
};

// Interleaved model input:
//   [goal] r_0 s_0 p_0 .. p_{n-1} a_0 r_1 s_1 a_1 .. r_{K-1} s_{K-1} a_{K-1}
// with per-token prediction targets. Action targets sit on state tokens; plan
// targets sit on s_0 (predicts p_0) and on plan slot i (predicts p_{i+1}).
struct TokenSequence {
  std::vector<Token> tokens;
  std::size_t action_dim = 0;
  std::size_t plan_dim = 0;
  std::vector<Real> action_targets;       // [L, action_dim]
  std::vector<std::uint8_t> action_mask;  // [L]
  std::vector<Real> plan_targets;         // [L, plan_dim]
  std::vector<std::uint8_t> plan_mask;    // [L]

  std::size_t size() const { return tokens.size(); }
  // Number of tokens before the first padding token.
  std::size_t real_length() const;
  std::vector<Modality> layout() const;
  // First `length` tokens with their targets.
  TokenSequence prefix(std::size_t length) const;
};

// Position of the first state token (s_0) and of plan slot i.
std::size_t first_state_position(const PTConfig& cfg);
std::size_t plan_slot_position(const PTConfig& cfg, std::size_t slot);
// Position of s_t for the t-th timestep of the window.
std::size_t state_position(const PTConfig& cfg, std::size_t step);

// 0 or 1 goal token. proj(s0) is s0 restricted to goal_indices.
//   Absolute: g; Relative: g - proj(s0); ProjAbsolute: proj(s0) ++ g;
//   ProjRelative: proj(s0) ++ (g - proj(s0)).
std::optional<std::vector<Real>> build_goal_token(GoalMode mode, std::span<const Real> s0,
                                                  std::span<const Real> goal,
                                                  std::span<const std::size_t> goal_indices);

// Training window t0 .. min(t0+K, T)-1 of `traj` (already normalised), right
// padded to K timesteps. `plan` must be anchored at traj.state(t0) and be
// relative unless cfg.relative_plans is false.
TokenSequence build_training_sequence(const Trajectory& traj, std::size_t t0,
                                      const Plan& plan, std::span<const Real> goal,
                                      const PTConfig& cfg);

struct HistoryStep {
  Real rtg = 0;
  std::vector<Real> state;
  std::vector<Real> action;  // empty for a step whose action is not chosen yet
  std::size_t timestep = 0;
};

// Same layout as training, right padded to K timesteps, no targets.
// `plan_rows` holds n rows; rows at or beyond `filled` are sent as zeros.
// The goal token uses history[0].state as s_0.
TokenSequence build_inference_sequence(std::span<const HistoryStep> history,
                                       std::span<const std::vector<Real>> plan_rows,
                                       std::size_t filled, std::span<const Real> goal,
                                       const PTConfig& cfg);

}  // namespace pt
