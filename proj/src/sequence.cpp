#include "pt/sequence.hpp"

#include <algorithm>

#include "pt/errors.hpp"

namespace pt {
namespace {

Token make_token(Modality m, std::vector<Real> features, std::size_t timestep,
                 bool padding = false) {
  return Token{m, std::move(features), timestep, padding};
}

TokenSequence empty_sequence(const PTConfig& cfg) {
  TokenSequence seq;
  seq.action_dim = cfg.action_dim;
  seq.plan_dim = cfg.plan_feature_dim();
  const std::size_t len = cfg.max_sequence_len();
  seq.tokens.reserve(len);
  seq.action_targets.assign(len * seq.action_dim, Real(0));
  seq.action_mask.assign(len, 0);
  seq.plan_targets.assign(len * seq.plan_dim, Real(0));
  seq.plan_mask.assign(len, 0);
  return seq;
}

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ContractViolation(std::string(what) + " has " + std::to_string(got) +
                            " dims, expected " + std::to_string(want));
  }
}

void append_goal(TokenSequence& seq, std::span<const Real> s0, std::span<const Real> goal,
                 std::size_t timestep, const PTConfig& cfg) {
  if (auto g = build_goal_token(cfg.goal_mode, s0, goal, cfg.goal_indices)) {
    seq.tokens.push_back(make_token(Modality::kGoal, std::move(*g), timestep));
  }
}

// Appends r_t s_t a_t (or the padded triple) for window steps 1..K-1.
void append_padding_triple(TokenSequence& seq, const PTConfig& cfg) {
  seq.tokens.push_back(make_token(Modality::kRtg, std::vector<Real>(1, 0), 0, true));
  seq.tokens.push_back(make_token(Modality::kState, std::vector<Real>(cfg.state_dim, 0), 0, true));
  seq.tokens.push_back(make_token(Modality::kAction, std::vector<Real>(cfg.action_dim, 0), 0, true));
}

}  // namespace

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kGoal:
      return "goal";
    case Modality::kRtg:
      return "rtg";
    case Modality::kState:
      return "state";
    case Modality::kPlan:
      return "plan";
    case Modality::kAction:
      return "action";
  }
  return "?";
}

std::size_t TokenSequence::real_length() const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].padding) return i;
  }
  return tokens.size();
}

std::vector<Modality> TokenSequence::layout() const {
  std::vector<Modality> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.modality);
  return out;
}

TokenSequence TokenSequence::prefix(std::size_t length) const {
  if (length > tokens.size()) {
    throw ContractViolation("prefix of " + std::to_string(length) + " tokens from a " +
                            std::to_string(tokens.size()) + "-token sequence");
  }
  TokenSequence out;
  out.action_dim = action_dim;
  out.plan_dim = plan_dim;
  out.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(length));
  out.action_targets.assign(action_targets.begin(),
                            action_targets.begin() + static_cast<std::ptrdiff_t>(length * action_dim));
  out.action_mask.assign(action_mask.begin(), action_mask.begin() + static_cast<std::ptrdiff_t>(length));
  out.plan_targets.assign(plan_targets.begin(),
                          plan_targets.begin() + static_cast<std::ptrdiff_t>(length * plan_dim));
  out.plan_mask.assign(plan_mask.begin(), plan_mask.begin() + static_cast<std::ptrdiff_t>(length));
  return out;
}

std::size_t first_state_position(const PTConfig& cfg) { return cfg.goal_tokens() + 1; }

std::size_t plan_slot_position(const PTConfig& cfg, std::size_t slot) {
  return cfg.goal_tokens() + 2 + slot;
}

std::size_t state_position(const PTConfig& cfg, std::size_t step) {
  if (step == 0) return first_state_position(cfg);
  return cfg.goal_tokens() + cfg.plan_tokens() + 3 * step + 1;
}

std::optional<std::vector<Real>> build_goal_token(GoalMode mode, std::span<const Real> s0,
                                                  std::span<const Real> goal,
                                                  std::span<const std::size_t> goal_indices) {
  if (mode == GoalMode::kNoGoal) return std::nullopt;
  check_dim(goal.size(), goal_indices.size(), "goal");
  std::vector<Real> proj;
  proj.reserve(goal_indices.size());
  for (std::size_t i : goal_indices) {
    if (i >= s0.size()) {
      throw ContractViolation("goal index " + std::to_string(i) + " outside state of " +
                              std::to_string(s0.size()) + " dims");
    }
    proj.push_back(s0[i]);
  }
  std::vector<Real> token;
  switch (mode) {
    case GoalMode::kAbsolute:
      token.assign(goal.begin(), goal.end());
      break;
    case GoalMode::kRelative:
      for (std::size_t j = 0; j < goal.size(); ++j) token.push_back(goal[j] - proj[j]);
      break;
    case GoalMode::kProjAbsolute:
      token = proj;
      token.insert(token.end(), goal.begin(), goal.end());
      break;
    case GoalMode::kProjRelative:
      token = proj;
      for (std::size_t j = 0; j < goal.size(); ++j) token.push_back(goal[j] - proj[j]);
      break;
    case GoalMode::kNoGoal:
      break;
  }
  return token;
}

TokenSequence build_training_sequence(const Trajectory& traj, std::size_t t0,
                                      const Plan& plan, std::span<const Real> goal,
                                      const PTConfig& cfg) {
  const std::size_t length = traj.length();
  if (t0 >= length) throw ContractViolation("empty training window");
  const std::size_t n = cfg.plan_tokens();
  if (n > 0) {
    if (plan.n_tokens != n || plan.feature_dim != cfg.plan_feature_dim()) {
      throw ContractViolation("plan shape does not match the configuration");
    }
    if (plan.is_relative != cfg.relative_plans) {
      throw ContractViolation(cfg.relative_plans ? "plans must be relative"
                                                 : "plans must be absolute");
    }
  }
  check_dim(traj.states.cols(), cfg.state_dim, "trajectory state");
  check_dim(traj.actions.cols(), cfg.action_dim, "trajectory action");

  const std::size_t steps = std::min(cfg.context_len, length - t0);
  TokenSequence seq = empty_sequence(cfg);
  const auto s0 = traj.state(t0);
  append_goal(seq, s0, goal, t0, cfg);

  auto push_step = [&](std::size_t t) {
    seq.tokens.push_back(make_token(Modality::kRtg, {traj.rtg[t]}, t));
    const std::size_t spos = seq.tokens.size();
    const auto s = traj.state(t);
    seq.tokens.push_back(make_token(Modality::kState, {s.begin(), s.end()}, t));
    const auto a = traj.action(t);
    std::copy(a.begin(), a.end(), seq.action_targets.begin() + static_cast<std::ptrdiff_t>(spos * cfg.action_dim));
    seq.action_mask[spos] = 1;
    return spos;
  };
  auto push_action = [&](std::size_t t) {
    const auto a = traj.action(t);
    seq.tokens.push_back(make_token(Modality::kAction, {a.begin(), a.end()}, t));
  };
  auto set_plan_target = [&](std::size_t pos, std::size_t row) {
    const auto r = plan.row(row);
    for (std::size_t j = 0; j < r.size(); ++j) {
      seq.plan_targets[pos * seq.plan_dim + j] = static_cast<Real>(r[j]);
    }
    seq.plan_mask[pos] = 1;
  };

  const std::size_t s0_pos = push_step(t0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = seq.tokens.size();
    const auto r = plan.row(i);
    std::vector<Real> f(r.size());
    std::transform(r.begin(), r.end(), f.begin(), [](double v) { return static_cast<Real>(v); });
    seq.tokens.push_back(make_token(Modality::kPlan, std::move(f), t0));
    if (i + 1 < n) set_plan_target(pos, i + 1);
  }
  if (n > 0) set_plan_target(s0_pos, 0);
  push_action(t0);
  for (std::size_t k = 1; k < cfg.context_len; ++k) {
    if (k < steps) {
      push_step(t0 + k);
      push_action(t0 + k);
    } else {
      append_padding_triple(seq, cfg);
    }
  }
  return seq;
}

TokenSequence build_inference_sequence(std::span<const HistoryStep> history,
                                       std::span<const std::vector<Real>> plan_rows,
                                       std::size_t filled, std::span<const Real> goal,
                                       const PTConfig& cfg) {
  if (history.empty()) throw ContractViolation("inference history is empty");
  if (history.size() > cfg.context_len) {
    throw ContractViolation("inference history of " + std::to_string(history.size()) +
                            " steps exceeds context length " +
                            std::to_string(cfg.context_len));
  }
  const std::size_t n = cfg.plan_tokens();
  const std::size_t pd = cfg.plan_feature_dim();
  if (n > 0 && plan_rows.size() != n) {
    throw ContractViolation("expected " + std::to_string(n) + " plan rows, got " +
                            std::to_string(plan_rows.size()));
  }
  TokenSequence seq = empty_sequence(cfg);
  const HistoryStep& first = history.front();
  check_dim(first.state.size(), cfg.state_dim, "history state");
  append_goal(seq, first.state, goal, first.timestep, cfg);

  auto push_step = [&](const HistoryStep& h) {
    check_dim(h.state.size(), cfg.state_dim, "history state");
    seq.tokens.push_back(make_token(Modality::kRtg, {h.rtg}, h.timestep));
    seq.tokens.push_back(make_token(Modality::kState, h.state, h.timestep));
  };
  auto push_action = [&](const HistoryStep& h) {
    if (h.action.empty()) {
      seq.tokens.push_back(make_token(Modality::kAction, std::vector<Real>(cfg.action_dim, 0),
                                      h.timestep, true));
    } else {
      check_dim(h.action.size(), cfg.action_dim, "history action");
      seq.tokens.push_back(make_token(Modality::kAction, h.action, h.timestep));
    }
  };

  push_step(first);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Real> f(pd, Real(0));
    if (i < filled) {
      check_dim(plan_rows[i].size(), pd, "plan row");
      f = plan_rows[i];
    }
    seq.tokens.push_back(make_token(Modality::kPlan, std::move(f), first.timestep));
  }
  push_action(first);
  for (std::size_t k = 1; k < cfg.context_len; ++k) {
    if (k < history.size()) {
      push_step(history[k]);
      push_action(history[k]);
    } else {
      append_padding_triple(seq, cfg);
    }
  }
  return seq;
}

}  // namespace pt
