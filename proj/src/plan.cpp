#include "pt/plan.hpp"

#include <algorithm>
#include <cmath>

#include "pt/errors.hpp"

namespace pt {
namespace {

using u128 = unsigned __int128;

constexpr double kDistanceSlack = 1e-9;

bool is_log(SamplingMethod m) {
  return m == SamplingMethod::kLogTime || m == SamplingMethod::kLogDistance;
}

bool is_distance(SamplingMethod m) {
  return m == SamplingMethod::kFixedDistance || m == SamplingMethod::kLogDistance;
}

// Cumulative Euclidean path length over the plan's state features, from t0.
std::vector<double> cumulative_distance(const Trajectory& traj, std::size_t t0,
                                        const PlanFeatureSpec& spec) {
  const std::size_t horizon = traj.length() - 1 - t0;
  std::vector<double> cum(horizon + 1, 0.0);
  for (std::size_t h = 1; h <= horizon; ++h) {
    const auto prev = traj.state(t0 + h - 1);
    const auto cur = traj.state(t0 + h);
    double sq = 0.0;
    for (std::size_t i : spec.state_indices) {
      const double d = static_cast<double>(cur[i]) - prev[i];
      sq += d * d;
    }
    cum[h] = cum[h - 1] + std::sqrt(sq);
  }
  return cum;
}

}  // namespace

std::vector<std::size_t> sample_plan_indices(const Trajectory& traj, std::size_t t0,
                                             std::size_t n, SamplingMethod method,
                                             const PlanFeatureSpec& spec) {
  const std::size_t length = traj.length();
  if (t0 >= length) {
    throw ContractViolation("plan start " + std::to_string(t0) +
                            " outside trajectory of length " + std::to_string(length));
  }
  if (n == 0) return {};
  if (is_log(method) && n > 62) {
    throw ContractViolation("logarithmic plan sampling supports at most 62 tokens");
  }
  const std::size_t last = length - 1;
  std::vector<std::size_t> indices(n, last);
  if (t0 == last) return indices;

  const std::size_t horizon = last - t0;
  const u128 den = is_log(method) ? ((u128{1} << n) - 1) : u128{n};
  std::vector<double> cum;
  if (is_distance(method)) {
    spec.validate(traj.states.cols());
    cum = cumulative_distance(traj, t0, spec);
  }

  for (std::size_t k = 1; k <= n; ++k) {
    const u128 num = is_log(method) ? ((u128{1} << k) - 1) : u128{k};
    std::size_t offset;
    if (is_distance(method)) {
      // Slack absorbs summation rounding so exact ties are not lost.
      const double target =
          static_cast<double>(num) * cum.back() / static_cast<double>(den) -
          kDistanceSlack * cum.back();
      auto it = std::lower_bound(cum.begin(), cum.end(), target);
      offset = it == cum.end() ? horizon : static_cast<std::size_t>(it - cum.begin());
    } else {
      // round(num * H / den), halves rounded up.
      offset = static_cast<std::size_t>((2 * num * horizon + den) / (2 * den));
    }
    offset = std::clamp<std::size_t>(offset, 1, horizon);
    indices[k - 1] = t0 + offset;
  }
  indices.back() = last;
  return indices;
}

Plan extract_plan(const Trajectory& traj, std::span<const std::size_t> indices,
                  const PlanFeatureSpec& spec, std::span<const Real> rtg) {
  const std::size_t action_dim = traj.actions.cols();
  Plan plan;
  plan.n_tokens = indices.size();
  plan.feature_dim = spec.feature_dim(action_dim);
  plan.state_features = spec.state_indices.size();
  plan.source_indices.assign(indices.begin(), indices.end());
  plan.tokens.reserve(plan.n_tokens * plan.feature_dim);
  if (spec.include_rtg && rtg.size() != traj.length()) {
    throw DimensionError("rtg has " + std::to_string(rtg.size()) +
                         " entries for a trajectory of length " +
                         std::to_string(traj.length()));
  }
  for (std::size_t idx : indices) {
    if (idx >= traj.length()) {
      throw ContractViolation("plan index " + std::to_string(idx) + " outside trajectory");
    }
    const auto s = traj.state(idx);
    for (std::size_t i : spec.state_indices) plan.tokens.push_back(s[i]);
    if (spec.include_actions) {
      for (Real a : traj.action(idx)) plan.tokens.push_back(a);
    }
    if (spec.include_rtg) plan.tokens.push_back(rtg[idx]);
  }
  return plan;
}

Plan make_relative(Plan plan, std::span<const Real> anchor_state,
                   const PlanFeatureSpec& spec) {
  if (plan.is_relative) throw ContractViolation("plan is already relative");
  plan.anchor.clear();
  for (std::size_t i : spec.state_indices) {
    if (i >= anchor_state.size()) {
      throw DimensionError("anchor state has " + std::to_string(anchor_state.size()) +
                           " dims, plan needs index " + std::to_string(i));
    }
    plan.anchor.push_back(anchor_state[i]);
  }
  for (std::size_t k = 0; k < plan.n_tokens; ++k) {
    auto row = plan.row(k);
    for (std::size_t j = 0; j < plan.anchor.size(); ++j) row[j] -= plan.anchor[j];
  }
  plan.is_relative = true;
  return plan;
}

Plan make_absolute(Plan plan, std::span<const Real> anchor_state,
                   const PlanFeatureSpec& spec) {
  if (!plan.is_relative) throw ContractViolation("plan is already absolute");
  std::vector<double> anchor;
  for (std::size_t i : spec.state_indices) {
    if (i >= anchor_state.size()) {
      throw DimensionError("anchor state has " + std::to_string(anchor_state.size()) +
                           " dims, plan needs index " + std::to_string(i));
    }
    anchor.push_back(anchor_state[i]);
  }
  for (std::size_t k = 0; k < plan.n_tokens; ++k) {
    auto row = plan.row(k);
    for (std::size_t j = 0; j < anchor.size(); ++j) row[j] += anchor[j];
  }
  plan.anchor.clear();
  plan.is_relative = false;
  return plan;
}

}  // namespace pt
