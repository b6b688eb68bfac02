#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pt/config.hpp"
#include "pt/data.hpp"

namespace pt {

// An ordered sequence of planning tokens. Token values are held in double so
// that subtracting and re-adding a float anchor is exact.
struct Plan {
  std::size_t n_tokens = 0;
  std::size_t feature_dim = 0;
  std::vector<double> tokens;  // row-major [n_tokens, feature_dim]
  std::vector<std::size_t> source_indices;
  std::size_t state_features = 0;  // leading columns holding state features
  std::vector<double> anchor;      // anchor[state_indices] once relative
  bool is_relative = false;

  std::span<const double> row(std::size_t k) const {
    return {tokens.data() + k * feature_dim, feature_dim};
  }
  std::span<double> row(std::size_t k) {
    return {tokens.data() + k * feature_dim, feature_dim};
  }
};

// Picks n timesteps in (t0, T-1], non-decreasing, the last always T-1.
// Time methods use index_k = t0 + round(f_k * H) with H = T-1-t0; distance
// methods pick the smallest t whose cumulative arc length over the plan's
// state features reaches f_k of the total (less 1e-9 of the total, so
// rounding in the running sum cannot skip an exact tie). f_k = k/n (fixed) or
// (2^k - 1)/(2^n - 1) (log). With t0 == T-1 every index is T-1.
std::vector<std::size_t> sample_plan_indices(const Trajectory& traj, std::size_t t0,
                                             std::size_t n, SamplingMethod method,
                                             const PlanFeatureSpec& spec);

// Row k = state[idx_k][state_indices] ++ action[idx_k] (optional) ++ rtg[idx_k]
// (optional). Absolute coordinates.
Plan extract_plan(const Trajectory& traj, std::span<const std::size_t> indices,
                  const PlanFeatureSpec& spec, std::span<const Real> rtg);

// Subtracts anchor[state_indices] from the state columns only.
// Throws ContractViolation if the plan is already relative.
Plan make_relative(Plan plan, std::span<const Real> anchor_state,
                   const PlanFeatureSpec& spec);
// Inverse of make_relative. Throws ContractViolation on an absolute plan.
Plan make_absolute(Plan plan, std::span<const Real> anchor_state,
                   const PlanFeatureSpec& spec);

}  // namespace pt
