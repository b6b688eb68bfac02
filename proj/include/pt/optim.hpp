#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pt/autodiff.hpp"

namespace pt {
inline namespace PT_REAL_NS {

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global L2 gradient-norm clip applied before the update; <= 0 disables.
  double max_grad_norm = 0.25;
};

AdamState make_adam_state(std::span<const Parameter> params,
                          double learning_rate, double max_grad_norm = 0.25);

// Resets every gradient to zeros of the parameter's shape.
void zero_grad(std::span<Parameter> params);

// Clips, then applies one bias-corrected Adam update in place. Returns the
// global gradient norm measured before clipping. Throws NumericalError naming
// the first parameter with a non-finite gradient; nothing is modified then.
double adam_step(std::span<Parameter> params, AdamState& state);

}  // namespace PT_REAL_NS
}  // namespace pt
