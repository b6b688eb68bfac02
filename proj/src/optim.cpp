#include "pt/optim.hpp"

#include <cmath>

#include "pt/errors.hpp"

namespace pt {
inline namespace PT_REAL_NS {

AdamState make_adam_state(std::span<const Parameter> params,
                          double learning_rate, double max_grad_norm) {
  AdamState state;
  state.learning_rate = learning_rate;
  state.max_grad_norm = max_grad_norm;
  for (const Parameter& p : params) {
    state.first_moment.push_back(Tensor::zeros_like(p.value));
    state.second_moment.push_back(Tensor::zeros_like(p.value));
  }
  return state;
}

void zero_grad(std::span<Parameter> params) {
  for (Parameter& p : params) {
    if (p.grad.shape() != p.value.shape()) {
      p.grad = Tensor::zeros_like(p.value);
    } else {
      p.grad.fill(Real(0));
    }
  }
}

double adam_step(std::span<Parameter> params, AdamState& state) {
  if (state.first_moment.size() != params.size()) {
    throw ContractViolation("adam state was built for " +
                            std::to_string(state.first_moment.size()) +
                            " parameters, got " + std::to_string(params.size()));
  }
  double sq = 0.0;
  for (const Parameter& p : params) {
    if (p.grad.shape() != p.value.shape()) {
      throw ContractViolation("gradient missing for parameter '" + p.name + "'");
    }
    for (Real g : p.grad.values()) {
      if (!std::isfinite(g)) {
        throw NumericalError("non-finite gradient in parameter '" + p.name + "'");
      }
      sq += static_cast<double>(g) * g;
    }
  }
  const double norm = std::sqrt(sq);
  double clip = 1.0;
  if (state.max_grad_norm > 0.0 && norm > state.max_grad_norm) {
    clip = state.max_grad_norm / (norm + 1e-12);
  }

  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = params[i].value;
    const Tensor& grad = params[i].grad;
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double g = grad[j] * clip;
      const double mj = b1 * m[j] + (1.0 - b1) * g;
      const double vj = b2 * v[j] + (1.0 - b2) * g * g;
      m[j] = static_cast<Real>(mj);
      v[j] = static_cast<Real>(vj);
      const double update =
          state.learning_rate * (mj / c1) / (std::sqrt(vj / c2) + state.epsilon);
      w[j] = static_cast<Real>(w[j] - update);
    }
  }
  return norm;
}

}  // namespace PT_REAL_NS
}  // namespace pt
