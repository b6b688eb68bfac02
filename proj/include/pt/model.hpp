#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pt/autodiff.hpp"
#include "pt/config.hpp"
#include "pt/sequence.hpp"

namespace pt {

// All learnable tensors, in a fixed creation order. Names:
//   embed.{goal,rtg,state,plan,action}.weight  [feature_dim, d]
//   embed.type [5, d], embed.timestep [max_timesteps, d]
//   blocks.<l>.{ln1,ln2}.{gain,bias}
//   blocks.<l>.attn.{q,k,v,out}.{weight,bias}
//   blocks.<l>.mlp.{fc,proj}.{weight,bias}
//   ln_f.{gain,bias}, head.action.{weight,bias}, head.plan.{weight,bias}
// Goal and plan entries exist only when the configuration uses them.
class ModelParams {
 public:
  // Appending may reallocate: do not hold references across add().
  Parameter& add(std::string name, Tensor value);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  std::size_t count() const;  // total scalar count

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

// Weights N(0, 0.02); residual output projections scaled by 1/sqrt(2 L);
// layer-norm gains 1; biases and both heads zero.
ModelParams init_params(const PTConfig& cfg, Rng& rng);

// Feature width of each modality's raw token vector.
std::size_t modality_dim(const PTConfig& cfg, Modality m);

enum class Mode { kTrain, kEval };

// Post-softmax attention weights of the latest forward pass.
struct AttentionCapture {
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<Tensor> weights;  // per layer, [batch, heads, length, length]

  // Row-major [length, length] matrix for one (layer, head, sequence).
  std::vector<Real> matrix(std::size_t layer, std::size_t head, std::size_t b = 0) const;
};

struct ForwardOutput {
  Var action;  // [B, L, action_dim]
  Var plan;    // [B, L, plan_dim]; invalid when planning is disabled
};

// Embeds a batch of equal-length sequences: [B, L, d]. In training mode
// embedding dropout draws from `rng`.
Var embed_sequence(Graph& graph, std::span<const TokenSequence> batch, ModelParams& params,
                   const PTConfig& cfg, Mode mode, Rng* rng);
Var embed_sequence(Graph& graph, std::span<const TokenSequence> batch,
                   const ModelParams& params, const PTConfig& cfg);

// Full forward pass. Training mode needs `rng` for dropout and a tracking
// graph; eval mode is deterministic.
ForwardOutput forward(Graph& graph, std::span<const TokenSequence> batch, ModelParams& params,
                      const PTConfig& cfg, Mode mode, Rng* rng,
                      AttentionCapture* capture = nullptr);
ForwardOutput forward(Graph& graph, std::span<const TokenSequence> batch,
                      const ModelParams& params, const PTConfig& cfg,
                      AttentionCapture* capture = nullptr);

struct LossTerms {
  Var total;
  Var action;
  Var plan;  // invalid when planning is disabled
};

// alpha * masked MSE(action head at action-target positions)
//   + beta * masked MSE(plan head at plan-target positions).
LossTerms combined_loss(const ForwardOutput& out, std::span<const TokenSequence> batch,
                        const PTConfig& cfg);

}  // namespace pt
