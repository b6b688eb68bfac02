#include "pt/model.hpp"

#include <cmath>
#include <random>

#include "pt/errors.hpp"
#include "pt/ops.hpp"

namespace pt {
namespace {

constexpr double kInitStd = 0.02;
constexpr Modality kModalities[] = {Modality::kGoal, Modality::kRtg, Modality::kState,
                                    Modality::kPlan, Modality::kAction};

std::string modality_weight(Modality m) {
  return "embed." + std::string(to_string(m)) + ".weight";
}

Tensor normal(Shape shape, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<Real>(dist(rng));
  return t;
}

bool modality_used(const PTConfig& cfg, Modality m) {
  if (m == Modality::kGoal) return cfg.goal_token_dim() > 0;
  if (m == Modality::kPlan) return cfg.plan_tokens() > 0;
  return true;
}

// Binds parameters on `graph`, read-write or read-only.
template <typename Params>
struct Binder {
  Graph& graph;
  Params& params;
  Var operator()(const std::string& name) const { return graph.parameter(params.get(name)); }
};

template <typename Params>
Var embed_impl(Graph& graph, std::span<const TokenSequence> batch, Params& params,
               const PTConfig& cfg, Mode mode, Rng* rng) {
  if (batch.empty()) throw ContractViolation("forward on an empty batch");
  const std::size_t length = batch[0].size();
  const std::size_t capacity = cfg.max_sequence_len();
  if (length == 0) throw ContractViolation("forward on an empty sequence");
  if (length > capacity) {
    throw ContractViolation("sequence of " + std::to_string(length) +
                            " tokens exceeds model capacity " + std::to_string(capacity));
  }
  Binder<Params> bind{graph, params};

  // Column offset of each modality inside the stacked projection.
  std::size_t offsets[kNumModalities] = {};
  std::size_t total = 0;
  std::vector<Var> weights;
  for (Modality m : kModalities) {
    offsets[static_cast<std::size_t>(m)] = total;
    if (!modality_used(cfg, m)) continue;
    weights.push_back(bind(modality_weight(m)));
    total += modality_dim(cfg, m);
  }

  const std::size_t rows = batch.size() * length;
  Tensor x({rows, total});
  std::vector<std::int32_t> types(rows), steps(rows);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b].size() != length) {
      throw ContractViolation("batch sequences must share one length");
    }
    for (std::size_t i = 0; i < length; ++i) {
      const Token& tok = batch[b].tokens[i];
      const auto mi = static_cast<std::size_t>(tok.modality);
      if (mi >= kNumModalities) {
        throw ContractViolation("unknown modality tag " + std::to_string(mi));
      }
      if (!modality_used(cfg, tok.modality)) {
        throw ContractViolation(std::string(to_string(tok.modality)) +
                                " token in a model configured without it");
      }
      const std::size_t dim = modality_dim(cfg, tok.modality);
      if (tok.features.size() != dim) {
        throw DimensionError(std::string(to_string(tok.modality)) + " token has " +
                             std::to_string(tok.features.size()) + " features, expected " +
                             std::to_string(dim));
      }
      const std::size_t r = b * length + i;
      std::copy(tok.features.begin(), tok.features.end(), x.data() + r * total + offsets[mi]);
      types[r] = static_cast<std::int32_t>(mi);
      if (cfg.use_timestep_embedding) {
        if (tok.timestep >= cfg.max_timesteps) {
          throw ContractViolation("timestep " + std::to_string(tok.timestep) +
                                  " outside embedding table of " +
                                  std::to_string(cfg.max_timesteps));
        }
        steps[r] = static_cast<std::int32_t>(tok.timestep);
      }
    }
  }

  Var h = matmul(graph.constant(std::move(x)), concat_rows(weights));
  h = add(h, embedding(bind("embed.type"), types));
  if (cfg.use_timestep_embedding) h = add(h, embedding(bind("embed.timestep"), steps));
  if (mode == Mode::kTrain) h = dropout(h, static_cast<Real>(cfg.dropout_embd), *rng);
  return reshape(h, {batch.size(), length, cfg.d_model});
}

template <typename Params>
ForwardOutput forward_impl(Graph& graph, std::span<const TokenSequence> batch, Params& params,
                           const PTConfig& cfg, Mode mode, Rng* rng,
                           AttentionCapture* capture) {
  if (mode == Mode::kTrain && rng == nullptr) {
    throw ContractViolation("training-mode forward needs a random generator");
  }
  Binder<Params> bind{graph, params};
  Var x = embed_impl(graph, batch, params, cfg, mode, rng);
  const std::size_t bsz = batch.size(), length = batch[0].size();
  const std::size_t heads = cfg.n_heads, hd = cfg.d_model / cfg.n_heads;
  const bool train = mode == Mode::kTrain;

  // allowed(i, j) = j <= i and token j is not padding, per sequence and head.
  Tensor allowed({bsz * heads, length, length});
  for (std::size_t b = 0; b < bsz; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      Real* m = allowed.data() + (b * heads + h) * length * length;
      for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          m[i * length + j] = batch[b].tokens[j].padding ? Real(0) : Real(1);
        }
      }
    }
  }
  // Position 0 is never padding, so every row keeps some support.

  if (capture) {
    capture->layers = cfg.n_layers;
    capture->heads = heads;
    capture->batch = bsz;
    capture->length = length;
    capture->weights.clear();
  }
  const Real attn_scale = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(hd)));
  const Real p_attn = train ? static_cast<Real>(cfg.dropout_attn) : Real(0);
  const Real p_resid = train ? static_cast<Real>(cfg.dropout_resid) : Real(0);

  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string pre = "blocks." + std::to_string(l) + ".";
    auto lin = [&](const Var& in, const std::string& name) {
      return linear(in, bind(pre + name + ".weight"), bind(pre + name + ".bias"));
    };
    Var h = layernorm(x, bind(pre + "ln1.gain"), bind(pre + "ln1.bias"));
    Var q = split_heads(lin(h, "attn.q"), heads);
    Var k = split_heads(lin(h, "attn.k"), heads);
    Var v = split_heads(lin(h, "attn.v"), heads);
    Var att = softmax_rows(scale(bmm(q, k, true), attn_scale), &allowed);
    if (capture) capture->weights.push_back(att.value());
    if (train) att = dropout(att, p_attn, *rng);
    Var y = lin(merge_heads(bmm(att, v), heads), "attn.out");
    if (train) y = dropout(y, p_resid, *rng);
    x = add(x, y);

    h = layernorm(x, bind(pre + "ln2.gain"), bind(pre + "ln2.bias"));
    Var m = lin(relu(lin(h, "mlp.fc")), "mlp.proj");
    if (train) m = dropout(m, p_resid, *rng);
    x = add(x, m);
  }
  if (capture) {
    for (auto& w : capture->weights) w.reshape({bsz, heads, length, length});
  }

  Var hf = layernorm(x, bind("ln_f.gain"), bind("ln_f.bias"));
  ForwardOutput out;
  out.action = tanh(linear(hf, bind("head.action.weight"), bind("head.action.bias")));
  if (cfg.plan_tokens() > 0) {
    out.plan = linear(hf, bind("head.plan.weight"), bind("head.plan.bias"));
  }
  return out;
}

}  // namespace

Parameter& ModelParams::add(std::string name, Tensor value) {
  if (index_.count(name)) throw ContractViolation("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  params_.push_back(Parameter{std::move(name), std::move(value), {}});
  return params_.back();
}

Parameter& ModelParams::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("no parameter named '" + name + "'");
  return params_[it->second];
}

const Parameter& ModelParams::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("no parameter named '" + name + "'");
  return params_[it->second];
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::size_t modality_dim(const PTConfig& cfg, Modality m) {
  switch (m) {
    case Modality::kGoal:
      return cfg.goal_token_dim();
    case Modality::kRtg:
      return 1;
    case Modality::kState:
      return cfg.state_dim;
    case Modality::kPlan:
      return cfg.plan_feature_dim();
    case Modality::kAction:
      return cfg.action_dim;
  }
  throw ContractViolation("unknown modality tag");
}

ModelParams init_params(const PTConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t d = cfg.d_model;
  const double resid_std = kInitStd / std::sqrt(2.0 * static_cast<double>(cfg.n_layers));
  ModelParams p;
  for (Modality m : kModalities) {
    if (!modality_used(cfg, m)) continue;
    p.add(modality_weight(m), normal({modality_dim(cfg, m), d}, kInitStd, rng));
  }
  p.add("embed.type", normal({kNumModalities, d}, kInitStd, rng));
  if (cfg.use_timestep_embedding) {
    p.add("embed.timestep", normal({cfg.max_timesteps, d}, kInitStd, rng));
  }
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string pre = "blocks." + std::to_string(l) + ".";
    p.add(pre + "ln1.gain", Tensor({d}, Real(1)));
    p.add(pre + "ln1.bias", Tensor({d}));
    for (const char* name : {"attn.q", "attn.k", "attn.v"}) {
      p.add(pre + name + ".weight", normal({d, d}, kInitStd, rng));
      p.add(pre + name + ".bias", Tensor({d}));
    }
    p.add(pre + "attn.out.weight", normal({d, d}, resid_std, rng));
    p.add(pre + "attn.out.bias", Tensor({d}));
    p.add(pre + "ln2.gain", Tensor({d}, Real(1)));
    p.add(pre + "ln2.bias", Tensor({d}));
    p.add(pre + "mlp.fc.weight", normal({d, 4 * d}, kInitStd, rng));
    p.add(pre + "mlp.fc.bias", Tensor({4 * d}));
    p.add(pre + "mlp.proj.weight", normal({4 * d, d}, resid_std, rng));
    p.add(pre + "mlp.proj.bias", Tensor({d}));
  }
  p.add("ln_f.gain", Tensor({d}, Real(1)));
  p.add("ln_f.bias", Tensor({d}));
  p.add("head.action.weight", Tensor({d, cfg.action_dim}));
  p.add("head.action.bias", Tensor({cfg.action_dim}));
  if (cfg.plan_tokens() > 0) {
    p.add("head.plan.weight", Tensor({d, cfg.plan_feature_dim()}));
    p.add("head.plan.bias", Tensor({cfg.plan_feature_dim()}));
  }
  return p;
}

std::vector<Real> AttentionCapture::matrix(std::size_t layer, std::size_t head,
                                           std::size_t b) const {
  if (layer >= weights.size() || head >= heads || b >= batch) {
    throw ContractViolation("attention capture index out of range");
  }
  const Real* src = weights[layer].data() + ((b * heads + head) * length * length);
  return std::vector<Real>(src, src + length * length);
}

Var embed_sequence(Graph& graph, std::span<const TokenSequence> batch, ModelParams& params,
                   const PTConfig& cfg, Mode mode, Rng* rng) {
  if (mode == Mode::kTrain && rng == nullptr) {
    throw ContractViolation("training-mode embedding needs a random generator");
  }
  return embed_impl(graph, batch, params, cfg, mode, rng);
}

Var embed_sequence(Graph& graph, std::span<const TokenSequence> batch,
                   const ModelParams& params, const PTConfig& cfg) {
  return embed_impl(graph, batch, params, cfg, Mode::kEval, nullptr);
}

ForwardOutput forward(Graph& graph, std::span<const TokenSequence> batch, ModelParams& params,
                      const PTConfig& cfg, Mode mode, Rng* rng, AttentionCapture* capture) {
  return forward_impl(graph, batch, params, cfg, mode, rng, capture);
}

ForwardOutput forward(Graph& graph, std::span<const TokenSequence> batch,
                      const ModelParams& params, const PTConfig& cfg,
                      AttentionCapture* capture) {
  return forward_impl(graph, batch, params, cfg, Mode::kEval, nullptr, capture);
}

LossTerms combined_loss(const ForwardOutput& out, std::span<const TokenSequence> batch,
                        const PTConfig& cfg) {
  const std::size_t length = batch[0].size();
  auto targets = [&](std::size_t dim, bool plan) {
    Tensor target({batch.size(), length, dim});
    Tensor mask({batch.size(), length, dim});
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& seq = batch[b];
      const auto& t = plan ? seq.plan_targets : seq.action_targets;
      const auto& m = plan ? seq.plan_mask : seq.action_mask;
      for (std::size_t i = 0; i < length; ++i) {
        const std::size_t r = b * length + i;
        for (std::size_t j = 0; j < dim; ++j) {
          target[r * dim + j] = t[i * dim + j];
          mask[r * dim + j] = m[i] ? Real(1) : Real(0);
        }
      }
    }
    return std::pair{std::move(target), std::move(mask)};
  };
  LossTerms loss;
  auto [at, am] = targets(cfg.action_dim, false);
  loss.action = mse_loss(out.action, at, am);
  loss.total = scale(loss.action, static_cast<Real>(cfg.alpha));
  if (out.plan.valid()) {
    auto [ptgt, pm] = targets(cfg.plan_feature_dim(), true);
    loss.plan = mse_loss(out.plan, ptgt, pm);
    loss.total = add(loss.total, scale(loss.plan, static_cast<Real>(cfg.beta)));
  }
  return loss;
}

}  // namespace pt
