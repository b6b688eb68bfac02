#include "pt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pt/checkpoint.hpp"
#include "pt/errors.hpp"
#include "pt/log.hpp"
#include "pt/optim.hpp"
#include "pt/sequence.hpp"

namespace pt {
namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kInitStream = 0x1A2B3C4D5E6F7081ull;
constexpr std::uint64_t kDropoutStream = 0x0D0D0D0D0D0D0D0Dull;
constexpr std::uint64_t kNoiseStream = 0xA5A5A5A5A5A5A5A5ull;

std::vector<std::size_t> checkpoint_steps(std::size_t updates) {
  std::vector<std::size_t> steps;
  for (std::size_t k = 1; k <= 10; ++k) {
    const std::size_t s = std::max<std::size_t>(1, (updates * k + 5) / 10);
    if (steps.empty() || steps.back() != s) steps.push_back(s);
  }
  return steps;
}

std::string model_metadata(const Model& m, const std::string& run_json) {
  json doc = {{"env", m.env_name},
              {"model", json::parse(to_json(m.cfg))},
              {"stats", json::parse(to_json(m.stats))},
              {"run", json::parse(run_json)}};
  return doc.dump();
}

std::vector<double> to_double(std::span<const Real> v) { return {v.begin(), v.end()}; }

// Planning-head outputs for a batch of equal-length sequences.
struct EvalOut {
  Tensor action;
  Tensor plan;
  AttentionCapture capture;
};

EvalOut eval_forward(const Model& model, std::span<const TokenSequence> batch, bool capture) {
  Graph g(false);
  EvalOut r;
  auto out = forward(g, batch, model.params, model.cfg, capture ? &r.capture : nullptr);
  r.action = out.action.value();
  if (out.plan.valid()) r.plan = out.plan.value();
  return r;
}

// Converts one generated plan (model space, normalised) to raw absolute rows.
std::vector<std::vector<double>> plan_to_raw(const Model& model,
                                             const std::vector<std::vector<Real>>& rows,
                                             std::span<const Real> anchor_norm) {
  const PTConfig& cfg = model.cfg;
  Plan p;
  p.n_tokens = rows.size();
  p.feature_dim = cfg.plan_feature_dim();
  p.state_features = cfg.plan.state_indices.size();
  for (const auto& r : rows) p.tokens.insert(p.tokens.end(), r.begin(), r.end());
  p.is_relative = cfg.relative_plans;
  if (p.is_relative) p = make_absolute(std::move(p), anchor_norm, cfg.plan);
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < p.n_tokens; ++k) {
    auto row = p.row(k);
    std::vector<double> raw(row.begin(), row.end());
    for (std::size_t j = 0; j < p.state_features; ++j) {
      const std::size_t i = cfg.plan.state_indices[j];
      raw[j] = raw[j] * model.stats.state_std[i] + model.stats.state_mean[i];
    }
    if (cfg.plan.include_rtg) raw.back() *= model.stats.return_scale;
    out.push_back(std::move(raw));
  }
  return out;
}

AttentionCapture slice_capture(const AttentionCapture& c, std::size_t b) {
  AttentionCapture out;
  out.layers = c.layers;
  out.heads = c.heads;
  out.batch = 1;
  out.length = c.length;
  const std::size_t per = c.heads * c.length * c.length;
  for (const auto& w : c.weights) {
    Tensor t(Shape{1, c.heads, c.length, c.length});
    std::copy(w.data() + b * per, w.data() + (b + 1) * per, t.data());
    out.weights.push_back(std::move(t));
  }
  return out;
}

json capture_to_json(const AttentionSnapshot& s) {
  json layers = json::array();
  for (const auto& w : s.capture.weights) {
    layers.push_back(std::vector<double>(w.values().begin(), w.values().end()));
  }
  json layout = json::array();
  for (Modality m : s.layout) layout.push_back(std::string(to_string(m)));
  return {{"step", s.step},     {"layers", s.capture.layers}, {"heads", s.capture.heads},
          {"length", s.capture.length}, {"layout", layout}, {"weights", layers}};
}

Modality parse_modality(const std::string& s) {
  for (std::size_t i = 0; i < kNumModalities; ++i) {
    if (to_string(static_cast<Modality>(i)) == s) return static_cast<Modality>(i);
  }
  throw SchemaError("unknown modality '" + s + "'");
}

}  // namespace

std::uint64_t batch_seed(std::uint64_t seed, std::size_t step) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(step));
}

void save_model(const std::string& path, const Model& model, const std::string& run_config_json) {
  save_checkpoint(path, model.params.all(), model_metadata(model, run_config_json));
}

Model load_model(const std::string& path) {
  if (!std::filesystem::exists(path)) throw SchemaError("checkpoint not found: " + path);
  Checkpoint ck = load_checkpoint(path);
  json meta;
  try {
    meta = json::parse(ck.metadata_json);
  } catch (const json::exception& e) {
    throw SchemaError(path + ": checkpoint metadata is not JSON");
  }
  if (!meta.contains("model") || !meta.contains("stats") || !meta.contains("env")) {
    throw SchemaError(path + ": checkpoint metadata lacks model/stats/env");
  }
  Model m;
  m.env_name = meta["env"].get<std::string>();
  m.cfg = model_config_from_json(meta["model"].dump());
  m.stats = stats_from_json(meta["stats"].dump());
  Rng rng(0);
  ModelParams expected = init_params(m.cfg, rng);
  if (expected.all().size() != ck.tensors.size()) {
    throw SchemaError(path + ": tensor count does not match the model config");
  }
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    const auto& want = expected.all()[i];
    const auto& got = ck.tensors[i];
    if (want.name != got.name || want.value.shape() != got.value.shape()) {
      throw SchemaError(path + ": tensor " + got.name + " does not match " + want.name);
    }
    m.params.add(got.name, got.value);
  }
  return m;
}

void TrainReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "step,total,action,plan\n" << std::setprecision(17);
  for (const auto& r : records) {
    out << r.step << ',' << r.total << ',' << r.action << ',' << r.plan << '\n';
  }
}

TrainResult train(const Dataset& dataset, const RunConfig& run, const TrainOptions& options) {
  if (dataset.trajectories.empty()) throw SchemaError("training dataset is empty");
  auto env = make_env(dataset.env_name);
  const EnvSpec& spec = env->spec();
  if (dataset.state_dim != spec.state_dim || dataset.action_dim != spec.action_dim) {
    throw DimensionError("dataset dims (" + std::to_string(dataset.state_dim) + ", " +
                         std::to_string(dataset.action_dim) + ") do not match " + spec.name);
  }
  const TrainingData data = prepare_training_data(dataset);
  TrainResult result;
  Model& model = result.model;
  model.env_name = dataset.env_name;
  model.stats = data.stats;
  model.cfg = make_model_config(run, spec, data.stats);
  {
    Rng init_rng(splitmix64(options.seed ^ kInitStream));
    model.params = init_params(model.cfg, init_rng);
  }
  const std::size_t updates = options.updates ? options.updates : run.gradient_update_steps;
  AdamState adam = make_adam_state(model.params.all(), run.learning_rate, run.grad_clip);
  const auto ckpt_steps = checkpoint_steps(updates);
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);
  const std::string run_json = to_json(run);

  TrainReport& report = result.report;
  report.seed = options.seed;
  report.records.reserve(updates);
  const auto start = std::chrono::steady_clock::now();
  std::size_t next_ckpt = 0;
  for (std::size_t step = 1; step <= updates; ++step) {
    const std::uint64_t bseed = batch_seed(options.seed, step);
    auto batch = sample_batch(data, model.cfg, BatchSpec{run.batch_size, bseed});
    Rng dropout(splitmix64(bseed ^ kDropoutStream));
    zero_grad(model.params.all());
    Graph g;
    auto out = forward(g, batch, model.params, model.cfg, Mode::kTrain, &dropout);
    auto loss = combined_loss(out, batch, model.cfg);
    TrainRecord rec;
    rec.step = step;
    rec.total = loss.total.item();
    rec.action = loss.action.item();
    rec.plan = loss.plan.valid() ? static_cast<double>(loss.plan.item()) : 0.0;
    if (!std::isfinite(rec.total)) {
      throw NumericalError("non-finite loss at step " + std::to_string(step) +
                           " (seed " + std::to_string(options.seed) + ", batch seed " +
                           std::to_string(bseed) + ")");
    }
    report.records.push_back(rec);
    g.backward(loss.total);
    adam_step(model.params.all(), adam);

    if (options.verbose && (step % 100 == 0 || step == updates)) {
      std::ostringstream msg;
      msg << "step " << step << "/" << updates << " loss " << rec.total << " (action "
          << rec.action << ", plan " << rec.plan << ")";
      log_info(msg.str());
    }
    if (next_ckpt < ckpt_steps.size() && step == ckpt_steps[next_ckpt]) {
      ++next_ckpt;
      if (!options.checkpoint_dir.empty()) {
        std::ostringstream name;
        name << "step_" << std::setw(7) << std::setfill('0') << step << ".ckpt";
        const std::string path = (std::filesystem::path(options.checkpoint_dir) / name.str()).string();
        save_model(path, model, run_json);
        report.checkpoints.push_back(path);
        if (step == updates) {
          const std::string final_path =
              (std::filesystem::path(options.checkpoint_dir) / "final.ckpt").string();
          save_model(final_path, model, run_json);
          report.checkpoints.push_back(final_path);
        }
      }
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<std::vector<std::vector<Real>>> generate_plans(
    const Model& model, std::span<const std::vector<Real>> states, std::span<const Real> rtgs,
    std::span<const std::vector<Real>> goals, std::size_t timestep) {
  const PTConfig& cfg = model.cfg;
  const std::size_t n = cfg.plan_tokens();
  const std::size_t pd = cfg.plan_feature_dim();
  const std::size_t batch = states.size();
  std::vector<std::vector<std::vector<Real>>> rows(
      batch, std::vector<std::vector<Real>>(n, std::vector<Real>(pd, Real(0))));
  if (n == 0) return rows;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t read = i == 0 ? first_state_position(cfg) : plan_slot_position(cfg, i - 1);
    std::vector<TokenSequence> seqs;
    for (std::size_t b = 0; b < batch; ++b) {
      HistoryStep h{rtgs[b], states[b], {}, timestep};
      seqs.push_back(build_inference_sequence(std::span<const HistoryStep>(&h, 1), rows[b], i,
                                              goals[b], cfg)
                         .prefix(read + 1));
    }
    auto out = eval_forward(model, seqs, false);
    const std::size_t length = read + 1;
    for (std::size_t b = 0; b < batch; ++b) {
      const Real* src = out.plan.data() + (b * length + read) * pd;
      std::copy(src, src + pd, rows[b][i].begin());
    }
  }
  return rows;
}

Plan generate_plan(const Model& model, std::span<const Real> state, Real rtg,
                   std::span<const Real> goal, std::size_t timestep) {
  const PTConfig& cfg = model.cfg;
  std::vector<std::vector<Real>> s = {std::vector<Real>(state.begin(), state.end())};
  std::vector<std::vector<Real>> g = {std::vector<Real>(goal.begin(), goal.end())};
  const Real r[1] = {rtg};
  auto rows = generate_plans(model, s, r, g, timestep)[0];
  Plan p;
  p.n_tokens = rows.size();
  p.feature_dim = cfg.plan_feature_dim();
  p.state_features = cfg.plan.state_indices.size();
  for (const auto& row : rows) p.tokens.insert(p.tokens.end(), row.begin(), row.end());
  p.is_relative = cfg.relative_plans && p.n_tokens > 0;
  if (p.is_relative) {
    for (std::size_t i : cfg.plan.state_indices) p.anchor.push_back(state[i]);
  }
  return p;
}

std::vector<RolloutRecord> rollout_batch(const Model& model, const Env& env,
                                         std::span<const std::uint64_t> seeds,
                                         const RolloutOptions& options) {
  const PTConfig& cfg = model.cfg;
  const EnvSpec& spec = env.spec();
  if (spec.state_dim != cfg.state_dim || spec.action_dim != cfg.action_dim) {
    throw DimensionError("environment " + spec.name + " does not match the model dims");
  }
  const std::size_t batch = seeds.size();
  const std::size_t max_steps = options.max_steps ? options.max_steps : spec.horizon;
  if (cfg.use_timestep_embedding && max_steps > cfg.max_timesteps) {
    throw ContractViolation("rollout longer than the timestep table");
  }
  const double target = options.target_return ? *options.target_return : cfg.target_return;
  const double noise_scale = options.action_noise ? *options.action_noise : cfg.action_noise_scale;
  const double sigma = noise_scale * (spec.action_high - spec.action_low) / 2.0;
  const std::size_t rho = cfg.replan_interval;
  const std::size_t n = cfg.plan_tokens();

  std::vector<std::unique_ptr<Env>> envs;
  std::vector<Rng> noise_rng;
  std::vector<RolloutRecord> records(batch);
  std::vector<std::vector<Real>> raw_state(batch), norm_state(batch), goal(batch);
  std::vector<Real> rtg(batch, static_cast<Real>(target / model.stats.return_scale));
  std::vector<std::vector<HistoryStep>> history(batch);
  std::vector<std::vector<std::vector<Real>>> plan_rows(
      batch, std::vector<std::vector<Real>>(n, std::vector<Real>(cfg.plan_feature_dim(), 0)));
  std::vector<bool> done(batch, false);

  std::vector<Real> goal_norm;
  if (cfg.goal_mode != GoalMode::kNoGoal) {
    const auto g = env.goal();
    if (g.size() != cfg.goal_indices.size()) {
      throw DimensionError("environment goal has " + std::to_string(g.size()) +
                           " entries, goal_indices has " + std::to_string(cfg.goal_indices.size()));
    }
    goal_norm = model.stats.normalize_goal(g, cfg.goal_indices);
  }
  for (std::size_t b = 0; b < batch; ++b) {
    envs.push_back(env.clone());
    noise_rng.emplace_back(splitmix64(seeds[b] ^ kNoiseStream));
    raw_state[b] = envs[b]->reset(seeds[b]);
    goal[b] = goal_norm;
    auto& rec = records[b];
    rec.env_name = spec.name;
    rec.seed = seeds[b];
    rec.state_dim = spec.state_dim;
    rec.action_dim = spec.action_dim;
    rec.plan_state_indices = cfg.plan.state_indices;
    rec.states.insert(rec.states.end(), raw_state[b].begin(), raw_state[b].end());
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < max_steps; ++t) {
    std::vector<std::size_t> live;
    for (std::size_t b = 0; b < batch; ++b) {
      if (!done[b]) live.push_back(b);
    }
    if (live.empty()) break;
    for (std::size_t b : live) norm_state[b] = model.stats.normalize_state(raw_state[b]);

    if (t % rho == 0) {
      for (std::size_t b : live) history[b].clear();
      if (n > 0) {
        std::vector<std::vector<Real>> s, g;
        std::vector<Real> r;
        for (std::size_t b : live) {
          s.push_back(norm_state[b]);
          g.push_back(goal[b]);
          r.push_back(rtg[b]);
        }
        auto rows = generate_plans(model, s, r, g, t);
        for (std::size_t k = 0; k < live.size(); ++k) {
          const std::size_t b = live[k];
          plan_rows[b] = rows[k];
          PlanEvent ev;
          ev.step = t;
          ev.anchor = to_double(raw_state[b]);
          ev.points = plan_to_raw(model, rows[k], norm_state[b]);
          records[b].plans.push_back(std::move(ev));
        }
      }
    }

    std::vector<TokenSequence> seqs;
    for (std::size_t b : live) {
      history[b].push_back(HistoryStep{rtg[b], norm_state[b], {}, t});
    }
    const std::size_t window = history[live.front()].size();
    const std::size_t read = state_position(cfg, window - 1);
    for (std::size_t b : live) {
      seqs.push_back(
          build_inference_sequence(history[b], plan_rows[b], n, goal[b], cfg).prefix(read + 1));
    }
    const bool capture = options.capture_attention && t + 1 == rho;
    auto out = eval_forward(model, seqs, capture);
    const std::size_t length = read + 1;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const std::size_t b = live[k];
      std::vector<Real> action(cfg.action_dim);
      for (std::size_t j = 0; j < cfg.action_dim; ++j) {
        double a = out.action[(k * length + read) * cfg.action_dim + j];
        if (sigma > 0) a += sigma * normal(noise_rng[b]);
        action[j] = static_cast<Real>(std::clamp(a, double(spec.action_low), double(spec.action_high)));
      }
      if (capture) {
        AttentionSnapshot snap;
        snap.step = t;
        snap.layout = seqs[k].layout();
        snap.capture = slice_capture(out.capture, k);
        records[b].attention.push_back(std::move(snap));
      }
      history[b].back().action = action;
      StepResult r = envs[b]->step(action);
      auto& rec = records[b];
      rec.actions.insert(rec.actions.end(), action.begin(), action.end());
      rec.rewards.push_back(r.reward);
      rec.states.insert(rec.states.end(), r.state.begin(), r.state.end());
      rec.episode_return += r.reward;
      rtg[b] = static_cast<Real>(rtg[b] - r.reward / model.stats.return_scale);
      raw_state[b] = r.state;
      if (r.done) done[b] = true;
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    records[b].success = envs[b]->success();
    records[b].score = normalized_score(spec, records[b].episode_return, records[b].success);
  }
  return records;
}

RolloutRecord rollout(const Model& model, const Env& env, std::uint64_t seed,
                      const RolloutOptions& options) {
  const std::uint64_t s[1] = {seed};
  return rollout_batch(model, env, s, options)[0];
}

std::string RolloutRecord::to_json() const {
  json plans_json = json::array();
  for (const auto& p : plans) {
    plans_json.push_back({{"step", p.step}, {"anchor", p.anchor}, {"points", p.points}});
  }
  json attn = json::array();
  for (const auto& a : attention) attn.push_back(capture_to_json(a));
  json doc = {{"env", env_name},
              {"seed", seed},
              {"state_dim", state_dim},
              {"action_dim", action_dim},
              {"states", states},
              {"actions", actions},
              {"rewards", rewards},
              {"plans", plans_json},
              {"plan_state_indices", plan_state_indices},
              {"attention", attn},
              {"success", success},
              {"episode_return", episode_return},
              {"score", score}};
  return doc.dump();
}

RolloutRecord RolloutRecord::from_json(const std::string& text) {
  try {
    const json d = json::parse(text);
    RolloutRecord r;
    r.env_name = d.at("env").get<std::string>();
    r.seed = d.at("seed").get<std::uint64_t>();
    r.state_dim = d.at("state_dim").get<std::size_t>();
    r.action_dim = d.at("action_dim").get<std::size_t>();
    r.states = d.at("states").get<std::vector<double>>();
    r.actions = d.at("actions").get<std::vector<double>>();
    r.rewards = d.at("rewards").get<std::vector<double>>();
    r.plan_state_indices = d.at("plan_state_indices").get<std::vector<std::size_t>>();
    for (const auto& p : d.at("plans")) {
      PlanEvent ev;
      ev.step = p.at("step").get<std::size_t>();
      ev.anchor = p.at("anchor").get<std::vector<double>>();
      ev.points = p.at("points").get<std::vector<std::vector<double>>>();
      r.plans.push_back(std::move(ev));
    }
    for (const auto& a : d.at("attention")) {
      AttentionSnapshot s;
      s.step = a.at("step").get<std::size_t>();
      for (const auto& m : a.at("layout")) s.layout.push_back(parse_modality(m.get<std::string>()));
      s.capture.layers = a.at("layers").get<std::size_t>();
      s.capture.heads = a.at("heads").get<std::size_t>();
      s.capture.length = a.at("length").get<std::size_t>();
      s.capture.batch = 1;
      for (const auto& w : a.at("weights")) {
        const auto v = w.get<std::vector<double>>();
        Tensor t(Shape{1, s.capture.heads, s.capture.length, s.capture.length});
        if (v.size() != t.size()) throw SchemaError("attention weights have the wrong size");
        std::transform(v.begin(), v.end(), t.data(), [](double x) { return static_cast<Real>(x); });
        s.capture.weights.push_back(std::move(t));
      }
      r.attention.push_back(std::move(s));
    }
    r.success = d.at("success").get<bool>();
    r.episode_return = d.at("episode_return").get<double>();
    r.score = d.at("score").get<double>();
    if (r.states.size() != (r.rewards.size() + 1) * r.state_dim ||
        r.actions.size() != r.rewards.size() * r.action_dim) {
      throw SchemaError("rollout record arrays do not match its step count");
    }
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("rollout record: ") + e.what());
  }
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

std::string EvalSummary::to_json() const {
  json doc = {{"env", env_name}, {"seeds", seeds}, {"mean", mean}, {"std", std},
              {"per_seed", per_seed}};
  return doc.dump(2);
}

EvalSummary evaluate(std::span<const Model> models, std::span<const std::uint64_t> train_seeds,
                     const Env& env, std::size_t n_rollouts, const RolloutOptions& options) {
  if (models.size() != train_seeds.size()) {
    throw ContractViolation("evaluate: one training seed per model");
  }
  EvalSummary s;
  s.env_name = env.spec().name;
  s.seeds.assign(train_seeds.begin(), train_seeds.end());
  for (std::size_t k = 0; k < models.size(); ++k) {
    std::vector<std::uint64_t> seeds(n_rollouts);
    for (std::size_t i = 0; i < n_rollouts; ++i) seeds[i] = 1000 * k + i;
    auto recs = rollout_batch(models[k], env, seeds, options);
    double total = 0;
    for (const auto& r : recs) total += r.score;
    s.per_seed.push_back(n_rollouts ? total / static_cast<double>(n_rollouts) : 0.0);
  }
  std::tie(s.mean, s.std) = mean_std(s.per_seed);
  return s;
}

std::string_view to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kSampling:
      return "sampling";
    case AblationAxis::kRelative:
      return "relative";
    case AblationAxis::kGoal:
      return "goal";
    case AblationAxis::kPlanActions:
      return "plan_actions";
  }
  return "?";
}

AblationAxis parse_ablation_axis(std::string_view s) {
  for (auto a : {AblationAxis::kSampling, AblationAxis::kRelative, AblationAxis::kGoal,
                 AblationAxis::kPlanActions}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("axes", "unknown ablation axis '" + std::string(s) +
                                "' (sampling|relative|goal|plan_actions)");
}

std::vector<AblationVariant> ablation_variants(const RunConfig& base,
                                               std::span<const AblationAxis> axes) {
  std::vector<AblationVariant> out;
  if (axes.empty()) {
    out.push_back({"default", "default", base});
    return out;
  }
  for (AblationAxis axis : axes) {
    const std::string name(to_string(axis));
    switch (axis) {
      case AblationAxis::kSampling:
        for (auto m : {SamplingMethod::kFixedTime, SamplingMethod::kFixedDistance,
                       SamplingMethod::kLogTime, SamplingMethod::kLogDistance}) {
          RunConfig r = base;
          r.plan_sampling = m;
          out.push_back({name, std::string(to_string(m)), r});
        }
        break;
      case AblationAxis::kRelative:
        for (bool rel : {true, false}) {
          RunConfig r = base;
          r.relative_plans = rel;
          out.push_back({name, rel ? "relative_states" : "absolute_states", r});
        }
        break;
      case AblationAxis::kGoal:
        for (auto m : {GoalMode::kAbsolute, GoalMode::kRelative, GoalMode::kProjAbsolute,
                       GoalMode::kProjRelative}) {
          RunConfig r = base;
          r.goal_representation = m;
          out.push_back({name, std::string(to_string(m)), r});
        }
        break;
      case AblationAxis::kPlanActions:
        for (bool act : {true, false}) {
          RunConfig r = base;
          r.plan_actions = act;
          out.push_back({name, act ? "true" : "false", r});
        }
        break;
    }
  }
  return out;
}

std::vector<AblationRow> run_ablation(const Dataset& dataset, const RunConfig& base,
                                      std::span<const AblationAxis> axes,
                                      const AblationBudget& budget, bool verbose) {
  auto env = make_env(dataset.env_name);
  std::vector<AblationRow> rows;
  for (auto& v : ablation_variants(base, axes)) {
    std::vector<Model> models;
    for (std::uint64_t seed : v.run.seeds) {
      TrainOptions opt;
      opt.seed = seed;
      opt.updates = budget.updates;
      models.push_back(train(dataset, v.run, opt).model);
    }
    const std::size_t rollouts = budget.rollouts ? budget.rollouts : v.run.eval_rollouts;
    AblationRow row{v, evaluate(models, v.run.seeds, *env, rollouts)};
    if (verbose) {
      std::ostringstream msg;
      msg << "ablation " << v.axis << "=" << v.value << ": " << row.summary.mean << " +- "
          << row.summary.std;
      log_info(msg.str());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_markdown(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  const std::string env = rows.empty() ? "score" : rows.front().summary.env_name;
  out << "| Axis | Value | " << env << " |\n|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.variant.axis << " | " << r.variant.value << " | " << r.summary.mean
        << " ± " << r.summary.std << " |\n";
  }
  return out.str();
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << std::setprecision(17) << "axis,value,mean,std,per_seed\n";
  for (const auto& r : rows) {
    out << r.variant.axis << ',' << r.variant.value << ',' << r.summary.mean << ','
        << r.summary.std << ',';
    for (std::size_t i = 0; i < r.summary.per_seed.size(); ++i) {
      out << (i ? ";" : "") << r.summary.per_seed[i];
    }
    out << '\n';
  }
  return out.str();
}

Dataset generate_dataset(const RunConfig& run) {
  auto env = make_env(run.env);
  if (auto* maze = dynamic_cast<MazeWorld*>(env.get())) {
    return generate_maze_dataset(*maze, {.n_trajectories = run.dataset_trajectories,
                                         .seed = run.dataset_seed,
                                         .max_segments = run.maze_segments});
  }
  if (auto* chain = dynamic_cast<DenseChain*>(env.get())) {
    return generate_chain_dataset(*chain, {.n_trajectories = run.dataset_trajectories,
                                           .seed = run.dataset_seed});
  }
  throw ConfigError("env", "no dataset generator for " + run.env);
}

}  // namespace pt
