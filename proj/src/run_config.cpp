#include "pt/run_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pt/errors.hpp"

namespace pt {
namespace {

using nlohmann::json;

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key, key + ": expected true or false");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) {
        throw ConfigError(key, key + ": expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(key, key + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key, key + ": expected a string");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, key + ": " + e.what());
  }
}

template <class T>
std::vector<T> get_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, key + ": expected an array");
  std::vector<T> out;
  for (const auto& e : v) out.push_back(get_as<T>(e, key));
  return out;
}

struct Field {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

#define PT_FIELD(name)                                                                  \
  {                                                                                     \
    #name, Field {                                                                      \
      [](const RunConfig& c) { return json(c.name); },                                  \
          [](RunConfig& c, const json& v) { c.name = get_as<decltype(c.name)>(v, #name); } \
    }                                                                                   \
  }

#define PT_LIST_FIELD(name, T)                                                        \
  {                                                                                   \
    #name, Field {                                                                    \
      [](const RunConfig& c) { return json(c.name); },                                \
          [](RunConfig& c, const json& v) { c.name = get_list<T>(v, #name); }         \
    }                                                                                 \
  }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      PT_FIELD(transformer_layers),
      PT_FIELD(transformer_heads),
      PT_FIELD(dropout_attn),
      PT_FIELD(dropout_resid),
      PT_FIELD(dropout_embd),
      PT_FIELD(embedding_dim),
      PT_FIELD(learning_rate),
      PT_FIELD(gradient_update_steps),
      PT_FIELD(batch_size),
      PT_FIELD(grad_clip),
      PT_FIELD(sequence_length),
      PT_FIELD(timestep_embedding),
      PT_FIELD(max_timesteps),
      PT_FIELD(action_noise_scale),
      PT_FIELD(max_trajectory_ratio),
      {"plan_sampling",
       Field{[](const RunConfig& c) { return json(std::string(to_string(c.plan_sampling))); },
             [](RunConfig& c, const json& v) {
               c.plan_sampling =
                   parse_sampling_method(get_as<std::string>(v, "plan_sampling"));
             }}},
      PT_FIELD(plan_actions),
      PT_FIELD(plan_rtg),
      PT_LIST_FIELD(plan_state_indices, std::size_t),
      PT_FIELD(num_planning_tokens),
      PT_FIELD(replanning_interval),
      PT_FIELD(relative_plans),
      {"goal_representation",
       Field{[](const RunConfig& c) {
               return json(std::string(to_string(c.goal_representation)));
             },
             [](RunConfig& c, const json& v) {
               c.goal_representation =
                   parse_goal_mode(get_as<std::string>(v, "goal_representation"));
             }}},
      PT_LIST_FIELD(goal_indices, std::size_t),
      PT_FIELD(alpha),
      PT_FIELD(beta),
      {"target_return",
       Field{[](const RunConfig& c) {
               return c.target_return ? json(*c.target_return) : json(nullptr);
             },
             [](RunConfig& c, const json& v) {
               if (v.is_null()) {
                 c.target_return.reset();
               } else {
                 c.target_return = get_as<double>(v, "target_return");
               }
             }}},
      PT_FIELD(env),
      PT_FIELD(dataset),
      PT_FIELD(dataset_trajectories),
      PT_FIELD(dataset_seed),
      PT_FIELD(maze_segments),
      PT_FIELD(output_dir),
      PT_LIST_FIELD(seeds, std::uint64_t),
      PT_FIELD(eval_rollouts),
  };
  return table;
}

#undef PT_FIELD
#undef PT_LIST_FIELD

const Field* find_field(const std::string& key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return &f;
  }
  return nullptr;
}

json parse_object(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  return doc;
}

}  // namespace

RunConfig default_run_config(const std::string& env) {
  RunConfig c;
  c.env = env;
  c.dataset = "data/" + env + ".jsonl";
  c.output_dir = "runs/" + env;
  if (env.rfind("maze-", 0) == 0) {
    c.dropout_embd = 0.0;
    c.learning_rate = 2e-4;
    c.batch_size = 128;
    c.sequence_length = 10;
    c.action_noise_scale = env == "maze-large" ? 0.20 : 0.35;
    c.gradient_update_steps = env == "maze-large" ? 200000 : 100000;
    c.plan_sampling = SamplingMethod::kLogDistance;
    c.plan_state_indices = {0, 1};
    c.goal_representation = GoalMode::kProjAbsolute;
    c.goal_indices = {0, 1};
    c.dataset_trajectories = 2000;
  } else if (env == "dense-chain") {
    c.dropout_embd = 0.1;
    c.learning_rate = 4e-4;
    c.batch_size = 256;
    c.sequence_length = 20;
    c.action_noise_scale = 0.0;
    c.gradient_update_steps = 100000;
    c.plan_sampling = SamplingMethod::kFixedDistance;
    c.plan_state_indices = {0, 1};
    c.plan_rtg = true;
    c.goal_representation = GoalMode::kNoGoal;
    c.goal_indices.clear();
    c.dataset_trajectories = 1000;
  } else {
    throw ConfigError("env", "unknown environment '" + env + "'");
  }
  return c;
}

std::vector<std::string> run_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, f] : fields()) keys.push_back(name);
  return keys;
}

RunConfig parse_run_config(const std::string& json_text, const RunConfig& base) {
  const json doc = parse_object(json_text);
  RunConfig c = base;
  for (const auto& [key, value] : doc.items()) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError(key, "unknown config key '" + key + "'");
    f->set(c, value);
  }
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  const json doc = parse_object(json_text);
  std::string env = "maze-umaze";
  if (auto it = doc.find("env"); it != doc.end()) env = get_as<std::string>(*it, "env");
  return parse_run_config(json_text, default_run_config(env));
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& cfg) {
  json doc = json::object();
  for (const auto& [name, f] : fields()) doc[name] = f.get(cfg);
  return doc.dump(2);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override '" + assignment + "' must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  const Field* f = find_field(key);
  if (!f) throw ConfigError(key, "unknown config key '" + key + "'");
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  f->set(cfg, value);
}

double default_target_return(const EnvSpec& env, const DatasetStats& stats) {
  if (env.score == ScoreKind::kSuccess) return 1.0;
  return 1.1 * stats.max_return;
}

PTConfig make_model_config(const RunConfig& run, const EnvSpec& env, const DatasetStats& stats) {
  PTConfig c;
  c.n_layers = run.transformer_layers;
  c.n_heads = run.transformer_heads;
  c.d_model = run.embedding_dim;
  c.dropout_attn = run.dropout_attn;
  c.dropout_resid = run.dropout_resid;
  c.dropout_embd = run.dropout_embd;
  c.context_len = run.sequence_length;
  c.n_plan_tokens = run.num_planning_tokens;
  c.replan_interval = run.replanning_interval;
  c.use_timestep_embedding = run.timestep_embedding;
  c.max_timesteps = run.max_timesteps;
  c.state_dim = env.state_dim;
  c.action_dim = env.action_dim;
  c.goal_mode = run.goal_representation;
  if (c.goal_mode != GoalMode::kNoGoal) {
    c.goal_indices = run.goal_indices.empty() ? env.goal_indices : run.goal_indices;
    if (c.goal_indices.empty()) {
      throw ConfigError("goal_representation",
                        "environment " + env.name + " has no goal; use goal_representation none");
    }
  }
  c.plan.state_indices = run.plan_state_indices;
  if (c.plan.state_indices.empty()) {
    for (std::size_t i = 0; i < env.state_dim; ++i) c.plan.state_indices.push_back(i);
  }
  c.plan.include_actions = run.plan_actions;
  c.plan.include_rtg = run.plan_rtg;
  c.sampling = run.plan_sampling;
  c.relative_plans = run.relative_plans;
  c.alpha = run.alpha;
  c.beta = run.beta;
  c.target_return = run.target_return ? *run.target_return : default_target_return(env, stats);
  c.action_noise_scale = run.action_noise_scale;
  c.max_trajectory_ratio = run.max_trajectory_ratio;
  if (run.timestep_embedding && c.max_timesteps < env.horizon) {
    throw ConfigError("max_timesteps", "max_timesteps must cover the horizon of " + env.name);
  }
  if (run.learning_rate <= 0) throw ConfigError("learning_rate", "learning_rate must be > 0");
  if (run.batch_size == 0) throw ConfigError("batch_size", "batch_size must be >= 1");
  c.validate();
  return c;
}

std::string to_json(const PTConfig& c) {
  json doc = {
      {"n_layers", c.n_layers},
      {"n_heads", c.n_heads},
      {"d_model", c.d_model},
      {"dropout_attn", c.dropout_attn},
      {"dropout_resid", c.dropout_resid},
      {"dropout_embd", c.dropout_embd},
      {"context_len", c.context_len},
      {"n_plan_tokens", c.n_plan_tokens},
      {"replan_interval", c.replan_interval},
      {"use_timestep_embedding", c.use_timestep_embedding},
      {"max_timesteps", c.max_timesteps},
      {"state_dim", c.state_dim},
      {"action_dim", c.action_dim},
      {"goal_indices", c.goal_indices},
      {"goal_mode", std::string(to_string(c.goal_mode))},
      {"plan_state_indices", c.plan.state_indices},
      {"plan_actions", c.plan.include_actions},
      {"plan_rtg", c.plan.include_rtg},
      {"sampling", std::string(to_string(c.sampling))},
      {"relative_plans", c.relative_plans},
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"target_return", c.target_return},
      {"action_noise_scale", c.action_noise_scale},
      {"max_trajectory_ratio", c.max_trajectory_ratio},
  };
  return doc.dump();
}

PTConfig model_config_from_json(const std::string& json_text) {
  try {
    const json d = json::parse(json_text);
    PTConfig c;
    c.n_layers = d.at("n_layers").get<std::size_t>();
    c.n_heads = d.at("n_heads").get<std::size_t>();
    c.d_model = d.at("d_model").get<std::size_t>();
    c.dropout_attn = d.at("dropout_attn").get<double>();
    c.dropout_resid = d.at("dropout_resid").get<double>();
    c.dropout_embd = d.at("dropout_embd").get<double>();
    c.context_len = d.at("context_len").get<std::size_t>();
    c.n_plan_tokens = d.at("n_plan_tokens").get<std::size_t>();
    c.replan_interval = d.at("replan_interval").get<std::size_t>();
    c.use_timestep_embedding = d.at("use_timestep_embedding").get<bool>();
    c.max_timesteps = d.at("max_timesteps").get<std::size_t>();
    c.state_dim = d.at("state_dim").get<std::size_t>();
    c.action_dim = d.at("action_dim").get<std::size_t>();
    c.goal_indices = d.at("goal_indices").get<std::vector<std::size_t>>();
    c.goal_mode = parse_goal_mode(d.at("goal_mode").get<std::string>());
    c.plan.state_indices = d.at("plan_state_indices").get<std::vector<std::size_t>>();
    c.plan.include_actions = d.at("plan_actions").get<bool>();
    c.plan.include_rtg = d.at("plan_rtg").get<bool>();
    c.sampling = parse_sampling_method(d.at("sampling").get<std::string>());
    c.relative_plans = d.at("relative_plans").get<bool>();
    c.alpha = d.at("alpha").get<double>();
    c.beta = d.at("beta").get<double>();
    c.target_return = d.at("target_return").get<double>();
    c.action_noise_scale = d.at("action_noise_scale").get<double>();
    c.max_trajectory_ratio = d.at("max_trajectory_ratio").get<double>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model config: ") + e.what());
  }
}

std::string to_json(const DatasetStats& s) {
  json doc = {{"state_mean", s.state_mean}, {"state_std", s.state_std},
              {"return_scale", s.return_scale}, {"max_return", s.max_return},
              {"min_return", s.min_return}};
  return doc.dump();
}

DatasetStats stats_from_json(const std::string& json_text) {
  try {
    const json d = json::parse(json_text);
    DatasetStats s;
    s.state_mean = d.at("state_mean").get<std::vector<double>>();
    s.state_std = d.at("state_std").get<std::vector<double>>();
    s.return_scale = d.at("return_scale").get<double>();
    s.max_return = d.at("max_return").get<double>();
    s.min_return = d.at("min_return").get<double>();
    if (s.state_mean.size() != s.state_std.size()) {
      throw SchemaError("dataset stats: mean and std lengths differ");
    }
    return s;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("dataset stats: ") + e.what());
  }
}

}  // namespace pt
