#include "pt/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pt/errors.hpp"
#include "pt/plan.hpp"
#include "pt/sequence.hpp"

namespace pt {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "pt-trajectories";
constexpr int kVersion = 1;

std::vector<Real> read_floats(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw SchemaError("line " + std::to_string(line) + ": missing array '" + key + "'");
  }
  std::vector<Real> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) {
      throw SchemaError("line " + std::to_string(line) + ": non-numeric entry in '" + key + "'");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw SchemaError("line " + std::to_string(line) + ": non-finite entry in '" + key + "'");
    }
    out.push_back(static_cast<Real>(d));
  }
  return out;
}

std::size_t read_size(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_unsigned()) {
    throw SchemaError("line " + std::to_string(line) + ": header needs a non-negative integer '" +
                      key + "'");
  }
  return it->get<std::size_t>();
}

}  // namespace

std::vector<Real> compute_rtg(std::span<const Real> rewards) {
  std::vector<Real> rtg(rewards.size());
  Real acc = 0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + acc;
    rtg[t] = acc;
  }
  return rtg;
}

Trajectory make_trajectory(std::size_t state_dim, std::size_t action_dim,
                           std::vector<Real> states, std::vector<Real> actions,
                           std::vector<Real> rewards, bool terminal) {
  const std::size_t length = rewards.size();
  if (length == 0) throw DimensionError("trajectory must have at least one step");
  if (states.size() != length * state_dim) {
    throw DimensionError("states hold " + std::to_string(states.size()) + " values, expected " +
                         std::to_string(length * state_dim));
  }
  if (actions.size() != length * action_dim) {
    throw DimensionError("actions hold " + std::to_string(actions.size()) +
                         " values, expected " + std::to_string(length * action_dim));
  }
  Trajectory traj;
  traj.states = Tensor({length, state_dim}, std::move(states));
  traj.actions = Tensor({length, action_dim}, std::move(actions));
  traj.rtg = compute_rtg(rewards);
  traj.rewards = std::move(rewards);
  traj.terminal = terminal;
  return traj;
}

std::size_t Dataset::total_steps() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.length();
  return n;
}

std::vector<Real> DatasetStats::normalize_state(std::span<const Real> s) const {
  if (s.size() != state_mean.size()) {
    throw DimensionError("state has " + std::to_string(s.size()) + " dims, stats have " +
                         std::to_string(state_mean.size()));
  }
  std::vector<Real> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = static_cast<Real>((s[i] - state_mean[i]) / state_std[i]);
  }
  return out;
}

std::vector<Real> DatasetStats::denormalize_state(std::span<const Real> s) const {
  if (s.size() != state_mean.size()) {
    throw DimensionError("state has " + std::to_string(s.size()) + " dims, stats have " +
                         std::to_string(state_mean.size()));
  }
  std::vector<Real> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = static_cast<Real>(s[i] * state_std[i] + state_mean[i]);
  }
  return out;
}

std::vector<Real> DatasetStats::normalize_goal(std::span<const Real> g,
                                               std::span<const std::size_t> goal_indices) const {
  if (g.size() != goal_indices.size()) {
    throw DimensionError("goal has " + std::to_string(g.size()) + " dims, expected " +
                         std::to_string(goal_indices.size()));
  }
  std::vector<Real> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const std::size_t i = goal_indices[j];
    if (i >= state_mean.size()) throw DimensionError("goal index outside state");
    out[j] = static_cast<Real>((g[j] - state_mean[i]) / state_std[i]);
  }
  return out;
}

DatasetStats compute_stats(const Dataset& dataset) {
  if (dataset.trajectories.empty() || dataset.total_steps() == 0) {
    throw SchemaError("statistics are undefined for an empty dataset");
  }
  const std::size_t sd = dataset.state_dim;
  DatasetStats stats;
  stats.return_scale = dataset.return_scale;
  stats.state_mean.assign(sd, 0.0);
  stats.state_std.assign(sd, 0.0);
  const double count = static_cast<double>(dataset.total_steps());
  for (const auto& traj : dataset.trajectories) {
    for (std::size_t t = 0; t < traj.length(); ++t) {
      const auto s = traj.state(t);
      for (std::size_t i = 0; i < sd; ++i) stats.state_mean[i] += s[i];
    }
  }
  for (auto& m : stats.state_mean) m /= count;
  for (const auto& traj : dataset.trajectories) {
    for (std::size_t t = 0; t < traj.length(); ++t) {
      const auto s = traj.state(t);
      for (std::size_t i = 0; i < sd; ++i) {
        const double d = s[i] - stats.state_mean[i];
        stats.state_std[i] += d * d;
      }
    }
  }
  for (auto& v : stats.state_std) v = std::max(std::sqrt(v / count), kMinStateStd);

  stats.max_return = -std::numeric_limits<double>::infinity();
  stats.min_return = std::numeric_limits<double>::infinity();
  for (const auto& traj : dataset.trajectories) {
    const double ret = std::accumulate(traj.rewards.begin(), traj.rewards.end(), 0.0);
    stats.max_return = std::max(stats.max_return, ret);
    stats.min_return = std::min(stats.min_return, ret);
  }
  return stats;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open " + path + " for writing");
  json header = {{"format", kFormat},
                 {"version", kVersion},
                 {"env_name", dataset.env_name},
                 {"state_dim", dataset.state_dim},
                 {"action_dim", dataset.action_dim},
                 {"return_scale", dataset.return_scale}};
  out << header.dump() << '\n';
  for (const auto& traj : dataset.trajectories) {
    json rec;
    rec["states"] = traj.states.vec();
    rec["actions"] = traj.actions.vec();
    rec["rewards"] = traj.rewards;
    rec["rtg"] = traj.rtg;
    rec["terminal"] = traj.terminal;
    out << rec.dump() << '\n';
  }
  if (!out) throw SchemaError("write to " + path + " failed");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open dataset " + path);
  Dataset dataset;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected a JSON object");
    }
    if (!have_header) {
      if (obj.value("format", std::string()) != kFormat) {
        throw SchemaError("line " + std::to_string(line_no) + ": not a " + kFormat + " header");
      }
      if (obj.value("version", 0) != kVersion) {
        throw SchemaError("line " + std::to_string(line_no) + ": unsupported version");
      }
      dataset.env_name = obj.value("env_name", std::string());
      dataset.state_dim = read_size(obj, "state_dim", line_no);
      dataset.action_dim = read_size(obj, "action_dim", line_no);
      if (dataset.state_dim == 0 || dataset.action_dim == 0) {
        throw SchemaError("line " + std::to_string(line_no) + ": dimensions must be positive");
      }
      auto rs = obj.find("return_scale");
      if (rs == obj.end() || !rs->is_number() || !(rs->get<double>() > 0.0)) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": header needs a positive 'return_scale'");
      }
      dataset.return_scale = rs->get<double>();
      have_header = true;
      continue;
    }
    const std::size_t index = dataset.trajectories.size();
    const std::string where =
        "line " + std::to_string(line_no) + " (trajectory " + std::to_string(index) + ")";
    auto states = read_floats(obj, "states", line_no);
    auto actions = read_floats(obj, "actions", line_no);
    auto rewards = read_floats(obj, "rewards", line_no);
    const std::size_t length = rewards.size();
    if (length == 0) throw SchemaError(where + ": empty trajectory");
    if (states.size() != length * dataset.state_dim) {
      throw SchemaError(where + ": states hold " + std::to_string(states.size()) +
                        " values, expected " + std::to_string(length * dataset.state_dim));
    }
    if (actions.size() != length * dataset.action_dim) {
      throw SchemaError(where + ": actions hold " + std::to_string(actions.size()) +
                        " values, expected " + std::to_string(length * dataset.action_dim));
    }
    bool terminal = false;
    if (auto it = obj.find("terminal"); it != obj.end()) {
      if (!it->is_boolean()) throw SchemaError(where + ": 'terminal' must be a boolean");
      terminal = it->get<bool>();
    }
    Trajectory traj = make_trajectory(dataset.state_dim, dataset.action_dim, std::move(states),
                                      std::move(actions), std::move(rewards), terminal);
    if (obj.contains("rtg")) {
      const auto stored = read_floats(obj, "rtg", line_no);
      if (stored != traj.rtg) {
        throw SchemaError(where + ": stored returns-to-go do not match the rewards");
      }
    }
    dataset.trajectories.push_back(std::move(traj));
  }
  return dataset;
}

TrainingData prepare_training_data(const Dataset& dataset) {
  TrainingData data;
  data.stats = compute_stats(dataset);
  const Real inv_scale = static_cast<Real>(1.0 / dataset.return_scale);
  std::size_t total = 0;
  for (const auto& src : dataset.trajectories) {
    Trajectory traj;
    std::vector<Real> states;
    states.reserve(src.states.size());
    for (std::size_t t = 0; t < src.length(); ++t) {
      auto s = data.stats.normalize_state(src.state(t));
      states.insert(states.end(), s.begin(), s.end());
    }
    traj.states = Tensor(src.states.shape(), std::move(states));
    traj.actions = src.actions;
    traj.rewards = src.rewards;
    traj.rtg = src.rtg;
    for (auto& r : traj.rewards) r *= inv_scale;
    for (auto& r : traj.rtg) r *= inv_scale;
    traj.terminal = src.terminal;
    total += traj.length();
    data.cumulative_steps.push_back(total);
    data.trajectories.push_back(std::move(traj));
  }
  return data;
}

std::size_t sample_trajectory_index(const TrainingData& data, Rng& rng) {
  if (data.cumulative_steps.empty() || data.cumulative_steps.back() == 0) {
    throw ContractViolation("cannot sample from an empty dataset");
  }
  std::uniform_int_distribution<std::size_t> pick(0, data.cumulative_steps.back() - 1);
  const std::size_t step = pick(rng);
  auto it = std::upper_bound(data.cumulative_steps.begin(), data.cumulative_steps.end(), step);
  return static_cast<std::size_t>(it - data.cumulative_steps.begin());
}

std::size_t sample_window_start(std::size_t length, double max_trajectory_ratio, Rng& rng) {
  if (length == 0) throw ContractViolation("window start on an empty trajectory");
  const auto cap = static_cast<std::size_t>(
      std::floor(max_trajectory_ratio * static_cast<double>(length - 1)));
  std::uniform_int_distribution<std::size_t> pick(0, std::min(cap, length - 1));
  return pick(rng);
}

std::vector<TokenSequence> sample_batch(const TrainingData& data, const PTConfig& cfg,
                                        const BatchSpec& spec) {
  if (spec.batch_size == 0) throw ContractViolation("batch size must be >= 1");
  Rng rng(spec.seed);
  std::vector<TokenSequence> batch;
  batch.reserve(spec.batch_size);
  const std::size_t n = cfg.plan_tokens();
  for (std::size_t b = 0; b < spec.batch_size; ++b) {
    const Trajectory& traj = data.trajectories[sample_trajectory_index(data, rng)];
    const std::size_t t0 = sample_window_start(traj.length(), cfg.max_trajectory_ratio, rng);
    Plan plan;
    if (n > 0) {
      const auto idx = sample_plan_indices(traj, t0, n, cfg.sampling, cfg.plan);
      plan = extract_plan(traj, idx, cfg.plan, traj.rtg);
      if (cfg.relative_plans) plan = make_relative(std::move(plan), traj.state(t0), cfg.plan);
    }
    std::vector<Real> goal;
    const auto last = traj.state(traj.length() - 1);
    for (std::size_t i : cfg.goal_indices) goal.push_back(last[i]);
    batch.push_back(build_training_sequence(traj, t0, plan, goal, cfg));
  }
  return batch;
}

}  // namespace pt
