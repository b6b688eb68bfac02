#include "pt/envs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "pt/errors.hpp"

namespace pt {
namespace {

// Copies of layouts/*.txt so binaries do not depend on the working directory.
constexpr const char* kUmaze =
    "#####\n"
    "#.#G#\n"
    "#.#.#\n"
    "#S..#\n"
    "#####\n";

constexpr const char* kMedium =
    "########\n"
    "#..#..G#\n"
    "#..#.#.#\n"
    "##...#.#\n"
    "#..#...#\n"
    "#.##.#.#\n"
    "#S...#.#\n"
    "########\n";

constexpr const char* kLarge =
    "############\n"
    "#....#....G#\n"
    "#.##.#.##..#\n"
    "#.#..#..#.##\n"
    "#.#.###.#..#\n"
    "#...#...##.#\n"
    "###.#.#....#\n"
    "#...#.####.#\n"
    "#.###....#.#\n"
    "#.#...##...#\n"
    "#S..#....#.#\n"
    "############\n";

std::size_t default_horizon(const std::string& name) {
  if (name == "umaze") return 150;
  if (name == "medium") return 250;
  if (name == "large") return 400;
  return 400;
}

double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

Trajectory build_traj(std::size_t sd, std::size_t ad, std::vector<Real> states,
                      std::vector<Real> actions, std::vector<Real> rewards, bool terminal) {
  return make_trajectory(sd, ad, std::move(states), std::move(actions), std::move(rewards),
                         terminal);
}

}  // namespace

bool MazeLayout::free_at(double x, double y) const {
  if (!(x >= 0 && y >= 0 && x < static_cast<double>(cols) && y < static_cast<double>(rows))) {
    return false;
  }
  const auto col = static_cast<std::size_t>(std::floor(x));
  const auto row = rows - 1 - static_cast<std::size_t>(std::floor(y));
  return !is_wall(row, col);
}

std::array<double, 2> MazeLayout::center(std::size_t row, std::size_t col) const {
  return {static_cast<double>(col) + 0.5, static_cast<double>(rows - 1 - row) + 0.5};
}

std::vector<std::array<std::size_t, 2>> MazeLayout::free_cells() const {
  std::vector<std::array<std::size_t, 2>> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!is_wall(r, c)) out.push_back({r, c});
    }
  }
  return out;
}

std::vector<std::array<std::size_t, 2>> MazeLayout::shortest_path(
    std::array<std::size_t, 2> from, std::array<std::size_t, 2> to) const {
  if (is_wall(from[0], from[1]) || is_wall(to[0], to[1])) return {};
  const std::size_t none = rows * cols;
  std::vector<std::size_t> parent(rows * cols, none);
  const std::size_t src = from[0] * cols + from[1], dst = to[0] * cols + to[1];
  parent[src] = src;
  std::deque<std::size_t> queue = {src};
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    if (cur == dst) break;
    const std::size_t r = cur / cols, c = cur % cols;
    const std::size_t next[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
    for (const auto& n : next) {
      // the border is all wall, so neighbours of free cells stay in range
      const std::size_t id = n[0] * cols + n[1];
      if (is_wall(n[0], n[1]) || parent[id] != none) continue;
      parent[id] = cur;
      queue.push_back(id);
    }
  }
  if (parent[dst] == none) return {};
  std::vector<std::array<std::size_t, 2>> path;
  for (std::size_t cur = dst;; cur = parent[cur]) {
    path.push_back({cur / cols, cur % cols});
    if (cur == src) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::string MazeLayout::to_string() const {
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (r == start[0] && c == start[1]) {
        out += 'S';
      } else if (r == goal[0] && c == goal[1]) {
        out += 'G';
      } else {
        out += is_wall(r, c) ? '#' : '.';
      }
    }
    out += '\n';
  }
  return out;
}

MazeLayout parse_maze_layout(const std::string& text, const std::string& name) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw SchemaError("maze layout '" + name + "' is empty");
  MazeLayout m;
  m.name = name;
  m.rows = lines.size();
  m.cols = lines[0].size();
  m.wall.assign(m.rows * m.cols, 0);
  bool has_start = false, has_goal = false;
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (lines[r].size() != m.cols) {
      throw SchemaError("maze layout '" + name + "': row " + std::to_string(r + 1) + " has " +
                        std::to_string(lines[r].size()) + " columns, expected " +
                        std::to_string(m.cols));
    }
    for (std::size_t c = 0; c < m.cols; ++c) {
      const char ch = lines[r][c];
      switch (ch) {
        case '#': m.wall[r * m.cols + c] = 1; break;
        case '.': break;
        case 'S':
          if (has_start) throw SchemaError("maze layout '" + name + "': more than one S");
          has_start = true;
          m.start = {r, c};
          break;
        case 'G':
          if (has_goal) throw SchemaError("maze layout '" + name + "': more than one G");
          has_goal = true;
          m.goal = {r, c};
          break;
        default:
          throw SchemaError("maze layout '" + name + "': unknown character '" +
                            std::string(1, ch) + "' at row " + std::to_string(r + 1));
      }
      const bool border = r == 0 || c == 0 || r + 1 == m.rows || c + 1 == m.cols;
      if (border && ch != '#') {
        throw SchemaError("maze layout '" + name + "': border cell at row " +
                          std::to_string(r + 1) + " column " + std::to_string(c + 1) +
                          " is not a wall");
      }
    }
  }
  if (!has_start || !has_goal) throw SchemaError("maze layout '" + name + "' needs one S and one G");
  if (m.shortest_path(m.start, m.goal).empty()) {
    throw SchemaError("maze layout '" + name + "': G is unreachable from S");
  }
  return m;
}

MazeLayout load_maze_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open maze layout " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
  return parse_maze_layout(ss.str(), name);
}

MazeLayout builtin_maze_layout(const std::string& size) {
  if (size == "umaze") return parse_maze_layout(kUmaze, size);
  if (size == "medium") return parse_maze_layout(kMedium, size);
  if (size == "large") return parse_maze_layout(kLarge, size);
  throw ContractViolation("unknown maze size '" + size + "' (umaze, medium, large)");
}

MazeWorld::MazeWorld(MazeLayout layout, MazeParams params)
    : layout_(std::move(layout)), params_(params) {
  if (params_.horizon == 0) params_.horizon = default_horizon(layout_.name);
  spec_.name = "maze-" + layout_.name;
  spec_.state_dim = 2;
  spec_.action_dim = 2;
  spec_.goal_indices = {0, 1};
  spec_.horizon = params_.horizon;
  spec_.score = ScoreKind::kSuccess;
  spec_.return_scale = 1.0;
  spec_.random_return = 0.0;
  spec_.expert_return = 1.0;
  const auto c = layout_.center(layout_.start[0], layout_.start[1]);
  x_ = c[0];
  y_ = c[1];
}

std::array<double, 2> MazeWorld::move(std::array<double, 2> pos, double ax, double ay) const {
  const double dx = clip(ax, spec_.action_low, spec_.action_high) * params_.dt;
  const double dy = clip(ay, spec_.action_low, spec_.action_high) * params_.dt;
  if (layout_.free_at(pos[0] + dx, pos[1])) pos[0] += dx;
  if (layout_.free_at(pos[0], pos[1] + dy)) pos[1] += dy;
  return pos;
}

std::vector<Real> MazeWorld::reset(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(-params_.start_jitter, params_.start_jitter);
  const auto c = layout_.center(layout_.start[0], layout_.start[1]);
  x_ = c[0] + jitter(rng);
  y_ = c[1] + jitter(rng);
  t_ = 0;
  done_ = false;
  success_ = false;
  return {static_cast<Real>(x_), static_cast<Real>(y_)};
}

void MazeWorld::set_position(double x, double y) {
  if (!layout_.free_at(x, y)) throw ContractViolation("set_position: point is not free");
  x_ = x;
  y_ = y;
  t_ = 0;
  done_ = false;
  success_ = false;
}

StepResult MazeWorld::step(std::span<const Real> action) {
  if (done_) throw ContractViolation("step() after the episode ended; call reset()");
  if (action.size() != 2) throw DimensionError("maze action needs 2 entries");
  const auto p = move({x_, y_}, action[0], action[1]);
  x_ = p[0];
  y_ = p[1];
  ++t_;
  StepResult r;
  r.state = {static_cast<Real>(x_), static_cast<Real>(y_)};
  const auto g = layout_.center(layout_.goal[0], layout_.goal[1]);
  if (std::hypot(x_ - g[0], y_ - g[1]) <= params_.goal_radius) {
    r.reward = 1;
    success_ = true;
    done_ = true;
  }
  if (t_ >= params_.horizon) done_ = true;
  r.done = done_;
  return r;
}

std::vector<Real> MazeWorld::goal() const {
  const auto g = layout_.center(layout_.goal[0], layout_.goal[1]);
  return {static_cast<Real>(g[0]), static_cast<Real>(g[1])};
}

DenseChain::DenseChain(ChainParams params) : params_(params) {
  spec_.name = "dense-chain";
  spec_.state_dim = 2;
  spec_.action_dim = 1;
  spec_.horizon = params_.horizon;
  spec_.score = ScoreKind::kReturn;
  spec_.return_scale = params_.v_max * params_.dt * static_cast<double>(params_.horizon);
  spec_.random_return = chain_random_return(params_);
  spec_.expert_return = chain_expert_return(params_);
}

std::vector<Real> DenseChain::reset(std::uint64_t) {
  pos_ = 0;
  vel_ = 0;
  t_ = 0;
  done_ = false;
  return {0, 0};
}

StepResult DenseChain::step(std::span<const Real> action) {
  if (done_) throw ContractViolation("step() after the episode ended; call reset()");
  if (action.size() != 1) throw DimensionError("chain action needs 1 entry");
  const double a = clip(action[0], spec_.action_low, spec_.action_high);
  vel_ = clip(vel_ + a * params_.dt, -params_.v_max, params_.v_max);
  pos_ += vel_ * params_.dt;
  ++t_;
  done_ = t_ >= params_.horizon;
  StepResult r;
  r.state = {static_cast<Real>(pos_), static_cast<Real>(vel_)};
  r.reward = static_cast<Real>(vel_ * params_.dt);
  r.done = done_;
  return r;
}

namespace {

template <class Policy>
double chain_episode(const ChainParams& params, Policy policy) {
  double v = 0, ret = 0;
  for (std::size_t t = 0; t < params.horizon; ++t) {
    v = clip(v + clip(policy(v), -1.0, 1.0) * params.dt, -params.v_max, params.v_max);
    ret += static_cast<double>(static_cast<Real>(v * params.dt));
  }
  return ret;
}

}  // namespace

double chain_expert_return(const ChainParams& params) {
  return chain_episode(params, [](double) { return 1.0; });
}

double chain_random_return(const ChainParams& params, std::size_t episodes, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double total = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    total += chain_episode(params, [&](double) { return u(rng); });
  }
  return total / static_cast<double>(episodes);
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "dense-chain") return std::make_unique<DenseChain>();
  if (name.rfind("maze-", 0) == 0) {
    return std::make_unique<MazeWorld>(builtin_maze_layout(name.substr(5)));
  }
  throw ConfigError("env", "unknown environment '" + name + "'");
}

std::vector<std::string> env_names() {
  return {"maze-umaze", "maze-medium", "maze-large", "dense-chain"};
}

double normalized_score(const EnvSpec& spec, double episode_return, bool success) {
  if (spec.score == ScoreKind::kSuccess) return success ? 100.0 : 0.0;
  const double span = spec.expert_return - spec.random_return;
  return clip(100.0 * (episode_return - spec.random_return) / span, 0.0, 110.0);
}

Dataset generate_maze_dataset(const MazeWorld& env, const MazeDataOptions& options) {
  const MazeLayout& layout = env.layout();
  const auto cells = layout.free_cells();
  if (cells.size() < 2) throw ContractViolation("maze needs at least two free cells");
  const std::size_t max_steps = options.max_steps;
  const double radius = env.params().goal_radius;

  Dataset ds;
  ds.env_name = env.spec().name;
  ds.state_dim = 2;
  ds.action_dim = 2;
  ds.return_scale = env.spec().return_scale;
  Rng rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::normal_distribution<double> noise(0.0, options.action_noise);

  std::uniform_int_distribution<std::size_t> segments(1, std::max<std::size_t>(1, options.max_segments));
  while (ds.trajectories.size() < options.n_trajectories) {
    const auto from = cells[pick(rng)];
    // stops[0] is the start cell; consecutive stops differ
    std::vector<std::array<std::size_t, 2>> stops = {from};
    const std::size_t k = segments(rng);
    while (stops.size() < k + 1) {
      const auto c = cells[pick(rng)];
      if (c != stops.back()) stops.push_back(c);
    }
    std::vector<std::array<std::size_t, 2>> path = {from};
    for (std::size_t i = 1; i < stops.size(); ++i) {
      const auto leg = layout.shortest_path(stops[i - 1], stops[i]);
      path.insert(path.end(), leg.begin() + 1, leg.end());
    }
    if (path.size() < 2) continue;

    const auto c0 = layout.center(from[0], from[1]);
    std::array<double, 2> pos = {c0[0] + jitter(rng), c0[1] + jitter(rng)};
    const auto goal = layout.center(stops.back()[0], stops.back()[1]);
    std::vector<Real> states, actions, rewards;
    std::size_t wp = 1;
    bool reached = false;
    for (std::size_t t = 0; t < max_steps && !reached; ++t) {
      auto target = layout.center(path[wp][0], path[wp][1]);
      while (wp + 1 < path.size() &&
             std::hypot(target[0] - pos[0], target[1] - pos[1]) < options.waypoint_tolerance) {
        ++wp;
        target = layout.center(path[wp][0], path[wp][1]);
      }
      double ax = clip(3.0 * (target[0] - pos[0]), -1.0, 1.0) + noise(rng);
      double ay = clip(3.0 * (target[1] - pos[1]), -1.0, 1.0) + noise(rng);
      ax = clip(ax, -1.0, 1.0);
      ay = clip(ay, -1.0, 1.0);
      states.push_back(static_cast<Real>(pos[0]));
      states.push_back(static_cast<Real>(pos[1]));
      actions.push_back(static_cast<Real>(ax));
      actions.push_back(static_cast<Real>(ay));
      pos = env.move(pos, static_cast<Real>(ax), static_cast<Real>(ay));
      // only the final cell counts as arrival
      reached = wp + 1 == path.size() &&
                std::hypot(pos[0] - goal[0], pos[1] - goal[1]) <= radius;
      rewards.push_back(reached ? Real(1) : Real(0));
    }
    ds.trajectories.push_back(build_traj(2, 2, std::move(states), std::move(actions),
                                         std::move(rewards), reached));
  }
  return ds;
}

bool joins_eval_pair(const MazeWorld& env, const Trajectory& traj) {
  if (traj.length() == 0) return false;
  const MazeLayout& m = env.layout();
  const auto s0 = traj.state(0);
  const auto col = static_cast<std::size_t>(std::floor(s0[0]));
  const auto row = m.rows - 1 - static_cast<std::size_t>(std::floor(s0[1]));
  if (row != m.start[0] || col != m.start[1]) return false;
  const auto g = m.center(m.goal[0], m.goal[1]);
  for (std::size_t t = 0; t < traj.length(); ++t) {
    const auto s = traj.state(t);
    if (std::hypot(s[0] - g[0], s[1] - g[1]) <= env.params().goal_radius) return true;
  }
  return false;
}

Dataset generate_chain_dataset(const DenseChain& env, const ChainDataOptions& options) {
  double total = 0;
  for (double w : options.quality_mix) {
    if (w < 0) throw ContractViolation("quality_mix entries must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ContractViolation("quality_mix must sum to 1");

  const ChainParams& p = env.params();
  Dataset ds;
  ds.env_name = env.spec().name;
  ds.state_dim = 2;
  ds.action_dim = 1;
  ds.return_scale = env.spec().return_scale;
  Rng rng(options.seed);
  std::discrete_distribution<int> band(options.quality_mix.begin(), options.quality_mix.end());
  std::normal_distribution<double> noise(0.0, options.action_noise);
  for (std::size_t i = 0; i < options.n_trajectories; ++i) {
    const auto& b = kChainBands[static_cast<std::size_t>(band(rng))];
    const double target = std::uniform_real_distribution<double>(b[0], b[1])(rng);
    DenseChain sim(env);
    auto s = sim.reset(0);
    std::vector<Real> states, actions, rewards;
    for (std::size_t t = 0; t < p.horizon; ++t) {
      const double a = clip(5.0 * (target - s[1]) + noise(rng), -1.0, 1.0);
      states.insert(states.end(), s.begin(), s.end());
      actions.push_back(static_cast<Real>(a));
      const Real act = static_cast<Real>(a);
      auto r = sim.step(std::span<const Real>(&act, 1));
      rewards.push_back(r.reward);
      s = r.state;
    }
    ds.trajectories.push_back(build_traj(2, 1, std::move(states), std::move(actions),
                                         std::move(rewards), false));
  }
  return ds;
}

}  // namespace pt
