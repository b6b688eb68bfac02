// pt: gen-data, train, eval, ablate, viz-plan, viz-attn.
// Exit codes: 0 ok, 1 bad input (config, missing file, schema), 2 runtime failure.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pt/errors.hpp"
#include "pt/log.hpp"
#include "pt/pipeline.hpp"
#include "pt/run_config.hpp"
#include "pt/runtime.hpp"
#include "pt/viz.hpp"

namespace fs = std::filesystem;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::vector<std::string> sets;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "run config JSON");
  cmd->add_option("-s,--set", c.sets, "override, key=value (repeatable)");
  cmd->add_flag("-v,--verbose", c.verbose, "progress logging");
}

pt::RunConfig resolve(const Common& c) {
  pt::RunConfig run;
  if (!c.config.empty()) {
    if (!fs::exists(c.config)) throw InputError("config file not found: " + c.config);
    run = pt::load_run_config(c.config);
  }
  // "env" first so the other overrides land on that environment's defaults
  // when no config file was given.
  if (c.config.empty()) {
    for (const auto& s : c.sets) {
      if (s.rfind("env=", 0) == 0) {
        pt::RunConfig tmp;
        pt::apply_override(tmp, s);
        run = pt::default_run_config(tmp.env);
      }
    }
  }
  for (const auto& s : c.sets) pt::apply_override(run, s);
  return run;
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) throw InputError(what + " not found: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string seed_dir(const pt::RunConfig& run, std::uint64_t seed) {
  return (fs::path(run.output_dir) / ("seed_" + std::to_string(seed))).string();
}

std::vector<std::uint64_t> pick_seeds(const pt::RunConfig& run,
                                      const std::vector<std::uint64_t>& cli) {
  return cli.empty() ? run.seeds : cli;
}

int cmd_gen_data(const Common& c, std::string out) {
  auto run = resolve(c);
  if (out.empty()) out = run.dataset;
  const auto ds = pt::generate_dataset(run);
  const fs::path p(out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  pt::save_dataset(out, ds);
  std::cout << "wrote " << ds.trajectories.size() << " trajectories (" << ds.total_steps()
            << " steps) to " << out << '\n';
  return 0;
}

int cmd_train(const Common& c, const std::vector<std::uint64_t>& seeds_cli, std::size_t updates) {
  auto run = resolve(c);
  require_file(run.dataset, "dataset");
  const auto ds = pt::load_dataset(run.dataset);
  for (auto seed : pick_seeds(run, seeds_cli)) {
    pt::TrainOptions opt;
    opt.seed = seed;
    opt.updates = updates;
    opt.checkpoint_dir = seed_dir(run, seed);
    opt.verbose = c.verbose;
    const auto res = pt::train(ds, run, opt);
    const auto csv = (fs::path(opt.checkpoint_dir) / "train.csv").string();
    res.report.write_csv(csv);
    write_text((fs::path(opt.checkpoint_dir) / "run.json").string(), pt::to_json(run));
    const auto& last = res.report.records.back();
    std::cout << "seed " << seed << ": " << res.report.records.size() << " updates, loss "
              << last.total << " (action " << last.action << ", plan " << last.plan << "), "
              << opt.checkpoint_dir << "/final.ckpt\n";
  }
  return 0;
}

int cmd_eval(const Common& c, std::vector<std::string> ckpts,
             const std::vector<std::uint64_t>& seeds_cli, std::size_t rollouts, std::string out) {
  auto run = resolve(c);
  auto seeds = pick_seeds(run, seeds_cli);
  if (ckpts.empty()) {
    for (auto s : seeds) ckpts.push_back((fs::path(seed_dir(run, s)) / "final.ckpt").string());
  } else if (seeds_cli.empty()) {
    seeds.clear();
    for (std::size_t i = 0; i < ckpts.size(); ++i) seeds.push_back(i);
  }
  if (seeds.size() != ckpts.size()) {
    throw pt::ConfigError("seeds", "got " + std::to_string(ckpts.size()) + " checkpoints for " +
                                       std::to_string(seeds.size()) + " seeds");
  }
  std::vector<pt::Model> models;
  for (const auto& p : ckpts) {
    require_file(p, "checkpoint");
    models.push_back(pt::load_model(p));
  }
  const auto env = pt::make_env(models.front().env_name);
  for (const auto& m : models) {
    if (m.env_name != models.front().env_name) {
      throw InputError("checkpoints disagree on env: " + m.env_name + " vs " +
                       models.front().env_name);
    }
  }
  pt::RolloutOptions ro;
  if (run.target_return) ro.target_return = *run.target_return;
  const auto summary =
      pt::evaluate(models, seeds, *env, rollouts ? rollouts : run.eval_rollouts, ro);
  if (out.empty()) out = (fs::path(run.output_dir) / "scores.json").string();
  write_text(out, summary.to_json() + "\n");
  std::cout << summary.env_name << ": " << summary.mean << " +/- " << summary.std << " -> " << out
            << '\n';
  return 0;
}

int cmd_ablate(const Common& c, const std::vector<std::string>& axes_s, std::size_t updates,
               std::size_t rollouts, std::string out) {
  auto run = resolve(c);
  require_file(run.dataset, "dataset");
  std::vector<pt::AblationAxis> axes;
  for (const auto& a : axes_s) {
    try {
      axes.push_back(pt::parse_ablation_axis(a));
    } catch (const std::exception&) {
      throw pt::ConfigError("axes", "unknown ablation axis '" + a + "'");
    }
  }
  const auto ds = pt::load_dataset(run.dataset);
  const auto rows = pt::run_ablation(ds, run, axes, {updates, rollouts}, c.verbose);
  if (out.empty()) out = (fs::path(run.output_dir) / "ablation.md").string();
  const auto md = pt::ablation_markdown(rows);
  write_text(out, md);
  write_text((fs::path(out).replace_extension(".csv")).string(), pt::ablation_csv(rows));
  std::cout << md;
  return 0;
}

struct VizArgs {
  std::string checkpoint;
  std::uint64_t seed = 0;
  std::size_t max_steps = 0;
  std::string out;
  std::string record_out;
  std::string json_out;
};

struct VizRun {
  std::unique_ptr<pt::Env> env;
  pt::RolloutRecord record;
};

VizRun viz_rollout(const Common& c, const VizArgs& v, bool attention) {
  auto run = resolve(c);
  std::string ckpt = v.checkpoint;
  if (ckpt.empty()) {
    ckpt = (fs::path(seed_dir(run, run.seeds.empty() ? 0 : run.seeds.front())) / "final.ckpt")
               .string();
  }
  require_file(ckpt, "checkpoint");
  const auto model = pt::load_model(ckpt);
  VizRun r{pt::make_env(model.env_name), {}};
  pt::RolloutOptions ro;
  ro.max_steps = v.max_steps;
  ro.capture_attention = attention;
  if (run.target_return) ro.target_return = *run.target_return;
  r.record = pt::rollout(model, *r.env, v.seed, ro);
  if (!v.record_out.empty()) write_text(v.record_out, r.record.to_json() + "\n");
  return r;
}

int cmd_viz_plan(const Common& c, const VizArgs& v) {
  const auto r = viz_rollout(c, v, false);
  const auto* maze = dynamic_cast<const pt::MazeWorld*>(r.env.get());
  if (!maze) throw pt::ConfigError("env", "plan overlay needs a maze environment, got " +
                                              r.record.env_name);
  const auto& rec = r.record;
  const std::string out = v.out.empty() ? "plan.svg" : v.out;
  write_text(out, pt::render_plan_overlay(rec, maze->layout()));
  std::cout << rec.steps() << " steps, " << rec.plans.size() << " plans, success "
            << (rec.success ? "yes" : "no") << " -> " << out << '\n';
  return 0;
}

int cmd_viz_attn(const Common& c, const VizArgs& v) {
  const auto r = viz_rollout(c, v, true);
  const auto& rec = r.record;
  if (rec.attention.empty()) {
    throw InputError("no attention captured: the episode ended before step rho - 1");
  }
  const auto& snap = rec.attention.front();
  const std::string out = v.out.empty() ? "attention.svg" : v.out;
  write_text(out, pt::render_attention(snap.capture, snap.layout));
  if (!v.json_out.empty()) write_text(v.json_out, pt::attention_json(snap.capture, snap.layout));
  std::cout << "attention at step " << snap.step << ", " << snap.capture.length << " tokens -> "
            << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  pt::configure_allocator();
  CLI::App app{"pt: plan-conditioned sequence models for offline RL"};
  app.require_subcommand(1);

  Common common;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::size_t updates = 0, rollouts = 0;
  std::vector<std::string> ckpts, axes;
  VizArgs viz;

  auto* gen = app.add_subcommand("gen-data", "generate the scripted dataset");
  add_common(gen, common);
  gen->add_option("-o,--out", out, "dataset path (default: run.dataset)");

  auto* tr = app.add_subcommand("train", "train one model per seed");
  add_common(tr, common);
  tr->add_option("--seed", seeds, "training seeds (default: run.seeds)");
  tr->add_option("--updates", updates, "gradient updates (default: run value)");

  auto* ev = app.add_subcommand("eval", "score checkpoints");
  add_common(ev, common);
  ev->add_option("--checkpoint", ckpts, "checkpoint files (default: <output_dir>/seed_<s>/final.ckpt)");
  ev->add_option("--seed", seeds, "training seed of each checkpoint");
  ev->add_option("--rollouts", rollouts, "rollouts per seed (default: run.eval_rollouts)");
  ev->add_option("-o,--out", out, "scores JSON (default: <output_dir>/scores.json)");

  auto* ab = app.add_subcommand("ablate", "train and score ablation variants");
  add_common(ab, common);
  ab->add_option("--axes", axes, "sampling, relative, goal, plan_actions")->delimiter(',');
  ab->add_option("--updates", updates, "updates per run (default: run value)");
  ab->add_option("--rollouts", rollouts, "rollouts per seed (default: run value)");
  ab->add_option("-o,--out", out, "Markdown table (default: <output_dir>/ablation.md)");

  auto add_viz = [&](CLI::App* cmd) {
    add_common(cmd, common);
    cmd->add_option("--checkpoint", viz.checkpoint, "checkpoint (default: first seed's final.ckpt)");
    cmd->add_option("--rollout-seed", viz.seed, "environment seed");
    cmd->add_option("--max-steps", viz.max_steps, "episode cap (default: horizon)");
    cmd->add_option("-o,--out", viz.out, "SVG path");
    cmd->add_option("--record", viz.record_out, "also write the rollout record JSON");
  };
  auto* vp = app.add_subcommand("viz-plan", "draw a rollout with its plans");
  add_viz(vp);
  auto* va = app.add_subcommand("viz-attn", "attention heatmap at the first replan window");
  add_viz(va);
  va->add_option("--json", viz.json_out, "also dump weights and RGB values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  pt::set_log_level(common.verbose ? pt::LogLevel::kInfo : pt::LogLevel::kWarning);

  try {
    if (*gen) return cmd_gen_data(common, out);
    if (*tr) return cmd_train(common, seeds, updates);
    if (*ev) return cmd_eval(common, ckpts, seeds, rollouts, out);
    if (*ab) return cmd_ablate(common, axes, updates, rollouts, out);
    if (*vp) return cmd_viz_plan(common, viz);
    if (*va) return cmd_viz_attn(common, viz);
  } catch (const pt::ConfigError& e) {
    std::cerr << "config error [" << e.key() << "]: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const pt::SchemaError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const pt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
