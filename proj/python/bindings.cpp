#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pt/errors.hpp"
#include "pt/pipeline.hpp"
#include "pt/plan.hpp"
#include "pt/run_config.hpp"
#include "pt/runtime.hpp"
#include "pt/viz.hpp"

namespace py = pybind11;
using namespace pt;

namespace {

py::object json_loads(const std::string& s) { return py::module_::import("json").attr("loads")(s); }
std::string json_dumps(const py::object& o) {
  return py::module_::import("json").attr("dumps")(o).cast<std::string>();
}

RunConfig run_from(const py::dict& d) {
  // Start from the env's defaults like the CLI does.
  const std::string env = d.contains("env") ? d["env"].cast<std::string>() : "maze-umaze";
  return parse_run_config(json_dumps(d), default_run_config(env));
}

py::array_t<double> to_array(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  py::array_t<double> a({rows, cols});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<Real> to_real(const std::vector<double>& v) { return {v.begin(), v.end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "planning-token transformer for offline RL";
  configure_allocator();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("env_names", &env_names);
  m.def("default_run_config",
        [](const std::string& env) { return json_loads(to_json(default_run_config(env))); });
  m.def("validate_run_config", [](const py::dict& d) { return json_loads(to_json(run_from(d))); },
        "Fills defaults and rejects unknown keys");

  m.def(
      "sample_plan_indices",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> states, std::size_t t0,
         std::size_t n, const std::string& method, std::vector<std::size_t> state_indices) {
        if (states.ndim() != 2) throw DimensionError("states must be 2-D [T, state_dim]");
        const std::size_t T = states.shape(0), sd = states.shape(1);
        std::vector<Real> s(states.data(), states.data() + T * sd);
        auto traj = make_trajectory(sd, 1, std::move(s), std::vector<Real>(T, 0),
                                    std::vector<Real>(T, 0), false);
        PlanFeatureSpec spec;
        if (state_indices.empty()) {
          for (std::size_t i = 0; i < sd; ++i) state_indices.push_back(i);
        }
        spec.state_indices = state_indices;
        return sample_plan_indices(traj, t0, n, parse_sampling_method(method), spec);
      },
      py::arg("states"), py::arg("t0"), py::arg("n"), py::arg("method"),
      py::arg("state_indices") = std::vector<std::size_t>{});

  py::class_<Env, std::shared_ptr<Env>>(m, "Env")
      .def_property_readonly("name", [](const Env& e) { return e.spec().name; })
      .def_property_readonly("state_dim", [](const Env& e) { return e.spec().state_dim; })
      .def_property_readonly("action_dim", [](const Env& e) { return e.spec().action_dim; })
      .def_property_readonly("horizon", [](const Env& e) { return e.spec().horizon; })
      .def("reset", [](Env& e, std::uint64_t seed) {
        auto s = e.reset(seed);
        return std::vector<double>(s.begin(), s.end());
      })
      .def("step", [](Env& e, const std::vector<double>& a) {
        auto r = e.step(to_real(a));
        return py::make_tuple(std::vector<double>(r.state.begin(), r.state.end()), r.reward,
                              r.done);
      })
      .def("goal", [](const Env& e) {
        auto g = e.goal();
        return std::vector<double>(g.begin(), g.end());
      })
      .def_property_readonly("success", &Env::success)
      .def("normalized_score", [](const Env& e, double ret, bool success) {
        return normalized_score(e.spec(), ret, success);
      });
  m.def("make_env", [](const std::string& name) { return std::shared_ptr<Env>(make_env(name)); });

  py::class_<MazeLayout>(m, "MazeLayout")
      .def_readonly("name", &MazeLayout::name)
      .def_readonly("rows", &MazeLayout::rows)
      .def_readonly("cols", &MazeLayout::cols)
      .def("is_wall", &MazeLayout::is_wall)
      .def("shortest_path", &MazeLayout::shortest_path)
      .def("__str__", &MazeLayout::to_string);
  m.def("builtin_maze_layout", &builtin_maze_layout);
  m.def("parse_maze_layout", &parse_maze_layout, py::arg("text"), py::arg("name") = "custom");

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("env_name", &Dataset::env_name)
      .def_readonly("state_dim", &Dataset::state_dim)
      .def_readonly("action_dim", &Dataset::action_dim)
      .def("__len__", [](const Dataset& d) { return d.trajectories.size(); })
      .def("total_steps", &Dataset::total_steps)
      .def("trajectory", [](const Dataset& d, std::size_t i) {
        const auto& t = d.trajectories.at(i);
        py::dict out;
        const auto s = t.states.vec();
        const auto a = t.actions.vec();
        out["states"] = to_array({s.begin(), s.end()}, t.length(), d.state_dim);
        out["actions"] = to_array({a.begin(), a.end()}, t.length(), d.action_dim);
        out["rewards"] = std::vector<double>(t.rewards.begin(), t.rewards.end());
        out["rtg"] = std::vector<double>(t.rtg.begin(), t.rtg.end());
        out["terminal"] = t.terminal;
        return out;
      })
      .def("save", [](const Dataset& d, const std::string& p) { save_dataset(p, d); });
  m.def("load_dataset", &load_dataset);
  m.def("generate_dataset", [](const py::dict& cfg) { return generate_dataset(run_from(cfg)); });

  py::class_<Model>(m, "Model")
      .def_readonly("env_name", &Model::env_name)
      .def_property_readonly("config", [](const Model& mo) { return json_loads(to_json(mo.cfg)); })
      .def("save", [](const Model& mo, const std::string& p) { save_model(p, mo); })
      .def(
          "generate_plan",
          [](const Model& mo, const std::vector<double>& state, double rtg,
             const std::vector<double>& goal) {
            // raw state and goal in
            const auto s = mo.stats.normalize_state(to_real(state));
            const auto g = mo.stats.normalize_goal(to_real(goal), mo.cfg.goal_indices);
            const auto plan = generate_plan(mo, s, static_cast<Real>(rtg / mo.stats.return_scale), g);
            return plan.tokens.empty() ? to_array({}, 0, plan.feature_dim)
                                       : to_array(plan.tokens, plan.n_tokens, plan.feature_dim);
          },
          py::arg("state"), py::arg("rtg"), py::arg("goal"),
          "Plan-space rows for a raw start state (normalised units, relative when configured)");
  m.def("load_model", &load_model);

  m.def(
      "train",
      [](const Dataset& ds, const py::dict& cfg, std::uint64_t seed, std::size_t updates,
         const std::string& checkpoint_dir) {
        TrainOptions opt;
        opt.seed = seed;
        opt.updates = updates;
        opt.checkpoint_dir = checkpoint_dir;
        const RunConfig run = run_from(cfg);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(ds, run, opt);
        }
        std::vector<double> flat;
        for (const auto& rec : r.report.records) {
          flat.insert(flat.end(), {static_cast<double>(rec.step), rec.total, rec.action, rec.plan});
        }
        return py::make_tuple(std::move(r.model), to_array(flat, r.report.records.size(), 4));
      },
      py::arg("dataset"), py::arg("config"), py::arg("seed") = 0, py::arg("updates") = 0,
      py::arg("checkpoint_dir") = "",
      "Returns (model, losses) with loss columns step, total, action, plan");

  py::class_<RolloutRecord>(m, "RolloutRecord")
      .def_readonly("env_name", &RolloutRecord::env_name)
      .def_readonly("seed", &RolloutRecord::seed)
      .def_readonly("success", &RolloutRecord::success)
      .def_readonly("episode_return", &RolloutRecord::episode_return)
      .def_readonly("score", &RolloutRecord::score)
      .def_property_readonly("steps", &RolloutRecord::steps)
      .def_property_readonly("states", [](const RolloutRecord& r) {
        return to_array(r.states, r.steps() + 1, r.state_dim);
      })
      .def_property_readonly("actions", [](const RolloutRecord& r) {
        return to_array(r.actions, r.steps(), r.action_dim);
      })
      .def_readonly("rewards", &RolloutRecord::rewards)
      .def_property_readonly("plan_steps", [](const RolloutRecord& r) {
        std::vector<std::size_t> s;
        for (const auto& p : r.plans) s.push_back(p.step);
        return s;
      })
      .def("to_json", [](const RolloutRecord& r) { return json_loads(r.to_json()); })
      .def("render_plan_overlay", [](const RolloutRecord& r, const MazeLayout& layout) {
        return render_plan_overlay(r, layout);
      })
      .def("render_attention", [](const RolloutRecord& r) {
        if (r.attention.empty()) throw ContractViolation("rollout holds no attention capture");
        return render_attention(r.attention[0].capture, r.attention[0].layout);
      })
      .def("attention_json", [](const RolloutRecord& r) {
        if (r.attention.empty()) throw ContractViolation("rollout holds no attention capture");
        return json_loads(attention_json(r.attention[0].capture, r.attention[0].layout));
      });

  m.def(
      "rollout",
      [](const Model& mo, const std::string& env_name, std::uint64_t seed, std::size_t max_steps,
         bool capture_attention) {
        const auto env = make_env(env_name.empty() ? mo.env_name : env_name);
        RolloutOptions opt;
        opt.max_steps = max_steps;
        opt.capture_attention = capture_attention;
        py::gil_scoped_release release;
        return rollout(mo, *env, seed, opt);
      },
      py::arg("model"), py::arg("env") = "", py::arg("seed") = 0, py::arg("max_steps") = 0,
      py::arg("capture_attention") = false);

  m.def(
      "evaluate",
      [](const std::vector<Model>& models, const std::vector<std::uint64_t>& seeds,
         std::size_t n_rollouts) {
        if (models.empty()) throw ContractViolation("evaluate needs at least one model");
        const auto env = make_env(models.front().env_name);
        EvalSummary s;
        {
          py::gil_scoped_release release;
          s = evaluate(models, seeds, *env, n_rollouts);
        }
        return json_loads(s.to_json());
      },
      py::arg("models"), py::arg("seeds"), py::arg("n_rollouts") = 10);

  m.def("mean_std", [](const std::vector<double>& v) { return mean_std(v); });
}
