#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rlens/analysis.hpp"
#include "rlens/equivalence.hpp"
#include "rlens/experiment.hpp"
#include "rlens/optimize.hpp"
#include "rlens/policy.hpp"
#include "rlens/viz.hpp"

namespace py = pybind11;
using namespace rlens;

namespace {

GridSpec make_spec(int width, int height, std::pair<int, int> goal,
                   const std::vector<std::pair<int, int>>& terminal, int horizon) {
  GridSpec spec;
  spec.width = width;
  spec.height = height;
  spec.goal = {goal.first, goal.second};
  for (const auto& [x, y] : terminal) spec.terminal_cells.push_back({x, y});
  spec.horizon = horizon;
  spec.validate();
  return spec;
}

CostSpec make_cost(const std::string& family, const std::string& penalty) {
  return {cost_family_from_name(family), penalty_kind_from_name(penalty)};
}

OptimizeConfig make_opt_config(int steps, int batch_size, double learning_rate,
                               const std::string& optimizer, std::uint64_t seed, int log_every) {
  OptimizeConfig cfg;
  cfg.steps = steps;
  cfg.batch_size = batch_size;
  cfg.learning_rate = learning_rate;
  cfg.optimizer = optimizer_kind_from_name(optimizer);
  cfg.seed = seed;
  cfg.log_every = log_every;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reward preprocessing: shaping-equivalent simplification of reward functions";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<DiagnosticError>(m, "DiagnosticError", PyExc_RuntimeError);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init(&make_spec), py::arg("width") = 10, py::arg("height") = 10,
           py::arg("goal") = std::pair<int, int>{9, 9},
           py::arg("terminal") = std::vector<std::pair<int, int>>{}, py::arg("horizon") = 50)
      .def_readonly("width", &GridSpec::width)
      .def_readonly("height", &GridSpec::height)
      .def_property_readonly(
          "goal", [](const GridSpec& s) { return std::pair<int, int>{s.goal.x, s.goal.y}; })
      .def("num_states", &GridSpec::num_states)
      .def("state_index",
           [](const GridSpec& s, int x, int y) { return s.state_index({x, y}); });

  py::class_<Transition>(m, "Transition")
      .def_readonly("s", &Transition::s)
      .def_readonly("a", &Transition::a)
      .def_readonly("s_next", &Transition::s_next)
      .def("__repr__", [](const Transition& t) {
        return "Transition(s=" + std::to_string(t.s) + ", a=" + std::to_string(t.a) +
               ", s_next=" + std::to_string(t.s_next) + ")";
      });

  py::class_<TabularReward>(m, "TabularReward")
      .def_readonly("width", &TabularReward::width)
      .def_readonly("height", &TabularReward::height)
      .def_readonly("gamma", &TabularReward::gamma)
      .def_readonly("values", &TabularReward::values)
      .def("value", py::overload_cast<int, int>(&TabularReward::value, py::const_),
           py::arg("s"), py::arg("a"));

  m.def("enumerate_transitions", &enumerate_transitions, py::arg("spec"));
  m.def("goal_reward", &goal_reward, py::arg("spec"), py::arg("gamma") = 0.99);
  m.def("path_reward", &path_reward, py::arg("spec"), py::arg("gamma") = 0.99);
  m.def("manhattan_potential", &manhattan_potential, py::arg("spec"), py::arg("sign") = 1);
  m.def("random_potential", &random_potential, py::arg("spec"), py::arg("seed"),
        py::arg("scale") = 5.0);

  m.def(
      "apply_shaping",
      [](const TabularReward& r, const std::vector<double>& phi, double gamma) {
        GridSpec spec{r.width, r.height, {r.width - 1, r.height - 1}, {}, 50};
        auto shaped = apply_shaping(std::make_shared<TabularRewardSource>(r), phi, gamma);
        TabularReward out = r;
        out.gamma = gamma;
        out.values = shaped->evaluate_all(std::span<const Transition>(r.transitions));
        return out;
      },
      py::arg("reward"), py::arg("phi"), py::arg("gamma"));

  m.def(
      "add_noise",
      [](const TabularReward& r, double sigma, std::uint64_t seed) {
        auto noisy = add_noise(std::make_shared<TabularRewardSource>(r), sigma, seed);
        TabularReward out = r;
        out.values = noisy->evaluate_all(std::span<const Transition>(r.transitions));
        return out;
      },
      py::arg("reward"), py::arg("sigma"), py::arg("seed"));

  m.def(
      "sparsity_cost",
      [](const TabularReward& r, const std::string& penalty) {
        const TabularRewardSource src(r);
        return sparsity_cost(src, std::span<const Transition>(r.transitions),
                             penalty_kind_from_name(penalty))
            .j;
      },
      py::arg("reward"), py::arg("penalty") = "l1");

  m.def(
      "smoothness_cost",
      [](const TabularReward& r, const std::string& penalty) {
        GridSpec spec{r.width, r.height, {r.width - 1, r.height - 1}, {}, 50};
        const CostSpec cost{CostFamily::Smooth, penalty_kind_from_name(penalty)};
        return grid_cost(TabularRewardSource(r), spec, cost);
      },
      py::arg("reward"), py::arg("penalty") = "l1");

  m.def(
      "preprocess",
      [](const TabularReward& r, const GridSpec& spec, const std::string& family,
         const std::string& penalty, int steps, int batch_size, double learning_rate,
         const std::string& optimizer, std::uint64_t seed, int log_every) {
        std::vector<int> mask;
        for (const Cell& c : spec.terminal_cells) mask.push_back(spec.state_index(c));
        auto model = std::make_unique<TabularPotential>(spec.num_states(), mask);
        auto result = preprocess_grid(std::make_shared<TabularRewardSource>(r), spec,
                                      std::move(model), r.gamma, make_cost(family, penalty),
                                      make_opt_config(steps, batch_size, learning_rate, optimizer,
                                                      seed, log_every));
        const TabularReward preprocessed =
            TabularReward::from_source(spec, *result.preprocessed, r.gamma);
        py::dict out;
        out["potential"] =
            static_cast<const TabularPotential&>(*result.potential).table();
        out["preprocessed"] = preprocessed;
        out["final_cost"] = result.final_cost;
        out["cost_trace"] = result.cost_trace;
        return out;
      },
      py::arg("reward"), py::arg("spec"), py::arg("family") = "sparse",
      py::arg("penalty") = "l1", py::arg("steps") = 2000, py::arg("batch_size") = 0,
      py::arg("learning_rate") = 0.05, py::arg("optimizer") = "adam", py::arg("seed") = 0,
      py::arg("log_every") = 50);

  m.def(
      "check_shaping_equiv",
      [](const TabularReward& r, const TabularReward& r_prime, double gamma, double tol) {
        return check_shaping_equiv(r, r_prime, gamma, tol);
      },
      py::arg("reward"), py::arg("other"), py::arg("gamma") = 0.99, py::arg("tol") = 1e-6);

  m.def("recover_potential", &recover_potential, py::arg("reward"), py::arg("other"),
        py::arg("gamma") = 0.99);

  m.def(
      "greedy_policy",
      [](const GridSpec& spec, const TabularReward& r, double gamma, double tie_tol) {
        return greedy_policy(value_iteration(spec, r, gamma), tie_tol);
      },
      py::arg("spec"), py::arg("reward"), py::arg("gamma") = 0.99, py::arg("tie_tol") = 1e-9);

  m.def("goal_mass_fraction", &goal_mass_fraction, py::arg("reward"), py::arg("spec"));

  m.def(
      "mc_rollout_expert",
      [](int n_episodes, int max_steps, std::uint64_t seed) {
        const auto trajectories = mc_rollout(mc_expert, n_episodes, max_steps, seed);
        py::list episodes;
        for (const auto& traj : trajectories) {
          py::list steps;
          for (std::size_t t = 0; t < traj.length(); ++t) {
            steps.append(py::make_tuple(traj.states[t].position, traj.states[t].velocity,
                                        traj.actions[t]));
          }
          episodes.append(steps);
        }
        return episodes;
      },
      py::arg("n_episodes") = 5, py::arg("max_steps") = 300, py::arg("seed") = 0);

  m.def(
      "heatmap_svg",
      [](const TabularReward& r, const GridSpec& spec) {
        const HeatmapDoc doc = render_grid_heatmap(r, spec);
        return py::make_tuple(doc.document(), doc.csv);
      },
      py::arg("reward"), py::arg("spec"));

  m.def(
      "timeline_svg",
      [](const std::vector<std::vector<double>>& episodes, const std::string& label) {
        const TimelineDoc doc = render_timeline(episodes, label);
        return py::make_tuple(doc.document(), doc.csv);
      },
      py::arg("rewards_per_episode"), py::arg("label") = "");

  m.def(
      "save_tabular",
      [](const TabularReward& r, const std::string& path) { save_tabular(r, path); },
      py::arg("reward"), py::arg("path"));
  m.def(
      "load_tabular", [](const std::string& path) { return load_tabular(path); },
      py::arg("path"));
}
