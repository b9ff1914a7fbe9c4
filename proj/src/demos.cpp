#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "rlens/analysis.hpp"
#include "rlens/equivalence.hpp"
#include "rlens/experiment.hpp"
#include "rlens/policy.hpp"
#include "rlens/viz.hpp"

namespace rlens {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
}

bool check(bool ok, const std::string& what, int& failures) {
  std::cout << (ok ? "  [ok]   " : "  [FAIL] ") << what << "\n";
  if (!ok) ++failures;
  return ok;
}

// --- gridworld demos (goal / path figure sheets) ---

ExperimentConfig grid_demo_config(const std::string& base, const std::string& name,
                                  const CliOverrides& overrides) {
  ExperimentConfig c;
  c.seed = overrides.seed.value_or(7);
  c.seed_set = true;
  c.out = overrides.out.value_or("runs/" + name);
  c.gamma = 0.99;
  c.grid = GridSpec{10, 10, {9, 9}, {}, 50};
  c.base_reward = base;
  c.shapings = {{"none", 1, 0, 5.0},
                {"manhattan", 1, 0, 5.0},
                {"manhattan", -1, 0, 5.0},
                {"random", 1, 1, 5.0}};
  c.costs = {{CostFamily::Sparse, PenaltyKind::L1}, {CostFamily::Smooth, PenaltyKind::Log1pAbs}};
  c.potential_kind = "tabular";
  c.optimize.steps = overrides.steps.value_or(base == "path" ? 60000 : 20000);
  c.optimize.batch_size = 0;  // full batch
  c.optimize.learning_rate = 0.05;
  c.optimize.optimizer = OptimizerKind::Adam;
  c.optimize.log_every = 50;
  c.optimize.seed = c.seed;
  return c;
}

int run_grid_demo(const std::string& base, const std::string& name,
                  const CliOverrides& overrides) {
  const ExperimentConfig c = grid_demo_config(base, name, overrides);
  int rc = cmd_generate(c);
  if (rc != kExitOk) return rc;
  rc = cmd_preprocess(c);
  if (rc != kExitOk) return rc;
  rc = cmd_render(c);
  if (rc != kExitOk) return rc;

  // Pipeline checks: the sparsity-preprocessed column must reach the base
  // reward's own cost level and keep the base reward's behaviour.
  const TabularReward base_table =
      base == "goal" ? goal_reward(c.grid, c.gamma) : path_reward(c.grid, c.gamma);
  const CostSpec sparse_l1{CostFamily::Sparse, PenaltyKind::L1};
  const double target = grid_cost(TabularRewardSource(base_table), c.grid, sparse_l1);

  int failures = 0;
  for (const ShapingDesc& s : c.shapings) {
    const fs::path bundle = resolve_out_dir(c.out) / "bundles" / (s.label() + "__sparse-l1");
    const TabularReward preprocessed = load_tabular(bundle / "preprocessed.json");
    const TabularReward input =
        load_tabular(resolve_out_dir(c.out) / "rewards" / (s.label() + ".json"));
    const double cost = grid_cost(TabularRewardSource(preprocessed), c.grid, sparse_l1);
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%s: sparse-l1 cost %.6g (target %.6g)", s.label().c_str(),
                  cost, target);
    check(cost <= 1.05 * target, buf, failures);

    if (base == "goal") {
      const double mass = goal_mass_fraction(preprocessed, c.grid);
      std::snprintf(buf, sizeof(buf), "%s: %.1f%% of L1 mass on goal transitions",
                    s.label().c_str(), 100.0 * mass);
      check(mass >= 0.9, buf, failures);
    } else {
      const PolicyCheck pc = optimal_policy_check(base_table, preprocessed, c.grid, c.gamma);
      std::snprintf(buf, sizeof(buf), "%s: greedy policy matches the original (q_gap %.3g)",
                    s.label().c_str(), pc.q_gap);
      check(pc.match, buf, failures);
    }

    const auto [equiv, residual] = check_shaping_equiv(input, preprocessed, c.gamma, 1e-6);
    std::snprintf(buf, sizeof(buf), "%s: shaping-equivalent to its input (residual %.3g)",
                  s.label().c_str(), residual);
    check(equiv, buf, failures);
  }
  return failures == 0 ? kExitOk : kExitCheckFailed;
}

// --- mountain car demos (timeline sheets) ---

struct McRow {
  std::string label;
  std::shared_ptr<const McRewardSource> input;
  PotentialKind potential;
  bool check_recovery = false;       // match ground truth up to a constant
  double min_reduction = -1.0;       // sparse-log cost drop on the eval pool
};

struct McDemoSettings {
  double gamma = 0.99;
  int value_resolution = 32;
  int train_episodes = 16;
  int eval_episodes = 5;
  int max_steps = 300;
  std::uint64_t train_seed = 101;
  std::uint64_t eval_seed = 202;
  int linear_steps = 6000;
  int mlp_steps = 40000;
};

std::unique_ptr<PotentialModel> make_mc_model(PotentialKind kind, std::uint64_t seed) {
  if (kind == PotentialKind::Linear) return std::make_unique<LinearPotential>(2);
  return std::make_unique<MlpPotential>(std::vector<int>{2, 64, 64, 1}, seed);
}

OptimizeConfig mc_optimize_config(PotentialKind kind, const McDemoSettings& st,
                                  std::uint64_t seed, const CliOverrides& overrides) {
  OptimizeConfig cfg;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.batch_size = 256;
  cfg.log_every = 200;
  cfg.seed = seed;
  if (kind == PotentialKind::Linear) {
    cfg.steps = st.linear_steps;
    cfg.learning_rate = 0.01;
  } else {
    cfg.steps = st.mlp_steps;
    cfg.learning_rate = 1e-3;
  }
  if (overrides.steps) cfg.steps = *overrides.steps;
  return cfg;
}

int run_mc_demo(const std::string& name, std::vector<McRow> rows, const McDemoSettings& st,
                const CliOverrides& overrides) {
  const std::uint64_t seed = overrides.seed.value_or(7);
  const fs::path out = resolve_out_dir(overrides.out.value_or("runs/" + name));
  std::error_code ec;
  fs::create_directories(out / "csv", ec);
  fs::create_directories(out / "potentials", ec);

  const auto train = mc_rollout(mc_expert, st.train_episodes, st.max_steps, st.train_seed);
  const auto eval = mc_rollout(mc_expert, st.eval_episodes, st.max_steps, st.eval_seed);
  {
    std::ofstream os(out / "trajectories.csv");
    if (!os) throw IoError("cannot open trajectories.csv");
    write_trajectories_csv(eval, os);
  }
  const auto gt = mc_ground_truth();
  const auto gt_timeline = reward_over_time(*gt, eval);

  const std::vector<CostSpec> cost_specs = {{CostFamily::Sparse, PenaltyKind::Log1pAbs},
                                            {CostFamily::Smooth, PenaltyKind::Log1pAbs}};
  const std::vector<std::string> col_titles = {"original", "sparse-log", "smooth-log"};

  int failures = 0;
  json metrics;
  std::vector<std::vector<VizDoc>> docs;
  std::vector<std::string> row_titles;

  for (const McRow& row : rows) {
    row_titles.push_back(row.label);
    std::vector<VizDoc> row_docs;
    const auto original = reward_over_time(*row.input, eval);
    row_docs.push_back(render_timeline(original));
    write_text_file(out / "csv" / (row.label + "__original.csv"),
                    std::get<TimelineDoc>(row_docs.back()).csv);

    for (const CostSpec& cost : cost_specs) {
      McPreprocessResult result =
          preprocess_mc(row.input, train, make_mc_model(row.potential, seed), st.gamma, cost,
                        mc_optimize_config(row.potential, st, seed, overrides));
      save_potential(*result.potential,
                     out / "potentials" / (row.label + "__" + cost.name() + ".json"));
      write_text_file(out / "csv" / (row.label + "__" + cost.name() + "_trace.csv"),
                      [&result] {
                        std::string s = "step,cost\n";
                        char buf[64];
                        for (const auto& [step, j] : result.cost_trace) {
                          std::snprintf(buf, sizeof(buf), "%d,%.12g\n", step, j);
                          s += buf;
                        }
                        return s;
                      }());

      const auto timeline = reward_over_time(*result.preprocessed, eval);
      row_docs.push_back(render_timeline(timeline));
      write_text_file(out / "csv" / (row.label + "__" + cost.name() + ".csv"),
                      std::get<TimelineDoc>(row_docs.back()).csv);

      const double input_cost = mc_cost(*row.input, eval, cost);
      const double final_cost = mc_cost(*result.preprocessed, eval, cost);
      json entry = {{"input_cost_eval", input_cost}, {"final_cost_eval", final_cost}};

      char buf[220];
      if (cost.family == CostFamily::Sparse) {
        if (row.check_recovery) {
          // compare against ground truth up to the best constant shift
          std::vector<double> devs;
          for (std::size_t e = 0; e < eval.size(); ++e) {
            for (std::size_t t = 0; t < timeline[e].size(); ++t) {
              devs.push_back(timeline[e][t] - gt_timeline[e][t]);
            }
          }
          const double shift = median(devs);
          double worst = 0.0;
          for (double d : devs) worst = std::max(worst, std::abs(d - shift));
          entry["recovery_max_error"] = worst;
          entry["recovery_shift"] = shift;
          std::snprintf(buf, sizeof(buf),
                        "%s: recovers ground truth up to constant %.4g (max dev %.4g)",
                        row.label.c_str(), shift, worst);
          check(worst <= 1e-2, buf, failures);
        }
        if (row.min_reduction >= 0.0) {
          const double reduction = input_cost > 0.0 ? 1.0 - final_cost / input_cost : 0.0;
          entry["cost_reduction"] = reduction;
          std::snprintf(buf, sizeof(buf), "%s: sparse-log cost reduced by %.1f%% (need %.0f%%)",
                        row.label.c_str(), 100.0 * reduction, 100.0 * row.min_reduction);
          check(reduction >= row.min_reduction, buf, failures);
        }
      }
      metrics[row.label][cost.name()] = entry;
    }
    docs.push_back(std::move(row_docs));
  }

  write_text_file(out / "sheet.svg", render_panel(docs, row_titles, col_titles));
  write_text_file(out / "metrics.json", metrics.dump(2) + "\n");
  std::cout << "wrote " << (out / "sheet.svg").string() << "\n";
  return failures == 0 ? kExitOk : kExitCheckFailed;
}

int run_mc_ground_truth_demo(const CliOverrides& overrides) {
  McDemoSettings st;
  const auto gt = mc_ground_truth();
  const auto value_phi = mc_value_potential(st.gamma, st.value_resolution);
  std::vector<McRow> rows;
  rows.push_back({"ground truth", gt, PotentialKind::Linear});
  rows.push_back({"linear shaping A", apply_shaping_mc(gt, mc_linear_potential(1.0, 0.0), st.gamma),
                  PotentialKind::Linear, true});
  rows.push_back({"linear shaping B", apply_shaping_mc(gt, mc_linear_potential(1.0, 5.0), st.gamma),
                  PotentialKind::Linear, true});
  rows.push_back(
      {"value shaping", apply_shaping_mc(gt, value_phi, st.gamma), PotentialKind::Mlp, false, 0.5});
  return run_mc_demo("fig-mc-ground-truth", std::move(rows), st, overrides);
}

int run_mc_learnedlike_demo(const CliOverrides& overrides) {
  McDemoSettings st;
  const auto gt = mc_ground_truth();
  const auto value_phi = mc_value_potential(st.gamma, st.value_resolution);
  std::vector<McRow> rows;
  rows.push_back({"noisy ground truth", add_noise_mc(gt, 0.05, 11), PotentialKind::Mlp});
  rows.push_back({"noisy value shaping",
                  add_noise_mc(apply_shaping_mc(gt, value_phi, st.gamma), 0.005, 12),
                  PotentialKind::Mlp, false, 0.25});
  return run_mc_demo("fig-mc-learnedlike", std::move(rows), st, overrides);
}

}  // namespace

std::vector<std::string> demo_names() {
  return {"fig-goal", "fig-path", "fig-mc-ground-truth", "fig-mc-learnedlike"};
}

int cmd_demo(const std::string& name, const CliOverrides& overrides) {
  if (name == "fig-goal") return run_grid_demo("goal", "fig-goal", overrides);
  if (name == "fig-path") return run_grid_demo("path", "fig-path", overrides);
  if (name == "fig-mc-ground-truth") return run_mc_ground_truth_demo(overrides);
  if (name == "fig-mc-learnedlike") return run_mc_learnedlike_demo(overrides);
  throw InputError("unknown demo: " + name + " (expected fig-goal, fig-path, "
                   "fig-mc-ground-truth or fig-mc-learnedlike)");
}

}  // namespace rlens
