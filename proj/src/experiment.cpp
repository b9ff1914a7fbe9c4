#include "rlens/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "rlens/equivalence.hpp"
#include "rlens/policy.hpp"
#include "rlens/viz.hpp"

namespace rlens {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ShapingDesc::label() const {
  if (kind == "none") return "original";
  if (kind == "manhattan") return sign > 0 ? "manhattan_pos" : "manhattan_neg";
  if (kind == "random") return "random_" + std::to_string(seed);
  throw InputError("unknown shaping kind: " + kind);
}

void ExperimentConfig::validate() const {
  if (!seed_set) throw InputError("config: seed is mandatory");
  grid.validate();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InputError("config: gamma must be in [0, 1)");
  if (base_reward != "goal" && base_reward != "path" && base_reward != "file") {
    throw InputError("config: base_reward must be goal, path or file");
  }
  if (base_reward == "file" && base_reward_file.empty()) {
    throw InputError("config: base_reward file path missing");
  }
  if (shapings.empty()) throw InputError("config: at least one shaping entry required");
  if (costs.empty()) throw InputError("config: at least one cost required");
  optimize.validate();
  potential_kind_from_name(potential_kind);
  for (const ShapingDesc& s : shapings) s.label();
}

namespace {

CostSpec cost_from_string(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos) throw InputError("cost must look like sparse-l1: " + s);
  return {cost_family_from_name(s.substr(0, dash)), penalty_kind_from_name(s.substr(dash + 1))};
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  try {
    if (doc.contains("seed")) {
      c.seed = doc.at("seed").get<std::uint64_t>();
      c.seed_set = true;
    }
    c.out = doc.value("out", c.out);
    c.gamma = doc.value("gamma", c.gamma);
    if (doc.contains("environment")) {
      const json& env = doc.at("environment");
      const std::string type = env.value("type", "grid");
      if (type != "grid") throw InputError("config: only grid environments are file-driven");
      c.grid.width = env.value("width", 10);
      c.grid.height = env.value("height", 10);
      if (env.contains("goal")) {
        c.grid.goal = {env.at("goal").at(0).get<int>(), env.at("goal").at(1).get<int>()};
      } else {
        c.grid.goal = {c.grid.width - 1, c.grid.height - 1};
      }
      c.grid.horizon = env.value("horizon", 50);
      c.grid.terminal_cells.clear();
      if (env.contains("terminal")) {
        for (const auto& t : env.at("terminal")) {
          c.grid.terminal_cells.push_back({t.at(0).get<int>(), t.at(1).get<int>()});
        }
      }
    }
    if (doc.contains("base_reward")) {
      const json& base = doc.at("base_reward");
      if (base.is_string()) {
        c.base_reward = base.get<std::string>();
      } else {
        c.base_reward = base.value("type", "goal");
        c.base_reward_file = base.value("path", "");
      }
    }
    if (doc.contains("shapings")) {
      for (const auto& s : doc.at("shapings")) {
        ShapingDesc d;
        d.kind = s.value("kind", "none");
        d.sign = s.value("sign", 1);
        d.seed = s.value("seed", std::uint64_t{0});
        d.scale = s.value("scale", 5.0);
        c.shapings.push_back(d);
      }
    }
    if (doc.contains("noise")) {
      c.noise_sigma = doc.at("noise").value("sigma", 0.0);
      c.noise_seed = doc.at("noise").value("seed", std::uint64_t{0});
    }
    if (doc.contains("potential")) {
      c.potential_kind = doc.at("potential").value("kind", "tabular");
      if (doc.at("potential").contains("hidden")) {
        c.mlp_hidden = doc.at("potential").at("hidden").get<std::vector<int>>();
      }
    }
    if (doc.contains("costs")) {
      for (const auto& s : doc.at("costs")) c.costs.push_back(cost_from_string(s));
    }
    if (doc.contains("optimize")) {
      const json& o = doc.at("optimize");
      c.optimize.steps = o.value("steps", c.optimize.steps);
      c.optimize.batch_size = o.value("batch_size", c.optimize.batch_size);
      c.optimize.learning_rate = o.value("learning_rate", c.optimize.learning_rate);
      c.optimize.optimizer =
          optimizer_kind_from_name(o.value("optimizer", std::string("adam")));
      c.optimize.log_every = o.value("log_every", c.optimize.log_every);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json shapings = json::array();
  for (const ShapingDesc& s : c.shapings) {
    shapings.push_back({{"kind", s.kind}, {"sign", s.sign}, {"seed", s.seed}, {"scale", s.scale}});
  }
  json costs = json::array();
  for (const CostSpec& cost : c.costs) costs.push_back(cost.name());
  json terminal = json::array();
  for (const Cell& cell : c.grid.terminal_cells) terminal.push_back({cell.x, cell.y});
  return json{
      {"seed", c.seed},
      {"gamma", c.gamma},
      {"environment",
       {{"type", "grid"},
        {"width", c.grid.width},
        {"height", c.grid.height},
        {"goal", {c.grid.goal.x, c.grid.goal.y}},
        {"terminal", terminal},
        {"horizon", c.grid.horizon}}},
      {"base_reward", c.base_reward},
      {"shapings", shapings},
      {"noise", {{"sigma", c.noise_sigma}, {"seed", c.noise_seed}}},
      {"potential", {{"kind", c.potential_kind}, {"hidden", c.mlp_hidden}}},
      {"costs", costs},
      {"optimize",
       {{"steps", c.optimize.steps},
        {"batch_size", c.optimize.batch_size},
        {"learning_rate", c.optimize.learning_rate},
        {"optimizer", optimizer_kind_name(c.optimize.optimizer)},
        {"log_every", c.optimize.log_every}}}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

TabularReward base_reward_table(const ExperimentConfig& c) {
  if (c.base_reward == "goal") return goal_reward(c.grid, c.gamma);
  if (c.base_reward == "path") return path_reward(c.grid, c.gamma);
  return load_tabular(c.base_reward_file);
}

std::vector<double> shaping_table(const ExperimentConfig& c, const ShapingDesc& s) {
  if (s.kind == "none") return std::vector<double>(c.grid.num_states(), 0.0);
  if (s.kind == "manhattan") return manhattan_potential(c.grid, s.sign);
  if (s.kind == "random") return random_potential(c.grid, s.seed, s.scale);
  throw InputError("unknown shaping kind: " + s.kind);
}

fs::path rewards_dir(const ExperimentConfig& c) { return resolve_out_dir(c.out) / "rewards"; }

// With noise configured, preprocessing and rendering study the noisy
// stand-ins; generate still writes the clean tables next to them.
std::string pipeline_label(const ExperimentConfig& c, const ShapingDesc& s) {
  return c.noise_sigma > 0.0 ? s.label() + "_noisy" : s.label();
}
fs::path bundles_dir(const ExperimentConfig& c) { return resolve_out_dir(c.out) / "bundles"; }

std::string cost_trace_csv(const std::vector<std::pair<int, double>>& trace) {
  std::string out = "step,cost\n";
  char buf[64];
  for (const auto& [step, cost] : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g\n", step, cost);
    out += buf;
  }
  return out;
}

}  // namespace

ExperimentConfig load_experiment_config(const fs::path& path, const CliOverrides& overrides) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path.string());
  json doc;
  try {
    is >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(doc);
  if (overrides.seed) {
    c.seed = *overrides.seed;
    c.seed_set = true;
  }
  if (overrides.out) c.out = *overrides.out;
  if (overrides.steps) c.optimize.steps = *overrides.steps;
  c.validate();
  return c;
}

fs::path resolve_out_dir(const std::string& out) {
  const char* root = std::getenv("REWARD_LENS_OUT");
  fs::path p(out);
  if (root != nullptr && *root != '\0') return fs::path(root) / p.relative_path();
  return p;
}

int cmd_generate(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = rewards_dir(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const TabularReward base = base_reward_table(config);
  save_tabular(base, dir / "base.json");

  auto base_src = std::make_shared<TabularRewardSource>(base);
  for (const ShapingDesc& s : config.shapings) {
    const auto shaped = apply_shaping(base_src, shaping_table(config, s), config.gamma);
    TabularReward table = TabularReward::from_source(config.grid, *shaped, config.gamma);
    save_tabular(table, dir / (s.label() + ".json"));
    if (config.noise_sigma > 0.0) {
      const auto noisy = add_noise(shaped, config.noise_sigma, config.noise_seed);
      save_tabular(TabularReward::from_source(config.grid, *noisy, config.gamma),
                   dir / (s.label() + "_noisy.json"));
    }
  }
  write_text(resolve_out_dir(config.out) / "metadata.json", config_to_json(config).dump(2) + "\n");
  return kExitOk;
}

int cmd_preprocess(const ExperimentConfig& config) {
  config.validate();
  const fs::path rdir = rewards_dir(config);
  const fs::path bdir = bundles_dir(config);
  std::error_code ec;
  fs::create_directories(bdir, ec);
  if (ec) throw IoError("cannot create " + bdir.string() + ": " + ec.message());

  for (const ShapingDesc& s : config.shapings) {
    const fs::path reward_file = rdir / (pipeline_label(config, s) + ".json");
    if (!fs::exists(reward_file)) {
      throw IoError("missing reward file (run generate first): " + reward_file.string());
    }
    const TabularReward input = load_tabular(reward_file);
    auto input_src = std::make_shared<TabularRewardSource>(input);
    for (const CostSpec& cost : config.costs) {
      const fs::path bundle = bdir / (pipeline_label(config, s) + "__" + cost.name());
      fs::create_directories(bundle, ec);
      if (ec) throw IoError("cannot create " + bundle.string());

      std::unique_ptr<PotentialModel> model;
      const PotentialKind kind = potential_kind_from_name(config.potential_kind);
      std::vector<int> mask;
      for (const Cell& c : config.grid.terminal_cells) mask.push_back(config.grid.state_index(c));
      if (kind == PotentialKind::Tabular) {
        model = std::make_unique<TabularPotential>(config.grid.num_states(), mask);
      } else if (kind == PotentialKind::Linear) {
        model = std::make_unique<LinearPotential>(2);
      } else {
        std::vector<int> sizes{2};
        sizes.insert(sizes.end(), config.mlp_hidden.begin(), config.mlp_hidden.end());
        sizes.push_back(1);
        model = std::make_unique<MlpPotential>(sizes, config.seed);
      }

      OptimizeConfig ocfg = config.optimize;
      ocfg.seed = config.seed;
      GridPreprocessResult result =
          preprocess_grid(input_src, config.grid, std::move(model), config.gamma, cost, ocfg);

      save_potential(*result.potential, bundle / "potential.json");
      const TabularReward preprocessed =
          TabularReward::from_source(config.grid, *result.preprocessed, config.gamma);
      save_tabular(preprocessed, bundle / "preprocessed.json");
      write_text(bundle / "cost_trace.csv", cost_trace_csv(result.cost_trace));

      EquivalenceReport report =
          certify_equivalence(input, preprocessed, config.grid, config.gamma, 1e-6);
      save_report(report, bundle / "report.json");

      char buf[160];
      std::snprintf(buf, sizeof(buf), "%-14s %-11s final_cost=%.6g residual=%.3g %s\n",
                    pipeline_label(config, s).c_str(), cost.name().c_str(), result.final_cost,
                    report.max_residual, report.is_equivalent ? "equivalent" : "NOT-EQUIVALENT");
      std::cout << buf;
      if (!report.is_equivalent) return kExitCheckFailed;
    }
  }
  return kExitOk;
}

int cmd_check_equiv(const fs::path& base, const fs::path& other, double tol,
                    const std::optional<fs::path>& report_out) {
  const TabularReward a = load_tabular(base);
  const TabularReward b = load_tabular(other);
  GridSpec spec;
  spec.width = a.width;
  spec.height = a.height;
  spec.goal = {a.width - 1, a.height - 1};
  EquivalenceReport report = certify_equivalence(a, b, spec, a.gamma, tol);
  if (report_out) save_report(report, *report_out);
  std::cout << (report.is_equivalent ? "equivalent" : "not-equivalent")
            << " max_residual=" << report.max_residual << " tol=" << tol << "\n";
  return report.is_equivalent ? kExitOk : kExitCheckFailed;
}

int cmd_rollout(int n_episodes, int max_steps, std::uint64_t seed, const fs::path& out_csv) {
  if (n_episodes < 0 || max_steps < 1) throw InputError("rollout: bad episode arguments");
  const auto trajectories =
      mc_rollout([](const MountainCarState& s) { return s.velocity >= 0.0 ? 1.0 : -1.0; },
                 n_episodes, max_steps, seed);
  if (!out_csv.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(out_csv.parent_path(), ec);
  }
  std::ofstream os(out_csv);
  if (!os) throw IoError("cannot open " + out_csv.string());
  write_trajectories_csv(trajectories, os);
  std::cout << "wrote " << trajectories.size() << " episodes to " << out_csv.string() << "\n";
  return kExitOk;
}

int cmd_render(const ExperimentConfig& config) {
  config.validate();
  const fs::path rdir = rewards_dir(config);
  const fs::path bdir = bundles_dir(config);
  const fs::path out = resolve_out_dir(config.out);
  const fs::path csv_dir = out / "csv";
  std::error_code ec;
  fs::create_directories(csv_dir, ec);
  if (ec) throw IoError("cannot create " + csv_dir.string());

  std::vector<std::string> row_titles;
  std::vector<std::string> col_titles{"original"};
  for (const CostSpec& cost : config.costs) col_titles.push_back(cost.name());

  std::vector<std::vector<VizDoc>> grid_docs;
  for (const ShapingDesc& s : config.shapings) {
    const std::string label = pipeline_label(config, s);
    row_titles.push_back(label);
    std::vector<TabularReward> row;
    const fs::path reward_file = rdir / (label + ".json");
    if (!fs::exists(reward_file)) throw IoError("missing reward file: " + reward_file.string());
    row.push_back(load_tabular(reward_file));
    for (const CostSpec& cost : config.costs) {
      const fs::path f = bdir / (label + "__" + cost.name()) / "preprocessed.json";
      if (!fs::exists(f)) throw IoError("missing bundle: " + f.string());
      row.push_back(load_tabular(f));
    }
    // shared scale across the row so columns are comparable
    double lo = 0.0, hi = 0.0;
    for (const TabularReward& t : row) {
      for (double v : t.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    std::vector<VizDoc> docs;
    for (std::size_t i = 0; i < row.size(); ++i) {
      HeatmapDoc doc = render_grid_heatmap(row[i], config.grid, ScaleSpec::Shared(lo, hi));
      write_text(csv_dir / (pipeline_label(config, s) + "__" + col_titles[i] + ".csv"), doc.csv);
      docs.push_back(std::move(doc));
    }
    grid_docs.push_back(std::move(docs));
  }

  write_text(out / "sheet.svg", render_panel(grid_docs, row_titles, col_titles));
  std::cout << "wrote " << (out / "sheet.svg").string() << "\n";
  return kExitOk;
}

}  // namespace rlens
