#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rlens/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> steps;

  rlens::CliOverrides overrides() const { return {seed, out, steps}; }
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_config) {
  if (needs_config) {
    cmd->add_option("--config", flags.config_path, "experiment config JSON")->required();
  }
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&flags](std::uint64_t v) { flags.seed = v; }, "override the config seed");
  cmd->add_option_function<std::string>(
      "--out", [&flags](const std::string& v) { flags.out = v; }, "override the output directory");
  cmd->add_option_function<int>(
      "--steps", [&flags](int v) { flags.steps = v; }, "override the optimization step count");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reward-lens: preprocess reward functions into simpler equivalent ones"};
  app.require_subcommand(1);

  CommonFlags gen_flags, pre_flags, render_flags, demo_flags;

  CLI::App* generate = app.add_subcommand("generate", "write base/shaped/noisy reward files");
  add_common(generate, gen_flags, true);

  CLI::App* preprocess =
      app.add_subcommand("preprocess", "optimize a shaping potential per reward and cost");
  add_common(preprocess, pre_flags, true);

  CLI::App* render = app.add_subcommand("render", "render the figure sheet for a config");
  add_common(render, render_flags, true);

  std::string equiv_base, equiv_other, equiv_report;
  double equiv_tol = 1e-6;
  CLI::App* check = app.add_subcommand("check-equiv", "test two reward files for equivalence");
  check->add_option("base", equiv_base, "base reward file")->required();
  check->add_option("other", equiv_other, "candidate reward file")->required();
  check->add_option("--tol", equiv_tol, "max shaping residual");
  check->add_option("--report", equiv_report, "write the equivalence report JSON here");

  int roll_episodes = 5, roll_steps = 300;
  std::uint64_t roll_seed = 0;
  std::string roll_out = "trajectories.csv";
  CLI::App* rollout = app.add_subcommand("rollout", "expert mountain-car trajectories to CSV");
  rollout->add_option("--episodes", roll_episodes, "number of episodes");
  rollout->add_option("--max-steps", roll_steps, "step cap per episode");
  rollout->add_option("--seed", roll_seed, "rollout seed")->required();
  rollout->add_option("--out", roll_out, "output CSV path");

  std::string demo_name;
  CLI::App* demo = app.add_subcommand("demo", "run a pinned end-to-end pipeline");
  demo->add_option("name", demo_name, "fig-goal | fig-path | fig-mc-ground-truth | fig-mc-learnedlike")
      ->required();
  add_common(demo, demo_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? rlens::kExitOk : rlens::kExitConfig;
  }

  try {
    if (*generate) {
      return rlens::cmd_generate(
          rlens::load_experiment_config(gen_flags.config_path, gen_flags.overrides()));
    }
    if (*preprocess) {
      return rlens::cmd_preprocess(
          rlens::load_experiment_config(pre_flags.config_path, pre_flags.overrides()));
    }
    if (*render) {
      return rlens::cmd_render(
          rlens::load_experiment_config(render_flags.config_path, render_flags.overrides()));
    }
    if (*check) {
      std::optional<std::filesystem::path> report;
      if (!equiv_report.empty()) report = equiv_report;
      return rlens::cmd_check_equiv(equiv_base, equiv_other, equiv_tol, report);
    }
    if (*rollout) {
      return rlens::cmd_rollout(roll_episodes, roll_steps, roll_seed, roll_out);
    }
    if (*demo) {
      return rlens::cmd_demo(demo_name, demo_flags.overrides());
    }
  } catch (const rlens::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rlens::kExitConfig;
  } catch (const rlens::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rlens::kExitConfig;
  } catch (const rlens::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rlens::kExitDivergence;
  } catch (const rlens::DiagnosticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rlens::kExitDivergence;
  } catch (const rlens::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rlens::kExitIo;
  } catch (const rlens::BridgeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rlens::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return rlens::kExitInternal;
  }
  return rlens::kExitConfig;
}
