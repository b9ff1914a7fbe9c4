#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rlens/costs.hpp"
#include "rlens/optimize.hpp"

namespace rlens {

// Process exit codes, one per failure class.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitDivergence = 4,
  kExitCheckFailed = 5,
};

struct ShapingDesc {
  std::string kind = "none";  // none | manhattan | random
  int sign = 1;               // manhattan
  std::uint64_t seed = 0;     // random
  double scale = 5.0;         // random

  std::string label() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  bool seed_set = false;  // seed is mandatory
  std::string out = "out";
  double gamma = 0.99;

  GridSpec grid;
  std::string base_reward = "goal";  // goal | path | file
  std::string base_reward_file;

  std::vector<ShapingDesc> shapings;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;

  std::string potential_kind = "tabular";
  std::vector<int> mlp_hidden = {64, 64};

  std::vector<CostSpec> costs;
  OptimizeConfig optimize;

  void validate() const;
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> steps;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const CliOverrides& overrides = {});

// Output root; the REWARD_LENS_OUT environment variable, when set, replaces
// the root that relative paths resolve against.
std::filesystem::path resolve_out_dir(const std::string& out);

// Subcommand entry points; all return an ExitCode value.
int cmd_generate(const ExperimentConfig& config);
int cmd_preprocess(const ExperimentConfig& config);
int cmd_check_equiv(const std::filesystem::path& base, const std::filesystem::path& other,
                    double tol, const std::optional<std::filesystem::path>& report_out);
int cmd_rollout(int n_episodes, int max_steps, std::uint64_t seed,
                const std::filesystem::path& out_csv);
int cmd_render(const ExperimentConfig& config);
int cmd_demo(const std::string& name, const CliOverrides& overrides = {});

std::vector<std::string> demo_names();

}  // namespace rlens
