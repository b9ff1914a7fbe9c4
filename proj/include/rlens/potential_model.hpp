#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "rlens/grid.hpp"
#include "rlens/mountain_car.hpp"

namespace rlens {

enum class PotentialKind { Tabular, Linear, Mlp };

const char* potential_kind_name(PotentialKind k);
PotentialKind potential_kind_from_name(const std::string& name);

// State as a model consumes it: an index for tabular models, a feature vector
// for linear/mlp ones.
struct StateEnc {
  int index = -1;
  std::vector<double> features;
};

// Parametrized potential Phi_theta with exact parameter gradients. Masked
// states evaluate to exactly 0 with zero gradient for any theta, so terminal
// pinning cannot be violated by an optimizer step.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;

  virtual PotentialKind kind() const = 0;
  virtual std::size_t param_count() const = 0;
  virtual std::span<double> params() = 0;
  virtual std::span<const double> params() const = 0;

  virtual double value(const StateEnc& s) const = 0;

  // grad += weight * dPhi(s)/dtheta
  virtual void add_value_grad(const StateEnc& s, double weight, std::span<double> grad) const = 0;

  virtual std::unique_ptr<PotentialModel> clone() const = 0;

  std::vector<double> grad(const StateEnc& s) const {
    std::vector<double> g(param_count(), 0.0);
    add_value_grad(s, 1.0, std::span<double>(g));
    return g;
  }
};

class TabularPotential final : public PotentialModel {
 public:
  explicit TabularPotential(int n_states, std::vector<int> terminal_mask = {});

  PotentialKind kind() const override { return PotentialKind::Tabular; }
  std::size_t param_count() const override { return theta_.size(); }
  std::span<double> params() override { return theta_; }
  std::span<const double> params() const override { return theta_; }
  double value(const StateEnc& s) const override;
  void add_value_grad(const StateEnc& s, double weight, std::span<double> grad) const override;
  std::unique_ptr<PotentialModel> clone() const override;

  const std::vector<int>& terminal_mask() const { return mask_indices_; }

  // Phi as a plain per-state table (masked states zeroed).
  std::vector<double> table() const;

 private:
  std::vector<double> theta_;
  std::vector<int> mask_indices_;
  std::vector<char> masked_;  // per state
};

class LinearPotential final : public PotentialModel {
 public:
  explicit LinearPotential(int n_features);

  PotentialKind kind() const override { return PotentialKind::Linear; }
  std::size_t param_count() const override { return theta_.size(); }
  std::span<double> params() override { return theta_; }
  std::span<const double> params() const override { return theta_; }
  double value(const StateEnc& s) const override;
  void add_value_grad(const StateEnc& s, double weight, std::span<double> grad) const override;
  std::unique_ptr<PotentialModel> clone() const override;

 private:
  std::vector<double> theta_;
};

// Fully connected tanh network with a linear output unit. Hidden layers use
// scaled uniform init; the output layer starts at zero so the model begins as
// the identity shaping.
class MlpPotential final : public PotentialModel {
 public:
  MlpPotential(std::vector<int> layer_sizes, std::uint64_t seed);

  PotentialKind kind() const override { return PotentialKind::Mlp; }
  std::size_t param_count() const override { return theta_.size(); }
  std::span<double> params() override { return theta_; }
  std::span<const double> params() const override { return theta_; }
  double value(const StateEnc& s) const override;
  void add_value_grad(const StateEnc& s, double weight, std::span<double> grad) const override;
  std::unique_ptr<PotentialModel> clone() const override;

  const std::vector<int>& layer_sizes() const { return sizes_; }

 private:
  double forward(std::span<const double> x, std::vector<std::vector<double>>& acts) const;

  std::vector<int> sizes_;  // e.g. {2, 64, 64, 1}
  std::vector<double> theta_;
  std::vector<std::size_t> layer_offsets_;  // offset of each layer's W block
};

// value = gamma * Phi(s') - Phi(s); grad follows the same combination.
struct ShapingTerm {
  double value = 0.0;
  std::vector<double> grad;
};
ShapingTerm shaping_term(const PotentialModel& m, const StateEnc& s, const StateEnc& s_next,
                         double gamma);

// --- state encoders ---

// Tabular: the state index. Linear/mlp: (x, y) scaled to [-1, 1].
StateEnc encode_grid_state(const GridSpec& spec, int s, PotentialKind kind);

// Linear/mlp only: (position, velocity) scaled to [-1, 1]. Tabular models
// cannot index a continuous state.
StateEnc encode_mc_state(const MountainCarState& s, PotentialKind kind);

// Model as a plain potential function over mountain-car states; the closure
// shares ownership of the model.
McPotentialFn model_as_mc_potential(std::shared_ptr<const PotentialModel> m);

// --- persistence ---

void save_potential(const PotentialModel& m, const std::filesystem::path& path);
std::unique_ptr<PotentialModel> load_potential(const std::filesystem::path& path);

}  // namespace rlens
