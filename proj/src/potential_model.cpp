#include "rlens/potential_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rlens/rng.hpp"

namespace rlens {

const char* potential_kind_name(PotentialKind k) {
  switch (k) {
    case PotentialKind::Tabular: return "tabular";
    case PotentialKind::Linear: return "linear";
    case PotentialKind::Mlp: return "mlp";
  }
  return "?";
}

PotentialKind potential_kind_from_name(const std::string& name) {
  if (name == "tabular") return PotentialKind::Tabular;
  if (name == "linear") return PotentialKind::Linear;
  if (name == "mlp") return PotentialKind::Mlp;
  throw InputError("unknown potential kind: " + name);
}

// --- tabular ---

TabularPotential::TabularPotential(int n_states, std::vector<int> terminal_mask)
    : theta_(n_states, 0.0), mask_indices_(std::move(terminal_mask)), masked_(n_states, 0) {
  if (n_states < 1) throw InputError("tabular potential: n_states must be positive");
  for (int i : mask_indices_) {
    if (i < 0 || i >= n_states) throw InputError("tabular potential: mask index out of range");
    masked_[i] = 1;
  }
}

double TabularPotential::value(const StateEnc& s) const {
  if (s.index < 0 || s.index >= static_cast<int>(theta_.size())) {
    throw InputError("tabular potential: state index out of range");
  }
  return masked_[s.index] ? 0.0 : theta_[s.index];
}

void TabularPotential::add_value_grad(const StateEnc& s, double weight,
                                      std::span<double> grad) const {
  if (grad.size() != theta_.size()) throw InputError("gradient size mismatch");
  if (s.index < 0 || s.index >= static_cast<int>(theta_.size())) {
    throw InputError("tabular potential: state index out of range");
  }
  if (!masked_[s.index]) grad[s.index] += weight;
}

std::unique_ptr<PotentialModel> TabularPotential::clone() const {
  return std::make_unique<TabularPotential>(*this);
}

std::vector<double> TabularPotential::table() const {
  std::vector<double> out(theta_);
  for (int i : mask_indices_) out[i] = 0.0;
  return out;
}

// --- linear ---

LinearPotential::LinearPotential(int n_features) : theta_(n_features, 0.0) {
  if (n_features < 1) throw InputError("linear potential: n_features must be positive");
}

double LinearPotential::value(const StateEnc& s) const {
  if (s.features.size() != theta_.size()) {
    throw InputError("linear potential: feature dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < theta_.size(); ++i) acc += theta_[i] * s.features[i];
  return acc;
}

void LinearPotential::add_value_grad(const StateEnc& s, double weight,
                                     std::span<double> grad) const {
  if (grad.size() != theta_.size()) throw InputError("gradient size mismatch");
  if (s.features.size() != theta_.size()) {
    throw InputError("linear potential: feature dimension mismatch");
  }
  for (std::size_t i = 0; i < theta_.size(); ++i) grad[i] += weight * s.features[i];
}

std::unique_ptr<PotentialModel> LinearPotential::clone() const {
  return std::make_unique<LinearPotential>(*this);
}

// --- mlp ---

MlpPotential::MlpPotential(std::vector<int> layer_sizes, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw InputError("mlp potential: need at least input and output sizes");
  for (int n : sizes_) {
    if (n < 1) throw InputError("mlp potential: layer sizes must be positive");
  }
  if (sizes_.back() != 1) throw InputError("mlp potential: output size must be 1");

  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layer_offsets_.push_back(count);
    count += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  theta_.assign(count, 0.0);

  Rng rng(seed);
  for (std::size_t l = 0; l + 2 < sizes_.size(); ++l) {  // output layer stays zero
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    double* w = theta_.data() + layer_offsets_[l];
    for (int i = 0; i < fan_in * fan_out; ++i) w[i] = rng.uniform(-bound, bound);
    // biases stay zero
  }
}

double MlpPotential::forward(std::span<const double> x,
                             std::vector<std::vector<double>>& acts) const {
  acts.resize(sizes_.size());
  acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = theta_.data() + layer_offsets_[l];
    const double* b = w + static_cast<std::size_t>(in) * out;
    acts[l + 1].assign(out, 0.0);
    const bool last = (l + 2 == sizes_.size());
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * acts[l][i];
      acts[l + 1][o] = last ? acc : std::tanh(acc);
    }
  }
  return acts.back()[0];
}

double MlpPotential::value(const StateEnc& s) const {
  if (static_cast<int>(s.features.size()) != sizes_.front()) {
    throw InputError("mlp potential: feature dimension mismatch");
  }
  std::vector<std::vector<double>> acts;
  return forward(s.features, acts);
}

void MlpPotential::add_value_grad(const StateEnc& s, double weight,
                                  std::span<double> grad) const {
  if (grad.size() != theta_.size()) throw InputError("gradient size mismatch");
  if (static_cast<int>(s.features.size()) != sizes_.front()) {
    throw InputError("mlp potential: feature dimension mismatch");
  }
  std::vector<std::vector<double>> acts;
  forward(s.features, acts);

  // Reverse pass. delta[l] holds d(out)/d(pre-activation of layer l).
  std::vector<double> delta(acts.back().size(), weight);
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = theta_.data() + layer_offsets_[l];
    double* gw = grad.data() + layer_offsets_[l];
    double* gb = gw + static_cast<std::size_t>(in) * out;
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      double* grow = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += d * acts[l][i];
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) prev[i] += d * row[i];
    }
    // activations of layer l are tanh outputs
    for (int i = 0; i < in; ++i) prev[i] *= 1.0 - acts[l][i] * acts[l][i];
    delta = std::move(prev);
  }
}

std::unique_ptr<PotentialModel> MlpPotential::clone() const {
  return std::make_unique<MlpPotential>(*this);
}

ShapingTerm shaping_term(const PotentialModel& m, const StateEnc& s, const StateEnc& s_next,
                         double gamma) {
  ShapingTerm out;
  out.value = gamma * m.value(s_next) - m.value(s);
  out.grad.assign(m.param_count(), 0.0);
  m.add_value_grad(s_next, gamma, std::span<double>(out.grad));
  m.add_value_grad(s, -1.0, std::span<double>(out.grad));
  return out;
}

StateEnc encode_grid_state(const GridSpec& spec, int s, PotentialKind kind) {
  if (s < 0 || s >= spec.num_states()) throw InputError("encode_grid_state: index out of range");
  StateEnc enc;
  if (kind == PotentialKind::Tabular) {
    enc.index = s;
  } else {
    const Cell c = spec.cell(s);
    const double nx = spec.width > 1 ? 2.0 * c.x / (spec.width - 1) - 1.0 : 0.0;
    const double ny = spec.height > 1 ? 2.0 * c.y / (spec.height - 1) - 1.0 : 0.0;
    enc.features = {nx, ny};
  }
  return enc;
}

StateEnc encode_mc_state(const MountainCarState& s, PotentialKind kind) {
  if (kind == PotentialKind::Tabular) {
    throw InputError("encode_mc_state: tabular potentials cannot index a continuous state");
  }
  StateEnc enc;
  const double np = 2.0 * (s.position - kMcMinPosition) / (kMcMaxPosition - kMcMinPosition) - 1.0;
  const double nv = s.velocity / kMcMaxSpeed;
  enc.features = {np, nv};
  return enc;
}

McPotentialFn model_as_mc_potential(std::shared_ptr<const PotentialModel> m) {
  if (!m) throw InputError("model_as_mc_potential: null model");
  const PotentialKind kind = m->kind();
  return [m, kind](const MountainCarState& s) { return m->value(encode_mc_state(s, kind)); };
}

void save_potential(const PotentialModel& m, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["kind"] = potential_kind_name(m.kind());
  doc["terminal_mask"] = nlohmann::json::array();
  if (m.kind() == PotentialKind::Tabular) {
    doc["terminal_mask"] = static_cast<const TabularPotential&>(m).terminal_mask();
  }
  if (m.kind() == PotentialKind::Mlp) {
    doc["layer_sizes"] = static_cast<const MlpPotential&>(m).layer_sizes();
  }
  doc["params"] = std::vector<double>(m.params().begin(), m.params().end());
  std::ofstream os(path);
  if (!os) throw IoError("save_potential: cannot open " + path.string());
  os << doc.dump() << "\n";
}

std::unique_ptr<PotentialModel> load_potential(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_potential: cannot open " + path.string());
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("load_potential: " + path.string() + ": " + e.what());
  }
  try {
    const PotentialKind kind = potential_kind_from_name(doc.at("kind").get<std::string>());
    const std::vector<double> params = doc.at("params").get<std::vector<double>>();
    for (double v : params) {
      if (!std::isfinite(v)) throw ValidationError("load_potential: non-finite parameter");
    }
    std::unique_ptr<PotentialModel> m;
    if (kind == PotentialKind::Tabular) {
      m = std::make_unique<TabularPotential>(static_cast<int>(params.size()),
                                             doc.at("terminal_mask").get<std::vector<int>>());
    } else if (kind == PotentialKind::Linear) {
      m = std::make_unique<LinearPotential>(static_cast<int>(params.size()));
    } else {
      m = std::make_unique<MlpPotential>(doc.at("layer_sizes").get<std::vector<int>>(), 0);
    }
    if (params.size() != m->param_count()) {
      throw ValidationError("load_potential: parameter count mismatch");
    }
    std::copy(params.begin(), params.end(), m->params().begin());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_potential: " + path.string() + ": " + e.what());
  }
}

}  // namespace rlens
