#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlens/reward.hpp"
#include "rlens/rng.hpp"

namespace rlens {

// f(x) = |x| or log(1 + |x|).
enum class PenaltyKind { L1, Log1pAbs };

const char* penalty_kind_name(PenaltyKind k);
PenaltyKind penalty_kind_from_name(const std::string& name);

enum class CostFamily { Sparse, Smooth };

const char* cost_family_name(CostFamily f);
CostFamily cost_family_from_name(const std::string& name);

struct CostSpec {
  CostFamily family = CostFamily::Sparse;
  PenaltyKind penalty = PenaltyKind::L1;

  std::string name() const {
    return std::string(cost_family_name(family)) + "-" + penalty_kind_name(penalty);
  }
};

struct PenaltyValue {
  double value = 0.0;
  double derivative = 0.0;
};

// Subgradient at the kink x = 0 is taken as 0.
PenaltyValue penalty(PenaltyKind kind, double x);

struct SparsityCost {
  double j = 0.0;
  std::vector<double> per_item;  // f'(r(t)) / n, the upstream chain-rule signal
};

struct SmoothnessCost {
  double j = 0.0;
  std::vector<std::pair<double, double>> per_pair;  // (+f'/n, -f'/n)
};

// J = mean f(r(t)) over the batch.
template <typename T>
SparsityCost sparsity_cost(const RewardSource<T>& r, std::span<const T> batch, PenaltyKind kind) {
  if (batch.empty()) throw InputError("sparsity_cost: empty batch");
  SparsityCost out;
  const std::vector<double> values = r.evaluate_all(batch);
  out.per_item.resize(batch.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const PenaltyValue p = penalty(kind, values[i]);
    out.j += p.value * inv_n;
    out.per_item[i] = p.derivative * inv_n;
  }
  return out;
}

namespace detail {
inline bool chained(const Transition& a, const Transition& b) { return a.s_next == b.s; }
inline bool chained(const McTransition& a, const McTransition& b) { return a.s_next == b.s; }
}  // namespace detail

// J = mean f(r(t1) - r(t2)) over consecutive-transition pairs.
template <typename T>
SmoothnessCost smoothness_cost(const RewardSource<T>& r,
                               std::span<const std::pair<T, T>> pairs, PenaltyKind kind) {
  if (pairs.empty()) throw InputError("smoothness_cost: empty batch");
  std::vector<T> flat;
  flat.reserve(pairs.size() * 2);
  for (const auto& [t1, t2] : pairs) {
    if (!detail::chained(t1, t2)) throw InputError("smoothness_cost: pair is not chained");
    flat.push_back(t1);
    flat.push_back(t2);
  }
  const std::vector<double> values = r.evaluate_all(std::span<const T>(flat));
  SmoothnessCost out;
  out.per_pair.resize(pairs.size());
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PenaltyValue p = penalty(kind, values[2 * i] - values[2 * i + 1]);
    out.j += p.value * inv_n;
    out.per_pair[i] = {p.derivative * inv_n, -p.derivative * inv_n};
  }
  return out;
}

// Epoch-shuffled batches over a fixed pool; one epoch visits the pool exactly
// once, last batch possibly short.
template <typename Item>
class TrajectoryBatches {
 public:
  TrajectoryBatches(std::vector<Item> pool, std::size_t batch_size, std::uint64_t seed)
      : pool_(std::move(pool)), batch_size_(batch_size), rng_(seed) {
    if (pool_.empty()) throw InputError("trajectory batches: empty pool");
    if (batch_size_ == 0 || batch_size_ > pool_.size()) {
      throw InputError("trajectory batches: batch_size must be in [1, pool size]");
    }
    order_.resize(pool_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    shuffle();
  }

  const std::vector<Item>& pool() const { return pool_; }

  const std::vector<Item>& next_batch() {
    if (cursor_ >= order_.size()) {
      shuffle();
    }
    const std::size_t n = std::min(batch_size_, order_.size() - cursor_);
    batch_.clear();
    for (std::size_t i = 0; i < n; ++i) batch_.push_back(pool_[order_[cursor_ + i]]);
    cursor_ += n;
    return batch_;
  }

 private:
  void shuffle() {
    // Fisher-Yates on our own rng so seeded runs match across platforms.
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::swap(order_[i - 1], order_[rng_.uniform_int(static_cast<int>(i))]);
    }
    cursor_ = 0;
  }

  std::vector<Item> pool_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::vector<Item> batch_;
};

// Pooled single transitions of a trajectory set, time order within episodes.
std::vector<McTransition> pool_transitions(std::span<const McTrajectory> trajectories);

// Pooled consecutive transition pairs.
std::vector<std::pair<McTransition, McTransition>> pool_adjacent_pairs(
    std::span<const McTrajectory> trajectories);

TrajectoryBatches<McTransition> sparse_trajectory_batches(
    std::span<const McTrajectory> trajectories, std::size_t batch_size, std::uint64_t seed);

TrajectoryBatches<std::pair<McTransition, McTransition>> smooth_trajectory_batches(
    std::span<const McTrajectory> trajectories, std::size_t batch_size, std::uint64_t seed);

}  // namespace rlens
