#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "rlens/reward.hpp"

namespace rlens {

// Child process speaking the reward-bridge line protocol:
//   child -> "HELLO reward-bridge v1" once at startup
//   parent -> "EVAL s_json a_json s_next_json" one line per transition
//   child -> one decimal float per line, same order
class LineBridge {
 public:
  explicit LineBridge(const std::string& command);
  ~LineBridge();

  LineBridge(const LineBridge&) = delete;
  LineBridge& operator=(const LineBridge&) = delete;

  // Sends all requests, then reads exactly one response per request. Throws
  // BridgeError (with the raw line) on malformed output or child death; no
  // partial results escape.
  std::vector<double> exchange(const std::vector<std::string>& requests);

 private:
  std::string read_line();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// Reward evaluated by a child process. Access is serialized internally; use
// one instance per concurrent caller.
template <typename T>
class BlackboxReward final : public RewardSource<T> {
 public:
  explicit BlackboxReward(const std::string& command)
      : bridge_(std::make_unique<LineBridge>(command)) {}

  void evaluate(std::span<const T> batch, std::span<double> out) const override;

 private:
  mutable std::mutex mu_;
  mutable std::unique_ptr<LineBridge> bridge_;
};

std::shared_ptr<GridRewardSource> blackbox_reward(const std::string& command);
std::shared_ptr<McRewardSource> blackbox_reward_mc(const std::string& command);

}  // namespace rlens
