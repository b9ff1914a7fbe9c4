#include "rlens/blackbox.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <sys/wait.h>
#include <unistd.h>

namespace rlens {

namespace {

constexpr const char* kHandshake = "HELLO reward-bridge v1";

std::string encode_request(const Transition& t) {
  return "EVAL " + std::to_string(t.s) + " " + std::to_string(t.a) + " " +
         std::to_string(t.s_next);
}

std::string encode_request(const McTransition& t) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "EVAL [%.17g,%.17g] %.17g [%.17g,%.17g]", t.s.position,
                t.s.velocity, t.a, t.s_next.position, t.s_next.velocity);
  return buf;
}

}  // namespace

LineBridge::LineBridge(const std::string& command) {
  // Writes to a dead child must surface as EPIPE, not SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    throw BridgeError("failed to create pipes for: " + command);
  }
  pid_ = fork();
  if (pid_ < 0) throw BridgeError("fork failed for: " + command);
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  const std::string hello = read_line();
  if (hello != kHandshake) {
    throw BridgeError("bad handshake from: " + command, hello);
  }
}

LineBridge::~LineBridge() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::string LineBridge::read_line() {
  for (;;) {
    const std::size_t pos = buffer_.find('\n');
    if (pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n <= 0) throw BridgeError("reward bridge closed the stream");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::vector<double> LineBridge::exchange(const std::vector<std::string>& requests) {
  std::string payload;
  for (const std::string& r : requests) {
    payload += r;
    payload += '\n';
  }
  std::size_t off = 0;
  while (off < payload.size()) {
    const ssize_t n = write(to_child_, payload.data() + off, payload.size() - off);
    if (n <= 0) throw BridgeError("reward bridge write failed");
    off += static_cast<std::size_t>(n);
  }

  std::vector<double> values;
  values.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const std::string line = read_line();
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw BridgeError("non-numeric bridge response", line);
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != '\0') throw BridgeError("trailing garbage in bridge response", line);
    values.push_back(v);
  }
  return values;
}

template <typename T>
void BlackboxReward<T>::evaluate(std::span<const T> batch, std::span<double> out) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!bridge_) throw BridgeError("reward bridge is closed after a previous failure");
  std::vector<std::string> requests;
  requests.reserve(batch.size());
  for (const T& t : batch) requests.push_back(encode_request(t));
  std::vector<double> values;
  try {
    values = bridge_->exchange(requests);
  } catch (...) {
    bridge_.reset();  // the stream is out of sync; drop the child
    throw;
  }
  std::copy(values.begin(), values.end(), out.begin());
}

template class BlackboxReward<Transition>;
template class BlackboxReward<McTransition>;

std::shared_ptr<GridRewardSource> blackbox_reward(const std::string& command) {
  return std::make_shared<BlackboxReward<Transition>>(command);
}

std::shared_ptr<McRewardSource> blackbox_reward_mc(const std::string& command) {
  return std::make_shared<BlackboxReward<McTransition>>(command);
}

}  // namespace rlens
