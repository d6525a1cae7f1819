#pragma once

#include <chrono>
#include <thread>

#include "rmc/errors.hpp"

namespace rmc {

/// Bounded exponential backoff (1us -> 1ms) for all spin loops, with a
/// watchdog that turns a stuck wait into a diagnostic instead of a hang.
class Backoff {
public:
  explicit Backoff(const char* site = "spin wait",
                   std::chrono::seconds watchdog = std::chrono::seconds(10))
      : site_(site), deadline_(std::chrono::steady_clock::now() + watchdog) {}

  void wait() {
    if (spins_ < 16) {
      ++spins_;
      std::this_thread::yield();
      return;
    }
    std::this_thread::sleep_for(delay_);
    if (delay_ < kMaxDelay) delay_ *= 2;
    if (std::chrono::steady_clock::now() > deadline_) {
      throw fatal_error(std::string("watchdog: no progress after 10s in ") + site_ +
                        " (likely deadlock: missing barrier or dead peer)");
    }
  }

private:
  static constexpr std::chrono::microseconds kMaxDelay{1000};
  const char* site_;
  int spins_ = 0;
  std::chrono::microseconds delay_{1};
  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace rmc
