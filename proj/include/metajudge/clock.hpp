#pragma once

#include <chrono>
#include <memory>
#include <mutex>

namespace metajudge {

/// Injectable time source. The rate limiter, retry backoff, and transcript
/// timestamps all go through this so tests can run on a virtual clock.
class Clock {
 public:
  using Duration = std::chrono::steady_clock::duration;
  using TimePoint = std::chrono::steady_clock::time_point;

  virtual ~Clock() = default;
  virtual TimePoint now() = 0;
  virtual void sleep_for(Duration d) = 0;
};

class SystemClock : public Clock {
 public:
  TimePoint now() override { return std::chrono::steady_clock::now(); }
  void sleep_for(Duration d) override;
};

/// Virtual clock: sleep_for advances time instead of blocking. Accumulates
/// total slept duration so tests can assert backoff schedules.
class ManualClock : public Clock {
 public:
  TimePoint now() override {
    std::lock_guard<std::mutex> lock(mu_);
    return now_;
  }

  void sleep_for(Duration d) override {
    std::lock_guard<std::mutex> lock(mu_);
    now_ += d;
    total_slept_ += d;
  }

  void advance(Duration d) {
    std::lock_guard<std::mutex> lock(mu_);
    now_ += d;
  }

  Duration total_slept() {
    std::lock_guard<std::mutex> lock(mu_);
    return total_slept_;
  }

 private:
  std::mutex mu_;
  TimePoint now_{};  // epoch start; only differences matter
  Duration total_slept_{};
};

std::shared_ptr<Clock> system_clock();

}  // namespace metajudge
