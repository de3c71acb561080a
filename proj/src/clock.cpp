#include "metajudge/clock.hpp"

#include <thread>

namespace metajudge {

void SystemClock::sleep_for(Duration d) {
  if (d > Duration::zero()) std::this_thread::sleep_for(d);
}

std::shared_ptr<Clock> system_clock() {
  static std::shared_ptr<Clock> instance = std::make_shared<SystemClock>();
  return instance;
}

}  // namespace metajudge
