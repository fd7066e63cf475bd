#pragma once

#include <cstdint>
#include <ctime>

namespace pilotrt {

// Microsecond timestamps. The monotonic clock is CLOCK_MONOTONIC, which is
// shared by all processes on the host, so timestamps from an out-of-process
// agent compare directly with manager-side ones.
struct Clock {
  static int64_t mono_us() {
    timespec ts{};
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return static_cast<int64_t>(ts.tv_sec) * 1000000 + ts.tv_nsec / 1000;
  }

  static int64_t wall_us() {
    timespec ts{};
    clock_gettime(CLOCK_REALTIME, &ts);
    return static_cast<int64_t>(ts.tv_sec) * 1000000 + ts.tv_nsec / 1000;
  }
};

}  // namespace pilotrt
