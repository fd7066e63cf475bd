#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace pilotrt {

struct SpawnRecord {
  std::string uid;
  pid_t pid = -1;
  int64_t spawn_us = 0;
  int64_t completion_us = 0;  // valid once exit_code is set
  std::optional<int> exit_code;
  bool signaled = false;
};

// Process-wide child reaper. All children the runtime creates are registered
// here; a single thread blocks in waitpid(-1) and dispatches exit statuses,
// so completion is notification-driven rather than polled. Handlers must be
// quick and non-blocking (they run on the reaper thread).
class ProcessMonitor {
 public:
  using ExitFn = std::function<void(int raw_status, int64_t reap_ts_us)>;

  static ProcessMonitor& instance();

  // Register interest in a child created earlier via spawn. Safe to call
  // after the child already exited: the stashed status fires immediately.
  void watch(pid_t pid, ExitFn fn);

  int watched() const;

 private:
  ProcessMonitor();
  void loop();

  struct Impl;
  Impl* impl_;
};

// Start argv with the given extra environment, working directory and
// stdout/stderr files. Returns the pid; throws SpawnFailure (missing
// executable, resource exhaustion). The caller must watch() the pid.
pid_t spawn_process(const std::vector<std::string>& argv,
                    const std::map<std::string, std::string>& extra_env,
                    const std::string& cwd, const std::string& stdout_file,
                    const std::string& stderr_file);

// Decode a waitpid status: exit code for normal exits, 128 + signal for
// signaled ones.
int decode_exit_status(int raw_status, bool& signaled);

}  // namespace pilotrt
