#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pilotrt/bounded_queue.hpp"
#include "pilotrt/launch.hpp"
#include "pilotrt/profile.hpp"
#include "pilotrt/spawn.hpp"
#include "pilotrt/types.hpp"

namespace pilotrt {

// The agent's executors: instances pull units competitively from one queue,
// build the launch command, spawn and monitor the process, collect the exit
// code and report freed cores. Spawn-side work runs on the instance thread;
// completion-side work runs on one completion thread per pool, fed by the
// process monitor.
class ExecutorPool {
 public:
  struct Options {
    int instances = 1;
    SpawnMechanism mechanism = SpawnMechanism::Direct;
    LaunchMethodId serial_method = LaunchMethodId::FORK;
    LaunchMethodId mpi_method = LaunchMethodId::FORK;
    bool fail_on_nonzero = true;
    std::string sandbox_root;
  };

  struct Hooks {
    std::function<void(Unit&&)> forward;   // unit finished, exit code set
    std::function<void(Unit&&)> finalize;  // unit FAILED here
    // Freed cores back to the scheduler (real slot assignments only).
    std::function<void(const std::string& uid, SlotAssignment)> release;
  };

  ExecutorPool(BoundedQueue<Unit>& in, Options opts, Hooks hooks,
               Profiler* profiler, std::string component_prefix);

  void start();

  // Simulate an instance crash: its in-flight processes are killed and
  // their units fail; other instances are unaffected.
  void inject_crash(int instance);

  // Wait until every instance exited (input closed and drained) and every
  // in-flight process completed, then stop the completion strand.
  void join();

  int max_in_flight() const { return max_in_flight_.load(); }

 private:
  struct Completion {
    pid_t pid;
    int raw_status;
    int64_t reap_ts_us;
  };

  struct InFlight {
    Unit unit;
    int instance;
    SpawnRecord record;
    bool crash_kill = false;
  };

  void instance_loop(int instance);
  void completion_loop();
  void process_unit(Unit&& u, int instance);
  void fail_unit(Unit&& u, const std::string& component,
                 const std::string& why);

  BoundedQueue<Unit>& in_;
  Options opts_;
  Hooks hooks_;
  Profiler* profiler_;
  std::string prefix_;

  std::vector<std::thread> instances_;
  std::vector<std::unique_ptr<std::atomic<bool>>> crashed_;
  std::thread completion_thread_;
  BoundedQueue<Completion> completions_;  // unbounded, fed by the monitor

  mutable std::mutex inflight_mu_;
  std::condition_variable inflight_cv_;
  std::map<pid_t, InFlight> in_flight_;
  std::atomic<int> max_in_flight_{0};
};

}  // namespace pilotrt
