#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>

#include "pilotrt/channel.hpp"
#include "pilotrt/launch.hpp"
#include "pilotrt/profile.hpp"
#include "pilotrt/resource.hpp"
#include "pilotrt/types.hpp"

namespace pilotrt {

// Pipeline stages a unit passes through inside the agent.
enum class ComponentId { StagerIn, Scheduler, Executor, StagerOut };

std::string_view to_string(ComponentId c);
std::optional<ComponentId> component_from_string(std::string_view name);

// Micro-benchmark hook: when a unit reaches the entry of `at`, it is
// replaced by `factor` units total (fresh uids for the extras); everything
// is dropped again once the component under test has finished with it, so
// downstream components stay idle.
struct CloneSpec {
  ComponentId at = ComponentId::Scheduler;
  int factor = 1;
};

struct AgentConfig {
  int executors = 1;
  int stagers = 1;
  SpawnMechanism spawner = SpawnMechanism::Direct;
  LaunchMethodId serial_method = LaunchMethodId::FORK;
  LaunchMethodId mpi_method = LaunchMethodId::FORK;
  std::optional<CloneSpec> clone;
  std::optional<ComponentId> drop_after;  // defaults to clone->at
  bool startup_barrier = false;
  bool fail_on_nonzero = true;
  size_t queue_capacity = 0;  // 0: 2 x pilot cores
  int poll_interval_ms = 100;
  std::string sandbox_root;   // per-unit sandboxes go below this

  void validate() const;  // throws InvalidDescription
  static AgentConfig from_resource(const ResourceConfig& rc);

  std::string to_json() const;
  static AgentConfig from_json(const std::string& text);
};

struct AgentReport {
  uint64_t pulled = 0;
  uint64_t clones_created = 0;
  uint64_t dropped = 0;
  uint64_t done = 0;
  uint64_t canceled = 0;
  uint64_t failed = 0;
  double ttc_a_s = 0.0;  // agent's own first-ingress to last-egress measure
  double wall_s = 0.0;
  uint64_t profiler_dropped = 0;
  int max_in_flight = 0;
  long fd_high_water = 0;

  // Unit conservation: every pulled or cloned unit is accounted for.
  bool conservation_ok() const {
    return pulled + clones_created == done + canceled + failed + dropped;
  }

  std::string to_json() const;
  static AgentReport from_json(const std::string& text);
};

// The pilot-side runtime: wires stager-in -> scheduler -> executors ->
// stager-out through bounded queues, pulls units from the workload channel
// on a poll interval, and runs them to a final state. run() returns once
// the workload-complete marker was seen and every unit reached a final
// state or was dropped.
class Agent {
 public:
  Agent(Pilot pilot, AgentConfig config, AgentChannel& channel,
        Profiler* profiler);

  AgentReport run();

  // Ask a running agent to wind down: queued and parked units are canceled,
  // in-flight processes are killed.
  void request_stop();

  const std::string& component_prefix() const { return prefix_; }

 private:
  friend struct AgentWiring;

  Pilot pilot_;
  AgentConfig config_;
  AgentChannel& channel_;
  Profiler* profiler_;
  std::string prefix_;

  std::atomic<bool> stop_requested_{false};

  std::mutex done_mu_;
  std::condition_variable done_cv_;
  uint64_t outstanding_ = 0;
  bool marker_seen_ = false;

  // Counters (under done_mu_).
  AgentReport report_;
  std::atomic<int64_t> first_ingress_us_{0};
  std::atomic<int64_t> last_egress_us_{0};
};

// Number of open file descriptors of this process, from /proc/self/fd.
long count_open_fds();

}  // namespace pilotrt
