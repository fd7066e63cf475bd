#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "pilotrt/launch.hpp"
#include "pilotrt/types.hpp"

namespace pilotrt {

// A virtual machine definition plus the agent layout to use on it.
// Read from a JSON file or taken from the built-in profiles.
struct ResourceConfig {
  std::string resource_id = "local";
  int nodes = 2;
  int cores_per_node = 8;
  Topology topology;
  LaunchMethodId mpi_like = LaunchMethodId::FORK;
  LaunchMethodId serial = LaunchMethodId::FORK;
  SpawnMechanism spawner = SpawnMechanism::Direct;
  int executors = 1;
  int stagers = 1;

  int total_cores() const { return nodes * cores_per_node; }

  void validate() const;  // throws InvalidDescription

  static ResourceConfig from_json_file(const std::filesystem::path& file);
  static ResourceConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  // "local" plus the three synthetic machine profiles (24/16/32-core nodes).
  static ResourceConfig builtin(std::string_view name);
  static std::vector<std::string> builtin_names();

  // Resolves a --resource argument: a builtin name or a path to a file.
  static ResourceConfig resolve(const std::string& name_or_path);
};

// Simulated local resource manager: accepts pilot jobs into a FIFO queue
// and activates them against whole-node capacity. Stands in for a batch
// system; queue wait is zero unless capacity is busy, no priorities, no
// backfill.
class ResourceManager {
 public:
  struct Callbacks {
    // Fired on the notifier thread when the job gets its nodes.
    std::function<void(const std::string& handle, const NodeLayout&)>
        on_active;
    // Fired when the job ends (released or duration exhausted).
    std::function<void(const std::string& handle)> on_done;
  };

  explicit ResourceManager(ResourceConfig config);
  ~ResourceManager();

  ResourceManager(const ResourceManager&) = delete;
  ResourceManager& operator=(const ResourceManager&) = delete;

  const ResourceConfig& config() const { return config_; }

  // Enqueue a pilot job. Throws CapacityExceeded when the request can never
  // fit. Activation happens asynchronously in FIFO order.
  std::string submit_pilot_job(const PilotDescription& desc,
                               Callbacks callbacks);

  // Return the job's capacity and re-evaluate the queue. UnknownHandle if
  // the handle does not exist.
  void release_pilot_job(const std::string& handle);

  // Allocation of an active job. Throws NotActive before activation.
  NodeLayout query_layout(const std::string& handle) const;

  int free_nodes() const;

 private:
  enum class JobState { Queued, Active, Ended };

  struct Job {
    std::string handle;
    PilotDescription desc;
    Callbacks callbacks;
    JobState state = JobState::Queued;
    int nodes_needed = 0;
    std::vector<int> node_indices;
    int64_t deadline_us = 0;  // activation time + runtime
  };

  void notifier_loop();
  void activate_ready_locked(std::vector<std::function<void()>>& fired);
  void end_job_locked(Job& job);
  NodeLayout layout_for_locked(const Job& job) const;

  ResourceConfig config_;
  std::vector<std::vector<int>> node_coords_;  // torus only
  mutable std::mutex mu_;
  std::map<std::string, Job> jobs_;
  std::deque<std::string> queue_;  // FIFO of queued handles
  std::set<int> free_nodes_;
  uint64_t next_handle_ = 0;

  std::condition_variable cv_;
  bool stop_ = false;
  std::thread notifier_;
};

}  // namespace pilotrt
