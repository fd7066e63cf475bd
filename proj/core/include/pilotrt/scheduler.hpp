#pragma once

#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "pilotrt/bounded_queue.hpp"
#include "pilotrt/core_map.hpp"
#include "pilotrt/profile.hpp"
#include "pilotrt/types.hpp"

namespace pilotrt {

enum class SchedulerKind { Continuous, Torus };

// The agent's scheduler: exactly one instance per agent. Allocation and
// release run on two message-driven strands sharing the core map under one
// mutex; the map lock is never held across queue waits. Units that do not
// fit are parked in a FIFO wait list with no backfill: a later small unit
// never passes a blocked earlier one.
class Scheduler {
 public:
  struct Hooks {
    // Unit got its slots and moved to A_EXECUTING_PENDING.
    std::function<void(Unit&&)> forward;
    // Unit left the pipeline here (FAILED on RequestTooLarge, CANCELED on
    // shutdown with parked units).
    std::function<void(Unit&&)> finalize;
    // Called once, when no further unit can ever be forwarded.
    std::function<void()> close_downstream;
  };

  struct ReleaseMsg {
    std::string uid;
    SlotAssignment slots;
  };

  Scheduler(const NodeLayout& layout, SchedulerKind kind,
            BoundedQueue<Unit>& in, Hooks hooks, Profiler* profiler,
            std::string component);

  void start();

  // Post freed cores from an executor strand; processed asynchronously.
  void post_release(const std::string& uid, SlotAssignment slots);

  // Close the release strand once no component will release again.
  void close_releases();

  // Cancel everything still parked (shutdown path).
  void cancel_parked();

  void join();

  int busy_cores() const;
  size_t parked() const;

 private:
  void alloc_loop();
  void release_loop();
  std::optional<SlotAssignment> try_allocate_locked(const Unit& unit);
  void assign_locked(Unit& unit, SlotAssignment slots);
  void maybe_close_downstream_locked();

  NodeLayout layout_;
  SchedulerKind kind_;
  BoundedQueue<Unit>& in_;
  Hooks hooks_;
  Profiler* profiler_;
  std::string component_;

  mutable std::mutex state_mu_;
  CoreMap map_;
  std::deque<Unit> waitlist_;
  bool alloc_done_ = false;
  bool downstream_closed_ = false;

  BoundedQueue<ReleaseMsg> releases_;  // unbounded
  std::thread alloc_thread_;
  std::thread release_thread_;
};

}  // namespace pilotrt
