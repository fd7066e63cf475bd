#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace pilotrt {

// One timestamped record: a state transition or a component action.
// The sole input to all metric computation.
struct ProfileEvent {
  int64_t ts_mono_us = 0;
  int64_t ts_wall_us = 0;
  std::string uid;        // entity id, may be empty for component actions
  std::string component;  // e.g. "agent.scheduler", "agent.executor.0"
  std::string label;      // state name or action verb
  std::string detail;     // free-form, last field, may contain commas
};

// File format, one event per line, append-only, per component:
//   ts_mono,ts_wall,uid,component,label,detail
std::string format_profile_line(const ProfileEvent& e);
ProfileEvent parse_profile_line(std::string_view line);

// Timestamped event recorder. record() appends to a per-component buffer
// under that buffer's lock and never touches the filesystem; a flusher
// thread writes buffers out to <dir>/<component>.prof. When the buffer cap
// is hit, events are dropped and counted instead of blocking the caller.
class Profiler {
 public:
  struct Options {
    std::filesystem::path dir;       // empty: keep events in memory only
    size_t buffer_cap = 1u << 20;    // unflushed events per component
    int flush_interval_ms = 50;
    bool retain_in_memory = true;    // keep a copy for snapshot()
  };

  Profiler();  // disabled: record() is a no-op, no files are written
  explicit Profiler(Options opts);
  ~Profiler();

  Profiler(const Profiler&) = delete;
  Profiler& operator=(const Profiler&) = delete;

  bool enabled() const { return enabled_; }

  void record(std::string_view uid, std::string_view component,
              std::string_view label, std::string_view detail = {});

  // Events dropped due to buffer overflow or after a write failure.
  uint64_t dropped() const { return dropped_.load(std::memory_order_relaxed); }

  // Force all buffered events out to disk (no-op without a directory).
  void flush();

  // Copy of everything recorded so far, sorted by monotonic timestamp.
  // Requires retain_in_memory.
  std::vector<ProfileEvent> snapshot() const;

 private:
  struct ComponentBuffer {
    std::mutex mu;
    std::vector<ProfileEvent> pending;   // not yet flushed
    std::vector<ProfileEvent> retained;  // full history if retaining
    std::filesystem::path file;
  };

  ComponentBuffer& buffer_for(std::string_view component);
  void flusher_loop();
  void flush_locked_buffers();

  bool enabled_ = false;
  Options opts_;
  std::atomic<uint64_t> dropped_{0};
  std::atomic<bool> write_failed_{false};

  mutable std::mutex registry_mu_;
  std::map<std::string, std::unique_ptr<ComponentBuffer>, std::less<>>
      buffers_;

  std::atomic<bool> stop_{false};
  std::condition_variable_any flush_cv_;
  std::mutex flush_mu_;
  std::thread flusher_;
};

// Read every *.prof file in a directory into one event list, sorted by
// monotonic timestamp.
std::vector<ProfileEvent> load_profile_dir(const std::filesystem::path& dir);

}  // namespace pilotrt
