#include "pilotrt/profile.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "pilotrt/clock.hpp"
#include "pilotrt/errors.hpp"

namespace pilotrt {

std::string format_profile_line(const ProfileEvent& e) {
  std::string out;
  out.reserve(64 + e.uid.size() + e.component.size() + e.label.size() +
              e.detail.size());
  out += std::to_string(e.ts_mono_us);
  out += ',';
  out += std::to_string(e.ts_wall_us);
  out += ',';
  out += e.uid;
  out += ',';
  out += e.component;
  out += ',';
  out += e.label;
  out += ',';
  out += e.detail;
  return out;
}

ProfileEvent parse_profile_line(std::string_view line) {
  // First five fields are comma-separated; everything after the fifth comma
  // is the detail and may itself contain commas.
  ProfileEvent e;
  size_t pos = 0;
  auto take = [&](bool last) -> std::string_view {
    if (pos > line.size()) throw Error("malformed profile line: " +
                                       std::string(line));
    if (last) {
      auto f = line.substr(pos);
      pos = line.size() + 1;
      return f;
    }
    size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos)
      throw Error("malformed profile line: " + std::string(line));
    auto f = line.substr(pos, comma - pos);
    pos = comma + 1;
    return f;
  };
  auto to_i64 = [&](std::string_view f) {
    try {
      return std::stoll(std::string(f));
    } catch (const std::exception&) {
      throw Error("malformed profile timestamp: " + std::string(line));
    }
  };
  e.ts_mono_us = to_i64(take(false));
  e.ts_wall_us = to_i64(take(false));
  e.uid = std::string(take(false));
  e.component = std::string(take(false));
  e.label = std::string(take(false));
  e.detail = std::string(take(true));
  return e;
}

Profiler::Profiler() : enabled_(false) {}

Profiler::Profiler(Options opts) : enabled_(true), opts_(std::move(opts)) {
  if (!opts_.dir.empty()) {
    std::filesystem::create_directories(opts_.dir);
    flusher_ = std::thread([this] { flusher_loop(); });
  }
}

Profiler::~Profiler() {
  stop_.store(true);
  flush_cv_.notify_all();
  if (flusher_.joinable()) flusher_.join();
  if (!opts_.dir.empty()) flush_locked_buffers();
}

Profiler::ComponentBuffer& Profiler::buffer_for(std::string_view component) {
  std::lock_guard<std::mutex> lk(registry_mu_);
  auto it = buffers_.find(component);
  if (it == buffers_.end()) {
    auto buf = std::make_unique<ComponentBuffer>();
    if (!opts_.dir.empty()) {
      std::string fname(component);
      std::replace(fname.begin(), fname.end(), '/', '_');
      buf->file = opts_.dir / (fname + ".prof");
    }
    it = buffers_.emplace(std::string(component), std::move(buf)).first;
  }
  return *it->second;
}

void Profiler::record(std::string_view uid, std::string_view component,
                      std::string_view label, std::string_view detail) {
  if (!enabled_) return;
  ComponentBuffer& buf = buffer_for(component);
  std::lock_guard<std::mutex> lk(buf.mu);
  if (buf.pending.size() >= opts_.buffer_cap || write_failed_.load()) {
    dropped_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  // Timestamps are taken under the buffer lock so each component's stream
  // is ordered even when several strands record for the same component.
  ProfileEvent e;
  e.ts_mono_us = Clock::mono_us();
  e.ts_wall_us = Clock::wall_us();
  e.uid = std::string(uid);
  e.component = std::string(component);
  e.label = std::string(label);
  e.detail = std::string(detail);
  if (opts_.retain_in_memory) buf.retained.push_back(e);
  buf.pending.push_back(std::move(e));
}

void Profiler::flusher_loop() {
  std::unique_lock<std::mutex> lk(flush_mu_);
  while (!stop_.load()) {
    flush_cv_.wait_for(lk, std::chrono::milliseconds(opts_.flush_interval_ms),
                       [this] { return stop_.load(); });
    flush_locked_buffers();
  }
}

void Profiler::flush_locked_buffers() {
  if (opts_.dir.empty() || write_failed_.load()) return;
  std::vector<ComponentBuffer*> bufs;
  {
    std::lock_guard<std::mutex> lk(registry_mu_);
    bufs.reserve(buffers_.size());
    for (auto& [_, b] : buffers_) bufs.push_back(b.get());
  }
  for (ComponentBuffer* b : bufs) {
    std::vector<ProfileEvent> batch;
    {
      std::lock_guard<std::mutex> lk(b->mu);
      if (b->pending.empty()) continue;
      batch.swap(b->pending);
    }
    std::ofstream out(b->file, std::ios::app);
    for (const auto& e : batch) out << format_profile_line(e) << '\n';
    if (!out) {
      // Disk trouble: disable further writes, keep the run alive.
      write_failed_.store(true);
      std::fprintf(stderr,
                   "pilotrt: profile write to %s failed, profiling disabled\n",
                   b->file.string().c_str());
      return;
    }
  }
}

void Profiler::flush() {
  if (!enabled_) return;
  flush_locked_buffers();
}

std::vector<ProfileEvent> Profiler::snapshot() const {
  std::vector<ProfileEvent> all;
  std::lock_guard<std::mutex> lk(registry_mu_);
  for (const auto& [_, b] : buffers_) {
    std::lock_guard<std::mutex> blk(b->mu);
    all.insert(all.end(), b->retained.begin(), b->retained.end());
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const ProfileEvent& a, const ProfileEvent& b) {
                     return a.ts_mono_us < b.ts_mono_us;
                   });
  return all;
}

std::vector<ProfileEvent> load_profile_dir(const std::filesystem::path& dir) {
  std::vector<ProfileEvent> all;
  if (!std::filesystem::is_directory(dir)) throw EmptyLog();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".prof")
      continue;
    std::ifstream in(entry.path());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      all.push_back(parse_profile_line(line));
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const ProfileEvent& a, const ProfileEvent& b) {
                     return a.ts_mono_us < b.ts_mono_us;
                   });
  return all;
}

}  // namespace pilotrt
