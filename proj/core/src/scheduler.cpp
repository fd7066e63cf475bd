#include "pilotrt/scheduler.hpp"

#include "pilotrt/errors.hpp"

namespace pilotrt {

Scheduler::Scheduler(const NodeLayout& layout, SchedulerKind kind,
                     BoundedQueue<Unit>& in, Hooks hooks, Profiler* profiler,
                     std::string component)
    : layout_(layout),
      kind_(kind),
      in_(in),
      hooks_(std::move(hooks)),
      profiler_(profiler),
      component_(std::move(component)),
      map_(layout) {}

void Scheduler::start() {
  alloc_thread_ = std::thread([this] { alloc_loop(); });
  release_thread_ = std::thread([this] { release_loop(); });
}

void Scheduler::post_release(const std::string& uid, SlotAssignment slots) {
  releases_.push(ReleaseMsg{uid, std::move(slots)});
}

void Scheduler::close_releases() { releases_.close(); }

int Scheduler::busy_cores() const {
  std::lock_guard<std::mutex> lk(state_mu_);
  return map_.busy_cores();
}

size_t Scheduler::parked() const {
  std::lock_guard<std::mutex> lk(state_mu_);
  return waitlist_.size();
}

std::optional<SlotAssignment> Scheduler::try_allocate_locked(
    const Unit& unit) {
  const int cores = unit.description.cores;
  if (kind_ == SchedulerKind::Torus) {
    int nodes = (cores + layout_.cores_per_node - 1) / layout_.cores_per_node;
    return map_.allocate_torus(nodes);
  }
  // Multithreaded-style requests that fit one node stay on one node; larger
  // ones spread over topologically adjacent nodes in scan order.
  bool single_node = cores <= layout_.cores_per_node;
  return map_.allocate_continuous(cores, single_node);
}

void Scheduler::assign_locked(Unit& unit, SlotAssignment slots) {
  unit.slots = std::move(slots);
  if (profiler_)
    profiler_->record(unit.uid, component_, "assign",
                      std::to_string(unit.slots->total_cores));
  advance(unit, UnitState::A_EXECUTING_PENDING, profiler_, component_);
}

void Scheduler::maybe_close_downstream_locked() {
  if (alloc_done_ && waitlist_.empty() && !downstream_closed_) {
    downstream_closed_ = true;
    if (hooks_.close_downstream) hooks_.close_downstream();
  }
}

void Scheduler::alloc_loop() {
  while (auto unit = in_.pop()) {
    Unit u = std::move(*unit);
    if (profiler_) profiler_->record(u.uid, component_, "get");
    std::optional<Unit> ready;
    std::optional<Unit> failed;
    {
      std::lock_guard<std::mutex> lk(state_mu_);
      if (!waitlist_.empty()) {
        // FIFO, no backfill: anything behind a blocked unit waits too.
        if (profiler_) profiler_->record(u.uid, component_, "park");
        waitlist_.push_back(std::move(u));
      } else {
        std::optional<SlotAssignment> slots;
        bool too_large = false;
        try {
          slots = try_allocate_locked(u);
        } catch (const RequestTooLarge& e) {
          too_large = true;
          advance(u, UnitState::FAILED, profiler_, component_, e.what());
          failed = std::move(u);
        }
        if (!too_large) {
          if (slots) {
            assign_locked(u, std::move(*slots));
            ready = std::move(u);
          } else {
            if (profiler_) profiler_->record(u.uid, component_, "park");
            waitlist_.push_back(std::move(u));
          }
        }
      }
    }
    // Hand-offs happen outside the lock.
    if (failed && hooks_.finalize) hooks_.finalize(std::move(*failed));
    if (ready) hooks_.forward(std::move(*ready));
  }
  std::lock_guard<std::mutex> lk(state_mu_);
  alloc_done_ = true;
  maybe_close_downstream_locked();
}

void Scheduler::release_loop() {
  while (auto msg = releases_.pop()) {
    std::vector<Unit> ready;
    std::vector<Unit> failed;
    {
      std::lock_guard<std::mutex> lk(state_mu_);
      map_.release(msg->slots);
      if (profiler_)
        profiler_->record(msg->uid, component_, "release",
                          std::to_string(msg->slots.total_cores));
      // Re-evaluate the wait list head-first; stop at the first unit that
      // still does not fit. A head that can never fit is failed so it does
      // not block the list forever.
      while (!waitlist_.empty()) {
        Unit& head = waitlist_.front();
        std::optional<SlotAssignment> slots;
        try {
          slots = try_allocate_locked(head);
        } catch (const RequestTooLarge& e) {
          Unit u = std::move(head);
          waitlist_.pop_front();
          advance(u, UnitState::FAILED, profiler_, component_, e.what());
          failed.push_back(std::move(u));
          continue;
        }
        if (!slots) break;
        Unit u = std::move(head);
        waitlist_.pop_front();
        if (profiler_) profiler_->record(u.uid, component_, "unpark");
        assign_locked(u, std::move(*slots));
        ready.push_back(std::move(u));
      }
      maybe_close_downstream_locked();
    }
    // Hand-offs outside the lock: the downstream queue may apply
    // backpressure.
    for (auto& u : failed)
      if (hooks_.finalize) hooks_.finalize(std::move(u));
    for (auto& u : ready) hooks_.forward(std::move(u));
  }
}

void Scheduler::cancel_parked() {
  std::deque<Unit> parked;
  {
    std::lock_guard<std::mutex> lk(state_mu_);
    parked.swap(waitlist_);
    maybe_close_downstream_locked();
  }
  for (auto& u : parked) {
    advance(u, UnitState::CANCELED, profiler_, component_, "shutdown drain");
    if (hooks_.finalize) hooks_.finalize(std::move(u));
  }
}

void Scheduler::join() {
  if (alloc_thread_.joinable()) alloc_thread_.join();
  if (release_thread_.joinable()) release_thread_.join();
}

}  // namespace pilotrt
