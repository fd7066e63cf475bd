#include "pilotrt/agent.hpp"

#include <chrono>
#include <filesystem>
#include <thread>

#include <nlohmann/json.hpp>

#include "pilotrt/bounded_queue.hpp"
#include "pilotrt/clock.hpp"
#include "pilotrt/errors.hpp"
#include "pilotrt/executor.hpp"
#include "pilotrt/scheduler.hpp"
#include "pilotrt/stager.hpp"

namespace pilotrt {

using json = nlohmann::ordered_json;

std::string_view to_string(ComponentId c) {
  switch (c) {
    case ComponentId::StagerIn: return "stager_in";
    case ComponentId::Scheduler: return "scheduler";
    case ComponentId::Executor: return "executor";
    case ComponentId::StagerOut: return "stager_out";
  }
  return "scheduler";
}

std::optional<ComponentId> component_from_string(std::string_view name) {
  if (name == "stager_in") return ComponentId::StagerIn;
  if (name == "scheduler") return ComponentId::Scheduler;
  if (name == "executor") return ComponentId::Executor;
  if (name == "stager_out") return ComponentId::StagerOut;
  return std::nullopt;
}

void AgentConfig::validate() const {
  if (executors < 1 || stagers < 1)
    throw InvalidDescription("agent needs executors >= 1 and stagers >= 1");
  if (clone && clone->factor < 1)
    throw InvalidDescription("clone factor must be >= 1");
  if (drop_after && !clone)
    throw InvalidDescription("drop_after requires a clone spec");
  if (poll_interval_ms < 1)
    throw InvalidDescription("poll interval must be >= 1 ms");
}

AgentConfig AgentConfig::from_resource(const ResourceConfig& rc) {
  AgentConfig c;
  c.executors = rc.executors;
  c.stagers = rc.stagers;
  c.spawner = rc.spawner;
  c.serial_method = rc.serial;
  c.mpi_method = rc.mpi_like;
  return c;
}

std::string AgentConfig::to_json() const {
  json j;
  j["executors"] = executors;
  j["stagers"] = stagers;
  j["spawner"] = std::string(to_string(spawner));
  j["serial_method"] = std::string(to_string(serial_method));
  j["mpi_method"] = std::string(to_string(mpi_method));
  if (clone) {
    j["clone"] = {{"at", std::string(to_string(clone->at))},
                  {"factor", clone->factor}};
  }
  if (drop_after) j["drop_after"] = std::string(to_string(*drop_after));
  j["startup_barrier"] = startup_barrier;
  j["fail_on_nonzero"] = fail_on_nonzero;
  j["queue_capacity"] = queue_capacity;
  j["poll_interval_ms"] = poll_interval_ms;
  j["sandbox_root"] = sandbox_root;
  return j.dump();
}

AgentConfig AgentConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  AgentConfig c;
  c.executors = j.value("executors", 1);
  c.stagers = j.value("stagers", 1);
  if (auto s = spawn_mechanism_from_string(j.value("spawner", "direct")))
    c.spawner = *s;
  if (auto m = launch_method_from_string(j.value("serial_method", "FORK")))
    c.serial_method = *m;
  if (auto m = launch_method_from_string(j.value("mpi_method", "FORK")))
    c.mpi_method = *m;
  if (j.contains("clone")) {
    CloneSpec cs;
    if (auto at = component_from_string(
            j["clone"].value("at", "scheduler")))
      cs.at = *at;
    cs.factor = j["clone"].value("factor", 1);
    c.clone = cs;
  }
  if (j.contains("drop_after"))
    c.drop_after = component_from_string(j["drop_after"].get<std::string>());
  c.startup_barrier = j.value("startup_barrier", false);
  c.fail_on_nonzero = j.value("fail_on_nonzero", true);
  c.queue_capacity = j.value("queue_capacity", size_t{0});
  c.poll_interval_ms = j.value("poll_interval_ms", 100);
  c.sandbox_root = j.value("sandbox_root", std::string{});
  return c;
}

std::string AgentReport::to_json() const {
  json j;
  j["pulled"] = pulled;
  j["clones_created"] = clones_created;
  j["dropped"] = dropped;
  j["done"] = done;
  j["canceled"] = canceled;
  j["failed"] = failed;
  j["ttc_a_s"] = ttc_a_s;
  j["wall_s"] = wall_s;
  j["profiler_dropped"] = profiler_dropped;
  j["max_in_flight"] = max_in_flight;
  j["fd_high_water"] = fd_high_water;
  j["conservation_ok"] = conservation_ok();
  return j.dump();
}

AgentReport AgentReport::from_json(const std::string& text) {
  json j = json::parse(text);
  AgentReport r;
  r.pulled = j.value("pulled", uint64_t{0});
  r.clones_created = j.value("clones_created", uint64_t{0});
  r.dropped = j.value("dropped", uint64_t{0});
  r.done = j.value("done", uint64_t{0});
  r.canceled = j.value("canceled", uint64_t{0});
  r.failed = j.value("failed", uint64_t{0});
  r.ttc_a_s = j.value("ttc_a_s", 0.0);
  r.wall_s = j.value("wall_s", 0.0);
  r.profiler_dropped = j.value("profiler_dropped", uint64_t{0});
  r.max_in_flight = j.value("max_in_flight", 0);
  r.fd_high_water = j.value("fd_high_water", 0L);
  return r;
}

long count_open_fds() {
  long n = 0;
  std::error_code ec;
  for (auto it = std::filesystem::directory_iterator("/proc/self/fd", ec);
       !ec && it != std::filesystem::directory_iterator(); ++it)
    ++n;
  return n;
}

Agent::Agent(Pilot pilot, AgentConfig config, AgentChannel& channel,
             Profiler* profiler)
    : pilot_(std::move(pilot)),
      config_(std::move(config)),
      channel_(channel),
      profiler_(profiler),
      prefix_("agent." + pilot_.uid) {
  config_.validate();
  if (pilot_.state != PilotState::P_ACTIVE || !pilot_.nodes)
    throw Error("agent needs an active pilot with a node layout");
  if (config_.clone && !config_.drop_after)
    config_.drop_after = config_.clone->at;
}

void Agent::request_stop() {
  stop_requested_.store(true);
  done_cv_.notify_all();
}

// All pipeline wiring lives here so the Agent header stays small.
struct AgentWiring {
  Agent& a;
  const NodeLayout& layout;
  size_t qcap;

  BoundedQueue<Unit> stagein_q, sched_q, exec_q, stageout_q;

  std::optional<Scheduler> scheduler;
  std::optional<ExecutorPool> executors;
  std::optional<StagerPool> stagers_in, stagers_out;

  explicit AgentWiring(Agent& agent)
      : a(agent),
        layout(*a.pilot_.nodes),
        qcap(a.config_.queue_capacity
                 ? a.config_.queue_capacity
                 : static_cast<size_t>(2 * layout.total_cores())),
        stagein_q(qcap),
        sched_q(qcap),
        exec_q(qcap),
        stageout_q(qcap) {}

  Profiler* prof() const { return a.profiler_; }

  void note_ingress(int64_t ts) {
    int64_t expect = 0;
    a.first_ingress_us_.compare_exchange_strong(expect, ts);
  }

  void note_egress() {
    a.last_egress_us_.store(Clock::mono_us());
  }

  void track_new_work(uint64_t n) {
    std::lock_guard<std::mutex> lk(a.done_mu_);
    a.outstanding_ += n;
  }

  void work_finished() {
    {
      std::lock_guard<std::mutex> lk(a.done_mu_);
      if (a.outstanding_ > 0) a.outstanding_ -= 1;
    }
    a.done_cv_.notify_all();
  }

  // Unit left the pipeline through a final state.
  void finalize(Unit&& u, const std::string& comp) {
    if (prof()) prof()->record(u.uid, comp, "final",
                               std::string(to_string(u.state)));
    {
      std::lock_guard<std::mutex> lk(a.done_mu_);
      switch (u.state) {
        case UnitState::DONE: a.report_.done += 1; break;
        case UnitState::CANCELED: a.report_.canceled += 1; break;
        default: a.report_.failed += 1; break;
      }
    }
    if (!u.clone) a.channel_.push_update(update_for(u));
    note_egress();
    work_finished();
  }

  void drop(Unit&& u, const std::string& comp) {
    if (prof()) prof()->record(u.uid, comp, "drop");
    if (u.slots && !u.phantom_slots && scheduler)
      scheduler->post_release(u.uid, *u.slots);
    {
      std::lock_guard<std::mutex> lk(a.done_mu_);
      a.report_.dropped += 1;
    }
    note_egress();
    work_finished();
  }

  // Forward a unit across the boundary leaving `from` toward `to`.
  // Applies the drop hook of `from` and the clone hook of `to`.
  void cross(std::optional<ComponentId> from, std::optional<ComponentId> to,
             Unit&& u, const std::string& from_comp) {
    const auto& cfg = a.config_;
    if (from && cfg.drop_after && *cfg.drop_after == *from) {
      drop(std::move(u), from_comp);
      return;
    }
    if (to && cfg.clone && cfg.clone->at == *to && !u.clone) {
      const int factor = cfg.clone->factor;
      track_new_work(static_cast<uint64_t>(factor - 1));
      {
        std::lock_guard<std::mutex> lk(a.done_mu_);
        a.report_.clones_created += static_cast<uint64_t>(factor - 1);
      }
      for (int k = 1; k < factor; ++k) {
        Unit c = u;
        c.uid = next_unit_uid();
        c.clone = true;
        c.phantom_slots = u.slots.has_value();
        if (prof()) prof()->record(c.uid, from_comp, "clone", u.uid);
        push_to(*to, std::move(c), from_comp);
      }
      push_to(*to, std::move(u), from_comp);
      return;
    }
    if (to) {
      push_to(*to, std::move(u), from_comp);
    } else {
      finalize(std::move(u), from_comp);
    }
  }

  void push_to(ComponentId to, Unit&& u, const std::string& from_comp) {
    const std::string uid = u.uid;
    bool ok = false;
    switch (to) {
      case ComponentId::StagerIn: ok = stagein_q.push(std::move(u)); break;
      case ComponentId::Scheduler: ok = sched_q.push(std::move(u)); break;
      case ComponentId::Executor: ok = exec_q.push(std::move(u)); break;
      case ComponentId::StagerOut: ok = stageout_q.push(std::move(u)); break;
    }
    if (ok) {
      if (prof()) prof()->record(uid, from_comp, "put");
    } else {
      // Queue closed during shutdown; account for the lost unit.
      work_finished();
    }
  }
};

AgentReport Agent::run() {
  const int64_t t_start = Clock::mono_us();
  AgentWiring w(*this);
  const NodeLayout& layout = w.layout;

  if (config_.sandbox_root.empty())
    config_.sandbox_root = "pilotrt-sandboxes";
  const std::string sandbox_root = config_.sandbox_root + "/" + pilot_.uid;
  std::filesystem::create_directories(sandbox_root);

  SchedulerKind kind = layout.topology.kind == TopologyKind::Torus
                           ? SchedulerKind::Torus
                           : SchedulerKind::Continuous;

  const std::string sched_comp = prefix_ + ".scheduler";
  Scheduler::Hooks sched_hooks;
  sched_hooks.forward = [&](Unit&& u) {
    w.cross(ComponentId::Scheduler, ComponentId::Executor, std::move(u),
            sched_comp);
  };
  sched_hooks.finalize = [&](Unit&& u) { w.finalize(std::move(u), sched_comp); };
  sched_hooks.close_downstream = [&] { w.exec_q.close(); };
  w.scheduler.emplace(layout, kind, w.sched_q, std::move(sched_hooks),
                      profiler_, sched_comp);

  ExecutorPool::Options eopts;
  eopts.instances = config_.executors;
  eopts.mechanism = config_.spawner;
  eopts.serial_method = config_.serial_method;
  eopts.mpi_method = config_.mpi_method;
  eopts.fail_on_nonzero = config_.fail_on_nonzero;
  eopts.sandbox_root = sandbox_root;
  const std::string exec_prefix = prefix_ + ".executor";
  ExecutorPool::Hooks exec_hooks;
  exec_hooks.forward = [&](Unit&& u) {
    w.cross(ComponentId::Executor, ComponentId::StagerOut, std::move(u),
            exec_prefix);
  };
  exec_hooks.finalize = [&](Unit&& u) { w.finalize(std::move(u), exec_prefix); };
  exec_hooks.release = [&](const std::string& uid, SlotAssignment slots) {
    w.scheduler->post_release(uid, std::move(slots));
  };
  w.executors.emplace(w.exec_q, eopts, std::move(exec_hooks), profiler_,
                      exec_prefix);

  const std::string si_prefix = prefix_ + ".stager_in";
  StagerPool::Hooks si_hooks;
  si_hooks.forward = [&](Unit&& u) {
    w.cross(ComponentId::StagerIn, ComponentId::Scheduler, std::move(u),
            si_prefix);
  };
  si_hooks.finalize = [&](Unit&& u) { w.finalize(std::move(u), si_prefix); };
  w.stagers_in.emplace(StagerPool::Side::In, config_.stagers, sandbox_root,
                       w.stagein_q, std::move(si_hooks), profiler_, si_prefix);

  const std::string so_prefix = prefix_ + ".stager_out";
  StagerPool::Hooks so_hooks;
  so_hooks.forward = [&](Unit&& u) {
    w.cross(ComponentId::StagerOut, std::nullopt, std::move(u), so_prefix);
  };
  so_hooks.finalize = [&](Unit&& u) { w.finalize(std::move(u), so_prefix); };
  w.stagers_out.emplace(StagerPool::Side::Out, config_.stagers, sandbox_root,
                        w.stageout_q, std::move(so_hooks), profiler_,
                        so_prefix);

  w.scheduler->start();
  w.executors->start();
  w.stagers_in->start();
  w.stagers_out->start();

  // Pull strand: polls the channel on the configured interval; with the
  // startup barrier on, units are buffered until the complete workload has
  // arrived.
  const std::string pull_comp = prefix_ + ".pull";
  std::thread fd_sampler;
  std::atomic<bool> sampler_stop{false};
  fd_sampler = std::thread([this, &sampler_stop] {
    while (!sampler_stop.load()) {
      long n = count_open_fds();
      std::lock_guard<std::mutex> lk(done_mu_);
      if (n > report_.fd_high_water) report_.fd_high_water = n;
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
  });

  {
    std::vector<Unit> barrier_buffer;
    bool barrier_released = !config_.startup_barrier;
    for (;;) {
      auto tick_deadline =
          std::chrono::steady_clock::now() +
          std::chrono::milliseconds(config_.poll_interval_ms);
      auto docs = channel_.pull_units();
      for (auto& doc : docs) {
        Unit u = unit_from_doc(doc);
        if (profiler_) profiler_->record(u.uid, pull_comp, "ingress");
        w.note_ingress(Clock::mono_us());
        w.track_new_work(1);
        {
          std::lock_guard<std::mutex> lk(done_mu_);
          report_.pulled += 1;
        }
        if (!barrier_released)
          barrier_buffer.push_back(std::move(u));
        else
          w.cross(std::nullopt, ComponentId::StagerIn, std::move(u),
                  pull_comp);
      }
      bool complete = channel_.workload_complete();
      if (complete && !barrier_released) {
        if (profiler_)
          profiler_->record("", pull_comp, "barrier_release",
                            std::to_string(barrier_buffer.size()));
        for (auto& u : barrier_buffer)
          w.cross(std::nullopt, ComponentId::StagerIn, std::move(u),
                  pull_comp);
        barrier_buffer.clear();
        barrier_released = true;
      }
      if (complete && barrier_released) {
        std::lock_guard<std::mutex> lk(done_mu_);
        marker_seen_ = true;
        break;
      }
      if (stop_requested_.load()) break;
      std::this_thread::sleep_until(tick_deadline);
    }
  }
  done_cv_.notify_all();

  // Wait for the workload to drain (or for a stop request).
  {
    std::unique_lock<std::mutex> lk(done_mu_);
    done_cv_.wait(lk, [this] {
      return (marker_seen_ && outstanding_ == 0) || stop_requested_.load();
    });
  }

  const bool stopping = stop_requested_.load();

  // Orderly shutdown, upstream to downstream. On a stop request the queued
  // and parked units are canceled and in-flight processes killed.
  auto cancel_queue = [&](BoundedQueue<Unit>& q, const std::string& comp) {
    q.close();
    Unit u;
    while (q.try_pop(u)) {
      advance(u, UnitState::CANCELED, profiler_, comp, "shutdown drain");
      w.finalize(std::move(u), comp);
    }
  };

  if (stopping) {
    cancel_queue(w.stagein_q, pull_comp);
    w.stagers_in->join();
    cancel_queue(w.sched_q, pull_comp);
    w.scheduler->join_alloc_only();
  } else {
    w.stagein_q.close();
    w.stagers_in->join();
    w.sched_q.close();
    w.scheduler->join_alloc_only();
  }
  w.scheduler->cancel_parked();
  if (stopping) {
    for (int i = 0; i < config_.executors; ++i) w.executors->inject_crash(i);
    cancel_queue(w.exec_q, pull_comp);
  }
  w.executors->join();
  w.scheduler->close_releases();
  w.scheduler->join();
  if (stopping) cancel_queue(w.stageout_q, pull_comp);
  w.stageout_q.close();
  w.stagers_out->join();

  sampler_stop.store(true);
  if (fd_sampler.joinable()) fd_sampler.join();

  std::lock_guard<std::mutex> lk(done_mu_);
  report_.wall_s = (Clock::mono_us() - t_start) / 1e6;
  int64_t fi = first_ingress_us_.load(), le = last_egress_us_.load();
  report_.ttc_a_s = (fi && le && le > fi) ? (le - fi) / 1e6 : 0.0;
  report_.max_in_flight = w.executors->max_in_flight();
  if (profiler_) {
    profiler_->flush();
    report_.profiler_dropped = profiler_->dropped();
  }
  return report_;
}

}  // namespace pilotrt
