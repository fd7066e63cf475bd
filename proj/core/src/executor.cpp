#include "pilotrt/executor.hpp"

#include <filesystem>
#include <fstream>
#include <signal.h>

#include "pilotrt/clock.hpp"
#include "pilotrt/errors.hpp"

namespace pilotrt {

ExecutorPool::ExecutorPool(BoundedQueue<Unit>& in, Options opts, Hooks hooks,
                           Profiler* profiler, std::string component_prefix)
    : in_(in),
      opts_(std::move(opts)),
      hooks_(std::move(hooks)),
      profiler_(profiler),
      prefix_(std::move(component_prefix)) {
  for (int i = 0; i < opts_.instances; ++i)
    crashed_.push_back(std::make_unique<std::atomic<bool>>(false));
}

void ExecutorPool::start() {
  completion_thread_ = std::thread([this] { completion_loop(); });
  for (int i = 0; i < opts_.instances; ++i)
    instances_.emplace_back([this, i] { instance_loop(i); });
}

void ExecutorPool::instance_loop(int instance) {
  while (auto unit = in_.pop()) {
    if (crashed_[instance]->load()) {
      // A crashed instance stops pulling; put the unit back for the others.
      Unit u = std::move(*unit);
      Unit copy = u;  // try_push consumes its argument even on failure
      if (!in_.try_push(std::move(copy)))
        fail_unit(std::move(u), prefix_ + "." + std::to_string(instance),
                  "executor instance crash");
      return;
    }
    process_unit(std::move(*unit), instance);
  }
}

void ExecutorPool::fail_unit(Unit&& u, const std::string& component,
                             const std::string& why) {
  advance(u, UnitState::FAILED, profiler_, component, why);
  if (u.slots) {
    if (!u.phantom_slots && hooks_.release) hooks_.release(u.uid, *u.slots);
    u.slots.reset();
  }
  if (hooks_.finalize) hooks_.finalize(std::move(u));
}

void ExecutorPool::process_unit(Unit&& u, int instance) {
  const std::string comp = prefix_ + "." + std::to_string(instance);
  if (profiler_) profiler_->record(u.uid, comp, "get");

  if (u.sandbox.empty())
    u.sandbox = opts_.sandbox_root + "/" + u.uid;
  std::error_code ec;
  std::filesystem::create_directories(u.sandbox, ec);
  if (ec) {
    fail_unit(std::move(u), comp, "sandbox: " + ec.message());
    return;
  }

  if (!u.slots) {
    fail_unit(std::move(u), comp, "unit reached executor without slots");
    return;
  }
  LaunchPlan plan;
  try {
    LaunchMethodId method = u.description.cores > 1 ? opts_.mpi_method
                                                    : opts_.serial_method;
    plan = build_launch_command(u, method, *u.slots, u.sandbox);
  } catch (const Error& e) {
    fail_unit(std::move(u), comp, e.what());
    return;
  }

  if (!plan.script_text.empty()) {
    std::ofstream script(plan.script_path);
    script << plan.script_text;
    if (!script) {
      fail_unit(std::move(u), comp, "cannot write " + plan.script_path);
      return;
    }
  }

  std::vector<std::string> argv = plan.argv;
  if (opts_.mechanism == SpawnMechanism::Shell) {
    std::string cmdline;
    for (const auto& a : plan.argv) {
      if (!cmdline.empty()) cmdline += ' ';
      cmdline += shell_quote(a);
    }
    argv = {"/bin/sh", "-c", cmdline};
  }

  advance(u, UnitState::A_EXECUTING, profiler_, comp);

  pid_t pid = -1;
  try {
    pid = spawn_process(argv, plan.environment, u.sandbox,
                        u.sandbox + "/" + u.uid + ".out",
                        u.sandbox + "/" + u.uid + ".err");
  } catch (const SpawnFailure& e) {
    fail_unit(std::move(u), comp, e.what());
    return;
  }
  if (profiler_) profiler_->record(u.uid, comp, "exec_start");

  {
    std::lock_guard<std::mutex> lk(inflight_mu_);
    InFlight inf;
    inf.record.uid = u.uid;
    inf.record.pid = pid;
    inf.record.spawn_us = Clock::mono_us();
    inf.unit = std::move(u);
    inf.instance = instance;
    in_flight_.emplace(pid, std::move(inf));
    int n = static_cast<int>(in_flight_.size());
    if (n > max_in_flight_.load()) max_in_flight_.store(n);
  }
  ProcessMonitor::instance().watch(pid, [this, pid](int status, int64_t ts) {
    completions_.push(Completion{pid, status, ts});
  });
}

void ExecutorPool::completion_loop() {
  while (auto c = completions_.pop()) {
    InFlight inf;
    {
      std::lock_guard<std::mutex> lk(inflight_mu_);
      auto it = in_flight_.find(c->pid);
      if (it == in_flight_.end()) continue;
      inf = std::move(it->second);
      in_flight_.erase(it);
    }
    Unit u = std::move(inf.unit);
    const std::string comp = prefix_ + "." + std::to_string(inf.instance);
    bool signaled = false;
    int code = decode_exit_status(c->raw_status, signaled);
    inf.record.completion_us = c->reap_ts_us;
    inf.record.exit_code = code;
    inf.record.signaled = signaled;
    u.exit_code = code;
    if (profiler_)
      profiler_->record(u.uid, comp, "exec_stop", std::to_string(code));

    if (inf.crash_kill) {
      fail_unit(std::move(u), comp, "executor instance crash");
    } else if (signaled || (code != 0 && opts_.fail_on_nonzero)) {
      fail_unit(std::move(u), comp,
                (signaled ? "signaled, status " : "nonzero exit ") +
                    std::to_string(code));
    } else {
      advance(u, UnitState::A_STAGING_OUT_PENDING, profiler_, comp);
      if (u.slots) {
        if (!u.phantom_slots && hooks_.release)
          hooks_.release(u.uid, *u.slots);
        u.slots.reset();
      }
      hooks_.forward(std::move(u));
    }
    inflight_cv_.notify_all();
  }
}

void ExecutorPool::inject_crash(int instance) {
  crashed_[instance]->store(true);
  std::lock_guard<std::mutex> lk(inflight_mu_);
  for (auto& [pid, inf] : in_flight_) {
    if (inf.instance != instance) continue;
    inf.crash_kill = true;
    kill(pid, SIGKILL);
  }
}

void ExecutorPool::join() {
  for (auto& t : instances_)
    if (t.joinable()) t.join();
  {
    std::unique_lock<std::mutex> lk(inflight_mu_);
    inflight_cv_.wait(lk, [this] { return in_flight_.empty(); });
  }
  completions_.close();
  if (completion_thread_.joinable()) completion_thread_.join();
}

}  // namespace pilotrt
