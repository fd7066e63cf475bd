#include "pilotrt/spawn.hpp"

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <spawn.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "pilotrt/clock.hpp"
#include "pilotrt/errors.hpp"

extern char** environ;

namespace pilotrt {

struct ProcessMonitor::Impl {
  std::mutex mu;
  std::condition_variable cv;
  std::map<pid_t, ExitFn> watched;
  // Exits reaped before watch() registered them: pid -> (status, ts).
  std::map<pid_t, std::pair<int, int64_t>> orphaned;
  std::thread thread;
};

ProcessMonitor& ProcessMonitor::instance() {
  // Intentionally leaked: the reaper thread lives for the whole process.
  static ProcessMonitor* mon = new ProcessMonitor();
  return *mon;
}

ProcessMonitor::ProcessMonitor() : impl_(new Impl) {
  impl_->thread = std::thread([this] { loop(); });
  impl_->thread.detach();
}

void ProcessMonitor::watch(pid_t pid, ExitFn fn) {
  ExitFn fire;
  int status = 0;
  int64_t ts = 0;
  {
    std::lock_guard<std::mutex> lk(impl_->mu);
    auto it = impl_->orphaned.find(pid);
    if (it != impl_->orphaned.end()) {
      status = it->second.first;
      ts = it->second.second;
      impl_->orphaned.erase(it);
      fire = std::move(fn);
    } else {
      impl_->watched.emplace(pid, std::move(fn));
    }
  }
  if (fire) {
    fire(status, ts);
  } else {
    impl_->cv.notify_one();
  }
}

int ProcessMonitor::watched() const {
  std::lock_guard<std::mutex> lk(impl_->mu);
  return static_cast<int>(impl_->watched.size());
}

void ProcessMonitor::loop() {
  for (;;) {
    {
      std::unique_lock<std::mutex> lk(impl_->mu);
      impl_->cv.wait(lk, [this] { return !impl_->watched.empty(); });
    }
    int status = 0;
    pid_t pid = waitpid(-1, &status, 0);
    if (pid < 0) {
      if (errno == ECHILD) {
        // Registration raced the fork; give the spawner a moment.
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
      continue;
    }
    int64_t ts = Clock::mono_us();
    ExitFn fn;
    {
      std::lock_guard<std::mutex> lk(impl_->mu);
      auto it = impl_->watched.find(pid);
      if (it != impl_->watched.end()) {
        fn = std::move(it->second);
        impl_->watched.erase(it);
      } else {
        impl_->orphaned.emplace(pid, std::make_pair(status, ts));
      }
    }
    if (fn) fn(status, ts);
  }
}

int decode_exit_status(int raw_status, bool& signaled) {
  if (WIFSIGNALED(raw_status)) {
    signaled = true;
    return 128 + WTERMSIG(raw_status);
  }
  signaled = false;
  return WIFEXITED(raw_status) ? WEXITSTATUS(raw_status) : -1;
}

pid_t spawn_process(const std::vector<std::string>& argv,
                    const std::map<std::string, std::string>& extra_env,
                    const std::string& cwd, const std::string& stdout_file,
                    const std::string& stderr_file) {
  if (argv.empty()) throw SpawnFailure("empty argv");

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  // Inherited environment with the overlay applied on top.
  std::vector<std::string> env_store;
  for (char** e = environ; *e; ++e) {
    std::string_view entry(*e);
    auto eq = entry.find('=');
    if (eq != std::string_view::npos &&
        extra_env.count(std::string(entry.substr(0, eq))))
      continue;
    env_store.emplace_back(entry);
  }
  for (const auto& [k, v] : extra_env) env_store.push_back(k + "=" + v);
  std::vector<char*> cenv;
  cenv.reserve(env_store.size() + 1);
  for (auto& e : env_store) cenv.push_back(e.data());
  cenv.push_back(nullptr);

  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 1, stdout_file.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&fa, 2, stderr_file.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (!cwd.empty()) posix_spawn_file_actions_addchdir_np(&fa, cwd.c_str());

  pid_t pid = -1;
  int rc = posix_spawn(&pid, argv[0].c_str(), &fa, nullptr, cargv.data(),
                       cenv.data());
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0)
    throw SpawnFailure("cannot spawn '" + argv[0] + "': " + strerror(rc));
  return pid;
}

}  // namespace pilotrt
