#pragma once

#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "pilotrt/bounded_queue.hpp"
#include "pilotrt/profile.hpp"
#include "pilotrt/types.hpp"

namespace pilotrt {

// Executes one staging directive. Relative targets (and stage-out relative
// sources) resolve against the unit sandbox; stage-in relative sources
// resolve against the process working directory. Throws StagingFailure.
void run_directive(const StagingDirective& d, const std::string& sandbox,
                   bool stage_in);

// Input/output stager pools. Instances compete on the inbound queue.
// Stage-in: creates the sandbox and runs input directives (A_STAGING_IN);
// directive-free units skip the state with zero filesystem operations.
// Stage-out: runs output directives (A_STAGING_OUT) and moves the unit to
// DONE either way.
class StagerPool {
 public:
  enum class Side { In, Out };

  struct Hooks {
    std::function<void(Unit&&)> forward;
    std::function<void(Unit&&)> finalize;  // FAILED exits
  };

  StagerPool(Side side, int instances, std::string sandbox_root,
             BoundedQueue<Unit>& in, Hooks hooks, Profiler* profiler,
             std::string component_prefix);

  void start();
  void join();

 private:
  void instance_loop(int instance);
  void stage_in(Unit& u, const std::string& comp);
  void stage_out(Unit& u, const std::string& comp);

  Side side_;
  int instances_n_;
  std::string sandbox_root_;
  BoundedQueue<Unit>& in_;
  Hooks hooks_;
  Profiler* profiler_;
  std::string prefix_;
  std::vector<std::thread> threads_;
};

}  // namespace pilotrt
