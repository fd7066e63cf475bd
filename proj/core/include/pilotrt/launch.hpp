#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pilotrt/types.hpp"

namespace pilotrt {

// Launching methods. FORK (direct process creation) and SHELL_WRAPPER (a
// generated sh script, the local shape of an ssh-style launcher) are
// implemented; the rest are registry stubs that raise UnsupportedLaunchMethod
// when a command is built with them.
enum class LaunchMethodId {
  FORK,
  SHELL_WRAPPER,
  MPIRUN,
  MPIEXEC,
  APRUN,
  CCMRUN,
  RUNJOB,
  DPLACE,
  IBRUN,
  ORTE,
  RSH,
  SSH,
  POE,
};

std::string_view to_string(LaunchMethodId m);
std::optional<LaunchMethodId> launch_method_from_string(std::string_view name);
bool launch_method_implemented(LaunchMethodId m);

// How the executor creates the process once the command is built:
// Direct spawns the argv itself, Shell goes through /bin/sh -c.
enum class SpawnMechanism { Direct, Shell };

std::string_view to_string(SpawnMechanism m);
std::optional<SpawnMechanism> spawn_mechanism_from_string(
    std::string_view name);

struct LaunchPlan {
  std::vector<std::string> argv;
  // Environment entries added on top of the inherited environment; includes
  // the slot description (node list, core indices) for the task.
  std::map<std::string, std::string> environment;
  // SHELL_WRAPPER only: generated script, written to script_path before
  // spawning.
  std::string script_text;
  std::string script_path;
};

// Slot description exported to the task:
//   PRT_UNIT_ID      unit uid
//   PRT_SLOT_NODES   comma-separated node ids
//   PRT_SLOT_CORES   node_id:i+j+k per node, ';'-separated
//   PRT_CORES_TOTAL  total core count
std::map<std::string, std::string> slot_environment(
    const Unit& unit, const SlotAssignment& slots);

// Deterministic launch command for the unit. Throws UnsupportedLaunchMethod
// for registry stubs.
LaunchPlan build_launch_command(const Unit& unit, LaunchMethodId method,
                                const SlotAssignment& slots,
                                const std::string& sandbox);

// POSIX single-quote escaping for generated scripts and shell command lines.
std::string shell_quote(std::string_view s);

}  // namespace pilotrt
