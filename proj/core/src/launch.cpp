#include "pilotrt/launch.hpp"

#include <array>

#include "pilotrt/errors.hpp"

namespace pilotrt {

namespace {

constexpr std::array<std::string_view, 13> kMethodNames = {
    "FORK", "SHELL_WRAPPER", "MPIRUN", "MPIEXEC", "APRUN", "CCMRUN", "RUNJOB",
    "DPLACE", "IBRUN", "ORTE", "RSH", "SSH", "POE",
};

}  // namespace

std::string_view to_string(LaunchMethodId m) {
  return kMethodNames[static_cast<size_t>(m)];
}

std::optional<LaunchMethodId> launch_method_from_string(
    std::string_view name) {
  for (size_t i = 0; i < kMethodNames.size(); ++i)
    if (kMethodNames[i] == name) return static_cast<LaunchMethodId>(i);
  return std::nullopt;
}

bool launch_method_implemented(LaunchMethodId m) {
  return m == LaunchMethodId::FORK || m == LaunchMethodId::SHELL_WRAPPER;
}

std::string_view to_string(SpawnMechanism m) {
  return m == SpawnMechanism::Direct ? "direct" : "shell";
}

std::optional<SpawnMechanism> spawn_mechanism_from_string(
    std::string_view name) {
  if (name == "direct") return SpawnMechanism::Direct;
  if (name == "shell") return SpawnMechanism::Shell;
  return std::nullopt;
}

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += '\'';
  return out;
}

std::map<std::string, std::string> slot_environment(
    const Unit& unit, const SlotAssignment& slots) {
  std::string nodes, cores;
  for (const auto& n : slots.nodes) {
    if (!nodes.empty()) nodes += ',';
    nodes += n.node_id;
    if (!cores.empty()) cores += ';';
    cores += n.node_id;
    cores += ':';
    for (size_t i = 0; i < n.core_indices.size(); ++i) {
      if (i) cores += '+';
      cores += std::to_string(n.core_indices[i]);
    }
  }
  return {
      {"PRT_UNIT_ID", unit.uid},
      {"PRT_SLOT_NODES", nodes},
      {"PRT_SLOT_CORES", cores},
      {"PRT_CORES_TOTAL", std::to_string(slots.total_cores)},
  };
}

LaunchPlan build_launch_command(const Unit& unit, LaunchMethodId method,
                                const SlotAssignment& slots,
                                const std::string& sandbox) {
  if (!launch_method_implemented(method))
    throw UnsupportedLaunchMethod(std::string(to_string(method)));

  LaunchPlan plan;
  plan.environment = slot_environment(unit, slots);
  for (const auto& [k, v] : unit.description.environment)
    plan.environment[k] = v;

  if (method == LaunchMethodId::FORK) {
    plan.argv.push_back(unit.description.executable);
    for (const auto& a : unit.description.arguments) plan.argv.push_back(a);
    return plan;
  }

  // SHELL_WRAPPER: a generated script that jumps into the sandbox, exports
  // the unit environment and execs the task. The text is deterministic
  // (std::map keeps the exports sorted) and golden-tested.
  plan.script_path = sandbox + "/" + unit.uid + ".sh";
  std::string s;
  s += "#!/bin/sh\n";
  s += "# unit " + unit.uid + "\n";
  s += "cd " + shell_quote(sandbox) + "\n";
  for (const auto& [k, v] : plan.environment)
    s += "export " + k + "=" + shell_quote(v) + "\n";
  s += "exec " + shell_quote(unit.description.executable);
  for (const auto& a : unit.description.arguments) s += " " + shell_quote(a);
  s += "\n";
  plan.script_text = std::move(s);
  plan.argv = {"/bin/sh", plan.script_path};
  return plan;
}

}  // namespace pilotrt
