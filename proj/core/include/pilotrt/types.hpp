#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pilotrt/states.hpp"

namespace pilotrt {

class Profiler;

enum class StageMode { Copy, Link, Move };

std::string_view to_string(StageMode m);
std::optional<StageMode> stage_mode_from_string(std::string_view name);

struct StagingDirective {
  std::string source;
  std::string target;
  StageMode mode = StageMode::Copy;
};

struct UnitDescription {
  std::string executable;
  std::vector<std::string> arguments;
  int cores = 1;
  std::vector<StagingDirective> input_staging;
  std::vector<StagingDirective> output_staging;
  std::map<std::string, std::string> environment;
};

struct PilotDescription {
  int cores = 1;
  double runtime_s = 60.0;  // pilot lifetime granted by the resource manager
  std::string resource_id = "local";
  std::string queue_label;
};

// Throw InvalidDescription when a description violates its invariants.
void validate(const UnitDescription& d);
void validate(const PilotDescription& d);

// Cores assigned to one unit: one or more nodes, explicit core indices each.
struct SlotAssignment {
  struct NodeSlots {
    std::string node_id;
    std::vector<int> core_indices;
  };
  std::vector<NodeSlots> nodes;
  int total_cores = 0;
};

enum class TopologyKind { Continuum, Torus };

struct Topology {
  TopologyKind kind = TopologyKind::Continuum;
  std::vector<int> dims;  // torus only; product(dims) == node count
};

struct NodeLayout {
  std::vector<std::string> node_ids;
  int cores_per_node = 1;
  Topology topology;
  // Torus node coordinates, parallel to node_ids. Empty for continuum.
  std::vector<std::vector<int>> coords;

  int total_cores() const {
    return static_cast<int>(node_ids.size()) * cores_per_node;
  }
};

struct Unit {
  std::string uid;
  UnitDescription description;
  UnitState state = UnitState::NEW;
  std::optional<SlotAssignment> slots;
  std::optional<int> exit_code;
  std::vector<std::pair<UnitState, int64_t>> state_history;  // (state, mono us)

  // Agent-side bookkeeping. A clone is a micro-benchmark copy with a fresh
  // uid; phantom slots are copies of the source unit's assignment that the
  // core map does not know about and that must never be released.
  std::string sandbox;
  bool clone = false;
  bool phantom_slots = false;
};

struct Pilot {
  std::string uid;
  PilotDescription description;
  PilotState state = PilotState::NEW;
  std::optional<NodeLayout> nodes;  // populated at P_ACTIVE
  std::vector<std::pair<PilotState, int64_t>> state_history;
};

Unit make_unit(UnitDescription d);
Pilot make_pilot(PilotDescription d);

// Fresh process-wide unique ids, "unit.000042" / "pilot.000007".
std::string next_unit_uid();
std::string next_pilot_uid();

// Move the entity to `next`, append to its history and emit a profile event
// when a profiler is attached. Throws IllegalTransition on a disallowed
// move; that is a runtime logic bug and is never swallowed.
void advance(Unit& unit, UnitState next, Profiler* profiler,
             std::string_view component, std::string_view detail = {});
void advance(Pilot& pilot, PilotState next, Profiler* profiler,
             std::string_view component, std::string_view detail = {});

}  // namespace pilotrt
