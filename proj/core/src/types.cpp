#include "pilotrt/types.hpp"

#include <atomic>
#include <cstdio>

#include "pilotrt/clock.hpp"
#include "pilotrt/errors.hpp"
#include "pilotrt/profile.hpp"

namespace pilotrt {

std::string_view to_string(StageMode m) {
  switch (m) {
    case StageMode::Copy: return "copy";
    case StageMode::Link: return "link";
    case StageMode::Move: return "move";
  }
  return "copy";
}

std::optional<StageMode> stage_mode_from_string(std::string_view name) {
  if (name == "copy") return StageMode::Copy;
  if (name == "link") return StageMode::Link;
  if (name == "move") return StageMode::Move;
  return std::nullopt;
}

namespace {

void validate_directives(const std::vector<StagingDirective>& ds,
                         const char* which) {
  for (const auto& d : ds) {
    if (d.source.empty() || d.target.empty())
      throw InvalidDescription(std::string(which) +
                               " staging directive with empty source/target");
  }
}

}  // namespace

void validate(const UnitDescription& d) {
  if (d.executable.empty())
    throw InvalidDescription("unit executable must be non-empty");
  if (d.cores < 1) throw InvalidDescription("unit cores must be >= 1");
  validate_directives(d.input_staging, "input");
  validate_directives(d.output_staging, "output");
}

void validate(const PilotDescription& d) {
  if (d.cores < 1) throw InvalidDescription("pilot cores must be >= 1");
  if (d.runtime_s <= 0) throw InvalidDescription("pilot runtime must be > 0");
}

namespace {

std::string numbered_uid(const char* prefix, std::atomic<uint64_t>& counter) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s.%06llu", prefix,
                static_cast<unsigned long long>(counter.fetch_add(1)));
  return buf;
}

std::atomic<uint64_t> g_unit_counter{0};
std::atomic<uint64_t> g_pilot_counter{0};

}  // namespace

std::string next_unit_uid() { return numbered_uid("unit", g_unit_counter); }
std::string next_pilot_uid() { return numbered_uid("pilot", g_pilot_counter); }

Unit make_unit(UnitDescription d) {
  Unit u;
  u.uid = next_unit_uid();
  u.description = std::move(d);
  u.state_history.emplace_back(UnitState::NEW, Clock::mono_us());
  return u;
}

Pilot make_pilot(PilotDescription d) {
  Pilot p;
  p.uid = next_pilot_uid();
  p.description = std::move(d);
  p.state_history.emplace_back(PilotState::NEW, Clock::mono_us());
  return p;
}

void advance(Unit& unit, UnitState next, Profiler* profiler,
             std::string_view component, std::string_view detail) {
  if (!validate_transition(unit.state, next))
    throw IllegalTransition(std::string(to_string(unit.state)),
                            std::string(to_string(next)));
  unit.state = next;
  unit.state_history.emplace_back(next, Clock::mono_us());
  if (profiler) profiler->record(unit.uid, component, to_string(next), detail);
}

void advance(Pilot& pilot, PilotState next, Profiler* profiler,
             std::string_view component, std::string_view detail) {
  if (!validate_transition(pilot.state, next))
    throw IllegalTransition(std::string(to_string(pilot.state)),
                            std::string(to_string(next)));
  pilot.state = next;
  pilot.state_history.emplace_back(next, Clock::mono_us());
  if (profiler)
    profiler->record(pilot.uid, component, to_string(next), detail);
}

}  // namespace pilotrt
