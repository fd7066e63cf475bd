#include "pilotrt/states.hpp"

namespace pilotrt {

namespace {

constexpr std::array<std::string_view, 6> kPilotNames = {
    "NEW", "PM_LAUNCH", "P_ACTIVE", "DONE", "CANCELED", "FAILED",
};

constexpr std::array<std::string_view, 13> kUnitNames = {
    "NEW",
    "UM_SCHEDULING",
    "UM_STAGING_IN",
    "A_STAGING_IN",
    "A_SCHEDULING",
    "A_EXECUTING_PENDING",
    "A_EXECUTING",
    "A_STAGING_OUT_PENDING",
    "A_STAGING_OUT",
    "UM_STAGING_OUT",
    "DONE",
    "CANCELED",
    "FAILED",
};

bool unit_skippable(UnitState s) {
  switch (s) {
    case UnitState::UM_STAGING_IN:
    case UnitState::A_STAGING_IN:
    case UnitState::A_STAGING_OUT:
    case UnitState::UM_STAGING_OUT:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string_view to_string(PilotState s) {
  return kPilotNames[static_cast<size_t>(s)];
}

std::string_view to_string(UnitState s) {
  return kUnitNames[static_cast<size_t>(s)];
}

std::optional<PilotState> pilot_state_from_string(std::string_view name) {
  for (size_t i = 0; i < kPilotNames.size(); ++i)
    if (kPilotNames[i] == name) return static_cast<PilotState>(i);
  return std::nullopt;
}

std::optional<UnitState> unit_state_from_string(std::string_view name) {
  for (size_t i = 0; i < kUnitNames.size(); ++i)
    if (kUnitNames[i] == name) return static_cast<UnitState>(i);
  return std::nullopt;
}

bool is_final(PilotState s) {
  return s == PilotState::DONE || s == PilotState::CANCELED ||
         s == PilotState::FAILED;
}

bool is_final(UnitState s) {
  return s == UnitState::DONE || s == UnitState::CANCELED ||
         s == UnitState::FAILED;
}

int state_rank(PilotState s) { return static_cast<int>(s); }
int state_rank(UnitState s) { return static_cast<int>(s); }

bool validate_transition(PilotState current, PilotState next) {
  if (is_final(current)) return false;
  if (next == PilotState::CANCELED || next == PilotState::FAILED) return true;
  // No skippable states in the pilot machine: immediate successor only.
  return state_rank(next) == state_rank(current) + 1;
}

bool validate_transition(UnitState current, UnitState next) {
  if (is_final(current)) return false;
  if (next == UnitState::CANCELED || next == UnitState::FAILED) return true;
  const int from = state_rank(current);
  const int to = state_rank(next);
  if (to <= from) return false;
  // Forward move: every state strictly between must be skippable.
  for (int r = from + 1; r < to; ++r)
    if (!unit_skippable(static_cast<UnitState>(r))) return false;
  return true;
}

}  // namespace pilotrt
