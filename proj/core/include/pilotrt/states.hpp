#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace pilotrt {

// Pilot lifecycle: NEW -> PM_LAUNCH -> P_ACTIVE -> DONE, with CANCELED and
// FAILED reachable from any non-final state. Final states are absorbing.
enum class PilotState {
  NEW,
  PM_LAUNCH,
  P_ACTIVE,
  DONE,
  CANCELED,
  FAILED,
};

// Unit lifecycle. The order below is the forward order of the machine.
// The four staging states are skippable when a unit carries no directives
// for that side; the skip removes the state entirely instead of entering
// it for zero time.
enum class UnitState {
  NEW,
  UM_SCHEDULING,
  UM_STAGING_IN,
  A_STAGING_IN,
  A_SCHEDULING,
  A_EXECUTING_PENDING,
  A_EXECUTING,
  A_STAGING_OUT_PENDING,
  A_STAGING_OUT,
  UM_STAGING_OUT,
  DONE,
  CANCELED,
  FAILED,
};

constexpr std::array<PilotState, 6> kAllPilotStates = {
    PilotState::NEW,  PilotState::PM_LAUNCH, PilotState::P_ACTIVE,
    PilotState::DONE, PilotState::CANCELED,  PilotState::FAILED,
};

constexpr std::array<UnitState, 13> kAllUnitStates = {
    UnitState::NEW,
    UnitState::UM_SCHEDULING,
    UnitState::UM_STAGING_IN,
    UnitState::A_STAGING_IN,
    UnitState::A_SCHEDULING,
    UnitState::A_EXECUTING_PENDING,
    UnitState::A_EXECUTING,
    UnitState::A_STAGING_OUT_PENDING,
    UnitState::A_STAGING_OUT,
    UnitState::UM_STAGING_OUT,
    UnitState::DONE,
    UnitState::CANCELED,
    UnitState::FAILED,
};

std::string_view to_string(PilotState s);
std::string_view to_string(UnitState s);
std::optional<PilotState> pilot_state_from_string(std::string_view name);
std::optional<UnitState> unit_state_from_string(std::string_view name);

bool is_final(PilotState s);
bool is_final(UnitState s);

// Position of a state in the forward order, used for monotonicity checks.
// CANCELED and FAILED rank above every forward state.
int state_rank(PilotState s);
int state_rank(UnitState s);

// True iff `next` is the immediate successor of `current`, a legal staging
// skip, or CANCELED/FAILED from a non-final state. Pure and total over the
// enumeration domain.
bool validate_transition(PilotState current, PilotState next);
bool validate_transition(UnitState current, UnitState next);

}  // namespace pilotrt
