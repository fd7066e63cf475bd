#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pilotrt/types.hpp"

namespace pilotrt {

// Workload channel documents. Unit documents flow manager -> agent, state
// updates flow back. Delivery is at-least-once; both sides de-duplicate
// (agent by uid, manager by uid+state via the monotone merge).
//
// JSON schema, version 1:
//   unit document: {"v":1,"uid":...,"state":...,"description":{
//       "executable":...,"arguments":[...],"cores":N,
//       "environment":{...},"input_staging":[{"source":...,"target":...,
//       "mode":"copy"|"link"|"move"},...],"output_staging":[...]}}
//   update:        {"v":1,"uid":...,"state":...,"exit_code":N|null,
//                   "ts_wall_us":N}
struct UnitDoc {
  int v = 1;
  std::string uid;
  UnitState state = UnitState::UM_SCHEDULING;
  UnitDescription description;
};

struct UnitUpdate {
  int v = 1;
  std::string uid;
  UnitState state = UnitState::NEW;
  std::optional<int> exit_code;
  int64_t ts_wall_us = 0;
};

std::string to_json(const UnitDoc& doc);
std::string to_json(const UnitUpdate& update);
UnitDoc unit_doc_from_json(const std::string& text);
UnitUpdate unit_update_from_json(const std::string& text);

UnitDoc doc_for(const Unit& unit);
Unit unit_from_doc(const UnitDoc& doc);
UnitUpdate update_for(const Unit& unit);

// Agent-side view of the workload channel: the agent polls its own pilot's
// inbox on an interval (pull semantics) and pushes state updates back.
class AgentChannel {
 public:
  virtual ~AgentChannel() = default;

  // Drain whatever unit documents are currently available. Non-blocking.
  virtual std::vector<UnitDoc> pull_units() = 0;

  // True once the workload-complete marker has been delivered and every
  // document before it was pulled.
  virtual bool workload_complete() = 0;

  virtual void push_update(const UnitUpdate& update) = 0;
};

// Channel preloaded with a fixed workload; used by micro-benchmarks and
// tests that drive an agent without managers.
class PreloadChannel : public AgentChannel {
 public:
  explicit PreloadChannel(std::vector<UnitDoc> docs, bool complete = true);

  std::vector<UnitDoc> pull_units() override;
  bool workload_complete() override;
  void push_update(const UnitUpdate& update) override;

  void enqueue(UnitDoc doc);
  void mark_complete();
  std::vector<UnitUpdate> updates() const;

 private:
  mutable std::mutex mu_;
  std::deque<UnitDoc> inbox_;
  std::vector<UnitUpdate> updates_;
  bool complete_ = false;
};

}  // namespace pilotrt
