#include "pilotrt/channel.hpp"

#include <nlohmann/json.hpp>

#include "pilotrt/clock.hpp"
#include "pilotrt/errors.hpp"

namespace pilotrt {

using json = nlohmann::ordered_json;

namespace {

json staging_to_json(const std::vector<StagingDirective>& ds) {
  json arr = json::array();
  for (const auto& d : ds)
    arr.push_back({{"source", d.source},
                   {"target", d.target},
                   {"mode", std::string(to_string(d.mode))}});
  return arr;
}

std::vector<StagingDirective> staging_from_json(const json& arr) {
  std::vector<StagingDirective> ds;
  for (const auto& j : arr) {
    StagingDirective d;
    d.source = j.at("source").get<std::string>();
    d.target = j.at("target").get<std::string>();
    auto mode = stage_mode_from_string(j.at("mode").get<std::string>());
    if (!mode) throw ChannelError("unknown staging mode in document");
    d.mode = *mode;
    ds.push_back(std::move(d));
  }
  return ds;
}

}  // namespace

std::string to_json(const UnitDoc& doc) {
  json j;
  j["v"] = doc.v;
  j["uid"] = doc.uid;
  j["state"] = std::string(to_string(doc.state));
  json d;
  d["executable"] = doc.description.executable;
  d["arguments"] = doc.description.arguments;
  d["cores"] = doc.description.cores;
  d["environment"] = doc.description.environment;
  d["input_staging"] = staging_to_json(doc.description.input_staging);
  d["output_staging"] = staging_to_json(doc.description.output_staging);
  j["description"] = std::move(d);
  return j.dump();
}

UnitDoc unit_doc_from_json(const std::string& text) {
  json j = json::parse(text);
  UnitDoc doc;
  doc.v = j.value("v", 1);
  doc.uid = j.at("uid").get<std::string>();
  auto state = unit_state_from_string(j.at("state").get<std::string>());
  if (!state) throw ChannelError("unknown unit state in document");
  doc.state = *state;
  const auto& d = j.at("description");
  doc.description.executable = d.at("executable").get<std::string>();
  doc.description.arguments =
      d.value("arguments", std::vector<std::string>{});
  doc.description.cores = d.value("cores", 1);
  doc.description.environment =
      d.value("environment", std::map<std::string, std::string>{});
  if (d.contains("input_staging"))
    doc.description.input_staging = staging_from_json(d["input_staging"]);
  if (d.contains("output_staging"))
    doc.description.output_staging = staging_from_json(d["output_staging"]);
  return doc;
}

std::string to_json(const UnitUpdate& update) {
  json j;
  j["v"] = update.v;
  j["uid"] = update.uid;
  j["state"] = std::string(to_string(update.state));
  if (update.exit_code)
    j["exit_code"] = *update.exit_code;
  else
    j["exit_code"] = nullptr;
  j["ts_wall_us"] = update.ts_wall_us;
  return j.dump();
}

UnitUpdate unit_update_from_json(const std::string& text) {
  json j = json::parse(text);
  UnitUpdate u;
  u.v = j.value("v", 1);
  u.uid = j.at("uid").get<std::string>();
  auto state = unit_state_from_string(j.at("state").get<std::string>());
  if (!state) throw ChannelError("unknown unit state in update");
  u.state = *state;
  if (j.contains("exit_code") && !j["exit_code"].is_null())
    u.exit_code = j["exit_code"].get<int>();
  u.ts_wall_us = j.value("ts_wall_us", int64_t{0});
  return u;
}

UnitDoc doc_for(const Unit& unit) {
  UnitDoc doc;
  doc.uid = unit.uid;
  doc.state = unit.state;
  doc.description = unit.description;
  return doc;
}

Unit unit_from_doc(const UnitDoc& doc) {
  Unit u;
  u.uid = doc.uid;
  u.description = doc.description;
  u.state = doc.state;
  u.state_history.emplace_back(doc.state, Clock::mono_us());
  return u;
}

UnitUpdate update_for(const Unit& unit) {
  UnitUpdate u;
  u.uid = unit.uid;
  u.state = unit.state;
  u.exit_code = unit.exit_code;
  u.ts_wall_us = Clock::wall_us();
  return u;
}

PreloadChannel::PreloadChannel(std::vector<UnitDoc> docs, bool complete)
    : complete_(complete) {
  for (auto& d : docs) inbox_.push_back(std::move(d));
}

std::vector<UnitDoc> PreloadChannel::pull_units() {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<UnitDoc> out(inbox_.begin(), inbox_.end());
  inbox_.clear();
  return out;
}

bool PreloadChannel::workload_complete() {
  std::lock_guard<std::mutex> lk(mu_);
  return complete_ && inbox_.empty();
}

void PreloadChannel::push_update(const UnitUpdate& update) {
  std::lock_guard<std::mutex> lk(mu_);
  updates_.push_back(update);
}

void PreloadChannel::enqueue(UnitDoc doc) {
  std::lock_guard<std::mutex> lk(mu_);
  inbox_.push_back(std::move(doc));
}

void PreloadChannel::mark_complete() {
  std::lock_guard<std::mutex> lk(mu_);
  complete_ = true;
}

std::vector<UnitUpdate> PreloadChannel::updates() const {
  std::lock_guard<std::mutex> lk(mu_);
  return updates_;
}

}  // namespace pilotrt
