#include "pilotrt/core_map.hpp"

#include <algorithm>

#include "pilotrt/errors.hpp"

namespace pilotrt {

CoreMap::CoreMap(const NodeLayout& layout) : layout_(layout) {
  const int n = static_cast<int>(layout_.node_ids.size());
  busy_.assign(n, std::vector<bool>(layout_.cores_per_node, false));
  node_busy_.assign(n, 0);
  total_cores_ = n * layout_.cores_per_node;
  for (int i = 0; i < n; ++i) node_index_[layout_.node_ids[i]] = i;
  if (layout_.topology.kind == TopologyKind::Torus)
    for (int i = 0; i < n; ++i) coord_index_[layout_.coords[i]] = i;
}

std::optional<SlotAssignment> CoreMap::allocate_continuous(int cores,
                                                           bool single_node) {
  if (cores < 1) throw RequestTooLarge("core request must be >= 1");
  if (cores > total_cores_ ||
      (single_node && cores > layout_.cores_per_node))
    throw RequestTooLarge("request for " + std::to_string(cores) +
                          " cores can never fit");
  if (cores > free_cores()) return std::nullopt;

  SlotAssignment a;
  a.total_cores = cores;
  if (single_node) {
    for (size_t n = 0; n < busy_.size(); ++n) {
      if (layout_.cores_per_node - node_busy_[n] < cores) continue;
      SlotAssignment::NodeSlots ns;
      ns.node_id = layout_.node_ids[n];
      for (int c = 0; c < layout_.cores_per_node &&
                      static_cast<int>(ns.core_indices.size()) < cores; ++c)
        if (!busy_[n][c]) ns.core_indices.push_back(c);
      for (int c : ns.core_indices) busy_[n][c] = true;
      node_busy_[n] += cores;
      busy_count_ += cores;
      a.nodes.push_back(std::move(ns));
      return a;
    }
    return std::nullopt;
  }

  // Spread request: take the first free cores in node order, core order.
  int remaining = cores;
  for (size_t n = 0; n < busy_.size() && remaining > 0; ++n) {
    if (node_busy_[n] == layout_.cores_per_node) continue;
    SlotAssignment::NodeSlots ns;
    ns.node_id = layout_.node_ids[n];
    for (int c = 0; c < layout_.cores_per_node && remaining > 0; ++c) {
      if (busy_[n][c]) continue;
      ns.core_indices.push_back(c);
      --remaining;
    }
    if (!ns.core_indices.empty()) a.nodes.push_back(std::move(ns));
  }
  // free_cores() >= cores was checked, so the scan always completes.
  for (const auto& ns : a.nodes) {
    int n = node_index_.at(ns.node_id);
    for (int c : ns.core_indices) busy_[n][c] = true;
    node_busy_[n] += static_cast<int>(ns.core_indices.size());
  }
  busy_count_ += cores;
  return a;
}

std::optional<SlotAssignment> CoreMap::allocate_torus(int nodes_requested) {
  if (layout_.topology.kind != TopologyKind::Torus)
    throw RequestTooLarge("torus allocation on a non-torus map");
  if (nodes_requested < 1) throw RequestTooLarge("node request must be >= 1");
  const auto& dims = layout_.topology.dims;
  const int held = static_cast<int>(layout_.node_ids.size());
  if (nodes_requested > held)
    throw RequestTooLarge("request for " + std::to_string(nodes_requested) +
                          " nodes can never fit");
  const size_t nd = dims.size();

  // A node is available when the map holds it and all its cores are FREE.
  auto node_free = [&](const std::vector<int>& coord) -> std::optional<int> {
    auto it = coord_index_.find(coord);
    if (it == coord_index_.end()) return std::nullopt;
    if (node_busy_[it->second] != 0) return std::nullopt;
    return it->second;
  };

  // Enumerate shapes (1..dim per axis) and origins (all held coords),
  // keeping the best (surplus, origin, shape).
  std::optional<std::pair<std::vector<int>, std::vector<int>>> best;
  long best_surplus = 0;
  std::vector<int> shape(nd, 1);
  auto next_shape = [&]() {
    for (int d = static_cast<int>(nd) - 1; d >= 0; --d) {
      if (++shape[d] <= dims[d]) return true;
      shape[d] = 1;
    }
    return false;
  };
  do {
    long block = 1;
    for (int s : shape) block *= s;
    if (block < nodes_requested) continue;
    long surplus = block - nodes_requested;
    if (best && surplus > best_surplus) continue;
    for (const auto& [origin, idx] : coord_index_) {
      if (best && surplus == best_surplus &&
          std::make_pair(origin, shape) >=
              std::make_pair(best->first, best->second))
        continue;
      // Feasible when every node of the block (modular coords) is free.
      bool ok = true;
      std::vector<int> cur(nd, 0);
      for (long k = 0; ok && k < block; ++k) {
        std::vector<int> coord(nd);
        for (size_t d = 0; d < nd; ++d)
          coord[d] = (origin[d] + cur[d]) % dims[d];
        if (!node_free(coord)) ok = false;
        for (int d = static_cast<int>(nd) - 1; d >= 0; --d) {
          if (++cur[d] < shape[d]) break;
          cur[d] = 0;
        }
      }
      if (!ok) continue;
      if (!best || surplus < best_surplus ||
          (surplus == best_surplus &&
           std::make_pair(origin, shape) <
               std::make_pair(best->first, best->second))) {
        best = std::make_pair(origin, shape);
        best_surplus = surplus;
      }
    }
  } while (next_shape());

  if (!best) return std::nullopt;

  // Mark every node of the winning block BUSY, whole nodes.
  const auto& [origin, bshape] = *best;
  long block = 1;
  for (int s : bshape) block *= s;
  std::vector<int> node_indices;
  std::vector<int> cur(nd, 0);
  for (long k = 0; k < block; ++k) {
    std::vector<int> coord(nd);
    for (size_t d = 0; d < nd; ++d) coord[d] = (origin[d] + cur[d]) % dims[d];
    node_indices.push_back(coord_index_.at(coord));
    for (int d = static_cast<int>(nd) - 1; d >= 0; --d) {
      if (++cur[d] < bshape[d]) break;
      cur[d] = 0;
    }
  }
  std::sort(node_indices.begin(), node_indices.end());
  SlotAssignment a;
  for (int n : node_indices) {
    SlotAssignment::NodeSlots ns;
    ns.node_id = layout_.node_ids[n];
    for (int c = 0; c < layout_.cores_per_node; ++c) {
      ns.core_indices.push_back(c);
      busy_[n][c] = true;
    }
    node_busy_[n] = layout_.cores_per_node;
    a.nodes.push_back(std::move(ns));
  }
  a.total_cores = static_cast<int>(block) * layout_.cores_per_node;
  busy_count_ += a.total_cores;
  return a;
}

void CoreMap::release(const SlotAssignment& slots) {
  // Validate first so a bad release leaves the map untouched.
  for (const auto& ns : slots.nodes) {
    auto it = node_index_.find(ns.node_id);
    if (it == node_index_.end())
      throw DoubleRelease("release of unknown node " + ns.node_id);
    for (int c : ns.core_indices) {
      if (c < 0 || c >= layout_.cores_per_node || !busy_[it->second][c])
        throw DoubleRelease("release of non-BUSY core " + ns.node_id + ":" +
                            std::to_string(c));
    }
  }
  for (const auto& ns : slots.nodes) {
    int n = node_index_.at(ns.node_id);
    for (int c : ns.core_indices) busy_[n][c] = false;
    node_busy_[n] -= static_cast<int>(ns.core_indices.size());
    busy_count_ -= static_cast<int>(ns.core_indices.size());
  }
}

bool CoreMap::is_busy(const std::string& node_id, int core) const {
  auto it = node_index_.find(node_id);
  if (it == node_index_.end()) return false;
  return busy_[it->second][core];
}

}  // namespace pilotrt
