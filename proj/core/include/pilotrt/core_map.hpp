#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pilotrt/types.hpp"

namespace pilotrt {

// BUSY/FREE accounting of the cores a pilot holds, grouped into nodes.
// Not internally synchronized: the scheduler serializes all access.
class CoreMap {
 public:
  explicit CoreMap(const NodeLayout& layout);

  int total_cores() const { return total_cores_; }
  int busy_cores() const { return busy_count_; }
  int free_cores() const { return total_cores_ - busy_count_; }
  const NodeLayout& layout() const { return layout_; }

  // First-fit in node order, then core order. single_node keeps the whole
  // assignment on one node (multithreaded-style requests). Returns nullopt
  // when the request does not fit right now; throws RequestTooLarge when it
  // can never fit on this map.
  std::optional<SlotAssignment> allocate_continuous(int cores,
                                                    bool single_node);

  // Axis-aligned rectangular block of whole nodes with wraparound, node
  // count >= nodes_requested, minimal surplus; ties broken by smallest
  // origin, then smallest shape (lexicographically). All cores of the
  // allocated nodes become BUSY.
  std::optional<SlotAssignment> allocate_torus(int nodes_requested);

  // Mark the assignment FREE again. Throws DoubleRelease if any listed core
  // is not BUSY.
  void release(const SlotAssignment& slots);

  bool is_busy(const std::string& node_id, int core) const;

 private:
  NodeLayout layout_;
  int total_cores_ = 0;
  int busy_count_ = 0;
  std::vector<std::vector<bool>> busy_;       // [node][core]
  std::vector<int> node_busy_;                // busy per node
  std::map<std::string, int> node_index_;     // node_id -> index
  std::map<std::vector<int>, int> coord_index_;  // torus coords -> index
};

}  // namespace pilotrt
