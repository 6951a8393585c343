#pragma once

#include <cstdint>
#include <vector>

#include "mr2/simulation.hpp"
#include "mr2/topology.hpp"

namespace mr2 {

/// A later path's relay next to (or equal to) a relay of a path already
/// carrying data.
struct Adjacency {
  SessionId earlierSession = 0;
  NodeId earlierPath = 0;
  NodeId earlierRelay = 0;
  SessionId laterSession = 0;
  NodeId laterPath = 0;
  NodeId laterRelay = 0;
};

struct DisjointnessReport {
  /// The later relay had been silenced by the earlier relay's bePassive and
  /// still joined the later path. Must be empty.
  std::vector<Adjacency> violations;
  /// Adjacencies where the bePassive never took effect at the later relay
  /// (lost to a collision, arrived late, or the relay was exempt).
  std::vector<Adjacency> exposures;
  std::size_t pairsChecked = 0;
};

/// Post-hoc check of an MR2 run against the neighbor graph. A path P counts
/// as established at relay r from the moment r emitted bePassive for P's
/// session until that session's reset; a later path is one whose discovery
/// was issued inside that interval.
DisjointnessReport checkRadioDisjointness(const Topology &topology,
                                          const RunTrace &trace);

} // namespace mr2
