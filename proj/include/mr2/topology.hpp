#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mr2/common.hpp"

namespace mr2 {

enum class RangeMode { Sparse, Dense };

std::string toString(RangeMode mode);
RangeMode parseRangeMode(std::string_view text);

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position &, const Position &) = default;
};

/// Static sensor field: node positions, a shared radio range and the unit-disk
/// neighbor graph derived from them. Immutable once built.
class Topology {
public:
  Topology(double fieldSize, unsigned gridSide, std::vector<Position> positions,
           NodeId sinkId, double radioRange);

  double fieldSize() const noexcept { return m_fieldSize; }
  unsigned gridSide() const noexcept { return m_gridSide; }
  double radioRange() const noexcept { return m_radioRange; }
  NodeId sinkId() const noexcept { return m_sinkId; }
  std::size_t nodeCount() const noexcept { return m_positions.size(); }
  bool contains(NodeId id) const noexcept { return id < m_positions.size(); }

  const Position &position(NodeId id) const;
  const std::vector<Position> &positions() const noexcept { return m_positions; }

  /// Nodes within radioRange (inclusive), sorted by id. Throws NotFound.
  const std::vector<NodeId> &neighbors(NodeId id) const;
  bool areNeighbors(NodeId a, NodeId b) const;
  double distance(NodeId a, NodeId b) const;

  /// Header `fieldSize gridSide sinkId range`, then one `id x y` line per node.
  std::string serialize() const;
  static Topology parse(std::string_view text);

  friend bool operator==(const Topology &a, const Topology &b) {
    return a.m_fieldSize == b.m_fieldSize && a.m_gridSide == b.m_gridSide &&
           a.m_radioRange == b.m_radioRange && a.m_sinkId == b.m_sinkId &&
           a.m_positions == b.m_positions;
  }

private:
  double m_fieldSize;
  unsigned m_gridSide;
  std::vector<Position> m_positions;
  NodeId m_sinkId;
  double m_radioRange;
  std::vector<std::vector<NodeId>> m_adjacency;
};

/// Radio range for a deployment mode: 1.5 (sparse) or 2.0 (dense) grid cells,
/// i.e. 1500/N and 2000/N on a 1000 m field.
double radioRange(RangeMode mode, unsigned gridSide, double fieldSize = 1000.0);

/// gridSide^2 sensors, each uniform inside its own cell, plus the sink as an
/// extra node pinned at (fieldSize, fieldSize) with id gridSide^2.
Topology generateRandomizedGrid(unsigned gridSide, double fieldSize,
                                std::uint64_t seed,
                                RangeMode mode = RangeMode::Sparse);

double meanDegree(const Topology &topology);

bool isSinkReachable(const Topology &topology, NodeId source);

/// k distinct non-sink nodes, uniformly without replacement.
std::vector<NodeId> drawSources(const Topology &topology, unsigned count,
                                std::uint64_t seed);

/// A topology and source draw in which every source reaches the sink.
struct Deployment {
  Topology topology;
  std::vector<NodeId> sources;
  std::uint64_t seedUsed = 0;
  /// Seeds rejected because some source could not reach the sink.
  std::vector<std::uint64_t> rejectedSeeds;
};

/// Draws topology and sources from `seed`; disconnected draws are rejected and
/// redrawn from the next derived seed, up to maxAttempts.
Deployment drawDeployment(unsigned gridSide, double fieldSize, RangeMode mode,
                          unsigned sourceCount, std::uint64_t seed,
                          unsigned maxAttempts = 1000);

/// splitmix64 finalizer; used for all seed derivation.
std::uint64_t mixSeed(std::uint64_t value);
std::uint64_t combineSeed(std::uint64_t a, std::uint64_t b);

} // namespace mr2
