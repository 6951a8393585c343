#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "mr2/common.hpp"

namespace mr2 {

/// One known route to the sink, as held in a node's path table.
struct PathTableEntry {
  /// The sink's first-hop neighbor on this route.
  NodeId pathId = 0;
  NodeId nextNode = 0;
  /// Hop count from the owning node to the sink.
  std::uint32_t metric = 0;
  bool inUse = false;

  friend bool operator==(const PathTableEntry &, const PathTableEntry &) =
      default;
};

/// Path table keyed by pathId; at most one entry per path.
class PathTable {
public:
  const PathTableEntry *find(NodeId pathId) const;
  PathTableEntry *find(NodeId pathId);
  bool contains(NodeId pathId) const { return find(pathId) != nullptr; }
  std::size_t size() const noexcept { return m_entries.size(); }
  bool empty() const noexcept { return m_entries.empty(); }

  /// Entries in ascending pathId order.
  std::vector<PathTableEntry> entries() const;

  void put(const PathTableEntry &entry) { m_entries[entry.pathId] = entry; }
  bool erase(NodeId pathId) { return m_entries.erase(pathId) > 0; }
  /// Drops every entry not flagged in use.
  void dropUnused();
  bool anyInUse() const;
  void clearInUse();

  friend bool operator==(const PathTable &, const PathTable &) = default;

private:
  std::map<NodeId, PathTableEntry> m_entries;
};

struct RouteRequest {
  SessionId session = 0;
  /// Rank of the path being built for this session; starts at 1.
  std::uint32_t seq = 1;
  NodeId pathId = 0;
  NodeId lastNode = 0;
  /// Hops accumulated up to lastNode.
  std::uint32_t metric = 0;
  bool isRepair = false;
  std::optional<NodeId> brokenPathId;

  /// brokenPathId present iff isRepair; seq >= 1.
  bool wellFormed() const {
    return seq >= 1 && isRepair == brokenPathId.has_value();
  }
};

struct DataPacket {
  NodeId source = 0;
  std::uint32_t seq = 0;
  NodeId pathId = 0;
  std::uint32_t payloadBits = 0;
  // Simulator bookkeeping, not part of the on-air header.
  SimTime createdAt = 0.0;
  std::vector<NodeId> hops;
};

struct BePassive {
  NodeId sender = 0;
  SessionId session = 0;
  NodeId exemptPrev = 0;
  NodeId exemptNext = 0;
};

struct RouteError {
  NodeId sender = 0;
  SessionId session = 0;
  NodeId pathId = 0;
};

using Message = std::variant<RouteRequest, DataPacket, BePassive, RouteError>;

enum class MessageClass { Request, BePassive, RouteError, Data };
inline constexpr std::size_t kMessageClassCount = 4;

MessageClass classOf(const Message &message);
std::string_view toString(MessageClass cls);

/// Bit lengths used for airtime and energy only.
struct MessageSizes {
  std::uint32_t request = 240;
  std::uint32_t bePassive = 96;
  std::uint32_t routeError = 96;
  std::uint32_t dataHeader = 96;

  std::uint32_t bitsOf(const Message &message) const;
};

struct ApplyResult {
  /// True when the table changed; the node should rebroadcast.
  bool updated = false;
  std::optional<PathTableEntry> storedEntry;
};

/// Folds a route request into `table`. New pathIds are stamped with selfId
/// when the request comes straight from the sink. Known pathIds are replaced
/// only on a strictly smaller metric (the inUse flag is kept).
ApplyResult applyRequest(PathTable &table, const RouteRequest &request,
                         NodeId selfId, bool fromSink);

/// Minimum metric, ties to the smallest pathId.
std::optional<NodeId> selectBestPath(const PathTable &table, bool excludeInUse);

/// Throws NotFound when pathId is absent.
void markInUse(PathTable &table, NodeId pathId);

void removePath(PathTable &table, NodeId pathId);

} // namespace mr2
