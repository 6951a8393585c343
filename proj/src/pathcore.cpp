#include "mr2/pathcore.hpp"

#include <string>

namespace mr2 {

const PathTableEntry *PathTable::find(NodeId pathId) const {
  auto it = m_entries.find(pathId);
  return it == m_entries.end() ? nullptr : &it->second;
}

PathTableEntry *PathTable::find(NodeId pathId) {
  auto it = m_entries.find(pathId);
  return it == m_entries.end() ? nullptr : &it->second;
}

std::vector<PathTableEntry> PathTable::entries() const {
  std::vector<PathTableEntry> out;
  out.reserve(m_entries.size());
  for (const auto &[id, entry] : m_entries)
    out.push_back(entry);
  return out;
}

void PathTable::dropUnused() {
  std::erase_if(m_entries, [](const auto &kv) { return !kv.second.inUse; });
}

bool PathTable::anyInUse() const {
  for (const auto &[id, entry] : m_entries)
    if (entry.inUse)
      return true;
  return false;
}

void PathTable::clearInUse() {
  for (auto &[id, entry] : m_entries)
    entry.inUse = false;
}

MessageClass classOf(const Message &message) {
  switch (message.index()) {
  case 0:
    return MessageClass::Request;
  case 1:
    return MessageClass::Data;
  case 2:
    return MessageClass::BePassive;
  default:
    return MessageClass::RouteError;
  }
}

std::string_view toString(MessageClass cls) {
  switch (cls) {
  case MessageClass::Request:
    return "request";
  case MessageClass::BePassive:
    return "bePassive";
  case MessageClass::RouteError:
    return "rerr";
  case MessageClass::Data:
    return "data";
  }
  return "?";
}

std::uint32_t MessageSizes::bitsOf(const Message &message) const {
  switch (classOf(message)) {
  case MessageClass::Request:
    return request;
  case MessageClass::BePassive:
    return bePassive;
  case MessageClass::RouteError:
    return routeError;
  case MessageClass::Data:
    return dataHeader + std::get<DataPacket>(message).payloadBits;
  }
  return 0;
}

ApplyResult applyRequest(PathTable &table, const RouteRequest &request,
                         NodeId selfId, bool fromSink) {
  const NodeId pathId = fromSink ? selfId : request.pathId;
  const std::uint32_t metric = request.metric + 1;

  if (PathTableEntry *stored = table.find(pathId)) {
    if (metric >= stored->metric)
      return {};
    stored->nextNode = request.lastNode;
    stored->metric = metric;
    return {true, *stored};
  }
  PathTableEntry entry{pathId, request.lastNode, metric, false};
  table.put(entry);
  return {true, entry};
}

std::optional<NodeId> selectBestPath(const PathTable &table,
                                     bool excludeInUse) {
  std::optional<PathTableEntry> best;
  // entries() is ascending in pathId, so strict < keeps the smallest id on ties.
  for (const auto &entry : table.entries()) {
    if (excludeInUse && entry.inUse)
      continue;
    if (!best || entry.metric < best->metric)
      best = entry;
  }
  if (!best)
    return std::nullopt;
  return best->pathId;
}

void markInUse(PathTable &table, NodeId pathId) {
  PathTableEntry *entry = table.find(pathId);
  if (!entry)
    throw NotFound("no path table entry for path " + std::to_string(pathId));
  entry->inUse = true;
}

void removePath(PathTable &table, NodeId pathId) { table.erase(pathId); }

} // namespace mr2
