#include "mr2/nodeengine.hpp"

#include <algorithm>
#include <string>

namespace mr2 {

std::string_view toString(Scheme scheme) {
  switch (scheme) {
  case Scheme::MR2:
    return "mr2";
  case Scheme::HC:
    return "hc";
  case Scheme::Single:
    return "single";
  }
  return "?";
}

Scheme parseScheme(std::string_view text) {
  if (text == "mr2")
    return Scheme::MR2;
  if (text == "hc")
    return Scheme::HC;
  if (text == "single")
    return Scheme::Single;
  throw InvalidParameter("unknown scheme '" + std::string(text) + "'");
}

std::string_view toString(Strategy strategy) {
  return strategy == Strategy::RoundRobinSplit ? "split" : "duplicate";
}

Strategy parseStrategy(std::string_view text) {
  if (text == "split")
    return Strategy::RoundRobinSplit;
  if (text == "duplicate")
    return Strategy::Duplicate;
  throw InvalidParameter("unknown strategy '" + std::string(text) + "'");
}

std::string_view toString(DiscoveryKind kind) {
  switch (kind) {
  case DiscoveryKind::Initial:
    return "initial";
  case DiscoveryKind::Additional:
    return "additional";
  case DiscoveryKind::Repair:
    return "repair";
  case DiscoveryKind::Retry:
    return "retry";
  }
  return "?";
}

bool NodeContext::relaysInUse() const {
  if (role != Role::Sensor)
    return false;
  return std::any_of(tables.begin(), tables.end(), [](const auto &kv) {
    return kv.second.table.anyInUse();
  });
}

Actions onRequest(NodeContext &ctx, const RouteRequest &request, Scheme scheme,
                  NodeId sinkId) {
  if (ctx.role == Role::Sink || !request.wellFormed())
    return {};
  const bool own = ctx.role == Role::Source && request.session == ctx.id;
  if (ctx.role == Role::Source && !own)
    return {};
  if (scheme == Scheme::MR2 && !own &&
      (ctx.state.mode == Mode::Passive || !ctx.relayedSessions.empty()))
    return {};

  SessionTable &session = ctx.tables[request.session];
  if (request.seq < session.seq)
    return {};
  if (request.seq > session.seq) {
    session.seq = request.seq;
    session.table.dropUnused();
    if (request.isRepair) {
      const NodeId broken = *request.brokenPathId;
      removePath(session.table, broken);
      if (own) {
        std::erase(ctx.source.activePaths, broken);
        ctx.source.bannedPaths.insert(broken);
      }
    }
  }

  const bool fromSink = request.lastNode == sinkId;
  if (own) {
    const NodeId pathId = fromSink ? ctx.id : request.pathId;
    if (ctx.source.bannedPaths.contains(pathId))
      return {};
    applyRequest(session.table, request, ctx.id, fromSink);
    if (ctx.source.armedSeq < request.seq) {
      ctx.source.armedSeq = request.seq;
      return {action::ArmCollectTimer{request.session, request.seq}};
    }
    return {};
  }

  const ApplyResult result =
      applyRequest(session.table, request, ctx.id, fromSink);
  if (!result.updated)
    return {};
  RouteRequest next = request;
  next.pathId = result.storedEntry->pathId;
  next.lastNode = ctx.id;
  next.metric = result.storedEntry->metric;
  return {action::Rebroadcast{next}};
}

Actions sourceOnCollectTimeout(NodeContext &ctx, std::uint32_t seq,
                               Scheme scheme) {
  auto it = ctx.tables.find(ctx.id);
  if (ctx.role != Role::Source || it == ctx.tables.end() ||
      it->second.seq != seq)
    return {};
  if (scheme == Scheme::Single && !ctx.source.activePaths.empty())
    return {};
  PathTable &table = it->second.table;
  const auto best = selectBestPath(table, /*excludeInUse=*/true);
  if (!best)
    return {action::DiscoveryFailed{ctx.id, seq}};
  markInUse(table, *best);
  ctx.source.activePaths.push_back(*best);
  return {action::StartData{ctx.id, *best, table.find(*best)->metric, seq}};
}

Actions onData(NodeContext &ctx, DataPacket packet, NodeId previousHop,
               Scheme scheme) {
  if (ctx.role == Role::Sink)
    return {action::DeliverToApp{std::move(packet)}};
  if (std::find(packet.hops.begin(), packet.hops.end(), ctx.id) !=
      packet.hops.end())
    return {action::Drop{std::move(packet), DropReason::Loop}};

  auto it = ctx.tables.find(packet.source);
  PathTableEntry *entry =
      it == ctx.tables.end() ? nullptr : it->second.table.find(packet.pathId);
  if (!entry)
    return {action::Drop{std::move(packet), DropReason::RoutingInconsistency}};

  entry->inUse = true;
  ctx.relayedSessions.insert(packet.source);
  Actions out;
  if (scheme == Scheme::MR2 &&
      ctx.bePassiveSentForSession.insert(packet.source).second)
    out.push_back(action::EmitBePassive{
        BePassive{ctx.id, packet.source, previousHop, entry->nextNode}});
  const NodeId next = entry->nextNode;
  packet.hops.push_back(ctx.id);
  out.push_back(action::Forward{std::move(packet), next});
  return out;
}

bool onBePassive(NodeContext &ctx, const BePassive &message, Scheme scheme,
                 SimTime now) {
  if (scheme != Scheme::MR2 || ctx.role != Role::Sensor)
    return false;
  if (ctx.id == message.exemptPrev || ctx.id == message.exemptNext)
    return false;
  if (!ctx.relayedSessions.empty() || ctx.relaysInUse())
    return false;
  ctx.passiveMarks.insert(message.session);
  if (ctx.state.mode == Mode::Passive)
    return false;
  ctx.state.mode = Mode::Passive;
  ctx.state.passiveSince = now;
  return true;
}

Actions maybeEmitRERR(NodeContext &ctx, double remainingEnergy) {
  if (ctx.role != Role::Sensor || remainingEnergy >= ctx.energyThreshold)
    return {};
  Actions out;
  for (const auto &[session, st] : ctx.tables)
    for (const auto &entry : st.table.entries())
      if (entry.inUse &&
          ctx.routeErrorsSent.insert({session, entry.pathId}).second)
        out.push_back(action::SendRouteError{
            RouteError{ctx.id, session, entry.pathId}, entry.nextNode});
  return out;
}

Actions onRouteError(NodeContext &ctx, const RouteError &message) {
  if (ctx.role == Role::Sink)
    return {};
  auto it = ctx.tables.find(message.session);
  if (it == ctx.tables.end())
    return {};
  const PathTableEntry *entry = it->second.table.find(message.pathId);
  if (!entry)
    return {};
  return {action::SendRouteError{message, entry->nextNode}};
}

std::vector<NodeId> partitionTraffic(Strategy strategy,
                                     std::span<const NodeId> activePaths,
                                     std::uint32_t seq) {
  if (activePaths.empty())
    throw NoPath("no active path to carry traffic");
  if (strategy == Strategy::Duplicate)
    return {activePaths.begin(), activePaths.end()};
  return {activePaths[seq % activePaths.size()]};
}

std::vector<NodeId> resetSession(std::span<NodeContext> nodes,
                                 SessionId session) {
  std::vector<NodeId> woke;
  for (NodeContext &ctx : nodes) {
    ctx.passiveMarks.erase(session);
    ctx.relayedSessions.erase(session);
    ctx.bePassiveSentForSession.erase(session);
    if (auto it = ctx.tables.find(session); it != ctx.tables.end())
      it->second.table.clearInUse();
    if (ctx.role == Role::Source && ctx.id == session)
      ctx.source.activePaths.clear();
    if (ctx.state.mode == Mode::Passive && ctx.passiveMarks.empty()) {
      ctx.state.mode = Mode::Active;
      ctx.state.passiveSince.reset();
      woke.push_back(ctx.id);
    }
  }
  return woke;
}

SinkMonitor::SinkMonitor(SessionId session, NodeId sinkId,
                         SinkMonitorConfig config)
    : m_session(session), m_sinkId(sinkId), m_config(config) {
  if (config.window == 0)
    throw InvalidParameter("window must be at least one packet");
  if (!(config.theta > 0.0 && config.theta <= 1.0))
    throw InvalidParameter("theta must lie in (0, 1]");
  if (!(config.gamma > 0.0) || !(config.expectedInterval > 0.0) ||
      !(config.brokenFactor > 0.0))
    throw InvalidParameter("gamma, expectedInterval and brokenFactor must be "
                           "positive");
}

RouteRequest SinkMonitor::makeRequest(bool repair,
                                      std::optional<NodeId> broken) {
  RouteRequest request;
  request.session = m_session;
  request.seq = m_nextSeq++;
  request.pathId = m_sinkId;
  request.lastNode = m_sinkId;
  request.metric = 0;
  request.isRepair = repair;
  request.brokenPathId = broken;
  return request;
}

Actions SinkMonitor::start(SimTime now) {
  m_started = true;
  m_issued = 1;
  m_awaitingNewPath = true;
  m_lastIssue = now;
  return {action::IssueDiscovery{makeRequest(false, std::nullopt),
                                 DiscoveryKind::Initial}};
}

bool SinkMonitor::mayAddPath() const {
  if (m_config.scheme == Scheme::Single || m_awaitingNewPath)
    return false;
  return m_config.maxPaths == 0 || m_issued < m_config.maxPaths;
}

std::optional<double> SinkMonitor::windowDeliveryRatio() const {
  if (!m_highestSeq || *m_highestSeq < m_config.reorderSlack)
    return std::nullopt;
  const std::uint32_t end = *m_highestSeq - m_config.reorderSlack;
  if (std::uint64_t(end) + 1 < std::uint64_t(m_windowStart) + m_config.window)
    return std::nullopt;
  const std::uint32_t first = end + 1 - m_config.window;
  const auto lo = m_received.lower_bound(first);
  const auto hi = m_received.upper_bound(end);
  const auto count = std::distance(lo, hi);
  return double(count) / double(m_config.window);
}

Actions SinkMonitor::onData(const DataPacket &packet, SimTime now) {
  const bool newPath = m_everSeen.insert(packet.pathId).second;
  m_lastData[packet.pathId] = now;
  if (newPath) {
    m_awaitingNewPath = false;
    m_windowStart = std::max(m_windowStart, packet.seq);
  }
  if (!m_received.insert(packet.seq).second)
    return {};
  if (!m_highestSeq || packet.seq > *m_highestSeq)
    m_highestSeq = packet.seq;

  std::optional<double> gap;
  if (m_lastArrival) {
    gap = now - *m_lastArrival;
    m_emaGap = m_emaGap == 0.0 ? *gap : 0.875 * m_emaGap + 0.125 * *gap;
  }
  m_lastArrival = now;

  if (now >= m_config.sessionEnd || !mayAddPath())
    return {};
  bool congested = !newPath && gap &&
                   *gap > m_config.gamma * m_config.expectedInterval;
  if (const auto ratio = windowDeliveryRatio(); ratio && *ratio < m_config.theta)
    congested = true;
  if (!congested)
    return {};

  ++m_issued;
  m_awaitingNewPath = true;
  m_windowStart = *m_highestSeq + 1;
  m_lastIssue = now;
  return {action::IssueDiscovery{makeRequest(false, std::nullopt),
                                 DiscoveryKind::Additional}};
}

double SinkMonitor::brokenTimeout() const {
  double perPath = m_config.expectedInterval;
  if (m_config.strategy == Strategy::RoundRobinSplit)
    perPath *= double(std::max<std::size_t>(1, m_lastData.size()));
  return m_config.brokenFactor * perPath;
}

Actions SinkMonitor::issueRepair(NodeId pathId, SimTime now) {
  m_lastData.erase(pathId);
  ++m_repairs;
  m_lastIssue = now;
  return {action::IssueDiscovery{makeRequest(true, pathId),
                                 DiscoveryKind::Repair}};
}

Actions SinkMonitor::detectBroken(SimTime now) {
  if (now > m_config.sessionEnd)
    return {};
  const double timeout = brokenTimeout();
  std::vector<NodeId> broken;
  for (const auto &[pathId, last] : m_lastData)
    if (now - last > timeout)
      broken.push_back(pathId);
  Actions out;
  for (NodeId pathId : broken)
    for (auto &a : issueRepair(pathId, now))
      out.push_back(std::move(a));
  return out;
}

Actions SinkMonitor::onRouteError(const RouteError &message, SimTime now) {
  if (now > m_config.sessionEnd || !m_lastData.contains(message.pathId))
    return {};
  return issueRepair(message.pathId, now);
}

Actions SinkMonitor::tick(SimTime now) {
  if (!m_started)
    return {};
  Actions out = detectBroken(now);
  if (now <= m_config.sessionEnd && m_lastData.empty() &&
      now - m_lastIssue > m_config.retryDelay &&
      m_retries < m_config.maxRetries) {
    ++m_retries;
    m_lastIssue = now;
    m_awaitingNewPath = true;
    out.push_back(action::IssueDiscovery{makeRequest(false, std::nullopt),
                                         DiscoveryKind::Retry});
  }
  return out;
}

} // namespace mr2
