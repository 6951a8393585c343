#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mr2/common.hpp"
#include "mr2/pathcore.hpp"

namespace mr2 {

enum class Scheme { MR2, HC, Single };
enum class Role { Sensor, Source, Sink };
enum class Mode { Active, Passive };
enum class Strategy { RoundRobinSplit, Duplicate };

std::string_view toString(Scheme scheme);
Scheme parseScheme(std::string_view text);
std::string_view toString(Strategy strategy);
Strategy parseStrategy(std::string_view text);

struct NodeState {
  Mode mode = Mode::Active;
  std::optional<SimTime> passiveSince;
};

/// A node's routes for one session. A request with a higher seq opens a new
/// discovery round: entries not in use are forgotten.
struct SessionTable {
  std::uint32_t seq = 0;
  PathTable table;
};

/// Source-side bookkeeping for the node's own session.
struct SourceState {
  /// Paths carrying data, in the order they were selected.
  std::vector<NodeId> activePaths;
  /// Paths reported broken; never selected again.
  std::set<NodeId> bannedPaths;
  /// Round whose collection timer has been armed.
  std::uint32_t armedSeq = 0;
  std::uint32_t nextDataSeq = 0;
};

struct NodeContext {
  NodeId id = 0;
  Role role = Role::Sensor;
  NodeState state;
  std::map<SessionId, SessionTable> tables;
  std::set<SessionId> bePassiveSentForSession;
  /// Sessions whose bePassive put this node to sleep.
  std::set<SessionId> passiveMarks;
  /// Sessions this node has relayed data for.
  std::set<SessionId> relayedSessions;
  /// RouteError latch, per (session, pathId).
  std::set<std::pair<SessionId, NodeId>> routeErrorsSent;
  /// Remaining energy below which relays report their paths broken.
  double energyThreshold = 0.0;
  SourceState source;

  /// True when some session entry at this node is flagged in use.
  bool relaysInUse() const;
  PathTable &tableFor(SessionId session) { return tables[session].table; }
};

enum class DropReason { RoutingInconsistency, Loop };
enum class DiscoveryKind { Initial, Additional, Repair, Retry };
std::string_view toString(DiscoveryKind kind);

namespace action {
struct Rebroadcast {
  RouteRequest request;
};
struct ArmCollectTimer {
  SessionId session;
  std::uint32_t seq;
};
struct StartData {
  SessionId session;
  NodeId pathId;
  std::uint32_t hops;
  std::uint32_t seq;
};
struct DiscoveryFailed {
  SessionId session;
  std::uint32_t seq;
};
struct Forward {
  DataPacket packet;
  NodeId nextNode;
};
struct EmitBePassive {
  BePassive message;
};
struct DeliverToApp {
  DataPacket packet;
};
struct Drop {
  DataPacket packet;
  DropReason reason;
};
struct IssueDiscovery {
  RouteRequest request;
  DiscoveryKind kind;
};
struct SendRouteError {
  RouteError message;
  NodeId nextNode;
};
} // namespace action

using Action =
    std::variant<action::Rebroadcast, action::ArmCollectTimer,
                 action::StartData, action::DiscoveryFailed, action::Forward,
                 action::EmitBePassive, action::DeliverToApp, action::Drop,
                 action::IssueDiscovery, action::SendRouteError>;
using Actions = std::vector<Action>;

/// Route request handling at any node.
///
/// Under MR2 a passive node ignores requests, and so does a node that has
/// relayed data: its neighbors were silenced around it, so it can only extend
/// routes that hug an existing path. A source handles only its own session's
/// requests and never rebroadcasts; the sink ignores requests.
Actions onRequest(NodeContext &ctx, const RouteRequest &request, Scheme scheme,
                  NodeId sinkId);

/// Collection timer expiry at a source: pick the best unused path, mark it
/// in use and start data on it.
Actions sourceOnCollectTimeout(NodeContext &ctx, std::uint32_t seq,
                               Scheme scheme);

/// Data reception at the addressed node. Relays mark the path in use and,
/// under MR2, send one bePassive per session exempting their path neighbors.
Actions onData(NodeContext &ctx, DataPacket packet, NodeId previousHop,
               Scheme scheme);

/// Returns true when the node transitions to Passive. Exempt: the sender's
/// path neighbors, sources, the sink, and nodes that relay or have relayed
/// data. Only MR2 honors bePassive.
bool onBePassive(NodeContext &ctx, const BePassive &message, Scheme scheme,
                 SimTime now);

/// One RouteError per in-use relayed path, the first time remaining energy is
/// found under the node's threshold.
Actions maybeEmitRERR(NodeContext &ctx, double remainingEnergy);

/// Relays a RouteError one hop toward the sink along its path.
Actions onRouteError(NodeContext &ctx, const RouteError &message);

/// No active path to put traffic on.
class NoPath : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Split: one path per packet, round robin by seq. Duplicate: every path.
std::vector<NodeId> partitionTraffic(Strategy strategy,
                                     std::span<const NodeId> activePaths,
                                     std::uint32_t seq);

/// Session teardown: the session's passive marks, inUse flags, relay marks
/// and bePassive latches are cleared. Returns nodes that went back to Active.
std::vector<NodeId> resetSession(std::span<NodeContext> nodes,
                                 SessionId session);

struct SinkMonitorConfig {
  Scheme scheme = Scheme::MR2;
  Strategy strategy = Strategy::RoundRobinSplit;
  /// Source inter-packet interval, seconds.
  double expectedInterval = 0.1;
  /// Delivery-ratio window, packets.
  std::uint32_t window = 20;
  double theta = 0.8;
  double gamma = 3.0;
  /// Upper bound on non-repair discoveries, the first included; 0 = unbounded.
  std::uint32_t maxPaths = 4;
  /// A path silent for brokenFactor expected per-path intervals is broken.
  double brokenFactor = 10.0;
  /// Seqs this close to the newest one are not yet judged lost.
  std::uint32_t reorderSlack = 3;
  /// A session without any live path is rediscovered after this long.
  double retryDelay = 3.0;
  std::uint32_t maxRetries = 3;
  SimTime sessionEnd = 1e300;
};

/// Sink-side view of one session: delivery-ratio and inter-arrival triggers
/// for additional paths, silence/RERR detection of broken paths.
class SinkMonitor {
public:
  SinkMonitor(SessionId session, NodeId sinkId, SinkMonitorConfig config);

  /// First discovery of the session.
  Actions start(SimTime now);
  /// Data arrival; may issue an additional discovery.
  Actions onData(const DataPacket &packet, SimTime now);
  /// Silence check; issues repairs for paths quiet for too long.
  Actions detectBroken(SimTime now);
  Actions onRouteError(const RouteError &message, SimTime now);
  /// Periodic housekeeping: detectBroken plus retries for dead sessions.
  Actions tick(SimTime now);

  SessionId session() const noexcept { return m_session; }
  std::uint32_t discoveriesIssued() const noexcept { return m_issued; }
  std::uint32_t repairsIssued() const noexcept { return m_repairs; }
  std::uint32_t retriesIssued() const noexcept { return m_retries; }
  bool awaitingNewPath() const noexcept { return m_awaitingNewPath; }
  double interArrivalEstimate() const noexcept { return m_emaGap; }
  const std::map<NodeId, SimTime> &lastDataTime() const noexcept {
    return m_lastData;
  }
  /// Delivery ratio over the last complete window, if one exists.
  std::optional<double> windowDeliveryRatio() const;
  double brokenTimeout() const;

private:
  RouteRequest makeRequest(bool repair, std::optional<NodeId> broken);
  Actions issueRepair(NodeId pathId, SimTime now);
  bool mayAddPath() const;

  SessionId m_session;
  NodeId m_sinkId;
  SinkMonitorConfig m_config;
  std::uint32_t m_nextSeq = 1;
  std::uint32_t m_issued = 0;
  std::uint32_t m_repairs = 0;
  std::uint32_t m_retries = 0;
  bool m_started = false;
  bool m_awaitingNewPath = false;
  SimTime m_lastIssue = 0.0;

  std::map<NodeId, SimTime> m_lastData;
  std::set<NodeId> m_everSeen;
  std::set<std::uint32_t> m_received;
  std::optional<std::uint32_t> m_highestSeq;
  std::uint32_t m_windowStart = 0;
  std::optional<SimTime> m_lastArrival;
  double m_emaGap = 0.0;
};

} // namespace mr2
