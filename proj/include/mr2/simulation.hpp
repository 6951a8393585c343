#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "mr2/energy.hpp"
#include "mr2/event_queue.hpp"
#include "mr2/medium.hpp"
#include "mr2/nodeengine.hpp"
#include "mr2/topology.hpp"

namespace mr2 {

struct ProtocolConfig {
  /// Source-side route collection period after the first request of a round.
  double collectTimeout = 2.0;
  std::uint32_t window = 20;
  double theta = 0.8;
  double gamma = 3.0;
  /// 0 = unbounded.
  std::uint32_t maxPathsMr2 = 4;
  std::uint32_t maxPathsHc = 0;
  /// RERR threshold as a fraction of initial energy.
  double rerrThresholdFraction = 0.05;
  double brokenFactor = 10.0;
  std::uint32_t reorderSlack = 3;
  double retryDelay = 3.0;
  std::uint32_t maxRetries = 3;
};

struct TrafficConfig {
  double packetRate = 10.0;
  /// Data period per session, counted from the end of the first collection.
  double sessionDuration = 15.0;
  std::uint32_t payloadBits = 1024;
  Strategy strategy = Strategy::RoundRobinSplit;
  /// Session k starts at k * sessionStagger. Unset: sessions run back to
  /// back, each starting when the previous one has been torn down.
  std::optional<double> sessionStagger;
  /// Time allowed after the last session's data period for packets in flight.
  double drainTime = 2.0;
  /// Throughput bucket, seconds.
  double throughputBucket = 1.0;
};

struct SimConfig {
  Scheme scheme = Scheme::MR2;
  EnergyParams energy;
  MessageSizes sizes;
  MediumConfig medium;
  ProtocolConfig protocol;
  TrafficConfig traffic;
  /// Mains-powered sink: never charged, never dies.
  bool unlimitedSink = true;
  bool recordEventLog = false;

  /// Throws InvalidParameter on out-of-domain values.
  void validate() const;
};

/// One path a source selected.
struct PathTrace {
  SessionId session = 0;
  NodeId pathId = 0;
  /// Hop count advertised in the source's table at selection.
  std::uint32_t hops = 0;
  std::uint32_t seq = 0;
  DiscoveryKind kind = DiscoveryKind::Initial;
  SimTime discoveredAt = 0.0;
  SimTime selectedAt = 0.0;
  /// Intermediate nodes that forwarded data on this path.
  std::set<NodeId> relays;
  std::uint64_t sent = 0;
  /// First copies delivered on this path.
  std::uint64_t delivered = 0;
  /// Hop count of delivered packets, summed (for mean traversed length).
  std::uint64_t deliveredHops = 0;
};

struct DiscoveryTrace {
  SessionId session = 0;
  std::uint32_t seq = 0;
  DiscoveryKind kind = DiscoveryKind::Initial;
  SimTime time = 0.0;
  std::optional<NodeId> brokenPathId;
};

struct SessionTrace {
  SessionId session = 0;
  SimTime start = 0.0;
  SimTime dataEnd = 0.0;
  SimTime resetAt = 0.0;
  std::uint64_t sent = 0;
  /// Distinct (source, seq) pairs delivered.
  std::uint64_t delivered = 0;
  std::uint64_t duplicates = 0;
  std::vector<double> delays;
  std::vector<SimTime> deliveryTimes;
  std::uint32_t discoveryFailures = 0;
};

struct BePassiveEmission {
  NodeId sender = 0;
  SessionId session = 0;
  SimTime time = 0.0;
};

struct BePassiveDecode {
  NodeId receiver = 0;
  NodeId sender = 0;
  SessionId session = 0;
  SimTime time = 0.0;
  /// The receiver recorded a passive mark (it was not exempt).
  bool honored = false;
};

struct DropCounts {
  std::uint64_t loop = 0;
  std::uint64_t inconsistency = 0;
};

/// Everything a finished replication exposes to metrics and checkers.
struct RunTrace {
  Scheme scheme = Scheme::MR2;
  SimTime endTime = 0.0;
  std::vector<SessionTrace> sessions;
  std::vector<PathTrace> paths;
  std::vector<DiscoveryTrace> discoveries;
  std::vector<BePassiveEmission> bePassiveSent;
  std::vector<BePassiveDecode> bePassiveDecoded;
  /// Data messages forwarded or delivered, per node (M_i).
  std::vector<std::uint64_t> processed;
  DropCounts drops;
  MediumStats medium;
  std::vector<EnergyLedger::Account> energy;
  std::array<double, kMessageClassCount> classEnergy{};
  double totalEnergy = 0.0;
  double conservationError = 0.0;
  std::uint32_t deaths = 0;
  std::vector<LogRecord> eventLog;
};

/// One replication: the node engine driven by the medium over a fixed
/// topology and source set.
class Simulation {
public:
  Simulation(const Topology &topology, std::vector<NodeId> sources,
             SimConfig config, std::uint64_t seed);
  Simulation(const Simulation &) = delete;
  Simulation &operator=(const Simulation &) = delete;

  /// Processes events in order up to and including tEnd.
  void runUntil(SimTime tEnd);
  /// Time by which every session's data period and drain are over.
  SimTime endTime() const noexcept { return m_endTime; }
  /// Runs to endTime() and returns the trace; the simulation is spent.
  RunTrace finish();

  const NodeContext &context(NodeId node) const { return m_nodes.at(node); }
  const SinkMonitor &monitor(SessionId session) const;
  SimTime now() const noexcept { return m_queue.now(); }

private:
  enum TimerTag : std::uint64_t {
    SessionStart,
    Collect,
    SinkTick,
    SessionReset
  };

  struct SessionRuntime {
    std::size_t index = 0;
    bool sending = false;
    std::set<std::uint32_t> delivered;
  };

  void dispatch(const Event &event);
  void onDecoded(NodeId receiver, const Frame &frame, SimTime now);
  void onCharged(NodeId node, SimTime now);
  void execute(NodeId node, Actions actions, SimTime now);
  void appSend(NodeId source, SimTime now);
  void deliver(const DataPacket &packet, SimTime now);
  PathTrace *findPath(SessionId session, NodeId pathId);
  std::size_t sessionIndex(SessionId session) const;

  const Topology &m_topology;
  SimConfig m_config;
  NodeId m_sink;
  std::vector<NodeId> m_sources;
  EventQueue m_queue;
  EnergyLedger m_ledger;
  std::mt19937_64 m_rng;
  std::vector<LogRecord> m_log;
  Medium m_medium;
  std::vector<NodeContext> m_nodes;
  std::map<SessionId, SinkMonitor> m_monitors;
  std::map<SessionId, SessionRuntime> m_runtime;
  std::map<std::pair<SessionId, NodeId>, std::size_t> m_pathIndex;
  std::map<std::pair<SessionId, std::uint32_t>, std::size_t> m_discoveryIndex;
  RunTrace m_trace;
  SimTime m_endTime = 0.0;
  double m_interval = 0.1;
  bool m_finished = false;
};

/// Convenience wrapper: build, run to completion, return the trace.
RunTrace simulate(const Topology &topology, const std::vector<NodeId> &sources,
                  const SimConfig &config, std::uint64_t seed);

} // namespace mr2
