#include "mr2/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace mr2 {

namespace {

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char *what) {
  if (!ok)
    throw InvalidParameter(what);
}

} // namespace

void SimConfig::validate() const {
  energy.validate();
  require(medium.jitter >= 0.0, "jitter must be non-negative");
  require(medium.queueCapacity > 0, "queueCapacity must be positive");
  require(protocol.collectTimeout > 0.0, "collectTimeout must be positive");
  require(protocol.window > 0, "window must be positive");
  require(protocol.theta > 0.0 && protocol.theta <= 1.0,
          "theta must lie in (0, 1]");
  require(protocol.gamma > 0.0, "gamma must be positive");
  require(protocol.rerrThresholdFraction >= 0.0 &&
              protocol.rerrThresholdFraction < 1.0,
          "rerrThresholdFraction must lie in [0, 1)");
  require(protocol.brokenFactor > 0.0, "brokenFactor must be positive");
  require(protocol.retryDelay > 0.0, "retryDelay must be positive");
  require(traffic.packetRate > 0.0, "packetRate must be positive");
  require(traffic.sessionDuration > 0.0, "sessionDuration must be positive");
  require(traffic.sessionStagger.value_or(0.0) >= 0.0,
          "sessionStagger must be non-negative");
  require(traffic.drainTime >= 0.0, "drainTime must be non-negative");
  require(traffic.throughputBucket > 0.0, "throughputBucket must be positive");
}

Simulation::Simulation(const Topology &topology, std::vector<NodeId> sources,
                       SimConfig config, std::uint64_t seed)
    : m_topology(topology), m_config(config), m_sink(topology.sinkId()),
      m_sources(std::move(sources)),
      m_ledger(topology.nodeCount(), config.energy), m_rng(seed),
      m_medium(topology, config.energy, config.sizes, config.medium, m_queue,
               m_ledger, m_rng, config.recordEventLog ? &m_log : nullptr) {
  m_config.validate();
  if (m_sources.empty())
    throw InvalidParameter("at least one source is required");
  m_interval = 1.0 / m_config.traffic.packetRate;

  const std::size_t n = topology.nodeCount();
  m_nodes.resize(n);
  for (NodeId id = 0; id < n; ++id) {
    m_nodes[id].id = id;
    m_nodes[id].energyThreshold =
        m_config.protocol.rerrThresholdFraction * m_config.energy.initialEnergy;
  }
  m_nodes[m_sink].role = Role::Sink;
  if (m_config.unlimitedSink)
    m_ledger.setUnlimited(m_sink);

  SinkMonitorConfig monitor;
  monitor.scheme = m_config.scheme;
  monitor.strategy = m_config.traffic.strategy;
  monitor.expectedInterval = m_interval;
  monitor.window = m_config.protocol.window;
  monitor.theta = m_config.protocol.theta;
  monitor.gamma = m_config.protocol.gamma;
  monitor.brokenFactor = m_config.protocol.brokenFactor;
  monitor.reorderSlack = m_config.protocol.reorderSlack;
  monitor.retryDelay = m_config.protocol.retryDelay;
  monitor.maxRetries = m_config.protocol.maxRetries;
  switch (m_config.scheme) {
  case Scheme::MR2:
    monitor.maxPaths = m_config.protocol.maxPathsMr2;
    break;
  case Scheme::HC:
    monitor.maxPaths = m_config.protocol.maxPathsHc;
    break;
  case Scheme::Single:
    monitor.maxPaths = 1;
    break;
  }

  m_trace.scheme = m_config.scheme;
  m_trace.processed.assign(n, 0);
  for (std::size_t k = 0; k < m_sources.size(); ++k) {
    const NodeId s = m_sources[k];
    if (!topology.contains(s) || s == m_sink)
      throw InvalidParameter("source must be a sensor node");
    if (m_runtime.contains(s))
      throw InvalidParameter("duplicate source");
    m_nodes[s].role = Role::Source;

    SessionTrace session;
    session.session = s;
    if (m_config.traffic.sessionStagger)
      session.start = double(k) * *m_config.traffic.sessionStagger;
    else if (k > 0)
      session.start = m_trace.sessions.back().resetAt;
    session.dataEnd = session.start + m_config.protocol.collectTimeout +
                      m_config.traffic.sessionDuration;
    session.resetAt = session.dataEnd + m_config.traffic.drainTime;
    m_endTime = std::max(m_endTime, session.resetAt);

    monitor.sessionEnd = session.dataEnd;
    m_monitors.emplace(s, SinkMonitor(s, m_sink, monitor));
    m_runtime[s].index = k;
    m_queue.schedule(session.start, EventKind::Timer, s, SessionStart);
    m_queue.schedule(session.resetAt, EventKind::Timer, s, SessionReset);
    m_trace.sessions.push_back(std::move(session));
  }
  m_queue.schedule(m_interval, EventKind::Timer, m_sink, SinkTick);

  m_medium.onDecoded([this](NodeId r, const Frame &f, SimTime now) {
    onDecoded(r, f, now);
  });
  m_medium.onCharged([this](NodeId node, SimTime now) { onCharged(node, now); });
}

const SinkMonitor &Simulation::monitor(SessionId session) const {
  auto it = m_monitors.find(session);
  if (it == m_monitors.end())
    throw NotFound("no session " + std::to_string(session));
  return it->second;
}

std::size_t Simulation::sessionIndex(SessionId session) const {
  return m_runtime.at(session).index;
}

PathTrace *Simulation::findPath(SessionId session, NodeId pathId) {
  auto it = m_pathIndex.find({session, pathId});
  return it == m_pathIndex.end() ? nullptr : &m_trace.paths[it->second];
}

void Simulation::runUntil(SimTime tEnd) {
  while (!m_queue.empty() && m_queue.peek().time <= tEnd)
    dispatch(m_queue.pop());
  m_queue.advanceTo(tEnd);
}

void Simulation::dispatch(const Event &event) {
  const SimTime now = event.time;
  switch (event.kind) {
  case EventKind::TxStart:
  case EventKind::TxEnd:
    m_medium.handle(event);
    return;
  case EventKind::AppSend:
    appSend(event.node, now);
    return;
  case EventKind::RxResolve:
    return;
  case EventKind::Timer:
    break;
  }

  switch (event.ref) {
  case SessionStart:
    execute(m_sink, m_monitors.at(event.node).start(now), now);
    break;
  case Collect:
    execute(event.node,
            sourceOnCollectTimeout(m_nodes[event.node],
                                   std::uint32_t(event.aux), m_config.scheme),
            now);
    break;
  case SinkTick:
    for (auto &[session, monitor] : m_monitors)
      execute(m_sink, monitor.tick(now), now);
    if (now + m_interval <= m_endTime)
      m_queue.schedule(now + m_interval, EventKind::Timer, m_sink, SinkTick);
    break;
  case SessionReset:
    for (NodeId woke : resetSession(m_nodes, event.node))
      m_medium.wake(woke, now);
    m_runtime.at(event.node).sending = false;
    break;
  default:
    break;
  }
}

void Simulation::appSend(NodeId source, SimTime now) {
  SessionRuntime &rt = m_runtime.at(source);
  SessionTrace &session = m_trace.sessions[rt.index];
  if (now >= session.dataEnd || !m_medium.refresh(source, now)) {
    rt.sending = false;
    return;
  }
  m_queue.schedule(now + m_interval, EventKind::AppSend, source);

  NodeContext &ctx = m_nodes[source];
  // Paused while no path is up; seqs only advance for packets actually sent.
  if (ctx.source.activePaths.empty())
    return;
  const std::uint32_t seq = ctx.source.nextDataSeq++;
  const auto targets = partitionTraffic(m_config.traffic.strategy,
                                        ctx.source.activePaths, seq);
  PathTable &table = ctx.tableFor(source);
  bool sent = false;
  for (NodeId pathId : targets) {
    const PathTableEntry *entry = table.find(pathId);
    if (!entry)
      continue;
    DataPacket packet{source, seq, pathId, m_config.traffic.payloadBits, now,
                      {source}};
    if (PathTrace *path = findPath(source, pathId))
      ++path->sent;
    ++m_trace.processed[source];
    m_medium.send(source, std::move(packet), entry->nextNode, now);
    sent = true;
  }
  if (sent)
    ++session.sent;
}

void Simulation::deliver(const DataPacket &packet, SimTime now) {
  ++m_trace.processed[m_sink];
  auto rt = m_runtime.find(packet.source);
  if (rt == m_runtime.end())
    return;
  SessionTrace &session = m_trace.sessions[rt->second.index];
  if (!rt->second.delivered.insert(packet.seq).second) {
    ++session.duplicates;
    return;
  }
  ++session.delivered;
  session.delays.push_back(now - packet.createdAt);
  session.deliveryTimes.push_back(now);
  if (PathTrace *path = findPath(packet.source, packet.pathId)) {
    ++path->delivered;
    path->deliveredHops += packet.hops.size();
  }
}

void Simulation::onDecoded(NodeId receiver, const Frame &frame, SimTime now) {
  NodeContext &ctx = m_nodes[receiver];
  const Scheme scheme = m_config.scheme;
  std::visit(
      Overloaded{
          [&](const RouteRequest &req) {
            execute(receiver, onRequest(ctx, req, scheme, m_sink), now);
          },
          [&](const DataPacket &packet) {
            if (frame.addressee != receiver)
              return;
            if (receiver == m_sink) {
              deliver(packet, now);
              if (auto it = m_monitors.find(packet.source);
                  it != m_monitors.end())
                execute(m_sink, it->second.onData(packet, now), now);
              return;
            }
            execute(receiver, onData(ctx, packet, frame.sender, scheme), now);
          },
          [&](const BePassive &msg) {
            const bool marked = ctx.passiveMarks.contains(msg.session);
            const bool wentPassive = onBePassive(ctx, msg, scheme, now);
            m_trace.bePassiveDecoded.push_back(
                {receiver, msg.sender, msg.session, now,
                 !marked && ctx.passiveMarks.contains(msg.session)});
            if (wentPassive)
              m_medium.sleep(receiver, now);
          },
          [&](const RouteError &msg) {
            if (frame.addressee != receiver)
              return;
            if (receiver == m_sink) {
              if (auto it = m_monitors.find(msg.session); it != m_monitors.end())
                execute(m_sink, it->second.onRouteError(msg, now), now);
              return;
            }
            execute(receiver, onRouteError(ctx, msg), now);
          }},
      frame.message);
}

void Simulation::onCharged(NodeId node, SimTime now) {
  NodeContext &ctx = m_nodes[node];
  if (ctx.role != Role::Sensor || !ctx.relaysInUse())
    return;
  execute(node, maybeEmitRERR(ctx, m_ledger.remaining(node)), now);
}

void Simulation::execute(NodeId node, Actions actions, SimTime now) {
  for (Action &a : actions) {
    std::visit(
        Overloaded{
            [&](action::Rebroadcast &x) {
              m_medium.send(node, std::move(x.request), std::nullopt, now);
            },
            [&](action::ArmCollectTimer &x) {
              m_queue.schedule(now + m_config.protocol.collectTimeout,
                               EventKind::Timer, node, Collect, x.seq);
            },
            [&](action::StartData &x) {
              PathTrace path;
              path.session = x.session;
              path.pathId = x.pathId;
              path.hops = x.hops;
              path.seq = x.seq;
              path.selectedAt = now;
              if (auto it = m_discoveryIndex.find({x.session, x.seq});
                  it != m_discoveryIndex.end()) {
                path.kind = m_trace.discoveries[it->second].kind;
                path.discoveredAt = m_trace.discoveries[it->second].time;
              }
              m_pathIndex[{x.session, x.pathId}] = m_trace.paths.size();
              m_trace.paths.push_back(std::move(path));
              SessionRuntime &rt = m_runtime.at(x.session);
              if (!rt.sending) {
                rt.sending = true;
                m_queue.schedule(now, EventKind::AppSend, x.session);
              }
            },
            [&](action::DiscoveryFailed &x) {
              ++m_trace.sessions[sessionIndex(x.session)].discoveryFailures;
            },
            [&](action::Forward &x) {
              ++m_trace.processed[node];
              if (PathTrace *path = findPath(x.packet.source, x.packet.pathId))
                path->relays.insert(node);
              m_medium.send(node, std::move(x.packet), x.nextNode, now);
            },
            [&](action::EmitBePassive &x) {
              m_trace.bePassiveSent.push_back(
                  {node, x.message.session, now});
              m_medium.send(node, x.message, std::nullopt, now);
            },
            [&](action::DeliverToApp &x) { deliver(x.packet, now); },
            [&](action::Drop &x) {
              if (x.reason == DropReason::Loop)
                ++m_trace.drops.loop;
              else
                ++m_trace.drops.inconsistency;
            },
            [&](action::IssueDiscovery &x) {
              m_discoveryIndex[{x.request.session, x.request.seq}] =
                  m_trace.discoveries.size();
              m_trace.discoveries.push_back({x.request.session, x.request.seq,
                                             x.kind, now,
                                             x.request.brokenPathId});
              m_medium.send(node, std::move(x.request), std::nullopt, now);
            },
            [&](action::SendRouteError &x) {
              m_medium.send(node, x.message, x.nextNode, now);
            }},
        a);
  }
}

RunTrace Simulation::finish() {
  if (m_finished)
    throw std::logic_error("simulation already finished");
  runUntil(m_endTime);
  m_finished = true;
  for (NodeId id = 0; id < m_nodes.size(); ++id)
    m_medium.refresh(id, m_endTime);

  m_trace.endTime = m_endTime;
  m_trace.medium = m_medium.stats();
  m_trace.energy.reserve(m_nodes.size());
  for (NodeId id = 0; id < m_nodes.size(); ++id) {
    m_trace.energy.push_back(m_ledger.account(id));
    if (!m_ledger.alive(id))
      ++m_trace.deaths;
  }
  for (std::size_t c = 0; c < kMessageClassCount; ++c)
    m_trace.classEnergy[c] = m_ledger.classEnergy(MessageClass(c));
  m_trace.totalEnergy = m_ledger.totalConsumed();
  m_trace.conservationError = m_ledger.conservationError();
  m_trace.eventLog = std::move(m_log);
  return std::move(m_trace);
}

RunTrace simulate(const Topology &topology, const std::vector<NodeId> &sources,
                  const SimConfig &config, std::uint64_t seed) {
  Simulation sim(topology, sources, config, seed);
  return sim.finish();
}

} // namespace mr2
