#include "mr2/medium.hpp"

#include <algorithm>
#include <cstdio>

namespace mr2 {

std::string_view toString(LogKind kind) {
  switch (kind) {
  case LogKind::TxStart:
    return "txStart";
  case LogKind::TxEnd:
    return "txEnd";
  case LogKind::RxResolve:
    return "rxResolve";
  case LogKind::Suppressed:
    return "suppressed";
  case LogKind::QueueDrop:
    return "queueDrop";
  case LogKind::Passive:
    return "passive";
  case LogKind::Wake:
    return "wake";
  case LogKind::Death:
    return "death";
  }
  return "?";
}

std::string_view toString(LogOutcome outcome) {
  switch (outcome) {
  case LogOutcome::Sent:
    return "sent";
  case LogOutcome::Done:
    return "done";
  case LogOutcome::Decoded:
    return "decoded";
  case LogOutcome::Collided:
    return "collided";
  case LogOutcome::Aborted:
    return "aborted";
  case LogOutcome::Suppressed:
    return "suppressed";
  case LogOutcome::Dropped:
    return "dropped";
  case LogOutcome::None:
    return "-";
  }
  return "?";
}

std::string formatEventLog(const std::vector<LogRecord> &log) {
  std::string out;
  out.reserve(log.size() * 48);
  char line[128];
  auto node = [](NodeId id, char *buf) {
    if (id == kNoNode)
      std::snprintf(buf, 16, "-");
    else
      std::snprintf(buf, 16, "%u", id);
  };
  for (const auto &r : log) {
    char sender[16], receiver[16];
    node(r.sender, sender);
    node(r.receiver, receiver);
    const bool stateEvent = r.kind == LogKind::Passive ||
                            r.kind == LogKind::Wake || r.kind == LogKind::Death;
    const std::string_view cls = stateEvent ? "-" : toString(r.cls);
    std::snprintf(line, sizeof line, "%.9f %s %s %s %.*s %s\n", r.time,
                  toString(r.kind).data(), sender, receiver, int(cls.size()),
                  cls.data(), toString(r.outcome).data());
    out += line;
  }
  return out;
}

Medium::Medium(const Topology &topology, const EnergyParams &energy,
               const MessageSizes &sizes, MediumConfig config,
               EventQueue &queue, EnergyLedger &ledger, std::mt19937_64 &rng,
               std::vector<LogRecord> *log)
    : m_topology(topology), m_energy(energy), m_sizes(sizes), m_config(config),
      m_queue(queue), m_ledger(ledger), m_rng(rng), m_log(log),
      m_nodes(topology.nodeCount()) {
  if (config.jitter < 0.0)
    throw InvalidParameter("jitter must be non-negative");
  if (config.queueCapacity == 0)
    throw InvalidParameter("queueCapacity must be positive");
}

double Medium::txEnergy(std::uint32_t bits) const {
  return energyTx(bits, m_topology.radioRange(), m_energy);
}

void Medium::send(NodeId sender, Message message,
                  std::optional<NodeId> addressee, SimTime now) {
  NodeRadio &radio = m_nodes.at(sender);
  const MessageClass cls = classOf(message);
  if (radio.dead || radio.asleep ||
      radio.queue.size() >= m_config.queueCapacity) {
    ++m_stats.queueDrops[std::size_t(cls)];
    log({now, LogKind::QueueDrop, sender,
         addressee.value_or(kNoNode), cls, LogOutcome::Dropped, 0});
    return;
  }
  radio.queue.push_back({std::move(message), addressee});
  if (!radio.txFrame && !radio.startScheduled)
    scheduleStart(sender, now);
}

void Medium::scheduleStart(NodeId sender, SimTime now) {
  double delay = 0.0;
  if (m_config.jitter > 0.0) {
    std::uniform_real_distribution<double> jitter(0.0, m_config.jitter);
    delay = jitter(m_rng);
  }
  m_nodes[sender].startScheduled = true;
  m_queue.schedule(now + delay, EventKind::TxStart, sender);
}

void Medium::handle(const Event &event) {
  switch (event.kind) {
  case EventKind::TxStart:
    startTransmission(event.node, event.time);
    break;
  case EventKind::TxEnd:
    finishTransmission(event.ref, event.time);
    break;
  default:
    throw std::logic_error("medium got a non-radio event");
  }
}

bool Medium::refresh(NodeId node, SimTime now) {
  NodeRadio &radio = m_nodes[node];
  if (radio.dead)
    return false;
  if (!m_ledger.accrue(node, now)) {
    handleDeath(node);
    return false;
  }
  return true;
}

void Medium::handleDeath(NodeId node) {
  NodeRadio &radio = m_nodes[node];
  if (radio.dead)
    return;
  radio.dead = true;
  const SimTime when = m_ledger.account(node).deathTime;
  abortReceptions(node, when);
  for (const auto &pending : radio.queue) {
    const MessageClass cls = classOf(pending.message);
    ++m_stats.queueDrops[std::size_t(cls)];
    log({when, LogKind::QueueDrop, node, pending.addressee.value_or(kNoNode),
         cls, LogOutcome::Dropped, 0});
  }
  radio.queue.clear();
  log({when, LogKind::Death, node, kNoNode, MessageClass::Data,
       LogOutcome::None, 0});
  if (m_onDeath)
    m_onDeath(node, when);
}

Medium::Reception *Medium::findReception(std::uint64_t frameId,
                                         NodeId receiver) {
  auto it = m_onAir.find(frameId);
  if (it == m_onAir.end())
    return nullptr;
  for (auto &rx : it->second.receptions)
    if (rx.receiver == receiver)
      return &rx;
  return nullptr;
}

void Medium::abortReceptions(NodeId node, SimTime now) {
  NodeRadio &radio = m_nodes[node];
  for (std::uint64_t frameId : radio.ongoing)
    if (Reception *rx = findReception(frameId, node)) {
      rx->aborted = true;
      m_ledger.endBusy(node, now);
    }
  radio.ongoing.clear();
}

void Medium::sleep(NodeId node, SimTime now) {
  NodeRadio &radio = m_nodes.at(node);
  if (radio.asleep || radio.dead)
    return;
  refresh(node, now);
  radio.asleep = true;
  abortReceptions(node, now);
  for (const auto &pending : radio.queue) {
    const MessageClass cls = classOf(pending.message);
    ++m_stats.queueDrops[std::size_t(cls)];
    log({now, LogKind::QueueDrop, node, pending.addressee.value_or(kNoNode),
         cls, LogOutcome::Dropped, 0});
  }
  radio.queue.clear();
  m_ledger.setAsleep(node, true, now);
  log({now, LogKind::Passive, node, kNoNode, MessageClass::Data,
       LogOutcome::None, 0});
}

void Medium::wake(NodeId node, SimTime now) {
  NodeRadio &radio = m_nodes.at(node);
  if (!radio.asleep || radio.dead)
    return;
  refresh(node, now);
  radio.asleep = false;
  m_ledger.setAsleep(node, false, now);
  for (NodeId n : m_topology.neighbors(node))
    if (const auto &tx = m_nodes[n].txFrame)
      radio.deafUntil = std::max(radio.deafUntil, m_onAir.at(*tx).frame.end);
  log({now, LogKind::Wake, node, kNoNode, MessageClass::Data, LogOutcome::None,
       0});
}

void Medium::startTransmission(NodeId sender, SimTime now) {
  NodeRadio &radio = m_nodes[sender];
  radio.startScheduled = false;
  if (radio.queue.empty() || radio.txFrame)
    return;
  Pending pending = std::move(radio.queue.front());
  radio.queue.pop_front();

  Frame frame;
  frame.id = m_nextFrameId++;
  frame.cls = classOf(pending.message);
  frame.bits = m_sizes.bitsOf(pending.message);
  frame.message = std::move(pending.message);
  frame.sender = sender;
  frame.addressee = pending.addressee;
  frame.start = now;
  frame.end = now + m_energy.airtime(frame.bits);

  const bool alive = refresh(sender, now) && !radio.asleep &&
                     m_ledger.chargeTx(sender, txEnergy(frame.bits), frame.cls,
                                       now);
  if (!alive) {
    ++m_stats.suppressed;
    log({now, LogKind::Suppressed, sender,
         frame.addressee.value_or(kNoNode), frame.cls, LogOutcome::Suppressed,
         frame.id});
    if (!m_ledger.alive(sender))
      handleDeath(sender);
    else if (!radio.queue.empty())
      scheduleStart(sender, now);
    return;
  }
  ++m_stats.framesSent[std::size_t(frame.cls)];
  log({now, LogKind::TxStart, sender, frame.addressee.value_or(kNoNode),
       frame.cls, LogOutcome::Sent, frame.id});

  OnAir air{frame, {}};
  // Half duplex: whatever the sender was receiving is lost.
  for (std::uint64_t other : radio.ongoing)
    if (auto it = m_onAir.find(other); it != m_onAir.end())
      for (auto &rx : it->second.receptions)
        if (rx.receiver == sender)
          rx.collided = true;

  m_ledger.beginBusy(sender, now);
  radio.txFrame = frame.id;

  const double rxCost = energyRx(frame.bits, m_energy);
  for (NodeId r : m_topology.neighbors(sender)) {
    NodeRadio &target = m_nodes[r];
    if (target.dead || target.asleep)
      continue;
    if (!refresh(r, now))
      continue;
    if (!m_ledger.chargeRx(r, rxCost, frame.cls, now)) {
      handleDeath(r);
      continue;
    }
    Reception rx{frame.id, r, false, false};
    if (target.txFrame || !target.ongoing.empty() || now < target.deafUntil) {
      rx.collided = true;
      for (std::uint64_t other : target.ongoing)
        if (auto it = m_onAir.find(other); it != m_onAir.end())
          for (auto &orx : it->second.receptions)
            if (orx.receiver == r)
              orx.collided = true;
    }
    m_ledger.beginBusy(r, now);
    target.ongoing.push_back(frame.id);
    air.receptions.push_back(rx);
  }
  const SimTime end = frame.end;
  const std::uint64_t id = frame.id;
  m_onAir.emplace(id, std::move(air));
  m_queue.schedule(end, EventKind::TxEnd, sender, id);

  // Threshold checks may queue new frames, so they run once the frame is on
  // the air.
  if (m_onCharged) {
    m_onCharged(sender, now);
    for (const auto &rx : m_onAir.at(id).receptions)
      m_onCharged(rx.receiver, now);
  }
}

void Medium::finishTransmission(std::uint64_t frameId, SimTime now) {
  auto it = m_onAir.find(frameId);
  if (it == m_onAir.end())
    return;
  OnAir air = std::move(it->second);
  m_onAir.erase(it);
  const Frame &frame = air.frame;

  NodeRadio &senderRadio = m_nodes[frame.sender];
  senderRadio.txFrame.reset();
  m_ledger.endBusy(frame.sender, now);
  log({now, LogKind::TxEnd, frame.sender, frame.addressee.value_or(kNoNode),
       frame.cls, LogOutcome::Done, frame.id});

  std::vector<NodeId> decodedBy;
  for (const auto &rx : air.receptions) {
    NodeRadio &radio = m_nodes[rx.receiver];
    LogOutcome outcome = LogOutcome::Aborted;
    if (!rx.aborted) {
      auto pos = std::find(radio.ongoing.begin(), radio.ongoing.end(), frameId);
      if (pos != radio.ongoing.end())
        radio.ongoing.erase(pos);
      m_ledger.endBusy(rx.receiver, now);
      outcome = rx.collided ? LogOutcome::Collided : LogOutcome::Decoded;
    }
    switch (outcome) {
    case LogOutcome::Decoded:
      ++m_stats.decoded;
      decodedBy.push_back(rx.receiver);
      break;
    case LogOutcome::Collided:
      ++m_stats.collided;
      break;
    default:
      ++m_stats.aborted;
      break;
    }
    log({now, LogKind::RxResolve, frame.sender, rx.receiver, frame.cls,
         outcome, frame.id});
  }

  if (!senderRadio.dead && !senderRadio.queue.empty() &&
      !senderRadio.startScheduled)
    scheduleStart(frame.sender, now);

  if (m_onDecoded)
    for (NodeId r : decodedBy)
      if (!m_nodes[r].dead && !m_nodes[r].asleep)
        m_onDecoded(r, frame, now);
}

} // namespace mr2
