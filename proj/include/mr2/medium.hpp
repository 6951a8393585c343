#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "mr2/energy.hpp"
#include "mr2/event_queue.hpp"
#include "mr2/pathcore.hpp"
#include "mr2/topology.hpp"

namespace mr2 {

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Frame {
  std::uint64_t id = 0;
  Message message;
  MessageClass cls = MessageClass::Request;
  std::uint32_t bits = 0;
  NodeId sender = 0;
  /// Unset for broadcasts.
  std::optional<NodeId> addressee;
  SimTime start = 0.0;
  SimTime end = 0.0;
};

enum class LogKind : std::uint8_t {
  TxStart,
  TxEnd,
  RxResolve,
  Suppressed,
  QueueDrop,
  Passive,
  Wake,
  Death
};

enum class LogOutcome : std::uint8_t {
  Sent,
  Done,
  Decoded,
  Collided,
  Aborted,
  Suppressed,
  Dropped,
  None
};

struct LogRecord {
  SimTime time = 0.0;
  LogKind kind = LogKind::TxStart;
  NodeId sender = kNoNode;
  NodeId receiver = kNoNode;
  MessageClass cls = MessageClass::Request;
  LogOutcome outcome = LogOutcome::None;
  std::uint64_t frameId = 0;
};

std::string_view toString(LogKind kind);
std::string_view toString(LogOutcome outcome);

/// One `time kind sender receiver msgClass outcome` line per record.
std::string formatEventLog(const std::vector<LogRecord> &log);

struct MediumConfig {
  /// Random delay in [0, jitter) before every transmission.
  double jitter = 0.005;
  std::size_t queueCapacity = 64;
};

struct MediumStats {
  std::array<std::uint64_t, kMessageClassCount> framesSent{};
  std::array<std::uint64_t, kMessageClassCount> queueDrops{};
  std::uint64_t suppressed = 0;
  std::uint64_t decoded = 0;
  std::uint64_t collided = 0;
  std::uint64_t aborted = 0;
};

/// Shared broadcast channel under the protocol interference model.
///
/// Every frame is heard by all awake, alive neighbors of its sender. A
/// reception is decoded iff no other frame audible at the receiver (including
/// the receiver's own transmissions) overlaps it in time; there is no capture.
/// Each node transmits one frame at a time from a FIFO queue, after a uniform
/// random jitter. Transmit energy is charged at full radio range; every
/// audible frame costs the receiver E_rx whether or not it is decoded.
class Medium {
public:
  using DecodeHandler =
      std::function<void(NodeId receiver, const Frame &frame, SimTime now)>;
  using NodeHandler = std::function<void(NodeId node, SimTime now)>;

  Medium(const Topology &topology, const EnergyParams &energy,
         const MessageSizes &sizes, MediumConfig config, EventQueue &queue,
         EnergyLedger &ledger, std::mt19937_64 &rng,
         std::vector<LogRecord> *log = nullptr);

  void onDecoded(DecodeHandler handler) { m_onDecoded = std::move(handler); }
  /// Called after a node is charged, so callers can check energy thresholds.
  void onCharged(NodeHandler handler) { m_onCharged = std::move(handler); }
  void onDeath(NodeHandler handler) { m_onDeath = std::move(handler); }

  /// Queues a frame at `sender`. Broadcast when addressee is unset.
  void send(NodeId sender, Message message, std::optional<NodeId> addressee,
            SimTime now);

  /// Dispatches TxStart / TxEnd events.
  void handle(const Event &event);

  /// Puts a node's radio to sleep: ongoing receptions are aborted and queued
  /// frames dropped. A transmission already on the air completes.
  void sleep(NodeId node, SimTime now);
  void wake(NodeId node, SimTime now);

  /// Accrues energy at `node`; handles death. Returns alive status.
  bool refresh(NodeId node, SimTime now);

  bool asleep(NodeId node) const { return m_nodes.at(node).asleep; }
  bool transmitting(NodeId node) const {
    return m_nodes.at(node).txFrame.has_value();
  }
  std::size_t queued(NodeId node) const { return m_nodes.at(node).queue.size(); }
  const MediumStats &stats() const noexcept { return m_stats; }
  double txEnergy(std::uint32_t bits) const;

private:
  struct Reception {
    std::uint64_t frameId = 0;
    NodeId receiver = 0;
    bool collided = false;
    bool aborted = false;
  };

  struct Pending {
    Message message;
    std::optional<NodeId> addressee;
  };

  struct NodeRadio {
    std::deque<Pending> queue;
    bool startScheduled = false;
    std::optional<std::uint64_t> txFrame;
    std::vector<std::uint64_t> ongoing; // frame ids being received
    bool asleep = false;
    bool dead = false;
    /// Frames already on the air when the radio woke still interfere.
    SimTime deafUntil = -1.0;
  };

  struct OnAir {
    Frame frame;
    std::vector<Reception> receptions;
  };

  void startTransmission(NodeId sender, SimTime now);
  void finishTransmission(std::uint64_t frameId, SimTime now);
  void scheduleStart(NodeId sender, SimTime now);
  void abortReceptions(NodeId node, SimTime now);
  void handleDeath(NodeId node);
  Reception *findReception(std::uint64_t frameId, NodeId receiver);
  void log(const LogRecord &record) {
    if (m_log)
      m_log->push_back(record);
  }

  const Topology &m_topology;
  EnergyParams m_energy;
  MessageSizes m_sizes;
  MediumConfig m_config;
  EventQueue &m_queue;
  EnergyLedger &m_ledger;
  std::mt19937_64 &m_rng;
  std::vector<LogRecord> *m_log;

  std::vector<NodeRadio> m_nodes;
  std::unordered_map<std::uint64_t, OnAir> m_onAir;
  std::uint64_t m_nextFrameId = 1;
  MediumStats m_stats;

  DecodeHandler m_onDecoded;
  NodeHandler m_onCharged;
  NodeHandler m_onDeath;
};

} // namespace mr2
