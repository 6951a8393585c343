#pragma once

#include <cassert>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mr2/common.hpp"

namespace mr2 {

enum class EventKind : std::uint8_t { TxStart, TxEnd, RxResolve, Timer, AppSend };

struct Event {
  SimTime time = 0.0;
  std::uint64_t seqTieBreak = 0;
  EventKind kind = EventKind::Timer;
  NodeId node = 0;
  /// Frame id for radio events; timer tag otherwise.
  std::uint64_t ref = 0;
  std::uint64_t aux = 0;
};

/// Min-queue on (time, seqTieBreak); the tie-break counter is assigned at
/// scheduling time so equal-time events run in scheduling order.
class EventQueue {
public:
  void schedule(Event event) {
    if (event.time < m_now)
      throw std::logic_error("event scheduled in the past");
    event.seqTieBreak = m_nextSeq++;
    m_heap.push(event);
  }

  void schedule(SimTime time, EventKind kind, NodeId node, std::uint64_t ref = 0,
                std::uint64_t aux = 0) {
    schedule(Event{time, 0, kind, node, ref, aux});
  }

  bool empty() const noexcept { return m_heap.empty(); }
  std::size_t size() const noexcept { return m_heap.size(); }
  SimTime now() const noexcept { return m_now; }
  const Event &peek() const { return m_heap.top(); }

  Event pop() {
    Event event = m_heap.top();
    m_heap.pop();
    assert(event.time >= m_now);
    m_now = event.time;
    return event;
  }

  void advanceTo(SimTime time) {
    if (time > m_now)
      m_now = time;
  }

private:
  struct Later {
    bool operator()(const Event &a, const Event &b) const {
      if (a.time != b.time)
        return a.time > b.time;
      return a.seqTieBreak > b.seqTieBreak;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> m_heap;
  std::uint64_t m_nextSeq = 0;
  SimTime m_now = 0.0;
};

} // namespace mr2
