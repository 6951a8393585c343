#pragma once

// Test-side reference implementations. They deliberately share no code with
// the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "mr2/medium.hpp"
#include "mr2/topology.hpp"

namespace oracle {

inline bool inRange(const mr2::Position &a, const mr2::Position &b,
                    double range) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy <= range * range;
}

// Plain BFS over a distance matrix computed from positions.
inline bool reachable(const std::vector<mr2::Position> &pos, double range,
                      std::size_t from, std::size_t to) {
  std::vector<bool> seen(pos.size(), false);
  std::deque<std::size_t> q{from};
  seen[from] = true;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop_front();
    if (u == to)
      return true;
    for (std::size_t v = 0; v < pos.size(); ++v)
      if (!seen[v] && v != u && inRange(pos[u], pos[v], range)) {
        seen[v] = true;
        q.push_back(v);
      }
  }
  return false;
}

// Direct evaluation of (sum M)^2 / (N * sum M^2) in long double.
inline double fairness(const std::vector<double> &m) {
  long double s = 0, s2 = 0;
  for (double x : m) {
    s += x;
    s2 += (long double)x * x;
  }
  return double(s * s / ((long double)m.size() * s2));
}

struct CollisionScan {
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  std::size_t aborted = 0;
};

// Rebuilds every frame's airtime from txStart/txEnd records and decides each
// reception from scratch: a reception at r is lost iff some other frame whose
// sender is r or a neighbor of r overlaps it in time.
inline CollisionScan scanCollisions(const mr2::Topology &topo,
                                    const std::vector<mr2::LogRecord> &log) {
  struct Air {
    mr2::NodeId sender = 0;
    double start = -1, end = -1;
  };
  std::map<std::uint64_t, Air> frames;
  for (const auto &r : log) {
    if (r.kind == mr2::LogKind::TxStart)
      frames[r.frameId] = {r.sender, r.time, -1};
    else if (r.kind == mr2::LogKind::TxEnd)
      frames[r.frameId].end = r.time;
  }
  // Frames by start time; any overlapping frame starts within one maximal
  // airtime before the reception ends.
  std::vector<std::pair<double, std::uint64_t>> byStart;
  double longest = 0;
  for (const auto &[id, g] : frames)
    if (g.end >= 0) {
      byStart.push_back({g.start, id});
      longest = std::max(longest, g.end - g.start);
    }
  std::sort(byStart.begin(), byStart.end());

  const double range = topo.radioRange();
  CollisionScan out;
  for (const auto &r : log) {
    if (r.kind != mr2::LogKind::RxResolve)
      continue;
    if (r.outcome == mr2::LogOutcome::Aborted) {
      ++out.aborted;
      continue;
    }
    const Air &f = frames.at(r.frameId);
    bool overlapped = false;
    auto it = std::lower_bound(byStart.begin(), byStart.end(),
                               std::make_pair(f.start - longest - 1.0, std::uint64_t{0}));
    for (; it != byStart.end() && it->first < f.end; ++it) {
      const Air &g = frames.at(it->second);
      if (it->second == r.frameId || !(f.start < g.end))
        continue;
      const bool audible =
          g.sender == r.receiver ||
          inRange(topo.position(g.sender), topo.position(r.receiver), range);
      if (audible) {
        overlapped = true;
        break;
      }
    }
    const bool collided = r.outcome == mr2::LogOutcome::Collided;
    ++out.checked;
    if (collided != overlapped)
      ++out.mismatches;
  }
  return out;
}

} // namespace oracle
