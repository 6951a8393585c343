#include "mr2/disjointness.hpp"

#include <map>
#include <tuple>

namespace mr2 {

DisjointnessReport checkRadioDisjointness(const Topology &topology,
                                          const RunTrace &trace) {
  std::map<std::pair<NodeId, SessionId>, SimTime> emitted;
  for (const auto &e : trace.bePassiveSent)
    emitted.try_emplace({e.sender, e.session}, e.time);

  std::map<std::tuple<NodeId, NodeId, SessionId>, SimTime> honored;
  for (const auto &d : trace.bePassiveDecoded)
    if (d.honored)
      honored.try_emplace({d.receiver, d.sender, d.session}, d.time);

  std::map<SessionId, SimTime> resetAt;
  for (const auto &s : trace.sessions)
    resetAt[s.session] = s.resetAt;

  DisjointnessReport report;
  for (const PathTrace &earlier : trace.paths) {
    const SimTime reset = resetAt.at(earlier.session);
    for (NodeId r : earlier.relays) {
      auto em = emitted.find({r, earlier.session});
      if (em == emitted.end())
        continue;
      for (const PathTrace &later : trace.paths) {
        if (&later == &earlier || later.discoveredAt <= em->second ||
            later.discoveredAt >= reset)
          continue;
        for (NodeId v : later.relays) {
          if (v != r && !topology.areNeighbors(v, r))
            continue;
          ++report.pairsChecked;
          const Adjacency adj{earlier.session, earlier.pathId, r,
                              later.session,   later.pathId,   v};
          auto h = honored.find({v, r, earlier.session});
          if (v == r || (h != honored.end() && h->second < later.discoveredAt))
            report.violations.push_back(adj);
          else
            report.exposures.push_back(adj);
        }
      }
    }
  }
  return report;
}

} // namespace mr2
