#include <doctest.h>

#include <random>

#include "mr2/pathcore.hpp"

using namespace mr2;

namespace {

RouteRequest req(NodeId pathId, NodeId lastNode, std::uint32_t metric) {
  RouteRequest r;
  r.pathId = pathId;
  r.lastNode = lastNode;
  r.metric = metric;
  return r;
}

PathTable tableOf(std::initializer_list<PathTableEntry> entries) {
  PathTable t;
  for (const auto &e : entries)
    t.put(e);
  return t;
}

} // namespace

TEST_CASE("request straight from the sink is stamped with the receiver id") {
  PathTable t;
  const auto r = applyRequest(t, req(99, 99, 0), 7, true);
  CHECK(r.updated);
  REQUIRE(r.storedEntry);
  CHECK(*r.storedEntry == PathTableEntry{7, 99, 1, false});
  CHECK(*t.find(7) == PathTableEntry{7, 99, 1, false});
}

TEST_CASE("known paths are replaced only on strict improvement") {
  PathTable t = tableOf({{4, 2, 3, false}});
  auto worse = applyRequest(t, req(4, 5, 4), 9, false);
  CHECK_FALSE(worse.updated);
  CHECK(t.find(4)->metric == 3);

  auto equal = applyRequest(t, req(4, 5, 2), 9, false);
  CHECK_FALSE(equal.updated);
  CHECK(t.find(4)->nextNode == 2);

  PathTable u = tableOf({{4, 2, 5, true}});
  auto better = applyRequest(u, req(4, 6, 2), 9, false);
  CHECK(better.updated);
  CHECK(u.find(4)->metric == 3);
  CHECK(u.find(4)->nextNode == 6);
  CHECK(u.find(4)->inUse);
}

TEST_CASE("a relayed request keeps the stamped path id") {
  PathTable t;
  CHECK(applyRequest(t, req(12, 3, 2), 8, false).updated);
  CHECK(*t.find(12) == PathTableEntry{12, 3, 3, false});
}

TEST_CASE("stored metrics never increase within a round") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pid(0, 4), metric(0, 12);
  PathTable t;
  std::map<NodeId, std::uint32_t> best;
  for (int i = 0; i < 2000; ++i) {
    const NodeId p = NodeId(pid(rng));
    const std::uint32_t m = std::uint32_t(metric(rng));
    const bool expectUpdate = !best.count(p) || m + 1 < best[p];
    const auto r = applyRequest(t, req(p, 100 + p, m), 50, false);
    CHECK(r.updated == expectUpdate);
    if (expectUpdate)
      best[p] = m + 1;
    CHECK(t.find(p)->metric == best[p]);
  }
  CHECK(t.size() == best.size());
}

TEST_CASE("best path selection") {
  CHECK(selectBestPath(tableOf({{1, 0, 3, false}, {2, 0, 2, false}}), false) ==
        NodeId(2));
  CHECK(selectBestPath(tableOf({{1, 0, 2, false}, {2, 0, 2, false}}), false) ==
        NodeId(1));
  CHECK_FALSE(selectBestPath(PathTable{}, false).has_value());
  const PathTable used = tableOf({{1, 0, 1, true}, {5, 0, 4, false}});
  CHECK(selectBestPath(used, true) == NodeId(5));
  CHECK(selectBestPath(used, false) == NodeId(1));
  CHECK_FALSE(selectBestPath(tableOf({{1, 0, 1, true}}), true).has_value());
}

TEST_CASE("tie break agrees with exhaustive comparison") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> n(1, 8), metric(1, 4), id(0, 30);
  for (int trial = 0; trial < 500; ++trial) {
    PathTable t;
    const int count = n(rng);
    for (int k = 0; k < count; ++k) {
      const NodeId p = NodeId(id(rng));
      t.put({p, 0, std::uint32_t(metric(rng)), false});
    }
    const auto es = t.entries();
    NodeId want = es.front().pathId;
    for (const auto &a : es) {
      bool beatsAll = true;
      for (const auto &b : es)
        if (b.metric < a.metric || (b.metric == a.metric && b.pathId < a.pathId))
          beatsAll = false;
      if (beatsAll)
        want = a.pathId;
    }
    CHECK(selectBestPath(t, false) == want);
  }
}

TEST_CASE("markInUse and removePath") {
  PathTable t = tableOf({{1, 0, 2, false}, {2, 0, 3, false}});
  markInUse(t, 1);
  CHECK(t.find(1)->inUse);
  CHECK_FALSE(t.find(2)->inUse);
  const PathTable once = t;
  markInUse(t, 1);
  CHECK(t == once);
  CHECK_THROWS_AS(markInUse(t, 9), NotFound);

  removePath(t, 1);
  CHECK_FALSE(t.contains(1));
  CHECK(t.size() == 1);
  CHECK(selectBestPath(t, false) == NodeId(2));
  PathTable empty;
  removePath(empty, 1);
  CHECK(empty.empty());
}

TEST_CASE("message classes and sizes") {
  MessageSizes sizes;
  DataPacket d;
  d.payloadBits = 1024;
  CHECK(sizes.bitsOf(Message{RouteRequest{}}) == 240);
  CHECK(sizes.bitsOf(Message{BePassive{}}) == 96);
  CHECK(sizes.bitsOf(Message{RouteError{}}) == 96);
  CHECK(sizes.bitsOf(Message{d}) == 1120);
  CHECK((classOf(Message{d}) == MessageClass::Data));
  CHECK((classOf(Message{BePassive{}}) == MessageClass::BePassive));

  RouteRequest r;
  CHECK(r.wellFormed());
  r.isRepair = true;
  CHECK_FALSE(r.wellFormed());
  r.brokenPathId = 4;
  CHECK(r.wellFormed());
  r.seq = 0;
  CHECK_FALSE(r.wellFormed());
}
