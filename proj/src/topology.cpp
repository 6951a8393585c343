#include "mr2/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>

namespace mr2 {

std::string toString(RangeMode mode) {
  return mode == RangeMode::Sparse ? "sparse" : "dense";
}

RangeMode parseRangeMode(std::string_view text) {
  if (text == "sparse")
    return RangeMode::Sparse;
  if (text == "dense")
    return RangeMode::Dense;
  throw InvalidParameter("unknown mode '" + std::string(text) + "'");
}

Topology::Topology(double fieldSize, unsigned gridSide,
                   std::vector<Position> positions, NodeId sinkId,
                   double radioRange)
    : m_fieldSize(fieldSize), m_gridSide(gridSide),
      m_positions(std::move(positions)), m_sinkId(sinkId),
      m_radioRange(radioRange) {
  if (!(fieldSize > 0.0))
    throw InvalidParameter("fieldSize must be positive");
  if (!(radioRange > 0.0))
    throw InvalidParameter("radioRange must be positive");
  if (m_positions.empty())
    throw InvalidParameter("topology needs at least one node");
  if (sinkId >= m_positions.size())
    throw InvalidParameter("sinkId out of range");
  for (const auto &p : m_positions)
    if (p.x < 0.0 || p.y < 0.0 || p.x > fieldSize || p.y > fieldSize)
      throw InvalidParameter("node position outside the field");

  const std::size_t n = m_positions.size();
  m_adjacency.assign(n, {});
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (distance(a, b) <= m_radioRange) {
        m_adjacency[a].push_back(b);
        m_adjacency[b].push_back(a);
      }
  for (auto &list : m_adjacency)
    std::sort(list.begin(), list.end());
}

const Position &Topology::position(NodeId id) const {
  if (!contains(id))
    throw NotFound("unknown node " + std::to_string(id));
  return m_positions[id];
}

const std::vector<NodeId> &Topology::neighbors(NodeId id) const {
  if (!contains(id))
    throw NotFound("unknown node " + std::to_string(id));
  return m_adjacency[id];
}

bool Topology::areNeighbors(NodeId a, NodeId b) const {
  const auto &list = neighbors(a);
  return std::binary_search(list.begin(), list.end(), b);
}

double Topology::distance(NodeId a, NodeId b) const {
  const Position &pa = position(a);
  const Position &pb = position(b);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

std::string Topology::serialize() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%.17g %u %u %.17g\n", m_fieldSize,
                m_gridSide, m_sinkId, m_radioRange);
  out += line;
  for (NodeId id = 0; id < m_positions.size(); ++id) {
    std::snprintf(line, sizeof line, "%u %.17g %.17g\n", id, m_positions[id].x,
                  m_positions[id].y);
    out += line;
  }
  return out;
}

Topology Topology::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  double fieldSize = 0.0, range = 0.0;
  unsigned gridSide = 0;
  NodeId sink = 0;
  if (!(in >> fieldSize >> gridSide >> sink >> range))
    throw InvalidParameter("malformed topology header");
  std::vector<Position> positions;
  NodeId id = 0;
  Position p;
  while (in >> id >> p.x >> p.y) {
    if (id != positions.size())
      throw InvalidParameter("topology ids must be dense and ordered");
    positions.push_back(p);
  }
  if (!in.eof())
    throw InvalidParameter("malformed topology node line");
  return Topology(fieldSize, gridSide, std::move(positions), sink, range);
}

double radioRange(RangeMode mode, unsigned gridSide, double fieldSize) {
  if (gridSide == 0)
    throw InvalidParameter("gridSide must be at least 1");
  const double cells = mode == RangeMode::Sparse ? 1.5 : 2.0;
  return cells * fieldSize / gridSide;
}

Topology generateRandomizedGrid(unsigned gridSide, double fieldSize,
                                std::uint64_t seed, RangeMode mode) {
  if (gridSide == 0)
    throw InvalidParameter("gridSide must be at least 1");
  if (!(fieldSize > 0.0))
    throw InvalidParameter("fieldSize must be positive");

  std::mt19937_64 rng(seed);
  const double cell = fieldSize / gridSide;
  std::vector<Position> positions;
  positions.reserve(std::size_t(gridSide) * gridSide + 1);
  for (unsigned j = 0; j < gridSide; ++j)
    for (unsigned i = 0; i < gridSide; ++i) {
      std::uniform_real_distribution<double> ux(i * cell, (i + 1) * cell);
      std::uniform_real_distribution<double> uy(j * cell, (j + 1) * cell);
      const double x = ux(rng);
      const double y = uy(rng);
      positions.push_back({x, y});
    }
  const NodeId sink = NodeId(positions.size());
  positions.push_back({fieldSize, fieldSize});
  return Topology(fieldSize, gridSide, std::move(positions), sink,
                  radioRange(mode, gridSide, fieldSize));
}

double meanDegree(const Topology &topology) {
  double total = 0.0;
  for (NodeId id = 0; id < topology.nodeCount(); ++id)
    total += double(topology.neighbors(id).size());
  return total / double(topology.nodeCount());
}

bool isSinkReachable(const Topology &topology, NodeId source) {
  const NodeId sink = topology.sinkId();
  if (!topology.contains(source))
    throw NotFound("unknown node " + std::to_string(source));
  if (source == sink)
    return true;
  std::vector<bool> seen(topology.nodeCount(), false);
  std::deque<NodeId> frontier{source};
  seen[source] = true;
  while (!frontier.empty()) {
    const NodeId at = frontier.front();
    frontier.pop_front();
    for (NodeId next : topology.neighbors(at)) {
      if (next == sink)
        return true;
      if (!seen[next]) {
        seen[next] = true;
        frontier.push_back(next);
      }
    }
  }
  return false;
}

std::vector<NodeId> drawSources(const Topology &topology, unsigned count,
                                std::uint64_t seed) {
  std::vector<NodeId> pool;
  for (NodeId id = 0; id < topology.nodeCount(); ++id)
    if (id != topology.sinkId())
      pool.push_back(id);
  if (count > pool.size())
    throw InvalidParameter("more sources requested than sensor nodes");
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates; keeps the draw order as the session order.
  for (unsigned k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

Deployment drawDeployment(unsigned gridSide, double fieldSize, RangeMode mode,
                          unsigned sourceCount, std::uint64_t seed,
                          unsigned maxAttempts) {
  std::vector<std::uint64_t> rejected;
  std::uint64_t current = seed;
  for (unsigned attempt = 0; attempt < maxAttempts; ++attempt) {
    Topology topology =
        generateRandomizedGrid(gridSide, fieldSize, current, mode);
    auto sources = drawSources(topology, sourceCount, combineSeed(current, 1));
    const bool connected =
        std::all_of(sources.begin(), sources.end(), [&](NodeId s) {
          return isSinkReachable(topology, s);
        });
    if (connected)
      return Deployment{std::move(topology), std::move(sources), current,
                        std::move(rejected)};
    rejected.push_back(current);
    current = combineSeed(seed, attempt + 1);
  }
  throw InvalidParameter("no connected deployment found after " +
                         std::to_string(maxAttempts) + " draws");
}

std::uint64_t mixSeed(std::uint64_t value) {
  value += 0x9E3779B97F4A7C15ULL;
  value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9ULL;
  value = (value ^ (value >> 27)) * 0x94D049BB133111EBULL;
  return value ^ (value >> 31);
}

std::uint64_t combineSeed(std::uint64_t a, std::uint64_t b) {
  return mixSeed(mixSeed(a) ^ (b + 0x632BE59BD9B4E019ULL));
}

} // namespace mr2
