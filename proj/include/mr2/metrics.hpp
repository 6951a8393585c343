#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mr2/nodeengine.hpp"
#include "mr2/simulation.hpp"
#include "mr2/topology.hpp"

namespace mr2 {

struct PathResult {
  SessionId session = 0;
  NodeId pathId = 0;
  std::uint32_t hops = 0;
  DiscoveryKind kind = DiscoveryKind::Initial;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
};

struct FlowResult {
  SessionId session = 0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint32_t builtPaths = 0;
};

/// Per-run summary; everything the CSV and the aggregate checks need.
struct RunResult {
  Scheme scheme = Scheme::MR2;
  unsigned gridSide = 0;
  RangeMode mode = RangeMode::Sparse;
  unsigned seedIndex = 0;
  std::uint64_t deploymentSeed = 0;
  std::vector<NodeId> sources;
  std::string status = "ok";

  std::vector<FlowResult> flows;
  std::vector<PathResult> paths;
  std::vector<double> delays;
  std::vector<SimTime> deliveryTimes;
  std::uint64_t duplicates = 0;
  std::uint32_t discoveries = 0;
  std::array<double, kMessageClassCount> classEnergy{};
  double totalEnergy = 0.0;
  double conservationError = 0.0;
  std::vector<std::uint64_t> processed;
  std::uint32_t deaths = 0;
  std::size_t disjointViolations = 0;
  std::size_t disjointExposures = 0;
  SimTime endTime = 0.0;
  /// Filled by the campaign from the matched Single run.
  std::optional<double> successRatio;

  std::uint64_t sent() const;
  std::uint64_t delivered() const;
  /// Mean paths selected per session.
  double builtPaths() const;
  /// Mean advertised hop count over built paths; 0 without paths.
  double meanHops() const;
  /// Nodes with at least one processed data message.
  std::size_t involvedNodes() const;
};

struct RunMeta {
  unsigned gridSide = 0;
  RangeMode mode = RangeMode::Sparse;
  unsigned seedIndex = 0;
  std::uint64_t deploymentSeed = 0;
};

/// Summarizes a trace; the disjointness check runs for MR2 traces.
RunResult summarize(const RunTrace &trace, const Topology &topology,
                    const std::vector<NodeId> &sources, const RunMeta &meta);

/// (sum M)^2 / (N_a * sum M^2) over the given counts. Throws UndefinedMetric
/// on an empty or all-zero list, InvalidParameter on negative entries.
double fairnessIndex(std::span<const double> counts);
/// Over the involved nodes (M_i >= 1) of a run.
double fairnessIndex(const RunResult &run);

double successRatioVsBaseline(double delivered, double deliveredBaseline);
double pathLengthRatio(double meanHopsScheme, double meanHopsSingle);

struct InvolvedStats {
  std::size_t countA = 0;
  std::size_t countB = 0;
  double ratio = 0.0;
};
/// ratio = countA / countB; throws UndefinedMetric when countB is 0.
InvolvedStats involvedNodeStats(const RunResult &a, const RunResult &b);

double meanDelay(std::span<const double> samples);

struct ThroughputBucket {
  SimTime start = 0.0;
  std::uint64_t delivered = 0;
};
/// Deliveries counted per bucket [k*bucket, (k+1)*bucket), from 0 up to the
/// bucket holding `end` (or the last delivery when end is unset).
std::vector<ThroughputBucket>
throughputSeries(std::span<const SimTime> deliveries, double bucket,
                 std::optional<SimTime> end = std::nullopt);

double builtPathsMean(std::span<const RunResult> runs);

/// Share of the run's delivered packets carried by each (session, pathId).
std::map<std::pair<SessionId, NodeId>, double>
perPathSuccessShare(const RunResult &run);

/// Which message classes count as routing overhead.
struct OverheadClasses {
  bool request = true;
  bool bePassive = true;
  bool routeError = true;
};

double overheadEnergy(const RunResult &run, bool perDelivered,
                      OverheadClasses classes = {});
/// Total consumed energy (radio plus idle/sleep) per delivered packet.
double energyPerDeliveredPacket(const RunResult &run);

/// Header line of the results CSV (no trailing newline).
std::string csvHeader();
/// One CSV row (no trailing newline); floats as %.9g.
std::string csvRow(const RunResult &run);
/// %.9g; "nan"/"inf" spelled out.
std::string formatReal(double value);

} // namespace mr2
