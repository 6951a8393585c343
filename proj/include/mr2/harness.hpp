#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mr2/metrics.hpp"
#include "mr2/simulation.hpp"
#include "mr2/topology.hpp"

namespace mr2 {

struct Scenario {
  std::string name = "custom";
  /// Free text copied into metadata.txt.
  std::string description;
  std::vector<unsigned> gridSides{7, 10, 15};
  std::vector<RangeMode> modes{RangeMode::Sparse, RangeMode::Dense};
  std::vector<Scheme> schemes{Scheme::Single, Scheme::HC, Scheme::MR2};
  unsigned sourceCount = 3;
  /// Replication indices; the run seed is derived from each.
  std::vector<unsigned> seeds;
  std::uint64_t campaignSeed = 1;
  double fieldSize = 1000.0;
  /// Protocol, traffic, radio and energy knobs; `scheme` is set per run.
  SimConfig sim;
  bool emitEventLog = false;
  /// Worker threads; 0 picks the hardware concurrency. Never affects output.
  unsigned threads = 0;

  Scenario();
};

/// Parses a JSON document (comments allowed). Missing keys keep their
/// defaults; unknown keys, type mismatches and out-of-range values raise
/// ConfigError naming the key.
Scenario loadScenario(std::string_view text);

/// Every knob of the scenario as a JSON document loadScenario accepts.
std::string describeScenario(const Scenario &scenario);

const std::vector<std::string> &presetNames();
/// Desk-scale scenario for one named experiment. Throws ConfigError("preset")
/// for unknown names.
Scenario preset(std::string_view name);

/// Seed of the deployment for one (gridSide, mode, replication) cell; the
/// scheme does not enter, so every scheme sees the same draw.
std::uint64_t deploymentSeed(std::uint64_t campaignSeed, unsigned gridSide,
                             RangeMode mode, unsigned seedIndex);

struct RedrawRecord {
  unsigned gridSide = 0;
  RangeMode mode = RangeMode::Sparse;
  unsigned seedIndex = 0;
  std::uint64_t requestedSeed = 0;
  std::uint64_t usedSeed = 0;
  std::vector<std::uint64_t> rejected;
};

struct CampaignResult {
  /// Sorted by (scheme, gridSide, mode, seed).
  std::vector<RunResult> runs;
  std::vector<RedrawRecord> redraws;
  std::string resultsCsv;
  std::string throughputCsv;
  std::string pathsCsv;
  std::string metadata;
};

/// Runs every scheme on each (gridSide, mode, seed) deployment. Failed runs
/// become rows with an error status. When eventLogDir is given and the
/// scenario asks for event logs, one log file per run is written there.
CampaignResult runCampaign(const Scenario &scenario,
                           const std::optional<std::filesystem::path>
                               &eventLogDir = std::nullopt);

/// results.csv, throughput.csv, paths.csv and metadata.txt under outDir.
void writeCampaign(const CampaignResult &result,
                   const std::filesystem::path &outDir);

} // namespace mr2
