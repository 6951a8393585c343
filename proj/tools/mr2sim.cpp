// Campaign runner: resolves a scenario from a preset, a JSON config and
// command-line overrides, runs it, and writes the CSVs and metadata.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mr2/harness.hpp"

using json = nlohmann::json;

namespace {

std::string readFile(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw mr2::ConfigError("config", "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"MR2 / HC / Single multipath routing campaign runner"};
  std::string configPath, presetName, out = "out", mode;
  std::vector<std::string> schemes;
  std::vector<unsigned> gridSides;
  std::optional<unsigned> seeds, sources, threads;
  std::optional<std::uint64_t> campaignSeed;
  std::optional<double> duration;
  bool eventLog = false, listPresets = false, dryRun = false;

  app.add_option("--config", configPath, "JSON scenario file")
      ->check(CLI::ExistingFile);
  app.add_option("--preset", presetName, "named scenario, see --list-presets");
  app.add_option("--scheme", schemes, "single, hc or mr2 (repeatable)");
  app.add_option("--grid-side", gridSides, "grid side N (repeatable)");
  app.add_option("--mode", mode, "sparse, dense or both");
  app.add_option("--seeds", seeds, "number of replications");
  app.add_option("--campaign-seed", campaignSeed, "root seed");
  app.add_option("--sources", sources, "sources per deployment");
  app.add_option("--duration", duration, "session data period, seconds");
  app.add_option("--threads", threads, "worker threads, 0 = all cores");
  app.add_option("--out", out, "output directory");
  app.add_flag("--emit-event-log", eventLog,
               "write one event log per run under <out>/events");
  app.add_flag("--list-presets", listPresets, "print preset names and exit");
  app.add_flag("--dry-run", dryRun,
               "print the resolved scenario and exit without running");
  CLI11_PARSE(app, argc, argv);

  if (listPresets) {
    for (const auto &name : mr2::presetNames())
      std::cout << name << "\n";
    return 0;
  }

  try {
    // Layering: defaults or preset, then the config file, then flags. The
    // merged document goes through loadScenario so every value is checked
    // in one place.
    mr2::Scenario base =
        presetName.empty() ? mr2::Scenario{} : mr2::preset(presetName);
    json doc = json::parse(mr2::describeScenario(base));
    if (!configPath.empty()) {
      json patch;
      try {
        patch = json::parse(readFile(configPath), nullptr, true, true);
      } catch (const json::parse_error &e) {
        throw mr2::ConfigError("config", e.what());
      }
      if (!patch.is_object())
        throw mr2::ConfigError("config", "expected a JSON object");
      for (const auto &[k, v] : patch.items())
        doc[k] = v;
    }
    if (!schemes.empty())
      doc["schemes"] = schemes;
    if (!gridSides.empty())
      doc["gridSide"] = gridSides;
    if (!mode.empty())
      doc["mode"] = mode == "both" ? json{"sparse", "dense"} : json(mode);
    if (seeds)
      doc["seeds"] = *seeds;
    if (campaignSeed)
      doc["campaignSeed"] = *campaignSeed;
    if (sources)
      doc["sourceCount"] = *sources;
    if (duration)
      doc["sessionDuration"] = *duration;
    if (threads)
      doc["threads"] = *threads;
    if (eventLog)
      doc["emitEventLog"] = true;

    const mr2::Scenario scenario = mr2::loadScenario(doc.dump());
    scenario.sim.validate();
    if (dryRun) {
      std::cout << mr2::describeScenario(scenario) << "\n";
      return 0;
    }

    const std::filesystem::path outDir(out);
    std::optional<std::filesystem::path> logDir;
    if (scenario.emitEventLog)
      logDir = outDir / "events";
    const auto result = mr2::runCampaign(scenario, logDir);
    mr2::writeCampaign(result, outDir);

    std::size_t failed = 0;
    for (const auto &r : result.runs)
      failed += r.status != "ok";
    std::fprintf(stderr, "%zu runs (%zu failed), %zu redrawn deployments -> %s\n",
                 result.runs.size(), failed, result.redraws.size(),
                 outDir.string().c_str());
    return failed ? 3 : 0;
  } catch (const mr2::ConfigError &e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const mr2::InvalidParameter &e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
