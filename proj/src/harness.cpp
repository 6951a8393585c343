#include "mr2/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace mr2 {

using json = nlohmann::json;

namespace {

double asNumber(const std::string &key, const json &v) {
  if (!v.is_number())
    throw ConfigError(key, "expected a number");
  return v.get<double>();
}

std::uint64_t asUnsigned(const std::string &key, const json &v) {
  if (v.is_number_unsigned())
    return v.get<std::uint64_t>();
  if (v.is_number_integer())
    throw ConfigError(key, "must not be negative");
  throw ConfigError(key, "expected a non-negative integer");
}

unsigned asUnsigned32(const std::string &key, const json &v) {
  const std::uint64_t x = asUnsigned(key, v);
  if (x > 0xffffffffu)
    throw ConfigError(key, "value too large");
  return unsigned(x);
}

bool asBool(const std::string &key, const json &v) {
  if (!v.is_boolean())
    throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string asString(const std::string &key, const json &v) {
  if (!v.is_string())
    throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

double positive(const std::string &key, const json &v) {
  const double x = asNumber(key, v);
  if (!(x > 0.0) || !std::isfinite(x))
    throw ConfigError(key, "must be positive");
  return x;
}

double nonNegative(const std::string &key, const json &v) {
  const double x = asNumber(key, v);
  if (!(x >= 0.0) || !std::isfinite(x))
    throw ConfigError(key, "must not be negative");
  return x;
}

unsigned positiveCount(const std::string &key, const json &v) {
  const unsigned x = asUnsigned32(key, v);
  if (x == 0)
    throw ConfigError(key, "must be at least 1");
  return x;
}

template <class T, class F>
std::vector<T> listOf(const std::string &key, const json &v, F item) {
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty())
      throw ConfigError(key, "list must not be empty");
    for (const auto &x : v)
      out.push_back(item(x));
  } else {
    out.push_back(item(v));
  }
  return out;
}

template <class T> void dedupSorted(std::vector<T> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Keeps first occurrences in the order given.
template <class T> void dedupStable(std::vector<T> &v) {
  std::vector<T> out;
  for (const T &x : v)
    if (std::find(out.begin(), out.end(), x) == out.end())
      out.push_back(x);
  v = std::move(out);
}

using Setter = std::function<void(Scenario &, const json &)>;

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    // Campaign shape.
    t["name"] = [](Scenario &s, const json &v) { s.name = asString("name", v); };
    t["description"] = [](Scenario &s, const json &v) {
      s.description = asString("description", v);
    };
    t["gridSide"] = [](Scenario &s, const json &v) {
      s.gridSides = listOf<unsigned>("gridSide", v, [](const json &x) {
        const unsigned n = asUnsigned32("gridSide", x);
        if (n < 2 || n > 200)
          throw ConfigError("gridSide", "must lie in [2, 200]");
        return n;
      });
      dedupSorted(s.gridSides);
    };
    t["mode"] = [](Scenario &s, const json &v) {
      s.modes = listOf<RangeMode>("mode", v, [](const json &x) {
        try {
          return parseRangeMode(asString("mode", x));
        } catch (const InvalidParameter &e) {
          throw ConfigError("mode", e.what());
        }
      });
      dedupStable(s.modes);
    };
    t["schemes"] = [](Scenario &s, const json &v) {
      s.schemes = listOf<Scheme>("schemes", v, [](const json &x) {
        try {
          return parseScheme(asString("schemes", x));
        } catch (const InvalidParameter &e) {
          throw ConfigError("schemes", e.what());
        }
      });
      dedupStable(s.schemes);
    };
    t["sourceCount"] = [](Scenario &s, const json &v) {
      s.sourceCount = positiveCount("sourceCount", v);
    };
    t["seeds"] = [](Scenario &s, const json &v) {
      if (v.is_array()) {
        s.seeds = listOf<unsigned>(
            "seeds", v, [](const json &x) { return asUnsigned32("seeds", x); });
        dedupSorted(s.seeds);
        return;
      }
      const unsigned n = positiveCount("seeds", v);
      s.seeds.resize(n);
      for (unsigned i = 0; i < n; ++i)
        s.seeds[i] = i;
    };
    t["campaignSeed"] = [](Scenario &s, const json &v) {
      s.campaignSeed = asUnsigned("campaignSeed", v);
    };
    t["fieldSize"] = [](Scenario &s, const json &v) {
      s.fieldSize = positive("fieldSize", v);
    };
    t["emitEventLog"] = [](Scenario &s, const json &v) {
      s.emitEventLog = asBool("emitEventLog", v);
    };
    t["threads"] = [](Scenario &s, const json &v) {
      s.threads = asUnsigned32("threads", v);
    };

    // Traffic.
    t["sessionDuration"] = [](Scenario &s, const json &v) {
      s.sim.traffic.sessionDuration = positive("sessionDuration", v);
    };
    t["packetRate"] = [](Scenario &s, const json &v) {
      s.sim.traffic.packetRate = positive("packetRate", v);
    };
    t["payloadBits"] = [](Scenario &s, const json &v) {
      s.sim.traffic.payloadBits = positiveCount("payloadBits", v);
    };
    t["strategy"] = [](Scenario &s, const json &v) {
      try {
        s.sim.traffic.strategy = parseStrategy(asString("strategy", v));
      } catch (const InvalidParameter &e) {
        throw ConfigError("strategy", e.what());
      }
    };
    t["sessionStagger"] = [](Scenario &s, const json &v) {
      if (v.is_null())
        s.sim.traffic.sessionStagger.reset();
      else
        s.sim.traffic.sessionStagger = nonNegative("sessionStagger", v);
    };
    t["drainTime"] = [](Scenario &s, const json &v) {
      s.sim.traffic.drainTime = nonNegative("drainTime", v);
    };
    t["throughputBucket"] = [](Scenario &s, const json &v) {
      s.sim.traffic.throughputBucket = positive("throughputBucket", v);
    };

    // Protocol.
    t["collectTimeout"] = [](Scenario &s, const json &v) {
      s.sim.protocol.collectTimeout = positive("collectTimeout", v);
    };
    t["window"] = [](Scenario &s, const json &v) {
      s.sim.protocol.window = positiveCount("window", v);
    };
    t["theta"] = [](Scenario &s, const json &v) {
      const double x = asNumber("theta", v);
      if (!(x > 0.0 && x <= 1.0))
        throw ConfigError("theta", "must lie in (0, 1]");
      s.sim.protocol.theta = x;
    };
    t["gamma"] = [](Scenario &s, const json &v) {
      s.sim.protocol.gamma = positive("gamma", v);
    };
    t["maxPathsMr2"] = [](Scenario &s, const json &v) {
      s.sim.protocol.maxPathsMr2 = asUnsigned32("maxPathsMr2", v);
    };
    t["maxPathsHc"] = [](Scenario &s, const json &v) {
      s.sim.protocol.maxPathsHc = asUnsigned32("maxPathsHc", v);
    };
    t["rerrThresholdFraction"] = [](Scenario &s, const json &v) {
      const double x = asNumber("rerrThresholdFraction", v);
      if (!(x >= 0.0 && x < 1.0))
        throw ConfigError("rerrThresholdFraction", "must lie in [0, 1)");
      s.sim.protocol.rerrThresholdFraction = x;
    };
    t["brokenFactor"] = [](Scenario &s, const json &v) {
      s.sim.protocol.brokenFactor = positive("brokenFactor", v);
    };
    t["reorderSlack"] = [](Scenario &s, const json &v) {
      s.sim.protocol.reorderSlack = asUnsigned32("reorderSlack", v);
    };
    t["retryDelay"] = [](Scenario &s, const json &v) {
      s.sim.protocol.retryDelay = positive("retryDelay", v);
    };
    t["maxRetries"] = [](Scenario &s, const json &v) {
      s.sim.protocol.maxRetries = asUnsigned32("maxRetries", v);
    };

    // Energy.
    t["eElec"] = [](Scenario &s, const json &v) {
      s.sim.energy.eElec = positive("eElec", v);
    };
    t["epsAmp"] = [](Scenario &s, const json &v) {
      s.sim.energy.epsAmp = positive("epsAmp", v);
    };
    t["bitrate"] = [](Scenario &s, const json &v) {
      s.sim.energy.bitrate = positive("bitrate", v);
    };
    t["initialEnergy"] = [](Scenario &s, const json &v) {
      s.sim.energy.initialEnergy = positive("initialEnergy", v);
    };
    t["sleepFactor"] = [](Scenario &s, const json &v) {
      s.sim.energy.sleepFactor = positive("sleepFactor", v);
    };
    t["unlimitedSink"] = [](Scenario &s, const json &v) {
      s.sim.unlimitedSink = asBool("unlimitedSink", v);
    };

    // Message sizes and medium.
    t["requestBits"] = [](Scenario &s, const json &v) {
      s.sim.sizes.request = positiveCount("requestBits", v);
    };
    t["bePassiveBits"] = [](Scenario &s, const json &v) {
      s.sim.sizes.bePassive = positiveCount("bePassiveBits", v);
    };
    t["routeErrorBits"] = [](Scenario &s, const json &v) {
      s.sim.sizes.routeError = positiveCount("routeErrorBits", v);
    };
    t["dataHeaderBits"] = [](Scenario &s, const json &v) {
      s.sim.sizes.dataHeader = positiveCount("dataHeaderBits", v);
    };
    t["jitter"] = [](Scenario &s, const json &v) {
      s.sim.medium.jitter = nonNegative("jitter", v);
    };
    t["queueCapacity"] = [](Scenario &s, const json &v) {
      s.sim.medium.queueCapacity = positiveCount("queueCapacity", v);
    };
    return t;
  }();
  return table;
}

} // namespace

Scenario::Scenario() {
  seeds.resize(20);
  for (unsigned i = 0; i < 20; ++i)
    seeds[i] = i;
}

Scenario loadScenario(std::string_view text) {
  Scenario s;
  json doc;
  std::string trimmed(text);
  if (trimmed.find_first_not_of(" \t\r\n") == std::string::npos)
    return s;
  try {
    doc = json::parse(trimmed, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error &e) {
    throw ConfigError("document", e.what());
  }
  if (!doc.is_object())
    throw ConfigError("document", "expected a JSON object at top level");
  const auto &table = setters();
  for (const auto &[key, value] : doc.items()) {
    auto it = table.find(key);
    if (it == table.end())
      throw ConfigError(key, "unknown key");
    it->second(s, value);
  }
  for (unsigned n : s.gridSides)
    if (s.sourceCount > n * n)
      throw ConfigError("sourceCount", "more sources than sensor nodes");
  return s;
}

std::string describeScenario(const Scenario &s) {
  json j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["gridSide"] = s.gridSides;
  json modes = json::array();
  for (RangeMode m : s.modes)
    modes.push_back(toString(m));
  j["mode"] = modes;
  json schemes = json::array();
  for (Scheme x : s.schemes)
    schemes.push_back(std::string(toString(x)));
  j["schemes"] = schemes;
  j["sourceCount"] = s.sourceCount;
  j["seeds"] = s.seeds;
  j["campaignSeed"] = s.campaignSeed;
  j["fieldSize"] = s.fieldSize;
  j["emitEventLog"] = s.emitEventLog;

  const TrafficConfig &t = s.sim.traffic;
  j["sessionDuration"] = t.sessionDuration;
  j["packetRate"] = t.packetRate;
  j["payloadBits"] = t.payloadBits;
  j["strategy"] = std::string(toString(t.strategy));
  j["sessionStagger"] =
      t.sessionStagger ? json(*t.sessionStagger) : json(nullptr);
  j["drainTime"] = t.drainTime;
  j["throughputBucket"] = t.throughputBucket;

  const ProtocolConfig &p = s.sim.protocol;
  j["collectTimeout"] = p.collectTimeout;
  j["window"] = p.window;
  j["theta"] = p.theta;
  j["gamma"] = p.gamma;
  j["maxPathsMr2"] = p.maxPathsMr2;
  j["maxPathsHc"] = p.maxPathsHc;
  j["rerrThresholdFraction"] = p.rerrThresholdFraction;
  j["brokenFactor"] = p.brokenFactor;
  j["reorderSlack"] = p.reorderSlack;
  j["retryDelay"] = p.retryDelay;
  j["maxRetries"] = p.maxRetries;

  const EnergyParams &e = s.sim.energy;
  j["eElec"] = e.eElec;
  j["epsAmp"] = e.epsAmp;
  j["bitrate"] = e.bitrate;
  j["initialEnergy"] = e.initialEnergy;
  j["sleepFactor"] = e.sleepFactor;
  j["unlimitedSink"] = s.sim.unlimitedSink;

  j["requestBits"] = s.sim.sizes.request;
  j["bePassiveBits"] = s.sim.sizes.bePassive;
  j["routeErrorBits"] = s.sim.sizes.routeError;
  j["dataHeaderBits"] = s.sim.sizes.dataHeader;
  j["jitter"] = s.sim.medium.jitter;
  j["queueCapacity"] = s.sim.medium.queueCapacity;
  return j.dump(2);
}

namespace {

// Shared by every preset: a congested single-path load (about 40 kbit/s of
// payload, a low-rate video stream) and batteries large enough that short
// sessions end before any node is depleted.
Scenario deskScale(std::string name, std::string description) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.sim.traffic.packetRate = 40.0;
  s.sim.energy.initialEnergy = 50.0;
  return s;
}

struct PresetEntry {
  const char *name;
  const char *description;
};

constexpr PresetEntry kPresets[] = {
    {"paths-ratio", "mean hop count of built paths relative to Single"},
    {"built-paths", "mean number of paths built per session"},
    {"success", "delivered packets relative to Single"},
    {"throughput", "delivered packets per second over time (throughput.csv)"},
    {"per-path-success", "share of delivered packets per built path "
                         "(paths.csv)"},
    {"delay", "mean end-to-end delay"},
    {"overhead", "control-message energy"},
    {"overhead-per-msg", "control-message energy per delivered packet"},
    {"energy-per-msg-short",
     "total consumed energy per delivered packet, 15 s sessions"},
    {"energy-per-msg-long",
     "total consumed energy per delivered packet, 300 s sessions"},
    {"fairness", "load fairness index over involved nodes"},
    {"involved-nodes", "number of nodes processing data"},
};

} // namespace

const std::vector<std::string> &presetNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto &p : kPresets)
      v.emplace_back(p.name);
    return v;
  }();
  return names;
}

Scenario preset(std::string_view name) {
  for (const auto &p : kPresets) {
    if (name != p.name)
      continue;
    Scenario s = deskScale(p.name, p.description);
    if (name == "energy-per-msg-long")
      s.sim.traffic.sessionDuration = 300.0;
    return s;
  }
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

std::uint64_t deploymentSeed(std::uint64_t campaignSeed, unsigned gridSide,
                             RangeMode mode, unsigned seedIndex) {
  std::uint64_t h = combineSeed(campaignSeed, gridSide);
  h = combineSeed(h, mode == RangeMode::Sparse ? 1 : 2);
  return combineSeed(h, seedIndex);
}

namespace {

struct Cell {
  unsigned gridSide;
  RangeMode mode;
  unsigned seedIndex;
};

struct CellOutput {
  std::vector<RunResult> runs;
  std::optional<RedrawRecord> redraw;
};

std::string logName(Scheme scheme, const Cell &c) {
  return std::string(toString(scheme)) + "_g" + std::to_string(c.gridSide) +
         "_" + toString(c.mode) + "_s" + std::to_string(c.seedIndex) + ".log";
}

RunResult failedRun(Scheme scheme, const Cell &c, std::uint64_t seed,
                    const std::string &why) {
  RunResult r;
  r.scheme = scheme;
  r.gridSide = c.gridSide;
  r.mode = c.mode;
  r.seedIndex = c.seedIndex;
  r.deploymentSeed = seed;
  r.status = "error: " + why;
  return r;
}

CellOutput runCell(const Scenario &sc, const Cell &c,
                   const std::optional<std::filesystem::path> &logDir) {
  CellOutput out;
  const std::uint64_t seed =
      deploymentSeed(sc.campaignSeed, c.gridSide, c.mode, c.seedIndex);
  std::optional<Deployment> dep;
  try {
    dep = drawDeployment(c.gridSide, sc.fieldSize, c.mode, sc.sourceCount,
                         seed);
  } catch (const std::exception &e) {
    for (Scheme scheme : sc.schemes)
      out.runs.push_back(failedRun(scheme, c, seed, e.what()));
    return out;
  }
  if (!dep->rejectedSeeds.empty())
    out.redraw = RedrawRecord{c.gridSide,     c.mode,
                              c.seedIndex,    seed,
                              dep->seedUsed,  dep->rejectedSeeds};

  // Common random numbers: every scheme gets the same medium stream.
  const std::uint64_t simSeed = combineSeed(dep->seedUsed, 0x5eedu);
  const RunMeta meta{c.gridSide, c.mode, c.seedIndex, dep->seedUsed};
  for (Scheme scheme : sc.schemes) {
    SimConfig cfg = sc.sim;
    cfg.scheme = scheme;
    cfg.recordEventLog = sc.emitEventLog && logDir.has_value();
    try {
      RunTrace trace = simulate(dep->topology, dep->sources, cfg, simSeed);
      if (cfg.recordEventLog) {
        std::ofstream f(*logDir / logName(scheme, c), std::ios::binary);
        f << formatEventLog(trace.eventLog);
      }
      out.runs.push_back(summarize(trace, dep->topology, dep->sources, meta));
    } catch (const std::exception &e) {
      out.runs.push_back(failedRun(scheme, c, dep->seedUsed, e.what()));
    }
  }

  const RunResult *single = nullptr;
  for (const auto &r : out.runs)
    if (r.scheme == Scheme::Single && r.status == "ok")
      single = &r;
  if (single && single->delivered() > 0) {
    const double base = double(single->delivered());
    for (auto &r : out.runs)
      if (r.status == "ok")
        r.successRatio = successRatioVsBaseline(double(r.delivered()), base);
  }
  return out;
}

bool rowLess(const RunResult &a, const RunResult &b) {
  const auto key = [](const RunResult &r) {
    return std::make_tuple(std::string(toString(r.scheme)), r.gridSide,
                           toString(r.mode), r.seedIndex);
  };
  return key(a) < key(b);
}

std::string rowPrefix(const RunResult &r) {
  return std::string(toString(r.scheme)) + "," + std::to_string(r.gridSide) +
         "," + toString(r.mode) + "," + std::to_string(r.seedIndex);
}

} // namespace

CampaignResult runCampaign(const Scenario &sc,
                           const std::optional<std::filesystem::path> &logDir) {
  if (sc.gridSides.empty() || sc.modes.empty() || sc.schemes.empty() ||
      sc.seeds.empty())
    throw ConfigError("document", "campaign has no runs");
  if (sc.emitEventLog && logDir)
    std::filesystem::create_directories(*logDir);

  std::vector<Cell> cells;
  for (unsigned g : sc.gridSides)
    for (RangeMode m : sc.modes)
      for (unsigned k : sc.seeds)
        cells.push_back({g, m, k});

  std::vector<CellOutput> outputs(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++)
      outputs[i] = runCell(sc, cells[i], logDir);
  };
  unsigned threads = sc.threads ? sc.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }

  CampaignResult result;
  for (auto &o : outputs) {
    for (auto &r : o.runs)
      result.runs.push_back(std::move(r));
    if (o.redraw)
      result.redraws.push_back(std::move(*o.redraw));
  }
  std::stable_sort(result.runs.begin(), result.runs.end(), rowLess);

  std::string &csv = result.resultsCsv;
  csv = csvHeader() + "\n";
  for (const auto &r : result.runs)
    csv += csvRow(r) + "\n";

  std::string &tp = result.throughputCsv;
  tp = "scheme,gridSide,mode,seed,time_s,delivered\n";
  std::string &pc = result.pathsCsv;
  pc = "scheme,gridSide,mode,seed,session,pathId,kind,hops,sent,delivered,"
       "share\n";
  for (const auto &r : result.runs) {
    if (r.status != "ok")
      continue;
    const std::string prefix = rowPrefix(r);
    for (const auto &b : throughputSeries(r.deliveryTimes,
                                          sc.sim.traffic.throughputBucket,
                                          r.endTime))
      tp += prefix + "," + formatReal(b.start) + "," +
            std::to_string(b.delivered) + "\n";
    const std::uint64_t total = r.delivered();
    for (const auto &p : r.paths) {
      pc += prefix + "," + std::to_string(p.session) + "," +
            std::to_string(p.pathId) + "," + std::string(toString(p.kind)) +
            "," + std::to_string(p.hops) + "," + std::to_string(p.sent) + "," +
            std::to_string(p.delivered) + "," +
            formatReal(total ? double(p.delivered) / double(total)
                             : std::nan("")) +
            "\n";
    }
  }

  std::size_t failed = 0;
  for (const auto &r : result.runs)
    failed += r.status != "ok";
  std::string &md = result.metadata;
  md = "scenario: " + sc.name + "\n";
  if (!sc.description.empty())
    md += "description: " + sc.description + "\n";
  md += "runs: " + std::to_string(result.runs.size()) +
        "\nfailed runs: " + std::to_string(failed) +
        "\ndeployments: " + std::to_string(cells.size()) +
        "\nredrawn deployments: " + std::to_string(result.redraws.size()) +
        "\n\nresolved configuration:\n" + describeScenario(sc) + "\n";
  md += "\nredraws (gridSide mode seed requested used rejected...):\n";
  std::sort(result.redraws.begin(), result.redraws.end(),
            [](const RedrawRecord &a, const RedrawRecord &b) {
              return std::make_tuple(a.gridSide, toString(a.mode), a.seedIndex) <
                     std::make_tuple(b.gridSide, toString(b.mode), b.seedIndex);
            });
  for (const auto &rd : result.redraws) {
    md += std::to_string(rd.gridSide) + " " + toString(rd.mode) + " " +
          std::to_string(rd.seedIndex) + " " +
          std::to_string(rd.requestedSeed) + " " + std::to_string(rd.usedSeed);
    for (auto x : rd.rejected)
      md += " " + std::to_string(x);
    md += "\n";
  }
  if (failed) {
    md += "\nfailed runs:\n";
    for (const auto &r : result.runs)
      if (r.status != "ok")
        md += rowPrefix(r) + " " + r.status + "\n";
  }
  return result;
}

void writeCampaign(const CampaignResult &result,
                   const std::filesystem::path &outDir) {
  std::filesystem::create_directories(outDir);
  const std::pair<const char *, const std::string *> files[] = {
      {"results.csv", &result.resultsCsv},
      {"throughput.csv", &result.throughputCsv},
      {"paths.csv", &result.pathsCsv},
      {"metadata.txt", &result.metadata}};
  for (const auto &[name, text] : files) {
    std::ofstream f(outDir / name, std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot write " + (outDir / name).string());
    f << *text;
  }
}

} // namespace mr2
