#include "mr2/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mr2/disjointness.hpp"

namespace mr2 {

std::uint64_t RunResult::sent() const {
  std::uint64_t n = 0;
  for (const auto &f : flows)
    n += f.sent;
  return n;
}

std::uint64_t RunResult::delivered() const {
  std::uint64_t n = 0;
  for (const auto &f : flows)
    n += f.delivered;
  return n;
}

double RunResult::builtPaths() const {
  if (flows.empty())
    return 0.0;
  double n = 0.0;
  for (const auto &f : flows)
    n += f.builtPaths;
  return n / double(flows.size());
}

double RunResult::meanHops() const {
  if (paths.empty())
    return 0.0;
  double n = 0.0;
  for (const auto &p : paths)
    n += p.hops;
  return n / double(paths.size());
}

std::size_t RunResult::involvedNodes() const {
  return std::size_t(std::count_if(processed.begin(), processed.end(),
                                   [](std::uint64_t m) { return m > 0; }));
}

RunResult summarize(const RunTrace &trace, const Topology &topology,
                    const std::vector<NodeId> &sources, const RunMeta &meta) {
  RunResult r;
  r.scheme = trace.scheme;
  r.gridSide = meta.gridSide;
  r.mode = meta.mode;
  r.seedIndex = meta.seedIndex;
  r.deploymentSeed = meta.deploymentSeed;
  r.sources = sources;

  std::map<SessionId, std::uint32_t> built;
  for (const auto &p : trace.paths) {
    ++built[p.session];
    r.paths.push_back({p.session, p.pathId, p.hops, p.kind, p.sent,
                       p.delivered});
  }
  for (const auto &s : trace.sessions) {
    r.flows.push_back({s.session, s.sent, s.delivered, built[s.session]});
    r.delays.insert(r.delays.end(), s.delays.begin(), s.delays.end());
    r.deliveryTimes.insert(r.deliveryTimes.end(), s.deliveryTimes.begin(),
                           s.deliveryTimes.end());
    r.duplicates += s.duplicates;
  }
  std::sort(r.deliveryTimes.begin(), r.deliveryTimes.end());
  r.discoveries = std::uint32_t(trace.discoveries.size());
  r.classEnergy = trace.classEnergy;
  r.totalEnergy = trace.totalEnergy;
  r.conservationError = trace.conservationError;
  r.processed = trace.processed;
  r.deaths = trace.deaths;
  r.endTime = trace.endTime;
  if (trace.scheme == Scheme::MR2) {
    const DisjointnessReport report = checkRadioDisjointness(topology, trace);
    r.disjointViolations = report.violations.size();
    r.disjointExposures = report.exposures.size();
  }
  return r;
}

double fairnessIndex(std::span<const double> counts) {
  if (counts.empty())
    throw UndefinedMetric("fairness index of an empty list");
  double sum = 0.0;
  double sumSq = 0.0;
  for (double m : counts) {
    if (m < 0.0)
      throw InvalidParameter("fairness index needs non-negative counts");
    sum += m;
    sumSq += m * m;
  }
  if (sumSq == 0.0)
    throw UndefinedMetric("fairness index of an all-zero list");
  return sum * sum / (double(counts.size()) * sumSq);
}

double fairnessIndex(const RunResult &run) {
  std::vector<double> m;
  for (std::uint64_t c : run.processed)
    if (c > 0)
      m.push_back(double(c));
  return fairnessIndex(m);
}

double successRatioVsBaseline(double delivered, double deliveredBaseline) {
  if (!(deliveredBaseline > 0.0))
    throw UndefinedMetric("baseline delivered nothing");
  return delivered / deliveredBaseline;
}

double pathLengthRatio(double meanHopsScheme, double meanHopsSingle) {
  if (!(meanHopsSingle > 0.0))
    throw UndefinedMetric("baseline mean hop count is zero");
  return meanHopsScheme / meanHopsSingle;
}

InvolvedStats involvedNodeStats(const RunResult &a, const RunResult &b) {
  InvolvedStats s;
  s.countA = a.involvedNodes();
  s.countB = b.involvedNodes();
  if (s.countB == 0)
    throw UndefinedMetric("no involved nodes in the reference run");
  s.ratio = double(s.countA) / double(s.countB);
  return s;
}

double meanDelay(std::span<const double> samples) {
  if (samples.empty())
    throw UndefinedMetric("no delay samples");
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         double(samples.size());
}

std::vector<ThroughputBucket>
throughputSeries(std::span<const SimTime> deliveries, double bucket,
                 std::optional<SimTime> end) {
  if (!(bucket > 0.0))
    throw InvalidParameter("throughput bucket must be positive");
  SimTime last = end.value_or(0.0);
  for (SimTime t : deliveries)
    last = std::max(last, t);
  const auto n = std::size_t(std::floor(last / bucket)) + 1;
  std::vector<ThroughputBucket> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k].start = double(k) * bucket;
  for (SimTime t : deliveries) {
    if (t < 0.0)
      throw InvalidParameter("negative delivery time");
    ++out[std::min(n - 1, std::size_t(std::floor(t / bucket)))].delivered;
  }
  return out;
}

double builtPathsMean(std::span<const RunResult> runs) {
  if (runs.empty())
    throw UndefinedMetric("no runs");
  double sum = 0.0;
  for (const auto &r : runs)
    sum += r.builtPaths();
  return sum / double(runs.size());
}

std::map<std::pair<SessionId, NodeId>, double>
perPathSuccessShare(const RunResult &run) {
  std::uint64_t total = 0;
  for (const auto &p : run.paths)
    total += p.delivered;
  if (total == 0)
    throw UndefinedMetric("no delivered packets");
  std::map<std::pair<SessionId, NodeId>, double> out;
  for (const auto &p : run.paths)
    out[{p.session, p.pathId}] = double(p.delivered) / double(total);
  return out;
}

double overheadEnergy(const RunResult &run, bool perDelivered,
                      OverheadClasses classes) {
  double e = 0.0;
  if (classes.request)
    e += run.classEnergy[std::size_t(MessageClass::Request)];
  if (classes.bePassive)
    e += run.classEnergy[std::size_t(MessageClass::BePassive)];
  if (classes.routeError)
    e += run.classEnergy[std::size_t(MessageClass::RouteError)];
  if (!perDelivered)
    return e;
  const std::uint64_t d = run.delivered();
  if (d == 0)
    throw UndefinedMetric("no delivered packets");
  return e / double(d);
}

double energyPerDeliveredPacket(const RunResult &run) {
  const std::uint64_t d = run.delivered();
  if (d == 0)
    throw UndefinedMetric("no delivered packets");
  return run.totalEnergy / double(d);
}

std::string formatReal(double value) {
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string csvHeader() {
  return "scheme,gridSide,mode,seed,sources,sent,delivered,successRatio,"
         "builtPaths,meanHops,meanDelay_s,controlEnergy_J,totalEnergy_J,"
         "energyPerDelivered_J,overheadPerDelivered_J,involvedNodes,fairness,"
         "deliveryRatio,requestEnergy_J,discoveries,disjointViolations,"
         "disjointExposures,status";
}

namespace {

template <class F> double orNan(F &&f) {
  try {
    return f();
  } catch (const UndefinedMetric &) {
    return std::nan("");
  }
}

} // namespace

std::string csvRow(const RunResult &run) {
  const double nan = std::nan("");
  const bool ok = run.status == "ok";
  std::string out;
  auto field = [&out](const std::string &s) {
    if (!out.empty())
      out += ',';
    out += s;
  };
  auto real = [&](double v) { field(formatReal(v)); };
  auto count = [&](std::uint64_t v) { field(std::to_string(v)); };

  field(std::string(toString(run.scheme)));
  count(run.gridSide);
  field(toString(run.mode));
  count(run.seedIndex);
  count(run.sources.size());
  count(run.sent());
  count(run.delivered());
  real(run.successRatio.value_or(nan));
  real(ok ? run.builtPaths() : nan);
  real(ok ? run.meanHops() : nan);
  real(ok ? orNan([&] { return meanDelay(run.delays); }) : nan);
  real(ok ? overheadEnergy(run, false) : nan);
  real(ok ? run.totalEnergy : nan);
  real(ok ? orNan([&] { return energyPerDeliveredPacket(run); }) : nan);
  real(ok ? orNan([&] { return overheadEnergy(run, true); }) : nan);
  count(run.involvedNodes());
  real(ok ? orNan([&] { return fairnessIndex(run); }) : nan);
  real(run.sent() ? double(run.delivered()) / double(run.sent()) : nan);
  real(ok ? run.classEnergy[std::size_t(MessageClass::Request)] : nan);
  count(run.discoveries);
  count(run.disjointViolations);
  count(run.disjointExposures);
  // Status text may carry commas from exception messages.
  std::string status = run.status;
  std::replace(status.begin(), status.end(), ',', ';');
  std::replace(status.begin(), status.end(), '\n', ' ');
  field(status);
  return out;
}

} // namespace mr2
