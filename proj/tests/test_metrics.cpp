#include <doctest.h>

#include <cmath>
#include <random>

#include "mr2/metrics.hpp"
#include "oracles.hpp"

using namespace mr2;

namespace {

RunResult withProcessed(std::vector<std::uint64_t> m) {
  RunResult r;
  r.processed = std::move(m);
  return r;
}

} // namespace

TEST_CASE("fairness index examples") {
  const std::vector<double> equal{5, 5, 5, 5}, one{7, 0, 0, 0, 0}, pair{3, 1};
  CHECK(fairnessIndex(equal) == 1.0);
  CHECK(fairnessIndex(one) == 0.2);
  CHECK(fairnessIndex(pair) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(fairnessIndex(std::vector<double>{}), UndefinedMetric);
  CHECK_THROWS_AS(fairnessIndex(std::vector<double>{0, 0}), UndefinedMetric);
  CHECK_THROWS_AS(fairnessIndex(std::vector<double>{1, -1}), InvalidParameter);
}

TEST_CASE("fairness index agrees with direct evaluation on random vectors") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 300), val(0, 5000);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> m(std::size_t(len(rng)));
    for (auto &x : m)
      x = val(rng);
    m[0] += 1; // at least one contributor
    const double want = oracle::fairness(m);
    const double got = fairnessIndex(m);
    CHECK(std::abs(got - want) <= 1e-12 * want);
    CHECK(got > 0.0);
    CHECK(got <= 1.0 + 1e-15);
    // Scale invariance.
    std::vector<double> scaled = m;
    for (auto &x : scaled)
      x *= 3.0;
    CHECK(std::abs(fairnessIndex(scaled) - got) <= 1e-12 * got);
  }
  for (std::size_t n = 1; n <= 64; ++n) {
    std::vector<double> eq(n, 17.0), single(n, 0.0);
    single[n / 2] = 9.0;
    CHECK(fairnessIndex(eq) == 1.0);
    CHECK(fairnessIndex(single) == 1.0 / double(n));
  }
}

TEST_CASE("fairness of a run counts involved nodes only") {
  CHECK(fairnessIndex(withProcessed({0, 4, 0, 4, 4})) == 1.0);
  CHECK(withProcessed({0, 4, 0, 1, 4}).involvedNodes() == 3);
  CHECK_THROWS_AS(fairnessIndex(withProcessed({0, 0})), UndefinedMetric);
}

TEST_CASE("baseline ratios") {
  CHECK(successRatioVsBaseline(170, 100) == doctest::Approx(1.7));
  CHECK(successRatioVsBaseline(100, 100) == 1.0);
  CHECK(successRatioVsBaseline(0, 100) == 0.0);
  CHECK_THROWS_AS(successRatioVsBaseline(3, 0), UndefinedMetric);
  CHECK(pathLengthRatio(10, 10) == 1.0);
  CHECK(pathLengthRatio(12, 10) == doctest::Approx(1.2));
  CHECK_THROWS_AS(pathLengthRatio(3, 0), UndefinedMetric);
}

TEST_CASE("involved node statistics") {
  const RunResult a = withProcessed({1, 1, 0, 0}), b = withProcessed({1, 1, 1, 1});
  const auto s = involvedNodeStats(a, b);
  CHECK(s.countA == 2);
  CHECK(s.countB == 4);
  CHECK(s.ratio == 0.5);
  CHECK(involvedNodeStats(b, b).ratio == 1.0);
  CHECK_THROWS_AS(involvedNodeStats(a, withProcessed({0})), UndefinedMetric);
}

TEST_CASE("delay and throughput") {
  const std::vector<double> d{1, 2, 3};
  CHECK(meanDelay(d) == 2.0);
  CHECK_THROWS_AS(meanDelay(std::vector<double>{}), UndefinedMetric);

  const std::vector<SimTime> t{0.1, 0.5, 1.0, 2.7, 2.9};
  const auto s = throughputSeries(t, 1.0, 4.0);
  REQUIRE(s.size() == 5);
  CHECK(s[0].delivered == 2);
  CHECK(s[1].delivered == 1);
  CHECK(s[2].delivered == 2);
  CHECK(s[3].delivered == 0);
  CHECK(s[4].start == 4.0);
  std::uint64_t total = 0;
  for (const auto &b : s)
    total += b.delivered;
  CHECK(total == t.size());
  CHECK_THROWS_AS(throughputSeries(t, 0.0), InvalidParameter);
}

TEST_CASE("per-path shares, built paths and energy per packet") {
  RunResult r;
  r.flows = {{1, 100, 80, 2}, {2, 50, 20, 1}};
  r.paths = {{1, 4, 3, DiscoveryKind::Initial, 60, 50},
             {1, 9, 5, DiscoveryKind::Additional, 40, 30},
             {2, 4, 4, DiscoveryKind::Initial, 50, 20}};
  r.classEnergy = {0.5, 0.1, 0.05, 2.0};
  r.totalEnergy = 10.0;
  const auto shares = perPathSuccessShare(r);
  double sum = 0;
  for (const auto &[k, v] : shares)
    sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(shares.at({1, 4}) == 0.5);
  CHECK(r.builtPaths() == 1.5);
  CHECK(r.meanHops() == 4.0);
  const RunResult two[] = {r, r};
  CHECK(builtPathsMean(two) == 1.5);
  CHECK(overheadEnergy(r, false) == doctest::Approx(0.65));
  CHECK(overheadEnergy(r, false, {true, false, false}) == 0.5);
  CHECK(overheadEnergy(r, true) == doctest::Approx(0.0065));
  CHECK(energyPerDeliveredPacket(r) == 0.1);
  RunResult none;
  none.flows = {{1, 10, 0, 1}};
  CHECK_THROWS_AS(energyPerDeliveredPacket(none), UndefinedMetric);
  CHECK_THROWS_AS(perPathSuccessShare(none), UndefinedMetric);
}

TEST_CASE("csv formatting") {
  CHECK(formatReal(1.0 / 3.0) == "0.333333333");
  CHECK(formatReal(std::nan("")) == "nan");
  RunResult r;
  r.scheme = Scheme::HC;
  r.gridSide = 7;
  r.mode = RangeMode::Dense;
  r.status = "error: bad, worse";
  const std::string row = csvRow(r);
  CHECK(row.rfind("hc,7,dense,0,0,0,0,nan,", 0) == 0);
  CHECK(row.find("bad; worse") != std::string::npos);
  auto commas = [](const std::string &s) {
    return std::count(s.begin(), s.end(), ',');
  };
  CHECK(commas(row) == commas(csvHeader()));
}

TEST_CASE("per-path delivered counts partition the total under split traffic") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Deployment d = drawDeployment(10, 1000, RangeMode::Dense, 3, seed);
    SimConfig cfg;
    cfg.traffic.packetRate = 40;
    cfg.traffic.sessionDuration = 6;
    cfg.energy.initialEnergy = 50;
    for (Scheme s : {Scheme::HC, Scheme::MR2}) {
      cfg.scheme = s;
      const RunTrace tr = simulate(d.topology, d.sources, cfg, seed);
      const RunResult r =
          summarize(tr, d.topology, d.sources, {10, RangeMode::Dense, 0, seed});
      std::uint64_t byPath = 0;
      for (const auto &p : r.paths)
        byPath += p.delivered;
      CHECK(byPath == r.delivered());
      CHECK(r.delivered() <= r.sent());
    }
    cfg.scheme = Scheme::MR2;
    cfg.traffic.strategy = Strategy::Duplicate;
    const RunTrace tr = simulate(d.topology, d.sources, cfg, seed);
    const RunResult r =
        summarize(tr, d.topology, d.sources, {10, RangeMode::Dense, 0, seed});
    std::uint64_t byPath = 0;
    for (const auto &p : r.paths)
      byPath += p.delivered;
    CHECK(byPath == r.delivered());
    CHECK(r.delivered() <= r.sent());
    cfg.traffic.strategy = Strategy::RoundRobinSplit;
  }
}
