#include <gtest/gtest.h>

#include <sstream>

#include "wifisr/metrics.hpp"
#include "wifisr/network.hpp"

using namespace wifisr;

namespace {
ScenarioConfig short_config(std::optional<SrMode> mode = std::nullopt, RewardKind reward = RewardKind::Dec) {
  ScenarioConfig c;
  c.scenario.sim_time_s = 5;
  c.agent.mode = mode;
  c.agent.reward = reward;
  return c;
}
}  // namespace

TEST(Network, DeterministicRuns) {
  const auto cfg = short_config(SrMode::Free);
  const auto dep = generate_deployment(11, cfg);
  RunOptions o;
  o.trace_events = true;
  const auto a = simulate(cfg, dep, o);
  const auto b = simulate(cfg, dep, o);
  EXPECT_EQ(a.event_trace, b.event_trace);
  ASSERT_EQ(a.attempts.size(), b.attempts.size());
  for (std::size_t i = 0; i < a.attempts.size(); ++i) {
    EXPECT_EQ(a.attempts[i].start, b.attempts[i].start);
    EXPECT_EQ(a.attempts[i].outcome, b.attempts[i].outcome);
  }
}

TEST(Network, EventTraceFormat) {
  auto cfg = short_config(SrMode::Constrained11ax);
  cfg.scenario.sim_time_s = 2;
  RunOptions o;
  o.trace_events = true;
  const auto r = simulate(cfg, generate_deployment(1, cfg), o);
  std::istringstream in(r.event_trace);
  std::string line;
  long lines = 0, epochs = 0;
  SimTime last = 0;
  bool saw_end = false;
  while (std::getline(in, line)) {
    std::istringstream f(line);
    SimTime t;
    std::uint64_t seq;
    std::string kind;
    int subject;
    ASSERT_TRUE(f >> t >> seq >> kind >> subject) << line;
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 3);
    EXPECT_GE(t, last);
    last = t;
    epochs += kind == "epoch-boundary";
    saw_end = kind == "sim-end";
    ++lines;
  }
  EXPECT_EQ(static_cast<std::uint64_t>(lines), r.stats.events);
  EXPECT_EQ(epochs, 1);
  EXPECT_TRUE(saw_end);
  EXPECT_EQ(last, 2'000'000);
}

TEST(Network, NoTransmissionStartsOnBusyChannel) {
  for (auto mode : {std::optional<SrMode>{}, std::optional<SrMode>{SrMode::Constrained11ax},
                    std::optional<SrMode>{SrMode::Free}}) {
    const auto cfg = short_config(mode);
    for (std::uint64_t s = 1; s <= 5; ++s) EXPECT_EQ(simulate(cfg, generate_deployment(s, cfg)).stats.cca_violations, 0u);
  }
}

TEST(Network, RateBoundAndAirtimeRange) {
  const auto cfg = short_config(SrMode::Free, RewardKind::Coord);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto r = simulate(cfg, generate_deployment(s, cfg));
    for (const auto& k : collect_run(r.attempts, r.n_bss, r.sim_time_us)) {
      EXPECT_LE(k.throughput_mbps, k.airtime_fraction * 143.4 + 1e-9);
      EXPECT_GE(k.airtime_fraction, 0.0);
      EXPECT_LE(k.airtime_fraction, 1.0);
    }
  }
}

TEST(Network, AttemptsAreWellFormed) {
  const auto cfg = short_config(SrMode::Free);
  const auto r = simulate(cfg, generate_deployment(2, cfg));
  std::vector<SimTime> last_end(4, -1);
  for (const auto& a : r.attempts) {
    EXPECT_GT(a.end, a.start);
    EXPECT_EQ(a.ack_end, a.end + 60);
    EXPECT_LE(a.bits, 64 * 12000);
    EXPECT_LE(a.hol_start, a.start);
    EXPECT_NE(a.outcome, Outcome::Pending);
    EXPECT_GE(a.start, last_end[a.bss]);  // one exchange at a time per AP
    last_end[a.bss] = a.ack_end;
  }
}

TEST(Network, DcfHasNoAgentLogAndDefaultRadio) {
  const auto cfg = short_config();
  const auto r = simulate(cfg, generate_deployment(3, cfg));
  EXPECT_TRUE(r.agent_log.empty());
  for (const auto& a : r.attempts) EXPECT_DOUBLE_EQ(a.tx_power_dbm, 20.0);
}

TEST(Network, AgentLogHasOneRowPerAgentPerEpoch) {
  const auto cfg = short_config(SrMode::Free);
  const auto r = simulate(cfg, generate_deployment(3, cfg));
  ASSERT_EQ(r.agent_log.size(), 5u * 4u);
  for (std::size_t i = 0; i < r.agent_log.size(); ++i) {
    EXPECT_EQ(r.agent_log[i].epoch, static_cast<long>(i / 4 + 1));
    EXPECT_EQ(r.agent_log[i].bss, static_cast<int>(i % 4));
    EXPECT_DOUBLE_EQ(r.agent_log[i].epsilon, 1.0 / std::sqrt(static_cast<double>(i / 4 + 1)));
  }
}

// The DEC reward of an epoch is the normalized payload delivered in it.
TEST(Network, DecRewardMatchesDeliveredBits) {
  const auto cfg = short_config(SrMode::Constrained11ax);
  const auto r = simulate(cfg, generate_deployment(4, cfg));
  std::vector<std::vector<std::int64_t>> bits(4, std::vector<std::int64_t>(5, 0));
  for (const auto& a : r.attempts)
    if (a.outcome == Outcome::Success && a.ack_end < 5'000'000) bits[a.bss][a.ack_end / 1'000'000] += a.bits;
  for (const auto& d : r.agent_log)
    EXPECT_NEAR(d.reward, std::min(1.0, bits[d.bss][d.epoch - 1] / 1e6 / 143.4), 1e-12);
}

TEST(Network, AttemptPowerFollowsAgentConfig) {
  const auto cfg = short_config(SrMode::Constrained11ax);
  const auto r = simulate(cfg, generate_deployment(5, cfg));
  for (const auto& a : r.attempts) {
    if (a.start % 1'000'000 == 0) continue;  // same-instant order with the boundary is by sequence number
    const long epoch = a.start / 1'000'000 + 1;
    const auto& d = r.agent_log.at(static_cast<std::size_t>((epoch - 1) * 4 + a.bss));
    ASSERT_EQ(d.epoch, epoch);
    EXPECT_DOUBLE_EQ(a.tx_power_dbm, d.config.tx_power_dbm);
  }
}

TEST(Network, OutcomesMatchBruteForceSinr) {
  const auto cfg = short_config(SrMode::Free);
  const auto dep = generate_deployment(6, cfg);
  const auto r = simulate(cfg, dep);
  const auto pos = dep.node_positions();
  for (const auto& a : r.attempts) {
    double mw = std::pow(10.0, -9.4);
    for (const auto& o : r.attempts) {
      if (o.bss == a.bss || !(o.start < a.end && a.start < o.end)) continue;
      const double d = std::max(0.1, distance_m(pos[o.tx_node], pos[a.rx_node]));
      mw += std::pow(10.0, (o.tx_power_dbm - 48.0 - 44.0 * std::log10(d)) / 10.0);
    }
    const double d0 = distance_m(pos[a.tx_node], pos[a.rx_node]);
    const double sinr = a.tx_power_dbm - 48.0 - 44.0 * std::log10(d0) - 10.0 * std::log10(mw);
    const double thr = cfg.mcs.find(a.mcs)->min_sinr_db;
    if (std::abs(sinr - thr) < 1e-6) continue;
    EXPECT_EQ(a.outcome, sinr >= thr ? Outcome::Success : Outcome::Failure) << "start " << a.start;
  }
}

TEST(Network, MutuallyAudibleApsRarelyOverlap) {
  ScenarioConfig cfg = short_config();
  cfg.scenario.n_bss = 2;
  Deployment dep{1, 20, {{0, {5, 10}, {5, 12}}, {1, {9, 10}, {9, 12}}}};
  const auto r = simulate(cfg, dep);
  long overlaps = 0, same_start = 0;
  for (std::size_t i = 0; i < r.attempts.size(); ++i)
    for (std::size_t j = i + 1; j < r.attempts.size(); ++j)
      if (r.attempts[i].overlaps(r.attempts[j])) {
        ++overlaps;
        same_start += r.attempts[i].start == r.attempts[j].start;
      }
  EXPECT_GT(r.attempts.size(), 500u);
  EXPECT_EQ(overlaps, same_start);  // only same-slot collisions
}

TEST(Network, AgentMaskAndStaticRadio) {
  auto cfg = short_config(SrMode::Free);
  cfg.scenario.n_bss = 2;
  RunOptions o;
  o.agent_mask = std::vector<bool>{true, false};
  o.static_radio = std::vector<RadioConfig>{RadioConfig{}, RadioConfig{10, -70}};
  const auto r = simulate(cfg, generate_deployment(1, cfg), o);
  EXPECT_EQ(r.agent_log.size(), 5u);
  for (const auto& a : r.attempts)
    if (a.bss == 1) {
      EXPECT_DOUBLE_EQ(a.tx_power_dbm, 10);
    }
  o.agent_mask = std::vector<bool>{true};
  EXPECT_THROW(simulate(cfg, generate_deployment(1, cfg), o), ConfigError);
}
