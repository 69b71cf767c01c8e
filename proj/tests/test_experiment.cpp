#include <gtest/gtest.h>

#include <filesystem>

#include "wifisr/experiment.hpp"

using namespace wifisr;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small() {
  ScenarioConfig c;
  c.scenario.n_deployments = 6;
  c.scenario.sim_time_s = 3;
  c.seed = 17;
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("wifisr_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Configuration, NamesRoundTrip) {
  for (auto c : kAllConfigurations) {
    EXPECT_EQ(parse_configuration(to_string(c)), c);
    EXPECT_EQ(configuration_of(with_configuration(ScenarioConfig{}, c)), c);
  }
  EXPECT_THROW(parse_configuration("free"), ConfigError);
}

TEST(RunSingle, DcfHasNoAgentRows) {
  const auto r = run_single(small(), 0, Configuration::Dcf);
  EXPECT_TRUE(r.result.agent_log.empty());
  EXPECT_EQ(r.kpis.size(), 4u);
  EXPECT_EQ(r.seed, 17u);
}

TEST(RunSingle, ConstrainedLogVariesOnlyC) {
  const auto r = run_single(small(), 1, Configuration::Ax11Dec);
  ASSERT_FALSE(r.result.agent_log.empty());
  for (const auto& d : r.result.agent_log)
    EXPECT_DOUBLE_EQ(d.config.tx_power_dbm, std::min(20.0, 21.0 - (d.config.cca_dbm + 82.0)));
}

TEST(RunSingle, IdenticalInputsGiveIdenticalBytes) {
  RunOptions o;
  o.trace_events = true;
  const auto a = run_single(small(), 2, Configuration::FreeCoord, o);
  const auto b = run_single(small(), 2, Configuration::FreeCoord, o);
  EXPECT_EQ(raw_rows(2, a.kpis), raw_rows(2, b.kpis));
  EXPECT_EQ(attempts_csv(a.result), attempts_csv(b.result));
  EXPECT_EQ(agent_log_csv(a.result.agent_log), agent_log_csv(b.result.agent_log));
  EXPECT_EQ(a.result.event_trace, b.result.event_trace);
}

TEST(RunSingle, DeploymentsArePairedAcrossConfigurations) {
  const auto cfg = small();
  for (auto c : kAllConfigurations) {
    const auto cc = with_configuration(cfg, c);
    EXPECT_EQ(generate_deployment(deployment_seed(cc.seed, 3), cc), generate_deployment(deployment_seed(cfg.seed, 3), cfg));
  }
}

TEST(Batch, ParallelismDoesNotChangeOutputs) {
  ExperimentPlan plan;
  plan.config = small();
  plan.spider = true;
  const auto d1 = fresh_dir("p1"), d8 = fresh_dir("p8");
  plan.out_dir = d1;
  plan.parallelism = 1;
  const auto a = run_batch(plan);
  plan.out_dir = d8;
  plan.parallelism = 8;
  const auto b = run_batch(plan);
  EXPECT_TRUE(a.complete);
  EXPECT_TRUE(b.complete);
  EXPECT_EQ(a.runs, 30);
  for (const std::string f : {"results.csv", "spider.csv", "manifest.csv", "raw_dcf.csv", "delays_free-coord.csv"})
    EXPECT_EQ(read_file(d1 / f), read_file(d8 / f)) << f;
}

TEST(Batch, ReportReproducesResults) {
  ExperimentPlan plan;
  plan.config = small();
  plan.configurations = {Configuration::Dcf, Configuration::FreeDec};
  plan.out_dir = fresh_dir("report");
  plan.spider = true;
  run_batch(plan);
  const auto results = read_file(plan.out_dir / "results.csv");
  const auto spider = read_file(plan.out_dir / "spider.csv");
  fs::remove(plan.out_dir / "results.csv");
  fs::remove(plan.out_dir / "spider.csv");
  write_reports(plan.out_dir, true);
  EXPECT_EQ(read_file(plan.out_dir / "results.csv"), results);
  EXPECT_EQ(read_file(plan.out_dir / "spider.csv"), spider);
}

TEST(Batch, ReportMatchesInMemoryAggregation) {
  ExperimentPlan plan;
  plan.config = small();
  plan.configurations = {Configuration::Ax11Coord};
  plan.out_dir = fresh_dir("agg");
  const auto out = run_batch(plan);
  std::vector<std::vector<KpiRecord>> runs;
  for (int d = 0; d < plan.config.scenario.n_deployments; ++d)
    runs.push_back(run_single(plan.config, d, Configuration::Ax11Coord).kpis);
  const auto direct = aggregate(runs);
  ASSERT_EQ(out.reports.size(), 1u);
  const auto& r = out.reports[0].second;
  // Raw files carry 6 (throughput) and 8 (airtime) decimals.
  EXPECT_NEAR(r.throughput_mbps.p25, direct.throughput_mbps.p25, 1e-6);
  EXPECT_NEAR(r.throughput_mbps.p50, direct.throughput_mbps.p50, 1e-6);
  EXPECT_NEAR(r.airtime.p75, direct.airtime.p75, 1e-8);
  EXPECT_EQ(r.delay_ms.n, direct.delay_ms.n);
  EXPECT_DOUBLE_EQ(r.delay_ms.p50, direct.delay_ms.p50);
  EXPECT_EQ(r.throughput_mbps.n, 24);
}

TEST(Batch, SubsetContainsOnlySelectedRows) {
  ExperimentPlan plan;
  plan.config = small();
  plan.configurations = {Configuration::Dcf};
  plan.out_dir = fresh_dir("subset");
  run_batch(plan);
  const auto results = read_file(plan.out_dir / "results.csv");
  EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 4);
  EXPECT_EQ(results.find("free"), std::string::npos);
  EXPECT_FALSE(fs::exists(plan.out_dir / "spider.csv"));
}

TEST(Batch, ManifestListsEveryRun) {
  ExperimentPlan plan;
  plan.config = small();
  plan.configurations = {Configuration::Dcf, Configuration::Ax11Dec};
  plan.out_dir = fresh_dir("manifest");
  run_batch(plan);
  const auto m = read_file(plan.out_dir / "manifest.csv");
  EXPECT_EQ(m.rfind("config,deployment,seed,status,output_hash\n", 0), 0u);
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), 1 + 12 + 1);
  EXPECT_NE(m.find("11axsr-dec,5,22,ok,"), std::string::npos);
  EXPECT_NE(m.find("# complete=true"), std::string::npos);
}

TEST(Batch, InvalidPlanIsConfigError) {
  ExperimentPlan plan;
  plan.config = small();
  plan.config.agent.epoch_s = 0.7;
  plan.out_dir = fresh_dir("invalid");
  EXPECT_THROW(run_batch(plan), ConfigError);
}

TEST(Formats, Headers) {
  const auto r = run_single(small(), 0, Configuration::FreeDec);
  EXPECT_EQ(attempts_csv(r.result).substr(0, kAttemptsHeader.size()), kAttemptsHeader);
  EXPECT_EQ(agent_log_csv(r.result.agent_log).substr(0, kAgentLogHeader.size()), kAgentLogHeader);
  const auto table = action_space_table(SrMode::Constrained11ax);
  EXPECT_NE(table.find("5,-62.0,1.0"), std::string::npos);
  const auto free_table = action_space_table(SrMode::Free);
  EXPECT_EQ(std::count(free_table.begin(), free_table.end(), '\n'), 25);
}
