// Command-line front end: action-space listing, config validation,
// deployment dumps, single runs, batches and report re-aggregation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wifisr/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRun = 2;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> deployments;
  std::optional<double> sim_time_s;
};

wifisr::ScenarioConfig load(const CommonArgs& a) {
  wifisr::ScenarioConfig cfg = a.config_path.empty() ? wifisr::ScenarioConfig{} : wifisr::load_config(a.config_path);
  if (a.seed) cfg.seed = *a.seed;
  if (a.deployments) cfg.scenario.n_deployments = *a.deployments;
  if (a.sim_time_s) cfg.scenario.sim_time_s = *a.sim_time_s;
  wifisr::require_valid(cfg);
  return cfg;
}

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--config", a.config_path, "scenario config (JSON); defaults apply when omitted");
  sub->add_option("--seed", a.seed, "root seed override");
  sub->add_option("--deployments", a.deployments, "override scenario.n_deployments");
  sub->add_option("--sim-time", a.sim_time_s, "override scenario.sim_time_s");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-reuse bandit simulator for overlapping 802.11 BSSs"};
  app.require_subcommand(1);

  std::string mode_name = "11axsr";
  auto* describe = app.add_subcommand("describe-actions", "print the action space (index, C, effective P)");
  describe->add_option("--mode", mode_name, "11axsr|free")->check(CLI::IsMember({"11axsr", "free"}));

  CommonArgs common;
  auto* validate = app.add_subcommand("validate", "check a config file");
  add_common(validate, common);

  std::string out;
  auto* generate = app.add_subcommand("generate", "dump the deployments of a config as CSV");
  add_common(generate, common);
  generate->add_option("--out", out, "output file (stdout when omitted)");

  std::string run_mode, run_reward;
  int deployment_index = 0;
  bool trace_events = false, trace_attempts = false, agent_log = false;
  auto* run = app.add_subcommand("run", "simulate one deployment under one configuration");
  add_common(run, common);
  run->add_option("--mode", run_mode, "dcf|11axsr|free (overrides agent.mode)")
      ->check(CLI::IsMember({"dcf", "11axsr", "free"}));
  run->add_option("--reward", run_reward, "dec|coord (overrides agent.reward)")->check(CLI::IsMember({"dec", "coord"}));
  run->add_option("--deployment", deployment_index, "deployment index (seed = root + index)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out", out, "output directory")->required();
  run->add_flag("--trace-events", trace_events, "write events.tsv");
  run->add_flag("--trace-attempts", trace_attempts, "write attempts.csv");
  run->add_flag("--agent-log", agent_log, "write agent_log.csv");

  int parallel = 1;
  bool spider = false;
  std::vector<std::string> configs;
  auto* experiment = app.add_subcommand("experiment", "run the configuration batch over all deployments");
  add_common(experiment, common);
  experiment->add_option("--out", out, "output directory")->required();
  experiment->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  experiment->add_option("--configs", configs, "subset of dcf,11axsr-dec,11axsr-coord,free-dec,free-coord")
      ->delimiter(',');
  experiment->add_flag("--spider", spider, "also write spider.csv");

  auto* report = app.add_subcommand("report", "re-aggregate results.csv from raw CSVs");
  report->add_option("--out", out, "directory holding raw_*.csv and delays_*.csv")->required();
  report->add_flag("--spider", spider, "also write spider.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*describe) {
      std::cout << wifisr::action_space_table(wifisr::parse_sr_mode(mode_name));
      return kExitOk;
    }
    if (*validate) {
      wifisr::ScenarioConfig cfg =
          common.config_path.empty() ? wifisr::ScenarioConfig{} : wifisr::load_config(common.config_path);
      if (common.seed) cfg.seed = *common.seed;
      const auto v = wifisr::validate_config(cfg);
      for (const auto& s : v) std::cerr << s << '\n';
      if (!v.empty()) return kExitConfig;
      std::cout << "ok\n";
      return kExitOk;
    }
    if (*generate) {
      const auto cfg = load(common);
      std::vector<wifisr::Deployment> deps;
      for (int i = 0; i < cfg.scenario.n_deployments; ++i)
        deps.push_back(wifisr::generate_deployment(wifisr::deployment_seed(cfg.seed, i), cfg));
      const auto text = wifisr::deployments_csv(deps);
      if (out.empty())
        std::cout << text;
      else
        wifisr::write_file(out, text);
      return kExitOk;
    }
    if (*run) {
      auto cfg = load(common);
      if (!run_mode.empty()) cfg.agent.mode = wifisr::parse_agent_mode(run_mode);
      if (!run_reward.empty()) cfg.agent.reward = wifisr::parse_reward_kind(run_reward);
      wifisr::require_valid(cfg);
      if (deployment_index >= cfg.scenario.n_deployments)
        throw wifisr::ConfigError("--deployment must be below scenario.n_deployments");
      wifisr::RunOptions opts;
      opts.trace_events = trace_events;
      const auto conf = wifisr::configuration_of(cfg);
      wifisr::SingleRun r;
      try {
        r = wifisr::run_single(cfg, deployment_index, conf, opts);
      } catch (const wifisr::ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kExitRun;
      }
      const std::filesystem::path dir(out);
      std::filesystem::create_directories(dir);
      std::string raw(wifisr::kRawHeader);
      raw += '\n';
      raw += wifisr::raw_rows(deployment_index, r.kpis);
      wifisr::write_file(dir / "raw.csv", raw);
      if (trace_events) wifisr::write_file(dir / "events.tsv", r.result.event_trace);
      if (trace_attempts) wifisr::write_file(dir / "attempts.csv", wifisr::attempts_csv(r.result));
      if (agent_log) wifisr::write_file(dir / "agent_log.csv", wifisr::agent_log_csv(r.result.agent_log));
      std::cout << raw;
      return kExitOk;
    }
    if (*experiment) {
      wifisr::ExperimentPlan plan;
      plan.config = load(common);
      if (!configs.empty()) {
        plan.configurations.clear();
        for (const auto& c : configs) plan.configurations.push_back(wifisr::parse_configuration(c));
      }
      plan.out_dir = out;
      plan.parallelism = parallel;
      plan.spider = spider;
      const auto outcome = wifisr::run_batch(plan);
      std::cerr << outcome.runs - outcome.failed << "/" << outcome.runs << " runs completed\n";
      if (!outcome.complete) return kExitRun;
      std::cout << wifisr::read_file(plan.out_dir / "results.csv");
      return kExitOk;
    }
    if (*report) {
      wifisr::write_reports(out, spider);
      std::cout << wifisr::read_file(std::filesystem::path(out) / "results.csv");
      return kExitOk;
    }
  } catch (const wifisr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRun;
  }
  return kExitOk;
}
