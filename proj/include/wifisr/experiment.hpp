#pragma once

// Batch orchestration over the five agent configurations and the CSV
// formats written by the command-line tool.

#include <array>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "wifisr/metrics.hpp"
#include "wifisr/network.hpp"
#include "wifisr/scenario.hpp"

namespace wifisr {

enum class Configuration : std::uint8_t { Dcf, Ax11Dec, Ax11Coord, FreeDec, FreeCoord };

inline constexpr std::array<Configuration, 5> kAllConfigurations{
    Configuration::Dcf, Configuration::Ax11Dec, Configuration::Ax11Coord, Configuration::FreeDec,
    Configuration::FreeCoord};

inline std::string_view to_string(Configuration c) {
  switch (c) {
    case Configuration::Dcf: return "dcf";
    case Configuration::Ax11Dec: return "11axsr-dec";
    case Configuration::Ax11Coord: return "11axsr-coord";
    case Configuration::FreeDec: return "free-dec";
    case Configuration::FreeCoord: return "free-coord";
  }
  return "unknown";
}

inline Configuration parse_configuration(std::string_view s) {
  for (auto c : kAllConfigurations)
    if (to_string(c) == s) return c;
  throw ConfigError("unknown configuration '" + std::string(s) +
                    "' (expected dcf|11axsr-dec|11axsr-coord|free-dec|free-coord)");
}

inline Configuration configuration_of(const ScenarioConfig& cfg) {
  if (!cfg.agent.mode) return Configuration::Dcf;
  const bool coord = cfg.agent.reward == RewardKind::Coord;
  if (*cfg.agent.mode == SrMode::Free) return coord ? Configuration::FreeCoord : Configuration::FreeDec;
  return coord ? Configuration::Ax11Coord : Configuration::Ax11Dec;
}

inline ScenarioConfig with_configuration(ScenarioConfig cfg, Configuration c) {
  switch (c) {
    case Configuration::Dcf: cfg.agent.mode.reset(); break;
    case Configuration::Ax11Dec: cfg.agent.mode = SrMode::Constrained11ax; cfg.agent.reward = RewardKind::Dec; break;
    case Configuration::Ax11Coord: cfg.agent.mode = SrMode::Constrained11ax; cfg.agent.reward = RewardKind::Coord; break;
    case Configuration::FreeDec: cfg.agent.mode = SrMode::Free; cfg.agent.reward = RewardKind::Dec; break;
    case Configuration::FreeCoord: cfg.agent.mode = SrMode::Free; cfg.agent.reward = RewardKind::Coord; break;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Formatting

namespace fmt_detail {

inline std::string num(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace fmt_detail

inline constexpr std::string_view kRawHeader = "deployment,bss,throughput_mbps,airtime,delay_p50_ms,n_delay_samples";
inline constexpr std::string_view kResultsHeader = "config,metric,p25,p50,p75,n_samples";
inline constexpr std::string_view kAttemptsHeader = "start_us,end_us,tx,rx,power_dbm,mcs,bits,outcome";
inline constexpr std::string_view kAgentLogHeader = "epoch,bss,arm_index,cca_dbm,txpower_dbm,reward,epsilon";
inline constexpr std::string_view kDelaysHeader = "delay_us,count";
inline constexpr std::string_view kSpiderHeader =
    "config,throughput_p25,throughput_p50,throughput_p75,delay_p25,delay_p50,delay_p75,airtime_p25,airtime_p50,"
    "airtime_p75";

// Throughput keeps 6 decimals and airtime 8; both are exact at the default
// 100 s horizon. Reports are always rebuilt from these printed values.
inline std::string raw_rows(int deployment, const std::vector<KpiRecord>& kpis) {
  std::string out;
  for (const auto& k : kpis) {
    const double p50 = k.delay_us.empty() ? std::nan("") : k.delay_us.median() / 1000.0;
    out += std::to_string(deployment) + ',' + std::to_string(k.bss) + ',' + fmt_detail::num(k.throughput_mbps, 6) +
           ',' + fmt_detail::num(k.airtime_fraction, 8) + ',' + fmt_detail::num(p50, 4) + ',' +
           std::to_string(k.delay_us.total()) + '\n';
  }
  return out;
}

inline std::string attempts_csv(const RunResult& r) {
  std::string out(kAttemptsHeader);
  out += '\n';
  for (const auto& a : r.attempts) {
    out += std::to_string(a.start) + ',' + std::to_string(a.end) + ',' + std::to_string(a.tx_node) + ',' +
           std::to_string(a.rx_node) + ',' + fmt_detail::num(a.tx_power_dbm, 1) + ',' + std::to_string(a.mcs) +
           ',' + std::to_string(a.bits) + ',' + std::string(to_string(a.outcome)) + '\n';
  }
  return out;
}

inline std::string agent_log_csv(const std::vector<AgentDecision>& log) {
  std::string out(kAgentLogHeader);
  out += '\n';
  for (const auto& d : log) {
    out += std::to_string(d.epoch) + ',' + std::to_string(d.bss) + ',' + std::to_string(d.arm) + ',' +
           fmt_detail::num(d.config.cca_dbm, 1) + ',' + fmt_detail::num(d.config.tx_power_dbm, 1) + ',' +
           fmt_detail::num(d.reward, 6) + ',' + fmt_detail::num(d.epsilon, 6) + '\n';
  }
  return out;
}

inline std::string delays_csv(const Histogram& h) {
  std::string out(kDelaysHeader);
  out += '\n';
  for (const auto& [v, c] : h.counts()) out += std::to_string(v) + ',' + std::to_string(c) + '\n';
  return out;
}

inline std::string deployments_csv(const std::vector<Deployment>& deps) {
  std::string out = "deployment,seed,bss,ap_x_m,ap_y_m,sta_x_m,sta_y_m\n";
  for (std::size_t i = 0; i < deps.size(); ++i)
    for (const auto& b : deps[i].bss)
      out += std::to_string(i) + ',' + std::to_string(deps[i].seed) + ',' + std::to_string(b.id) + ',' +
             fmt_detail::num(b.ap.x, 4) + ',' + fmt_detail::num(b.ap.y, 4) + ',' + fmt_detail::num(b.sta.x, 4) + ',' +
             fmt_detail::num(b.sta.y, 4) + '\n';
  return out;
}

inline std::string action_space_table(SrMode mode, const PowerCapRule& cap = {}) {
  std::string out = "index,cca_dbm,tx_power_dbm\n";
  const auto arms = build_action_space(mode);
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const auto cfg = effective_config(arms[i], mode, {}, cap);
    out += std::to_string(i) + ',' + fmt_detail::num(cfg.cca_dbm, 1) + ',' + fmt_detail::num(cfg.tx_power_dbm, 1) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single runs

struct SingleRun {
  Configuration configuration = Configuration::Dcf;
  int deployment = 0;
  std::uint64_t seed = 0;
  std::vector<KpiRecord> kpis;
  RunResult result;
};

inline SingleRun run_single(const ScenarioConfig& base, int deployment_index, Configuration conf,
                            RunOptions opts = {}) {
  const ScenarioConfig cfg = with_configuration(base, conf);
  require_valid(cfg);
  const std::uint64_t seed = deployment_seed(cfg.seed, deployment_index);
  const Deployment dep = generate_deployment(seed, cfg);
  SingleRun out{conf, deployment_index, seed, {}, simulate(cfg, dep, std::move(opts))};
  out.kpis = collect_run(out.result.attempts, out.result.n_bss, out.result.sim_time_us);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct RawRow {
  int deployment = 0;
  int bss = 0;
  double throughput_mbps = 0.0;
  double airtime = 0.0;
};

struct ConfigurationData {
  std::vector<RawRow> rows;
  Histogram delays_us;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << content;
}

inline ConfigurationData parse_configuration_data(const std::string& raw_csv, const std::string& delays_csv_text) {
  ConfigurationData d;
  std::istringstream raw(raw_csv);
  std::string line;
  std::getline(raw, line);
  if (line != kRawHeader) throw std::runtime_error("raw CSV: unexpected header '" + line + "'");
  while (std::getline(raw, line)) {
    if (line.empty()) continue;
    const auto f = fmt_detail::split(line);
    if (f.size() != 6) throw std::runtime_error("raw CSV: malformed row '" + line + "'");
    d.rows.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stod(f[2]), std::stod(f[3])});
  }
  std::istringstream del(delays_csv_text);
  std::getline(del, line);
  if (line != kDelaysHeader) throw std::runtime_error("delays CSV: unexpected header '" + line + "'");
  while (std::getline(del, line)) {
    if (line.empty()) continue;
    const auto f = fmt_detail::split(line);
    if (f.size() != 2) throw std::runtime_error("delays CSV: malformed row '" + line + "'");
    d.delays_us.add(std::stoll(f[0]), std::stoll(f[1]));
  }
  return d;
}

inline PercentileReport report_of(const ConfigurationData& d) {
  std::vector<double> thr, air;
  for (const auto& r : d.rows) {
    thr.push_back(r.throughput_mbps);
    air.push_back(r.airtime);
  }
  return {triple_of(std::move(thr)), triple_of_ms(d.delays_us), triple_of(std::move(air))};
}

inline std::string results_csv(const std::vector<std::pair<Configuration, PercentileReport>>& reports) {
  std::string out(kResultsHeader);
  out += '\n';
  auto row = [&out](Configuration c, std::string_view metric, const PercentileTriple& t) {
    out += std::string(to_string(c)) + ',' + std::string(metric) + ',' + fmt_detail::num(t.p25, 6) + ',' +
           fmt_detail::num(t.p50, 6) + ',' + fmt_detail::num(t.p75, 6) + ',' + std::to_string(t.n) + '\n';
  };
  for (const auto& [c, r] : reports) {
    row(c, "throughput_mbps", r.throughput_mbps);
    row(c, "delay_ms", r.delay_ms);
    row(c, "airtime", r.airtime);
  }
  return out;
}

// Nine axes per configuration: three metrics times three percentiles.
inline std::string spider_csv(const std::vector<std::pair<Configuration, PercentileReport>>& reports) {
  std::string out(kSpiderHeader);
  out += '\n';
  for (const auto& [c, r] : reports) {
    out += std::string(to_string(c));
    for (const auto* t : {&r.throughput_mbps, &r.delay_ms, &r.airtime})
      out += ',' + fmt_detail::num(t->p25, 6) + ',' + fmt_detail::num(t->p50, 6) + ',' + fmt_detail::num(t->p75, 6);
    out += '\n';
  }
  return out;
}

inline std::filesystem::path raw_path(const std::filesystem::path& dir, Configuration c) {
  return dir / ("raw_" + std::string(to_string(c)) + ".csv");
}

inline std::filesystem::path delays_path(const std::filesystem::path& dir, Configuration c) {
  return dir / ("delays_" + std::string(to_string(c)) + ".csv");
}

// Rebuilds results.csv (and spider.csv) from the raw and delay files in
// `dir`. Returns the configurations found.
inline std::vector<std::pair<Configuration, PercentileReport>> write_reports(const std::filesystem::path& dir,
                                                                             bool spider) {
  std::vector<std::pair<Configuration, PercentileReport>> reports;
  for (auto c : kAllConfigurations) {
    if (!std::filesystem::exists(raw_path(dir, c))) continue;
    const auto data = parse_configuration_data(read_file(raw_path(dir, c)), read_file(delays_path(dir, c)));
    if (data.rows.empty()) continue;
    reports.emplace_back(c, report_of(data));
  }
  if (reports.empty()) throw std::runtime_error("no raw results found in '" + dir.string() + "'");
  write_file(dir / "results.csv", results_csv(reports));
  if (spider) write_file(dir / "spider.csv", spider_csv(reports));
  return reports;
}

// ---------------------------------------------------------------------------
// Batches

struct ExperimentPlan {
  ScenarioConfig config;
  std::vector<Configuration> configurations{kAllConfigurations.begin(), kAllConfigurations.end()};
  std::filesystem::path out_dir = "results";
  int parallelism = 1;
  bool spider = false;
};

struct BatchOutcome {
  bool complete = true;
  int runs = 0;
  int failed = 0;
  std::vector<std::pair<Configuration, PercentileReport>> reports;
};

// Every configuration runs on the same deployment seeds (root + index), so
// comparisons are paired. Runs execute on `parallelism` workers; results are
// merged in (configuration, deployment) order, so outputs do not depend on
// scheduling.
inline BatchOutcome run_batch(const ExperimentPlan& plan) {
  require_valid(plan.config);
  for (auto c : plan.configurations) require_valid(with_configuration(plan.config, c));
  std::filesystem::create_directories(plan.out_dir);

  struct Job {
    Configuration conf;
    int deployment;
    std::uint64_t seed;
    bool ok = false;
    std::string error;
    std::string rows;
    Histogram delays;
  };
  std::vector<Job> jobs;
  const int n = plan.config.scenario.n_deployments;
  for (auto c : plan.configurations)
    for (int d = 0; d < n; ++d) jobs.push_back({c, d, deployment_seed(plan.config.seed, d), false, {}, {}, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& j = jobs[i];
      try {
        auto run = run_single(plan.config, j.deployment, j.conf);
        j.rows = raw_rows(j.deployment, run.kpis);
        for (const auto& k : run.kpis) j.delays.merge(k.delay_us);
        j.ok = true;
      } catch (const std::exception& e) {
        j.error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(plan.parallelism, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BatchOutcome outcome;
  outcome.runs = static_cast<int>(jobs.size());
  std::string manifest = "config,deployment,seed,status,output_hash\n";
  for (auto c : plan.configurations) {
    std::string raw(kRawHeader);
    raw += '\n';
    Histogram pooled;
    for (const auto& j : jobs) {
      if (j.conf != c) continue;
      const std::string hash = j.ok ? fmt_detail::hex64(fmt_detail::fnv1a(delays_csv(j.delays), fmt_detail::fnv1a(j.rows)))
                                    : std::string();
      manifest += std::string(to_string(c)) + ',' + std::to_string(j.deployment) + ',' + std::to_string(j.seed) + ',' +
                  (j.ok ? "ok" : "failed") + ',' + hash + '\n';
      if (!j.ok) {
        ++outcome.failed;
        outcome.complete = false;
        continue;
      }
      raw += j.rows;
      pooled.merge(j.delays);
    }
    write_file(raw_path(plan.out_dir, c), raw);
    write_file(delays_path(plan.out_dir, c), delays_csv(pooled));
  }
  manifest += std::string("# complete=") + (outcome.complete ? "true" : "false") + '\n';
  write_file(plan.out_dir / "manifest.csv", manifest);
  if (outcome.failed < outcome.runs) outcome.reports = write_reports(plan.out_dir, plan.spider);
  return outcome;
}

}  // namespace wifisr
