#pragma once

// Experiment configuration (closed JSON schema) and random deployments.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wifisr/bandit.hpp"
#include "wifisr/mac_dcf.hpp"
#include "wifisr/radio_phy.hpp"
#include "wifisr/sim_core.hpp"
#include "wifisr/sr_actions.hpp"

namespace wifisr {

struct ScenarioSettings {
  int n_deployments = 100;
  double side_m = 20.0;
  int n_bss = 4;
  double sim_time_s = 100.0;
  TrafficKind traffic = TrafficKind::FullBuffer;

  friend bool operator==(const ScenarioSettings&, const ScenarioSettings&) = default;
};

struct AgentSettings {
  std::optional<SrMode> mode;  // nullopt: plain DCF, no agents
  RewardKind reward = RewardKind::Dec;
  double epoch_s = 1.0;
  double epsilon0 = 1.0;
  PowerCapRule cap{};

  friend bool operator==(const AgentSettings&, const AgentSettings&) = default;
};

struct ScenarioConfig {
  ScenarioSettings scenario{};
  RadioConfig radio{};
  PathLossParams pathloss{};
  MacParams mac{};
  McsTable mcs = McsTable::default_table();
  AgentSettings agent{};
  std::uint64_t seed = 1;

  SimTime sim_time_us() const { return std::llround(scenario.sim_time_s * kMicrosPerSecond); }
  SimTime epoch_us() const { return std::llround(agent.epoch_s * kMicrosPerSecond); }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline constexpr double kStaMinDistanceM = 1.0;
inline constexpr double kStaMaxDistanceM = 5.0;

inline std::vector<std::string> validate_config(const ScenarioConfig& c) {
  std::vector<std::string> v;
  auto need = [&v](bool ok, std::string msg) {
    if (!ok) v.push_back(std::move(msg));
  };
  auto whole_us = [](double seconds) {
    const double us = seconds * kMicrosPerSecond;
    return std::abs(us - std::round(us)) < 1e-6;
  };

  need(c.scenario.n_deployments > 0, "scenario.n_deployments must be positive");
  need(c.scenario.side_m >= 2 * kStaMaxDistanceM, "scenario.side_m must be at least 10 m (twice the station radius)");
  need(c.scenario.n_bss > 0, "scenario.n_bss must be positive");
  need(c.scenario.sim_time_s > 0.0, "scenario.sim_time_s must be positive");
  need(whole_us(c.scenario.sim_time_s), "scenario.sim_time_s must be a whole number of microseconds");

  need(is_tx_power_level(c.radio.tx_power_dbm), "radio.tx_power_dbm must be one of {5, 10, 15, 20}");
  need(is_cca_level(c.radio.cca_dbm), "radio.cca_dbm must be one of {-82, -78, -74, -70, -66, -62}");
  need(c.radio.freq_ghz > 0.0, "radio.freq_ghz must be positive");
  need(c.radio.bw_mhz > 0.0, "radio.bw_mhz must be positive");
  need(std::isfinite(c.radio.noise_dbm), "radio.noise_dbm must be finite");

  need(c.pathloss.pl_1m_db > 0.0, "pathloss.pl_1m_db must be positive");
  need(c.pathloss.gamma >= 2.0, "pathloss.gamma must be >= 2");

  need(c.mac.cw_min > 0, "mac.cw_min must be positive");
  need(c.mac.max_stage >= 0 && c.mac.max_stage <= 20, "mac.max_stage must be in [0, 20]");
  need(c.mac.n_agg > 0, "mac.n_agg must be positive");
  need(c.mac.frame_bits > 0, "mac.frame_bits must be positive");
  need(c.mac.slot_us > 0, "mac.slot_us must be positive");
  need(c.mac.difs_us > 0, "mac.difs_us must be positive");
  need(c.mac.sifs_us >= 0, "mac.sifs_us must be non-negative");
  need(c.mac.ack_us >= 0, "mac.ack_us must be non-negative");
  need(c.mac.phy_header_us >= 0, "mac.phy_header_us must be non-negative");
  need(c.mac.rate_window >= 0, "mac.rate_window must be non-negative");

  if (auto err = McsTable::check(c.mcs.rows())) v.push_back("mcs.table: " + *err);

  need(c.agent.epoch_s > 0.0, "agent.epoch_s must be positive");
  need(c.agent.epsilon0 > 0.0 && c.agent.epsilon0 <= 1.0, "agent.epsilon0 must be in (0, 1]");
  if (c.agent.epoch_s > 0.0 && c.scenario.sim_time_s > 0.0) {
    const bool ok = whole_us(c.agent.epoch_s) && c.epoch_us() > 0 && c.sim_time_us() % c.epoch_us() == 0;
    need(ok, "agent.epoch_s must divide scenario.sim_time_s");
  }
  need(c.agent.cap.obss_pd_min_dbm <= kCcaLevelsDbm.front(),
       "agent.obss_pd_min_dbm must not exceed the lowest carrier-sense level");
  return v;
}

inline void require_valid(const ScenarioConfig& c) {
  const auto v = validate_config(c);
  if (v.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& s : v) msg += "\n  " + s;
  throw ConfigError(msg);
}

// ---------------------------------------------------------------------------
// Config file I/O

inline std::string agent_mode_name(const std::optional<SrMode>& m) {
  return m ? std::string(to_string(*m)) : std::string("dcf");
}

inline std::optional<SrMode> parse_agent_mode(std::string_view s) {
  if (s == "dcf") return std::nullopt;
  return parse_sr_mode(s);
}

inline nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = {{"n_deployments", c.scenario.n_deployments},
                   {"side_m", c.scenario.side_m},
                   {"n_bss", c.scenario.n_bss},
                   {"sim_time_s", c.scenario.sim_time_s},
                   {"traffic", "full-buffer"}};
  j["radio"] = {{"tx_power_dbm", c.radio.tx_power_dbm},
                {"cca_dbm", c.radio.cca_dbm},
                {"freq_ghz", c.radio.freq_ghz},
                {"bw_mhz", c.radio.bw_mhz},
                {"noise_dbm", c.radio.noise_dbm}};
  j["pathloss"] = {{"pl_1m_db", c.pathloss.pl_1m_db}, {"gamma", c.pathloss.gamma}};
  j["mac"] = {{"cw_min", c.mac.cw_min},   {"max_stage", c.mac.max_stage},
              {"n_agg", c.mac.n_agg},     {"frame_bits", c.mac.frame_bits},
              {"slot_us", c.mac.slot_us}, {"difs_us", c.mac.difs_us},
              {"sifs_us", c.mac.sifs_us}, {"ack_us", c.mac.ack_us},
              {"phy_header_us", c.mac.phy_header_us}, {"rate_window", c.mac.rate_window}};
  auto table = nlohmann::ordered_json::array();
  for (const auto& r : c.mcs.rows())
    table.push_back({{"index", r.index}, {"min_sinr_db", r.min_sinr_db}, {"rate_mbps", r.rate_mbps}});
  j["mcs"] = {{"table", table}};
  j["agent"] = {{"mode", agent_mode_name(c.agent.mode)},
                {"reward", std::string(to_string(c.agent.reward))},
                {"epoch_s", c.agent.epoch_s},
                {"epsilon0", c.agent.epsilon0},
                {"txp_ref_dbm", c.agent.cap.txp_ref_dbm},
                {"obss_pd_min_dbm", c.agent.cap.obss_pd_min_dbm}};
  j["seed"] = c.seed;
  return j;
}

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Best-effort line lookup for a "section.key" path in the source text.
inline int line_of_key(const std::string& text, const std::string& section, const std::string& key) {
  std::size_t from = 0;
  if (!section.empty()) {
    const auto s = text.find('"' + section + '"');
    if (s == std::string::npos) return 0;
    from = s;
  }
  const auto k = text.find('"' + key + '"', from);
  return k == std::string::npos ? 0 : line_of_offset(text, k);
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    const std::string field = section.empty() ? key : section + "." + key;
    const int line = line_of_key(text_, section, key);
    throw ConfigError("config field '" + field + "'" + (line > 0 ? " (line " + std::to_string(line) + ")" : "") +
                      ": " + what);
  }

  void check_keys(const nlohmann::json& obj, const std::string& section,
                  std::initializer_list<std::string_view> allowed) const {
    if (!obj.is_object()) fail("", section, "expected an object");
    for (const auto& [k, _] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail(section, k, "unknown field");
    }
  }

  template <typename T>
  void read(const nlohmann::json& obj, const std::string& section, const std::string& key, T& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(section, key, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(section, key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) out = v.get<T>();
        else if (v.get<std::int64_t>() < 0) fail(section, key, "expected a non-negative integer");
        else out = static_cast<T>(v.get<std::int64_t>());
      } else {
        out = v.get<T>();
      }
    } else {
      if (!v.is_number()) fail(section, key, "expected a number");
      out = v.get<T>();
    }
  }

  const std::string& text() const { return text_; }

 private:
  const std::string& text_;
};

}  // namespace detail

// Parses a config document. Absent fields keep their defaults; unknown
// fields and type mismatches are hard errors naming the field and line.
inline ScenarioConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error at line " +
                      std::to_string(detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)) + ": " + e.what());
  }
  detail::ConfigReader r(text);
  r.check_keys(j, "", {"scenario", "radio", "pathloss", "mac", "mcs", "agent", "seed"});

  ScenarioConfig c;
  const auto empty = nlohmann::json::object();
  auto section = [&](const char* name) -> const nlohmann::json& { return j.contains(name) ? j.at(name) : empty; };

  {
    const auto& s = section("scenario");
    r.check_keys(s, "scenario", {"n_deployments", "side_m", "n_bss", "sim_time_s", "traffic"});
    r.read(s, "scenario", "n_deployments", c.scenario.n_deployments);
    r.read(s, "scenario", "side_m", c.scenario.side_m);
    r.read(s, "scenario", "n_bss", c.scenario.n_bss);
    r.read(s, "scenario", "sim_time_s", c.scenario.sim_time_s);
    std::string traffic = "full-buffer";
    r.read(s, "scenario", "traffic", traffic);
    if (traffic != "full-buffer") r.fail("scenario", "traffic", "only 'full-buffer' is supported");
  }
  {
    const auto& s = section("radio");
    r.check_keys(s, "radio", {"tx_power_dbm", "cca_dbm", "freq_ghz", "bw_mhz", "noise_dbm"});
    r.read(s, "radio", "tx_power_dbm", c.radio.tx_power_dbm);
    r.read(s, "radio", "cca_dbm", c.radio.cca_dbm);
    r.read(s, "radio", "freq_ghz", c.radio.freq_ghz);
    r.read(s, "radio", "bw_mhz", c.radio.bw_mhz);
    r.read(s, "radio", "noise_dbm", c.radio.noise_dbm);
  }
  {
    const auto& s = section("pathloss");
    r.check_keys(s, "pathloss", {"pl_1m_db", "gamma"});
    r.read(s, "pathloss", "pl_1m_db", c.pathloss.pl_1m_db);
    r.read(s, "pathloss", "gamma", c.pathloss.gamma);
  }
  {
    const auto& s = section("mac");
    r.check_keys(s, "mac", {"cw_min", "max_stage", "n_agg", "frame_bits", "slot_us", "difs_us", "sifs_us", "ack_us",
                            "phy_header_us", "rate_window"});
    r.read(s, "mac", "cw_min", c.mac.cw_min);
    r.read(s, "mac", "max_stage", c.mac.max_stage);
    r.read(s, "mac", "n_agg", c.mac.n_agg);
    r.read(s, "mac", "frame_bits", c.mac.frame_bits);
    r.read(s, "mac", "slot_us", c.mac.slot_us);
    r.read(s, "mac", "difs_us", c.mac.difs_us);
    r.read(s, "mac", "sifs_us", c.mac.sifs_us);
    r.read(s, "mac", "ack_us", c.mac.ack_us);
    r.read(s, "mac", "phy_header_us", c.mac.phy_header_us);
    r.read(s, "mac", "rate_window", c.mac.rate_window);
  }
  {
    const auto& s = section("mcs");
    r.check_keys(s, "mcs", {"table"});
    if (s.contains("table")) {
      const auto& t = s.at("table");
      if (!t.is_array()) r.fail("mcs", "table", "expected a list of rows");
      std::vector<McsRow> rows;
      for (const auto& row : t) {
        r.check_keys(row, "mcs.table", {"index", "min_sinr_db", "rate_mbps"});
        McsRow m;
        if (!row.contains("index") || !row.contains("min_sinr_db") || !row.contains("rate_mbps"))
          r.fail("mcs", "table", "each row needs index, min_sinr_db and rate_mbps");
        r.read(row, "mcs", "index", m.index);
        r.read(row, "mcs", "min_sinr_db", m.min_sinr_db);
        r.read(row, "mcs", "rate_mbps", m.rate_mbps);
        rows.push_back(m);
      }
      if (auto err = McsTable::check(rows)) r.fail("mcs", "table", *err);
      c.mcs = McsTable(std::move(rows));
    }
  }
  {
    const auto& s = section("agent");
    r.check_keys(s, "agent", {"mode", "reward", "epoch_s", "epsilon0", "txp_ref_dbm", "obss_pd_min_dbm"});
    std::string mode = agent_mode_name(c.agent.mode);
    std::string reward(to_string(c.agent.reward));
    r.read(s, "agent", "mode", mode);
    r.read(s, "agent", "reward", reward);
    try {
      c.agent.mode = parse_agent_mode(mode);
    } catch (const ConfigError& e) {
      r.fail("agent", "mode", e.what());
    }
    try {
      c.agent.reward = parse_reward_kind(reward);
    } catch (const ConfigError& e) {
      r.fail("agent", "reward", e.what());
    }
    r.read(s, "agent", "epoch_s", c.agent.epoch_s);
    r.read(s, "agent", "epsilon0", c.agent.epsilon0);
    r.read(s, "agent", "txp_ref_dbm", c.agent.cap.txp_ref_dbm);
    r.read(s, "agent", "obss_pd_min_dbm", c.agent.cap.obss_pd_min_dbm);
  }
  r.read(j, "", "seed", c.seed);
  return c;
}

inline std::string dump_config(const ScenarioConfig& c) { return to_json(c).dump(2) + "\n"; }

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline void save_config(const std::string& path, const ScenarioConfig& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << dump_config(c);
}

// ---------------------------------------------------------------------------
// Deployments

struct BssPlacement {
  int id = 0;
  Position ap{};
  Position sta{};

  friend bool operator==(const BssPlacement&, const BssPlacement&) = default;
};

// Node numbering: AP of BSS i is node i, its station is node n_bss + i.
struct Deployment {
  std::uint64_t seed = 0;
  double side_m = 0.0;
  std::vector<BssPlacement> bss;

  int n_bss() const { return static_cast<int>(bss.size()); }
  int ap_node(int b) const { return b; }
  int sta_node(int b) const { return n_bss() + b; }

  std::vector<Position> node_positions() const {
    std::vector<Position> p;
    p.reserve(bss.size() * 2);
    for (const auto& b : bss) p.push_back(b.ap);
    for (const auto& b : bss) p.push_back(b.sta);
    return p;
  }

  friend bool operator==(const Deployment&, const Deployment&) = default;
};

inline std::uint64_t deployment_seed(std::uint64_t root_seed, int index) {
  return root_seed + static_cast<std::uint64_t>(index);
}

inline Deployment generate_deployment(std::uint64_t seed, const ScenarioConfig& c) {
  RngStream rng = substream(seed, "deployment");
  const double side = c.scenario.side_m;
  Deployment d{seed, side, {}};
  for (int b = 0; b < c.scenario.n_bss; ++b) {
    BssPlacement p{b, {rng.uniform(0.0, side), rng.uniform(0.0, side)}, {}};
    // The distance is drawn once so it stays uniform on [1, 5]; only the
    // angle is redrawn. With side >= 2 * 5 m some quadrant always fits.
    const double dist = rng.uniform(kStaMinDistanceM, kStaMaxDistanceM);
    for (;;) {
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Position s{p.ap.x + dist * std::cos(angle), p.ap.y + dist * std::sin(angle)};
      if (s.x >= 0.0 && s.x <= side && s.y >= 0.0 && s.y <= side) {
        p.sta = s;
        break;
      }
    }
    d.bss.push_back(p);
  }
  return d;
}

}  // namespace wifisr
