#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wifisr/sim_core.hpp"

namespace wifisr {

struct Position {
  double x = 0.0;  // m
  double y = 0.0;  // m

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance_m(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct PathLossParams {
  double pl_1m_db = 48.0;
  double gamma = 4.4;

  friend bool operator==(const PathLossParams&, const PathLossParams&) = default;
};

struct RadioConfig {
  double tx_power_dbm = 20.0;
  double cca_dbm = -82.0;
  double freq_ghz = 6.0;
  double bw_mhz = 20.0;
  double noise_dbm = -94.0;

  friend bool operator==(const RadioConfig&, const RadioConfig&) = default;
};

struct McsRow {
  int index = 0;
  double min_sinr_db = 0.0;
  double rate_mbps = 0.0;

  friend bool operator==(const McsRow&, const McsRow&) = default;
};

class McsTable {
 public:
  McsTable() = default;

  // Throws ConfigError unless thresholds and rates are strictly increasing.
  explicit McsTable(std::vector<McsRow> rows) : rows_(std::move(rows)) {
    if (auto err = check(rows_)) throw ConfigError(*err);
  }

  static std::optional<std::string> check(const std::vector<McsRow>& rows) {
    if (rows.empty()) return "mcs table is empty";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].rate_mbps <= 0.0) return "mcs rate must be positive";
      if (i > 0 && !(rows[i].min_sinr_db > rows[i - 1].min_sinr_db))
        return "mcs min_sinr_db must be strictly increasing";
      if (i > 0 && !(rows[i].rate_mbps > rows[i - 1].rate_mbps))
        return "mcs rate_mbps must be strictly increasing";
      if (i > 0 && !(rows[i].index > rows[i - 1].index))
        return "mcs index must be strictly increasing";
    }
    return std::nullopt;
  }

  // 20 MHz, one spatial stream, 0.8 us GI.
  static McsTable default_table() {
    return McsTable({{0, 3, 8.6},    {1, 6, 17.2},    {2, 9, 25.8},    {3, 12, 34.4},
                     {4, 16, 51.6},  {5, 19, 68.8},   {6, 21, 77.4},   {7, 23, 86.0},
                     {8, 27, 103.2}, {9, 29, 114.7},  {10, 32, 129.0}, {11, 34, 143.4}});
  }

  const std::vector<McsRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  const McsRow& top() const { return rows_.back(); }

  const McsRow* find(int mcs_index) const {
    for (const auto& r : rows_)
      if (r.index == mcs_index) return &r;
    return nullptr;
  }

  friend bool operator==(const McsTable&, const McsTable&) = default;

 private:
  std::vector<McsRow> rows_;
};

inline constexpr double kMinDistanceM = 0.1;
inline constexpr double kNoPowerDbm = -std::numeric_limits<double>::infinity();

inline double path_loss_db(double distance_m, const PathLossParams& p) {
  const double d = std::max(distance_m, kMinDistanceM);
  return p.pl_1m_db + 10.0 * p.gamma * std::log10(d);
}

inline double rx_power_dbm(double tx_dbm, double loss_db) { return tx_dbm - loss_db; }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double mw_to_dbm(double mw) { return mw > 0.0 ? 10.0 * std::log10(mw) : kNoPowerDbm; }

// Power sum in the linear domain. An empty list yields -inf.
inline double aggregate_power_dbm(std::span<const double> components_dbm) {
  double total_mw = 0.0;
  for (double p : components_dbm) total_mw += dbm_to_mw(p);
  return mw_to_dbm(total_mw);
}

inline double sinr_db(double signal_dbm, std::span<const double> interferers_dbm, double noise_dbm) {
  double total_mw = dbm_to_mw(noise_dbm);
  for (double p : interferers_dbm) total_mw += dbm_to_mw(p);
  return signal_dbm - mw_to_dbm(total_mw);
}

inline bool carrier_sense_busy(double aggregate_dbm, double cca_dbm) { return aggregate_dbm > cca_dbm; }

// Highest row whose threshold the SINR meets; nullopt when undecodable.
inline std::optional<McsRow> select_mcs(double sinr, const McsTable& table) {
  std::optional<McsRow> best;
  for (const auto& r : table.rows()) {
    if (r.min_sinr_db <= sinr) best = r;
    else break;
  }
  return best;
}

// Symmetric path-loss lookup between every pair of placed nodes.
class LinkMatrix {
 public:
  LinkMatrix() = default;
  LinkMatrix(std::vector<Position> nodes, const PathLossParams& params)
      : n_(nodes.size()), loss_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) {
        const double l = path_loss_db(distance_m(nodes[i], nodes[j]), params);
        loss_[i * n_ + j] = l;
        loss_[j * n_ + i] = l;
      }
  }

  std::size_t size() const { return n_; }
  double loss_db(int from, int to) const { return loss_[static_cast<std::size_t>(from) * n_ + to]; }
  double rx_dbm(int from, int to, double tx_dbm) const { return rx_power_dbm(tx_dbm, loss_db(from, to)); }

 private:
  std::size_t n_ = 0;
  std::vector<double> loss_;
};

}  // namespace wifisr
