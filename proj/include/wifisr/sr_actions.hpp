#pragma once

// Spatial-reuse action spaces. An arm is a (carrier-sense threshold,
// transmit power) pair; in the 802.11ax-constrained mode the power is
// capped by the OBSS/PD linear rule before it reaches the AP.

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "wifisr/radio_phy.hpp"
#include "wifisr/sim_core.hpp"

namespace wifisr {

enum class SrMode : std::uint8_t { Constrained11ax, Free };

inline constexpr std::array<double, 6> kCcaLevelsDbm{-82, -78, -74, -70, -66, -62};
inline constexpr std::array<double, 4> kTxPowerLevelsDbm{5, 10, 15, 20};
inline constexpr double kDefaultTxPowerDbm = 20.0;
inline constexpr double kDefaultCcaDbm = -82.0;

inline std::string_view to_string(SrMode m) { return m == SrMode::Free ? "free" : "11axsr"; }

inline SrMode parse_sr_mode(std::string_view s) {
  if (s == "11axsr") return SrMode::Constrained11ax;
  if (s == "free") return SrMode::Free;
  throw ConfigError("unknown sr mode '" + std::string(s) + "' (expected 11axsr|free)");
}

struct Arm {
  double cca_dbm = kDefaultCcaDbm;
  double tx_power_dbm = kDefaultTxPowerDbm;

  friend bool operator==(const Arm&, const Arm&) = default;
};

struct PowerCapRule {
  double txp_ref_dbm = 21.0;
  double obss_pd_min_dbm = -82.0;

  friend bool operator==(const PowerCapRule&, const PowerCapRule&) = default;
};

inline bool is_cca_level(double c) {
  return std::find(kCcaLevelsDbm.begin(), kCcaLevelsDbm.end(), c) != kCcaLevelsDbm.end();
}

inline bool is_tx_power_level(double p) {
  return std::find(kTxPowerLevelsDbm.begin(), kTxPowerLevelsDbm.end(), p) != kTxPowerLevelsDbm.end();
}

// Constrained: one arm per C at the default power. Free: C ascending, then P ascending.
inline std::vector<Arm> build_action_space(SrMode mode) {
  std::vector<Arm> arms;
  for (double c : kCcaLevelsDbm) {
    if (mode == SrMode::Constrained11ax) {
      arms.push_back({c, kDefaultTxPowerDbm});
    } else {
      for (double p : kTxPowerLevelsDbm) arms.push_back({c, p});
    }
  }
  return arms;
}

inline double max_tx_power_dbm(double cca_dbm, const PowerCapRule& rule = {}) {
  if (cca_dbm < rule.obss_pd_min_dbm)
    throw ConfigError("carrier-sense threshold " + std::to_string(cca_dbm) + " dBm is below OBSS/PD minimum");
  return rule.txp_ref_dbm - (cca_dbm - rule.obss_pd_min_dbm);
}

inline RadioConfig effective_config(const Arm& arm, SrMode mode, RadioConfig base = {},
                                    const PowerCapRule& rule = {}) {
  base.cca_dbm = arm.cca_dbm;
  base.tx_power_dbm = mode == SrMode::Constrained11ax
                          ? std::min(arm.tx_power_dbm, max_tx_power_dbm(arm.cca_dbm, rule))
                          : arm.tx_power_dbm;
  return base;
}

}  // namespace wifisr
