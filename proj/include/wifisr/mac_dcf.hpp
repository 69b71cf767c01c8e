#pragma once

// CSMA/CA (DCF) building blocks: contention window, backoff, A-MPDU airtime,
// reception resolution and head-of-line delay.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "wifisr/radio_phy.hpp"
#include "wifisr/sim_core.hpp"

namespace wifisr {

struct MacParams {
  int cw_min = 16;
  int max_stage = 5;
  int n_agg = 64;
  int frame_bits = 12000;
  int slot_us = 9;
  int difs_us = 34;
  int sifs_us = 16;
  int ack_us = 44;
  int phy_header_us = 44;
  int rate_window = 10;  // attempts remembered by link adaptation; 0 = link budget only

  std::int64_t ampdu_bits() const { return static_cast<std::int64_t>(n_agg) * frame_bits; }

  friend bool operator==(const MacParams&, const MacParams&) = default;
};

enum class Outcome : std::uint8_t { Pending, Success, Failure };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Pending: return "pending";
    case Outcome::Success: return "success";
    case Outcome::Failure: return "failure";
  }
  return "unknown";
}

struct BackoffState {
  int stage = 0;
  int counter = 0;  // remaining idle slots
  bool frozen = false;
};

// One A-MPDU on the air. [start, end) is the data PPDU; the exchange
// (SIFS + ACK) completes at ack_end. hol_start is the instant the A-MPDU
// became head-of-line, shared by all retries of the same A-MPDU.
struct TransmissionAttempt {
  int bss = 0;
  int tx_node = 0;
  int rx_node = 0;
  SimTime start = 0;
  SimTime end = 0;
  SimTime ack_end = 0;
  SimTime hol_start = 0;
  double tx_power_dbm = 0.0;
  int mcs = 0;
  std::int64_t bits = 0;
  Outcome outcome = Outcome::Pending;

  bool overlaps(const TransmissionAttempt& o) const { return start < o.end && o.start < end; }
};

// Link adaptation. The MCS follows the SINR the station can expect: the
// current signal over the median interference-plus-noise level measured on
// the link's last `window` attempts. An empty history means the noise floor,
// which is plain link-budget selection. Isolated collisions do not move the
// median; interference present on most attempts does.
class LinkRateControl {
 public:
  explicit LinkRateControl(int window = 10) : window_(std::max(0, window)) {}

  void observe(double interference_plus_noise_dbm) {
    if (window_ == 0) return;
    history_.push_back(interference_plus_noise_dbm);
    if (static_cast<int>(history_.size()) > window_) history_.pop_front();
  }

  double expected_interference_dbm(double noise_dbm) const {
    if (history_.empty()) return noise_dbm;
    std::vector<double> v(history_.begin(), history_.end());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  }

  // nullopt only when the link cannot reach the lowest MCS even without
  // interference; otherwise at least the lowest row is returned.
  std::optional<McsRow> choose(double signal_dbm, double noise_dbm, const McsTable& table) const {
    if (!select_mcs(signal_dbm - noise_dbm, table)) return std::nullopt;
    const auto expected = select_mcs(signal_dbm - expected_interference_dbm(noise_dbm), table);
    return expected ? *expected : table.rows().front();
  }

  std::size_t history_size() const { return history_.size(); }

 private:
  int window_;
  std::deque<double> history_;
};

enum class TrafficKind : std::uint8_t { FullBuffer };

inline int cw(int stage, const MacParams& p) {
  if (stage < 0) throw std::invalid_argument("cw: negative backoff stage");
  return p.cw_min << std::min(stage, p.max_stage);
}

inline int sample_backoff(int stage, RngStream& rng, const MacParams& p) {
  return static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(cw(stage, p))));
}

// PHY header plus ceil(bits / rate) microseconds of payload. A non-positive
// rate means the link is undecodable; callers treat that as a failed attempt.
inline SimTime tx_duration_us(std::int64_t bits, double rate_mbps, const MacParams& p) {
  if (!(rate_mbps > 0.0)) throw std::invalid_argument("tx_duration_us: rate must be positive");
  const double payload = std::ceil(static_cast<double>(bits) / rate_mbps - 1e-9);
  return p.phy_header_us + static_cast<SimTime>(std::max(0.0, payload));
}

// Worst-case interference: every transmitter overlapping the data PPDU
// counts at its configured power for the whole reception.
inline Outcome resolve_reception(const TransmissionAttempt& attempt,
                                 std::span<const TransmissionAttempt> concurrent,
                                 const LinkMatrix& links, double noise_dbm, const McsTable& table) {
  const McsRow* row = table.find(attempt.mcs);
  if (row == nullptr) return Outcome::Failure;
  std::vector<double> interferers;
  interferers.reserve(concurrent.size());
  for (const auto& c : concurrent) {
    if (c.tx_node == attempt.tx_node || !attempt.overlaps(c)) continue;
    interferers.push_back(links.rx_dbm(c.tx_node, attempt.rx_node, c.tx_power_dbm));
  }
  const double signal = links.rx_dbm(attempt.tx_node, attempt.rx_node, attempt.tx_power_dbm);
  return sinr_db(signal, interferers, noise_dbm) >= row->min_sinr_db ? Outcome::Success : Outcome::Failure;
}

inline BackoffState on_tx_outcome(BackoffState s, Outcome outcome, RngStream& rng, const MacParams& p) {
  s.stage = outcome == Outcome::Success ? 0 : std::min(s.stage + 1, p.max_stage);
  s.counter = sample_backoff(s.stage, rng, p);
  s.frozen = false;
  return s;
}

// Delay of one A-MPDU: from becoming head-of-line to the ACK of the
// successful attempt. The chain holds every attempt of that A-MPDU in order.
inline SimTime head_of_line_delay_us(std::span<const TransmissionAttempt> chain) {
  if (chain.empty() || chain.back().outcome != Outcome::Success)
    throw std::invalid_argument("head_of_line_delay: chain must end in a success");
  return chain.back().ack_end - chain.front().hol_start;
}

}  // namespace wifisr
