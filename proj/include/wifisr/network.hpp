#pragma once

// Full-buffer downlink simulation of overlapping BSSs: one AP->STA link per
// BSS, CSMA/CA contention among APs, and optional per-AP bandit agents that
// reconfigure carrier sensing and transmit power at epoch boundaries.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wifisr/bandit.hpp"
#include "wifisr/mac_dcf.hpp"
#include "wifisr/radio_phy.hpp"
#include "wifisr/scenario.hpp"
#include "wifisr/sim_core.hpp"

namespace wifisr {

struct RunOptions {
  bool trace_events = false;
  // Per-BSS override of which APs carry an agent. Defaults to all APs when
  // the config selects an agent mode and none otherwise.
  std::optional<std::vector<bool>> agent_mask;
  // Per-BSS radio configuration for APs without an agent. Defaults to config.radio.
  std::optional<std::vector<RadioConfig>> static_radio;
};

struct RunStats {
  std::uint64_t events = 0;
  std::uint64_t aborted_attempts = 0;  // no decodable MCS at the chosen power
  std::uint64_t cca_violations = 0;    // starts while a strictly earlier transmission was sensed busy
  std::vector<std::int64_t> undelivered_at_end;  // per BSS, head-of-line A-MPDUs still pending at T
};

struct RunResult {
  SimTime sim_time_us = 0;
  int n_bss = 0;
  std::vector<TransmissionAttempt> attempts;  // completed exchanges, in completion order
  std::vector<AgentDecision> agent_log;
  std::string event_trace;  // tab-separated, only with RunOptions::trace_events
  RunStats stats;
};

class Network {
 public:
  Network(const ScenarioConfig& cfg, const Deployment& dep, RunOptions opts = {})
      : cfg_(cfg),
        dep_(dep),
        opts_(std::move(opts)),
        links_(dep.node_positions(), cfg.pathloss),
        n_bss_(dep.n_bss()),
        horizon_(cfg.sim_time_us()),
        epoch_len_(cfg.epoch_us()),
        bus_(static_cast<std::size_t>(n_bss_)) {
    require_valid(cfg_);
    const std::uint64_t seed = dep_.seed;
    std::vector<bool> mask = opts_.agent_mask.value_or(std::vector<bool>(n_bss_, cfg_.agent.mode.has_value()));
    if (static_cast<int>(mask.size()) != n_bss_) throw ConfigError("agent mask size does not match BSS count");
    if (opts_.static_radio && static_cast<int>(opts_.static_radio->size()) != n_bss_)
      throw ConfigError("static radio list size does not match BSS count");

    AgentParams ap;
    if (cfg_.agent.mode) ap.mode = *cfg_.agent.mode;
    ap.reward = cfg_.agent.reward;
    ap.schedule.epsilon0 = cfg_.agent.epsilon0;
    ap.reward_norm_mbps = cfg_.mcs.top().rate_mbps;
    ap.cap = cfg_.agent.cap;

    nodes_.reserve(n_bss_);
    for (int b = 0; b < n_bss_; ++b) {
      Node n(substream(seed, "backoff/ap" + std::to_string(b)), cfg_.mac.rate_window);
      n.radio = opts_.static_radio ? (*opts_.static_radio)[b] : cfg_.radio;
      nodes_.push_back(std::move(n));
      if (mask[b]) {
        if (!cfg_.agent.mode) throw ConfigError("agent mask set but agent.mode is dcf");
        agents_.emplace_back(b, ap, cfg_.radio, substream(seed, "agent/" + std::to_string(b)));
      }
    }
    n_epochs_ = static_cast<int>(horizon_ / epoch_len_);
    epoch_bits_.assign(n_bss_, std::vector<std::int64_t>(n_epochs_ + 1, 0));
  }

  RunResult run() {
    result_ = {};
    result_.sim_time_us = horizon_;
    result_.n_bss = n_bss_;
    result_.stats.undelivered_at_end.assign(n_bss_, 0);

    queue_.schedule(horizon_, EventKind::SimEnd);
    for (auto& a : agents_) nodes_[a.bss()].radio = a.begin();
    if (!agents_.empty() && n_epochs_ > 1) queue_.schedule(epoch_len_, EventKind::EpochBoundary);

    for (auto& n : nodes_) {
      n.backoff.counter = sample_backoff(0, n.rng, cfg_.mac);
      n.busy = true;  // forces an idle transition (and a countdown) at t = 0
    }
    update_sensing(0);

    while (auto ev = queue_.pop_next()) {
      ++result_.stats.events;
      if (opts_.trace_events) {
        trace_ << ev->fire_at << '\t' << ev->seq << '\t' << to_string(ev->kind) << '\t' << ev->subject << '\n';
      }
      switch (ev->kind) {
        case EventKind::BackoffExpiry: on_backoff_expiry(ev->subject, ev->fire_at); break;
        case EventKind::TxEnd: on_tx_end(ev->subject, ev->fire_at); break;
        case EventKind::EpochBoundary: on_epoch_boundary(ev->fire_at); break;
        case EventKind::SimEnd: on_sim_end(); break;
      }
      if (ev->kind == EventKind::SimEnd) break;
    }
    result_.event_trace = trace_.str();
    return std::move(result_);
  }

 private:
  struct ActiveTx {
    TransmissionAttempt attempt;
    std::vector<TransmissionAttempt> overlapping;
  };

  struct Node {
    Node(RngStream r, int rate_window) : rng(std::move(r)), rate(rate_window) {}

    RngStream rng;
    RadioConfig radio{};
    BackoffState backoff{};
    bool transmitting = false;
    bool busy = false;
    SimTime countdown_origin = 0;  // start of the current idle period (DIFS runs from here)
    std::optional<EventHandle> expiry;
    SimTime hol_start = 0;
    LinkRateControl rate;
  };

  double sensed_dbm(int node, bool only_earlier, SimTime now) const {
    double mw = 0.0;
    for (const auto& a : active_) {
      if (a.attempt.tx_node == node) continue;
      if (only_earlier && a.attempt.start >= now) continue;
      mw += dbm_to_mw(links_.rx_dbm(a.attempt.tx_node, node, a.attempt.tx_power_dbm));
    }
    return mw_to_dbm(mw);
  }

  // Interference plus noise at the station over the worst-case overlap set,
  // as reported back to the AP after the exchange.
  double interference_at_receiver(const ActiveTx& tx) const {
    std::vector<double> levels{nodes_[tx.attempt.bss].radio.noise_dbm};
    for (const auto& o : tx.overlapping)
      if (o.tx_node != tx.attempt.tx_node && tx.attempt.overlaps(o))
        levels.push_back(links_.rx_dbm(o.tx_node, tx.attempt.rx_node, o.tx_power_dbm));
    return aggregate_power_dbm(levels);
  }

  void schedule_expiry(int i, SimTime now) {
    Node& n = nodes_[i];
    n.countdown_origin = now;
    const SimTime at = now + cfg_.mac.difs_us + static_cast<SimTime>(n.backoff.counter) * cfg_.mac.slot_us;
    n.expiry = queue_.schedule(at, EventKind::BackoffExpiry, i);
    n.backoff.frozen = false;
  }

  void freeze(int i, SimTime now) {
    Node& n = nodes_[i];
    if (!n.expiry) return;
    // A transmission starting in the very instant the counter hits zero
    // cannot be detected in time; the node transmits and the two collide.
    // Energy that was already on the air still blocks it.
    if (now >= n.expiry->fire_at && !carrier_sense_busy(sensed_dbm(i, true, now), n.radio.cca_dbm)) return;
    const SimTime counted = now - n.countdown_origin - cfg_.mac.difs_us;
    if (counted > 0) n.backoff.counter -= static_cast<int>(counted / cfg_.mac.slot_us);
    queue_.cancel(*n.expiry);
    n.expiry.reset();
    n.backoff.frozen = true;
  }

  void update_sensing(SimTime now) {
    for (int i = 0; i < n_bss_; ++i) {
      Node& n = nodes_[i];
      if (n.transmitting) continue;
      const bool busy = carrier_sense_busy(sensed_dbm(i, false, now), n.radio.cca_dbm);
      if (busy == n.busy) continue;
      n.busy = busy;
      if (busy) freeze(i, now);
      else if (!n.expiry) schedule_expiry(i, now);
    }
  }

  void on_backoff_expiry(int i, SimTime now) {
    Node& n = nodes_[i];
    n.expiry.reset();
    if (carrier_sense_busy(sensed_dbm(i, true, now), n.radio.cca_dbm)) ++result_.stats.cca_violations;

    const int ap = dep_.ap_node(i);
    const int sta = dep_.sta_node(i);
    const double signal = links_.rx_dbm(ap, sta, n.radio.tx_power_dbm);
    const auto mcs = n.rate.choose(signal, n.radio.noise_dbm, cfg_.mcs);
    if (!mcs) {
      ++result_.stats.aborted_attempts;
      n.backoff = on_tx_outcome(n.backoff, Outcome::Failure, n.rng, cfg_.mac);
      if (!n.busy) schedule_expiry(i, now);
      return;
    }

    TransmissionAttempt a;
    a.bss = i;
    a.tx_node = ap;
    a.rx_node = sta;
    a.start = now;
    a.bits = cfg_.mac.ampdu_bits();
    a.end = now + tx_duration_us(a.bits, mcs->rate_mbps, cfg_.mac);
    a.ack_end = a.end + cfg_.mac.sifs_us + cfg_.mac.ack_us;
    a.hol_start = n.hol_start;
    a.tx_power_dbm = n.radio.tx_power_dbm;
    a.mcs = mcs->index;

    ActiveTx tx{a, {}};
    for (auto& other : active_) {
      if (other.attempt.end > now) {
        other.overlapping.push_back(a);
        tx.overlapping.push_back(other.attempt);
      }
    }
    active_.push_back(std::move(tx));
    n.transmitting = true;
    queue_.schedule(a.ack_end, EventKind::TxEnd, i);
    update_sensing(now);
  }

  void on_tx_end(int i, SimTime now) {
    Node& n = nodes_[i];
    auto it = std::find_if(active_.begin(), active_.end(), [i](const ActiveTx& t) { return t.attempt.bss == i; });
    if (it == active_.end()) throw std::logic_error("tx-end without an active transmission");
    TransmissionAttempt a = it->attempt;
    a.outcome = resolve_reception(a, it->overlapping, links_, n.radio.noise_dbm, cfg_.mcs);
    n.rate.observe(interference_at_receiver(*it));
    active_.erase(it);

    if (a.outcome == Outcome::Success) {
      n.hol_start = now;
      const auto epoch = static_cast<std::size_t>(now / epoch_len_);
      if (epoch < epoch_bits_[i].size()) epoch_bits_[i][epoch] += a.bits;
    }
    result_.attempts.push_back(a);
    n.backoff = on_tx_outcome(n.backoff, a.outcome, n.rng, cfg_.mac);
    n.transmitting = false;
    n.busy = true;  // re-evaluated below; an idle channel starts a fresh countdown
    update_sensing(now);
  }

  void close_epoch(long epoch_index) {
    // epoch_index is 0-based; completions at exactly the boundary belong to the next epoch.
    const double norm = cfg_.mcs.top().rate_mbps;
    const double span_us = static_cast<double>(epoch_len_);
    std::vector<double> thr(n_bss_);
    bus_.clear();
    for (int b = 0; b < n_bss_; ++b) {
      thr[b] = static_cast<double>(epoch_bits_[b][epoch_index]) / span_us;  // bits/us == Mb/s
      bus_.publish(b, std::min(1.0, thr[b] / norm));
    }
    for (auto& agent : agents_) {
      auto step = agent.epoch_step(thr[agent.bss()], bus_);
      result_.agent_log.push_back(step.closed);
      nodes_[agent.bss()].radio = step.next;
    }
  }

  void on_epoch_boundary(SimTime now) {
    const long k = static_cast<long>(now / epoch_len_);
    close_epoch(k - 1);
    update_sensing(now);
    if (k + 1 < n_epochs_) queue_.schedule((k + 1) * epoch_len_, EventKind::EpochBoundary);
  }

  void on_sim_end() {
    if (!agents_.empty()) close_epoch(n_epochs_ - 1);
    for (int b = 0; b < n_bss_; ++b) result_.stats.undelivered_at_end[b] = 1;  // full buffer: one A-MPDU is always head-of-line
  }

  ScenarioConfig cfg_;
  Deployment dep_;
  RunOptions opts_;
  LinkMatrix links_;
  int n_bss_;
  SimTime horizon_;
  SimTime epoch_len_;
  int n_epochs_ = 1;
  EventQueue queue_;
  std::vector<Node> nodes_;
  std::vector<BanditAgent> agents_;
  CoordinationBus bus_;
  std::vector<ActiveTx> active_;
  std::vector<std::vector<std::int64_t>> epoch_bits_;
  std::ostringstream trace_;
  RunResult result_;
};

inline RunResult simulate(const ScenarioConfig& cfg, const Deployment& dep, RunOptions opts = {}) {
  return Network(cfg, dep, std::move(opts)).run();
}

}  // namespace wifisr
