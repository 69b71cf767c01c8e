#pragma once

// Per-AP epsilon-greedy bandit agents with decentralized (own throughput)
// and coordinated (network max-min throughput) rewards.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wifisr/radio_phy.hpp"
#include "wifisr/sim_core.hpp"
#include "wifisr/sr_actions.hpp"

namespace wifisr {

enum class RewardKind : std::uint8_t { Dec, Coord };

inline std::string_view to_string(RewardKind r) { return r == RewardKind::Coord ? "coord" : "dec"; }

inline RewardKind parse_reward_kind(std::string_view s) {
  if (s == "dec") return RewardKind::Dec;
  if (s == "coord") return RewardKind::Coord;
  throw ConfigError("unknown reward kind '" + std::string(s) + "' (expected dec|coord)");
}

struct EpsilonSchedule {
  double epsilon0 = 1.0;
};

// eps_t = eps0 / sqrt(t), clamped to [0, 1].
inline double epsilon(long t, const EpsilonSchedule& sched = {}) {
  if (t < 1) throw std::invalid_argument("epsilon: epoch index must be >= 1");
  return std::clamp(sched.epsilon0 / std::sqrt(static_cast<double>(t)), 0.0, 1.0);
}

inline double reward_dec(double own_throughput_mbps, double norm_mbps) {
  if (!(norm_mbps > 0.0)) throw ConfigError("reward normalizer must be positive");
  return std::min(1.0, own_throughput_mbps / norm_mbps);
}

// Normalized per-BSS throughputs published for one epoch. Entries stay
// empty until the owning BSS reports.
class CoordinationBus {
 public:
  explicit CoordinationBus(std::size_t n_bss = 0) : values_(n_bss) {}

  void clear() { std::fill(values_.begin(), values_.end(), std::nullopt); }
  void publish(std::size_t bss, double normalized_throughput) { values_.at(bss) = normalized_throughput; }
  std::size_t size() const { return values_.size(); }
  std::span<const std::optional<double>> snapshot() const { return values_; }

 private:
  std::vector<std::optional<double>> values_;
};

inline double reward_coord(std::span<const std::optional<double>> snapshot) {
  if (snapshot.empty()) throw std::invalid_argument("reward_coord: empty snapshot");
  double worst = 1.0;
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    if (!snapshot[i]) throw std::invalid_argument("reward_coord: missing KPI for bss " + std::to_string(i));
    worst = std::min(worst, *snapshot[i]);
  }
  return worst;
}

inline double reward_coord(std::span<const double> snapshot) {
  if (snapshot.empty()) throw std::invalid_argument("reward_coord: empty snapshot");
  return *std::min_element(snapshot.begin(), snapshot.end());
}

struct AgentState {
  std::vector<long> arm_count;
  std::vector<double> arm_mean;
  long t = 1;
  int current_arm = -1;

  explicit AgentState(std::size_t n_arms = 0) : arm_count(n_arms, 0), arm_mean(n_arms, 0.0) {}
  std::size_t n_arms() const { return arm_mean.size(); }
};

// Uniform arm with probability eps, otherwise an argmax of the means with a
// uniform tie-break among maximizers.
inline int select_arm(std::span<const double> means, double eps, RngStream& rng) {
  if (means.empty()) throw std::invalid_argument("select_arm: empty action space");
  // The exploration coin is always drawn so the stream consumption does not depend on eps.
  const bool explore = rng.uniform01() < eps;
  if (explore) return static_cast<int>(rng.uniform_below(means.size()));
  const double best = *std::max_element(means.begin(), means.end());
  std::vector<int> ties;
  for (std::size_t i = 0; i < means.size(); ++i)
    if (means[i] == best) ties.push_back(static_cast<int>(i));
  if (ties.size() == 1) return ties.front();
  return ties[rng.uniform_below(ties.size())];
}

inline int select_arm(const AgentState& s, RngStream& rng, const EpsilonSchedule& sched = {}) {
  return select_arm(s.arm_mean, epsilon(s.t, sched), rng);
}

inline void update(AgentState& s, int arm, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) throw std::invalid_argument("update: reward outside [0, 1]");
  const auto i = static_cast<std::size_t>(arm);
  s.arm_count.at(i) += 1;
  s.arm_mean[i] += (reward - s.arm_mean[i]) / static_cast<double>(s.arm_count[i]);
  s.t += 1;
}

struct AgentParams {
  SrMode mode = SrMode::Constrained11ax;
  RewardKind reward = RewardKind::Dec;
  EpsilonSchedule schedule{};
  double reward_norm_mbps = 143.4;
  PowerCapRule cap{};
};

// Row of the per-epoch agent log.
struct AgentDecision {
  long epoch = 0;
  int bss = 0;
  int arm = 0;
  RadioConfig config{};
  double reward = 0.0;
  double epsilon = 0.0;
};

// One agent attached to one AP. begin() picks the configuration for the
// first epoch; each epoch_step() closes an epoch and returns the decision
// for that epoch together with the configuration for the next one.
class BanditAgent {
 public:
  BanditAgent(int bss, AgentParams params, RadioConfig base, RngStream rng)
      : bss_(bss),
        params_(params),
        base_(base),
        arms_(build_action_space(params.mode)),
        state_(arms_.size()),
        rng_(std::move(rng)) {}

  int bss() const { return bss_; }
  const AgentState& state() const { return state_; }
  const std::vector<Arm>& arms() const { return arms_; }
  const AgentParams& params() const { return params_; }

  RadioConfig begin() { return choose(); }

  // Read KPIs, compute the reward, update the estimate of the arm
  // that was active, pick the next arm, map it to a radio configuration.
  struct Step {
    AgentDecision closed;
    RadioConfig next;
  };

  Step epoch_step(double own_throughput_mbps, const CoordinationBus& bus) {
    if (state_.current_arm < 0) throw std::logic_error("epoch_step before begin");
    const double r = params_.reward == RewardKind::Dec ? reward_dec(own_throughput_mbps, params_.reward_norm_mbps)
                                                       : reward_coord(bus.snapshot());
    AgentDecision closed{state_.t, bss_, state_.current_arm, current_config(), r, last_epsilon_};
    update(state_, state_.current_arm, r);
    return {closed, choose()};
  }

  RadioConfig current_config() const {
    return effective_config(arms_.at(static_cast<std::size_t>(state_.current_arm)), params_.mode, base_, params_.cap);
  }

 private:
  RadioConfig choose() {
    last_epsilon_ = epsilon(state_.t, params_.schedule);
    state_.current_arm = select_arm(state_.arm_mean, last_epsilon_, rng_);
    return current_config();
  }

  int bss_;
  AgentParams params_;
  RadioConfig base_;
  std::vector<Arm> arms_;
  AgentState state_;
  RngStream rng_;
  double last_epsilon_ = 1.0;
};

}  // namespace wifisr
