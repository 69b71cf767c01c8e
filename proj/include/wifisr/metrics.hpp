#pragma once

// Per-BSS KPIs of one run and the pooled 25/50/75-percentile report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wifisr/mac_dcf.hpp"
#include "wifisr/sim_core.hpp"

namespace wifisr {

// Linear interpolation between closest ranks: h = (n-1)p/100 + 1 (1-based).
inline double percentile_sorted(double p, std::span<const double> sorted) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty sample");
  if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile: p outside [0, 100]");
  const double h = static_cast<double>(sorted.size() - 1) * p / 100.0;  // 0-based position
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile(double p, std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return percentile_sorted(p, samples);
}

// Integer-valued samples stored as value -> multiplicity. Gives the same
// percentiles as the expanded, sorted sample list.
class Histogram {
 public:
  void add(std::int64_t value, std::int64_t count = 1) {
    if (count <= 0) return;
    counts_[value] += count;
    total_ += count;
  }
  void merge(const Histogram& o) {
    for (const auto& [v, c] : o.counts_) add(v, c);
  }

  std::int64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  const std::map<std::int64_t, std::int64_t>& counts() const { return counts_; }

  double percentile(double p) const {
    if (total_ == 0) throw std::invalid_argument("percentile: empty sample");
    if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile: p outside [0, 100]");
    const double h = static_cast<double>(total_ - 1) * p / 100.0;
    const auto lo = static_cast<std::int64_t>(std::floor(h));
    const double lo_v = static_cast<double>(value_at(lo));
    if (lo + 1 >= total_) return lo_v;
    return lo_v + (h - static_cast<double>(lo)) * (static_cast<double>(value_at(lo + 1)) - lo_v);
  }

  double median() const { return percentile(50.0); }

 private:
  // Value at 0-based rank in sorted order.
  std::int64_t value_at(std::int64_t rank) const {
    std::int64_t seen = 0;
    for (const auto& [v, c] : counts_) {
      seen += c;
      if (rank < seen) return v;
    }
    return counts_.rbegin()->first;
  }

  std::map<std::int64_t, std::int64_t> counts_;
  std::int64_t total_ = 0;
};

struct KpiRecord {
  int bss = 0;
  double throughput_mbps = 0.0;
  double airtime_fraction = 0.0;
  Histogram delay_us;  // head-of-line delay of every delivered A-MPDU
  std::int64_t attempts = 0;
  std::int64_t successes = 0;
};

// Throughput counts the payload of successful exchanges that completed
// within the horizon; airtime is the data-PPDU time of the same attempts.
inline std::vector<KpiRecord> collect_run(std::span<const TransmissionAttempt> attempts, int n_bss,
                                          SimTime horizon_us) {
  if (horizon_us <= 0) throw std::invalid_argument("collect_run: horizon must be positive");
  std::vector<KpiRecord> out(static_cast<std::size_t>(n_bss));
  std::vector<std::int64_t> bits(out.size(), 0);
  std::vector<SimTime> air(out.size(), 0);
  for (int b = 0; b < n_bss; ++b) out[b].bss = b;
  for (const auto& a : attempts) {
    if (a.ack_end >= horizon_us || a.outcome == Outcome::Pending) continue;
    auto& r = out.at(static_cast<std::size_t>(a.bss));
    ++r.attempts;
    air[a.bss] += a.end - a.start;
    if (a.outcome == Outcome::Success) {
      ++r.successes;
      bits[a.bss] += a.bits;
      r.delay_us.add(a.ack_end - a.hol_start);
    }
  }
  const double t = static_cast<double>(horizon_us);
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b].throughput_mbps = static_cast<double>(bits[b]) / t;
    out[b].airtime_fraction = static_cast<double>(air[b]) / t;
  }
  return out;
}

inline double jain_index(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("jain_index: empty input");
  double s = 0.0, s2 = 0.0;
  for (double v : x) {
    s += v;
    s2 += v * v;
  }
  if (s2 == 0.0) return 1.0;
  return s * s / (static_cast<double>(x.size()) * s2);
}

struct PercentileTriple {
  double p25 = std::nan("");
  double p50 = std::nan("");
  double p75 = std::nan("");
  std::int64_t n = 0;
};

inline PercentileTriple triple_of(std::vector<double> samples) {
  PercentileTriple t;
  t.n = static_cast<std::int64_t>(samples.size());
  if (samples.empty()) return t;
  std::sort(samples.begin(), samples.end());
  t.p25 = percentile_sorted(25, samples);
  t.p50 = percentile_sorted(50, samples);
  t.p75 = percentile_sorted(75, samples);
  return t;
}

// Delay statistics in milliseconds from a microsecond histogram.
inline PercentileTriple triple_of_ms(const Histogram& h) {
  PercentileTriple t;
  t.n = h.total();
  if (h.empty()) return t;
  t.p25 = h.percentile(25) / 1000.0;
  t.p50 = h.percentile(50) / 1000.0;
  t.p75 = h.percentile(75) / 1000.0;
  return t;
}

// Pooled statistics of one configuration across deployments.
struct PercentileReport {
  PercentileTriple throughput_mbps;
  PercentileTriple delay_ms;
  PercentileTriple airtime;
};

// Every (deployment, BSS) value enters one pool per metric; all delay
// samples are pooled. Sorting makes the result independent of input order.
inline PercentileReport aggregate(std::span<const std::vector<KpiRecord>> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  std::vector<double> thr, air;
  Histogram delays;
  for (const auto& run : runs) {
    for (const auto& r : run) {
      thr.push_back(r.throughput_mbps);
      air.push_back(r.airtime_fraction);
      delays.merge(r.delay_us);
    }
  }
  return {triple_of(std::move(thr)), triple_of_ms(delays), triple_of(std::move(air))};
}

}  // namespace wifisr
