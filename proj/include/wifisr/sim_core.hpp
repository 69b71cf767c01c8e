#pragma once

// Discrete-event engine: integer-microsecond clock, (time, seq)-ordered
// event queue with cancellation, and labeled reproducible random streams.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wifisr {

using SimTime = std::int64_t;  // microseconds since simulation start

inline constexpr SimTime kMicrosPerSecond = 1'000'000;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind : std::uint8_t { BackoffExpiry, TxEnd, EpochBoundary, SimEnd };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::BackoffExpiry: return "backoff-expiry";
    case EventKind::TxEnd: return "tx-end";
    case EventKind::EpochBoundary: return "epoch-boundary";
    case EventKind::SimEnd: return "sim-end";
  }
  return "unknown";
}

struct Event {
  SimTime fire_at = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::SimEnd;
  int subject = -1;  // node or agent index; -1 for global events

  friend bool operator<(const Event& a, const Event& b) {
    if (a.fire_at != b.fire_at) return a.fire_at < b.fire_at;
    return a.seq < b.seq;
  }
};

// Identifies a scheduled event so it can be cancelled later.
struct EventHandle {
  SimTime fire_at = 0;
  std::uint64_t seq = 0;
};

class EventQueue {
 public:
  SimTime now() const { return clock_; }
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }

  EventHandle schedule(SimTime fire_at, EventKind kind, int subject = -1) {
    if (fire_at < clock_) {
      throw ConfigError("event scheduled in the past: t=" + std::to_string(fire_at) +
                        " < clock=" + std::to_string(clock_));
    }
    Event ev{fire_at, next_seq_++, kind, subject};
    events_.insert(ev);
    return {ev.fire_at, ev.seq};
  }

  // Returns false if the event already fired or was cancelled.
  bool cancel(const EventHandle& h) {
    return events_.erase(Event{h.fire_at, h.seq, EventKind::SimEnd, -1}) > 0;
  }

  // Removes the minimal (fire_at, seq) event and advances the clock to it.
  // An empty result is the run-complete signal.
  std::optional<Event> pop_next() {
    if (events_.empty()) return std::nullopt;
    auto it = events_.begin();
    Event ev = *it;
    events_.erase(it);
    clock_ = ev.fire_at;
    return ev;
  }

 private:
  // Ordering only looks at (fire_at, seq), so lookups for cancel() ignore kind/subject.
  std::set<Event> events_;
  SimTime clock_ = 0;
  std::uint64_t next_seq_ = 0;
};

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

// Random stream keyed by (root_seed, label). The engine is std::mt19937_64,
// whose output sequence is fixed by the standard; the bounded-integer and
// real draws below are written out so results do not depend on the
// standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::string_view label)
      : root_seed_(root_seed),
        label_(label),
        engine_(detail::splitmix64(detail::splitmix64(root_seed) ^ detail::fnv1a64(label))) {}

  std::uint64_t root_seed() const { return root_seed_; }
  const std::string& label() const { return label_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform real in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t root_seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

inline RngStream substream(std::uint64_t root_seed, std::string_view label) {
  return RngStream(root_seed, label);
}

}  // namespace wifisr
