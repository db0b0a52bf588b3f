#pragma once

#include <array>
#include <atomic>
#include <cstdint>

#include "memu/mrloop.hpp"

namespace memu {

/// Single-producer single-consumer latest-value slot (triple buffer). The
/// writer always overwrites, the reader never blocks and sees the most recent
/// complete value.
template <class T>
class LatestValue {
 public:
  void publish(const T& value) {
    slots_[write_] = value;
    const std::uint8_t prev = state_.exchange(write_ | kFresh, std::memory_order_acq_rel);
    write_ = prev & kIndex;
  }

  /// Returns false until the first value has been published.
  bool read(T& out) {
    if (state_.load(std::memory_order_acquire) & kFresh) {
      const std::uint8_t prev = state_.exchange(read_, std::memory_order_acq_rel);
      read_ = prev & kIndex;
      has_value_ = true;
    }
    if (!has_value_) return false;
    out = slots_[read_];
    return true;
  }

 private:
  static constexpr std::uint8_t kIndex = 0x3;
  static constexpr std::uint8_t kFresh = 0x4;

  std::array<T, 3> slots_{};
  std::atomic<std::uint8_t> state_{2};
  std::uint8_t write_ = 0;  // producer-owned
  std::uint8_t read_ = 1;   // consumer-owned
  bool has_value_ = false;
};

/// Soft real-time replay: the policy and the controller+backend+physics run in
/// separate threads paced by the wall clock and exchange observations and
/// actions through LatestValue mailboxes. Timing-dependent, so not
/// reproducible; `time_scale` > 1 runs slower than real time.
EpisodeTrace run_realtime_replay(const EpisodeSpec& spec, const Policy& policy,
                                 double time_scale = 1.0);

}  // namespace memu
