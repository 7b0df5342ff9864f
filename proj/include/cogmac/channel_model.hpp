#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "cogmac/errors.hpp"
#include "cogmac/rng.hpp"

namespace cogmac {

/// Per-channel availability probabilities: the hidden block parameter.
class ThetaVector {
 public:
  explicit ThetaVector(std::vector<double> values) : v_(std::move(values)) {
    if (v_.empty()) throw config_error("theta vector must have at least one channel");
    for (double t : v_) {
      if (!(t >= 0.0 && t <= 1.0)) throw config_error("theta entries must lie in [0,1]");
    }
  }

  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return v_; }

  double max_value() const { return *std::max_element(v_.begin(), v_.end()); }
  int best_channel() const {
    return static_cast<int>(std::max_element(v_.begin(), v_.end()) - v_.begin());
  }
  double sum() const {
    double s = 0.0;
    for (double t : v_) s += t;
    return s;
  }

 private:
  std::vector<double> v_;
};

/// Experiment geometry: a block of n_slots slots over n_channels channels,
/// shared by n_users cognitive users, with B bits sent per free sensed slot.
struct BlockConfig {
  int n_channels = 1;
  long n_slots = 1;
  double bits_per_slot = 1.0;
  int n_users = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_channels < 1) throw config_error("n_channels must be >= 1");
    if (n_slots < 1) throw config_error("n_slots must be >= 1");
    if (n_users < 1) throw config_error("n_users must be >= 1");
    if (!(bits_per_slot >= 0.0)) throw config_error("bits_per_slot must be >= 0");
  }
};

/// One block's worth of channel-free indicators, row per channel.
class ChannelRealization {
 public:
  ChannelRealization(int n_channels, long n_slots)
      : n_channels_(n_channels),
        n_slots_(n_slots),
        z_(static_cast<std::size_t>(n_channels) * static_cast<std::size_t>(n_slots), 0) {}

  int n_channels() const { return n_channels_; }
  long n_slots() const { return n_slots_; }

  int at(int channel, long slot) const {
    return z_[static_cast<std::size_t>(channel) * static_cast<std::size_t>(n_slots_) +
              static_cast<std::size_t>(slot)];
  }
  void set(int channel, long slot, int value) {
    z_[static_cast<std::size_t>(channel) * static_cast<std::size_t>(n_slots_) +
       static_cast<std::size_t>(slot)] = static_cast<std::uint8_t>(value);
  }

  /// Number of free channels in the given slot.
  int free_count(long slot) const {
    int c = 0;
    for (int i = 0; i < n_channels_; ++i) c += at(i, slot);
    return c;
  }

 private:
  int n_channels_;
  long n_slots_;
  std::vector<std::uint8_t> z_;
};

/// Draw the N x T table of independent Bernoulli(theta_i) indicators.
inline ChannelRealization generate_block(const ThetaVector& theta, long n_slots, Rng& rng) {
  if (n_slots < 1) throw config_error("n_slots must be >= 1");
  ChannelRealization z(theta.size(), n_slots);
  for (int i = 0; i < theta.size(); ++i) {
    for (long j = 0; j < n_slots; ++j) {
      z.set(i, j, rng.bernoulli(theta[i]) ? 1 : 0);
    }
  }
  return z;
}

}  // namespace cogmac
