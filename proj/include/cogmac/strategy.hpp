#pragma once

namespace cogmac {

/// A sensing strategy drives one cognitive user through a block: choose() names
/// the channel to sense this slot, observe() feeds back the sensing outcome for
/// that channel. The harness calls them strictly alternately, once per slot.
class SensingStrategy {
 public:
  virtual ~SensingStrategy() = default;

  /// Channel to sense this slot (0-based).
  virtual int choose() = 0;

  /// Sensing outcome for the channel returned by the matching choose() call.
  virtual void observe(int channel, int outcome) = 0;
};

}  // namespace cogmac
