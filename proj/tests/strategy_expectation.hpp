#pragma once

// Test-side exact evaluation of a strategy's expected block payoff under a
// prior, by recursion over the full outcome tree. Used to check that no
// implemented strategy beats the optimal planner.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cogmac/belief.hpp"
#include "cogmac/planning.hpp"

namespace cogmac::testing {

using History = std::vector<std::pair<int, int>>;
using ChoiceDist = std::function<std::vector<double>(const History&)>;

/// Expected payoff of a (possibly randomized) rule given as a map from the
/// observation history to a channel distribution.
inline double exact_expected_payoff(const Belief& prior, int horizon, double bits,
                                    const ChoiceDist& dist) {
  const int n = n_channels(prior);
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(2 * n), 0);
  History history;

  std::function<double(int)> recurse = [&](int remaining) -> double {
    if (remaining == 0) return 0.0;
    const auto means = posterior_means_given_counts(prior, counts);
    const auto probs = dist(history);
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
      const double q = probs[static_cast<std::size_t>(i)];
      if (q <= 0.0) continue;
      const double m = means[static_cast<std::size_t>(i)];
      double v = m * bits;
      if (m > 0.0) {
        counts[static_cast<std::size_t>(2 * i)] += 1;
        counts[static_cast<std::size_t>(2 * i + 1)] += 1;
        history.emplace_back(i, 1);
        v += m * recurse(remaining - 1);
        history.pop_back();
        counts[static_cast<std::size_t>(2 * i)] -= 1;
        counts[static_cast<std::size_t>(2 * i + 1)] -= 1;
      }
      if (m < 1.0) {
        counts[static_cast<std::size_t>(2 * i + 1)] += 1;
        history.emplace_back(i, 0);
        v += (1.0 - m) * recurse(remaining - 1);
        history.pop_back();
        counts[static_cast<std::size_t>(2 * i + 1)] -= 1;
      }
      value += q * v;
    }
    return value;
  };
  return recurse(horizon);
}

/// Expected payoff of a deterministic strategy object, replayed along every
/// outcome path (the strategy is copied at each branch).
template <typename Strategy>
inline double exact_expected_payoff_replay(const Belief& prior, int horizon, double bits,
                                           const Strategy& root) {
  const int n = n_channels(prior);
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(2 * n), 0);

  std::function<double(const Strategy&, int)> recurse = [&](const Strategy& s,
                                                            int remaining) -> double {
    if (remaining == 0) return 0.0;
    Strategy current = s;
    const int i = current.choose();
    const auto means = posterior_means_given_counts(prior, counts);
    const double m = means[static_cast<std::size_t>(i)];
    double v = m * bits;
    if (m > 0.0) {
      Strategy next = current;
      next.observe(i, 1);
      counts[static_cast<std::size_t>(2 * i)] += 1;
      counts[static_cast<std::size_t>(2 * i + 1)] += 1;
      v += m * recurse(next, remaining - 1);
      counts[static_cast<std::size_t>(2 * i)] -= 1;
      counts[static_cast<std::size_t>(2 * i + 1)] -= 1;
    }
    if (m < 1.0) {
      Strategy next = current;
      next.observe(i, 0);
      counts[static_cast<std::size_t>(2 * i + 1)] += 1;
      v += (1.0 - m) * recurse(next, remaining - 1);
      counts[static_cast<std::size_t>(2 * i + 1)] -= 1;
    }
    return v;
  };
  return recurse(root, horizon);
}

inline ChoiceDist uniform_dist(int n) {
  return [n](const History&) {
    return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
  };
}

/// Stay-with-winner as a history map: uniform start, repeat on a win, and on
/// a loss move round-robin or uniformly to another channel.
inline ChoiceDist stay_with_winner_dist(int n, bool round_robin) {
  return [n, round_robin](const History& h) {
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    if (h.empty()) {
      for (double& v : p) v = 1.0 / n;
      return p;
    }
    const auto [c, z] = h.back();
    if (z || n == 1) {
      p[static_cast<std::size_t>(c)] = 1.0;
    } else if (round_robin) {
      p[static_cast<std::size_t>((c + 1) % n)] = 1.0;
    } else {
      for (int i = 0; i < n; ++i)
        if (i != c) p[static_cast<std::size_t>(i)] = 1.0 / (n - 1);
    }
    return p;
  };
}

}  // namespace cogmac::testing
