#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "cogmac/belief.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/strategy.hpp"

namespace cogmac {

// The value recursion runs over the count lattice rather than the exponential
// history tree: the posterior depends on the record only through per-channel
// (free, sensed) counts, for product-Beta and grid priors alike.

/// Count key layout: [remaining, x_0, y_0, x_1, y_1, ...].
using CountKey = std::vector<std::uint32_t>;

struct CountKeyHash {
  std::size_t operator()(const CountKey& k) const {
    std::size_t h = 1469598103934665603ULL;
    for (std::uint32_t v : k) {
      h ^= v;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

/// Posterior mean of every channel given the root belief and added counts
/// (x_i observed-free, y_i sensed). Counts are laid out [x_0, y_0, x_1, ...].
inline std::vector<double> posterior_means_given_counts(const Belief& root,
                                                        std::span<const std::uint32_t> counts) {
  const int n = n_channels(root);
  std::vector<double> means(static_cast<std::size_t>(n));
  if (const auto* beta = std::get_if<BetaBelief>(&root)) {
    for (int i = 0; i < n; ++i) {
      const double x = counts[static_cast<std::size_t>(2 * i)];
      const double y = counts[static_cast<std::size_t>(2 * i + 1)];
      means[static_cast<std::size_t>(i)] = (beta->a(i) + x) / (beta->a(i) + beta->b(i) + y);
    }
    return means;
  }
  const auto& grid = std::get<GridBelief>(root);
  const int m_points = grid.n_points();
  std::vector<double> w(static_cast<std::size_t>(m_points));
  double total = 0.0;
  for (int m = 0; m < m_points; ++m) {
    double wm = grid.weights()[static_cast<std::size_t>(m)];
    for (int i = 0; i < n; ++i) {
      const double t = grid.support()[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
      const double x = counts[static_cast<std::size_t>(2 * i)];
      const double y = counts[static_cast<std::size_t>(2 * i + 1)];
      if (x > 0) wm *= std::pow(t, x);
      if (y - x > 0) wm *= std::pow(1.0 - t, y - x);
    }
    w[static_cast<std::size_t>(m)] = wm;
    total += wm;
  }
  if (total <= 0.0)
    throw degenerate_evidence_error("posterior mass vanished for the requested counts");
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int m = 0; m < m_points; ++m)
      s += w[static_cast<std::size_t>(m)] *
           grid.support()[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
    means[static_cast<std::size_t>(i)] = s / total;
  }
  return means;
}

/// Optimal-plan output: the value of the block, the root action, and the
/// greedy action/value at every reachable (counts, remaining-horizon) state.
struct PlanResult {
  double value = 0.0;
  int first_action = 0;
  std::unordered_map<CountKey, int, CountKeyHash> policy;
  std::unordered_map<CountKey, double, CountKeyHash> values;

  static CountKey key(int remaining, std::span<const std::uint32_t> counts) {
    CountKey k;
    k.reserve(counts.size() + 1);
    k.push_back(static_cast<std::uint32_t>(remaining));
    k.insert(k.end(), counts.begin(), counts.end());
    return k;
  }

  int action(int remaining, std::span<const std::uint32_t> counts) const {
    const auto it = policy.find(key(remaining, counts));
    if (it == policy.end()) throw config_error("plan lookup: state was not reachable");
    return it->second;
  }
};

namespace detail {

/// Exact number of (counts, remaining) states the memo can hold for N channels
/// and horizon T: sum over depths d < T of the number of per-channel (x,y)
/// vectors with sum y_i = d, counted as prod (y_i + 1) over compositions.
inline double dp_state_count(int n, long horizon) {
  std::vector<double> g(static_cast<std::size_t>(horizon), 0.0);  // g[d], one channel
  for (long d = 0; d < horizon; ++d) g[static_cast<std::size_t>(d)] = static_cast<double>(d + 1);
  for (int c = 2; c <= n; ++c) {
    std::vector<double> next(static_cast<std::size_t>(horizon), 0.0);
    for (long d = 0; d < horizon; ++d) {
      double s = 0.0;
      for (long y = 0; y <= d; ++y)
        s += static_cast<double>(y + 1) * g[static_cast<std::size_t>(d - y)];
      next[static_cast<std::size_t>(d)] = s;
    }
    g.swap(next);
  }
  double total = 0.0;
  for (double v : g) total += v;
  return total;
}

class DpSolver {
 public:
  DpSolver(const Belief& root, double bits_per_slot, std::size_t max_states)
      : root_(root), n_(n_channels(root)), bits_(bits_per_slot), max_states_(max_states) {}

  double solve(std::vector<std::uint32_t>& counts, int remaining, PlanResult& out) {
    if (remaining == 0) return 0.0;
    CountKey key = PlanResult::key(remaining, counts);
    if (const auto it = out.values.find(key); it != out.values.end()) return it->second;

    const std::vector<double> means = posterior_means_given_counts(root_, counts);
    double best = -std::numeric_limits<double>::infinity();
    int best_action = 0;
    for (int i = 0; i < n_; ++i) {
      const double m = means[static_cast<std::size_t>(i)];
      double v = m * bits_;
      if (m > 0.0) {
        counts[static_cast<std::size_t>(2 * i)] += 1;
        counts[static_cast<std::size_t>(2 * i + 1)] += 1;
        v += m * solve(counts, remaining - 1, out);
        counts[static_cast<std::size_t>(2 * i)] -= 1;
        counts[static_cast<std::size_t>(2 * i + 1)] -= 1;
      }
      if (m < 1.0) {
        counts[static_cast<std::size_t>(2 * i + 1)] += 1;
        v += (1.0 - m) * solve(counts, remaining - 1, out);
        counts[static_cast<std::size_t>(2 * i + 1)] -= 1;
      }
      if (v > best) {
        best = v;
        best_action = i;
      }
    }
    if (out.values.size() >= max_states_)
      throw resource_limit_error("optimal_value memo exceeded max_states");
    out.values.emplace(key, best);
    out.policy.emplace(std::move(key), best_action);
    return best;
  }

 private:
  const Belief& root_;
  int n_;
  double bits_;
  std::size_t max_states_;
};

}  // namespace detail

/// Exact value of the block over all causal sensing strategies, by backward
/// induction on the count lattice. Refuses up front when the lattice would
/// exceed max_states.
inline PlanResult optimal_value(const Belief& prior, long horizon, double bits_per_slot,
                                std::size_t max_states = 10'000'000) {
  if (horizon < 1) throw config_error("optimal_value requires horizon >= 1");
  const double predicted = detail::dp_state_count(n_channels(prior), horizon);
  if (predicted > static_cast<double>(max_states))
    throw resource_limit_error("optimal_value: " + std::to_string(predicted) +
                               " states would exceed the budget of " +
                               std::to_string(max_states));
  PlanResult result;
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(2 * n_channels(prior)), 0);
  detail::DpSolver solver(prior, bits_per_slot, max_states);
  result.value = solver.solve(counts, static_cast<int>(horizon), result);
  result.first_action = result.policy.at(PlanResult::key(static_cast<int>(horizon), counts));
  return result;
}

/// Largest Bellman residual over every memoized state; exact optimality means
/// a residual at rounding noise.
inline double max_bellman_residual(const PlanResult& plan, const Belief& prior,
                                   double bits_per_slot) {
  const int n = n_channels(prior);
  double worst = 0.0;
  for (const auto& [key, value] : plan.values) {
    const int remaining = static_cast<int>(key[0]);
    std::span<const std::uint32_t> counts(key.data() + 1, static_cast<std::size_t>(2 * n));
    const std::vector<double> means = posterior_means_given_counts(prior, counts);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> child(counts.begin(), counts.end());
    for (int i = 0; i < n; ++i) {
      const double m = means[static_cast<std::size_t>(i)];
      double v = m * bits_per_slot;
      if (remaining > 1) {
        if (m > 0.0) {
          child[static_cast<std::size_t>(2 * i)] += 1;
          child[static_cast<std::size_t>(2 * i + 1)] += 1;
          v += m * plan.values.at(PlanResult::key(remaining - 1, child));
          child[static_cast<std::size_t>(2 * i)] -= 1;
          child[static_cast<std::size_t>(2 * i + 1)] -= 1;
        }
        if (m < 1.0) {
          child[static_cast<std::size_t>(2 * i + 1)] += 1;
          v += (1.0 - m) * plan.values.at(PlanResult::key(remaining - 1, child));
          child[static_cast<std::size_t>(2 * i + 1)] -= 1;
        }
      }
      best = std::max(best, v);
    }
    worst = std::max(worst, std::abs(best - value));
  }
  return worst;
}

struct StoppingOptions {
  double tolerance = 1e-10;
  std::size_t max_states = 10'000'000;
};

/// Index of the one-known-channel stopping problem: the per-sample value of
/// the unknown channel over strategies that sense it first and never come
/// back. Computed by calibration: the index is the unique lambda at which the
/// optimal stopping value of E[sum (Z - lambda)] hits zero.
inline double stopping_index(const Belief& belief1, long horizon, StoppingOptions opts = {}) {
  if (n_channels(belief1) != 1) throw config_error("stopping_index expects a 1-channel belief");
  if (horizon < 1) throw config_error("stopping_index requires horizon >= 1");
  const double states = 0.5 * static_cast<double>(horizon) * static_cast<double>(horizon + 1);
  if (states > static_cast<double>(opts.max_states))
    throw resource_limit_error("stopping_index: horizon too large for the state budget");

  // Posterior mean after x free among y sensed slots; table laid out by level.
  const long t = horizon;
  std::vector<std::vector<double>> mean(static_cast<std::size_t>(t));
  {
    std::vector<std::uint32_t> counts(2, 0);
    for (long y = 0; y < t; ++y) {
      auto& row = mean[static_cast<std::size_t>(y)];
      row.resize(static_cast<std::size_t>(y + 1));
      for (long x = 0; x <= y; ++x) {
        counts[0] = static_cast<std::uint32_t>(x);
        counts[1] = static_cast<std::uint32_t>(y);
        try {
          row[static_cast<std::size_t>(x)] = posterior_means_given_counts(belief1, counts)[0];
        } catch (const degenerate_evidence_error&) {
          row[static_cast<std::size_t>(x)] = 0.0;  // unreachable count state
        }
      }
    }
  }

  const auto root_value = [&](double lambda) {
    std::vector<double> next;  // value one level up (y + 1 observations)
    std::vector<double> cur;
    for (long y = t - 1; y >= 0; --y) {
      cur.assign(static_cast<std::size_t>(y + 1), 0.0);
      const bool may_continue = (y + 1) <= t - 1;
      for (long x = 0; x <= y; ++x) {
        const double m = mean[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
        const double on_free =
            may_continue ? std::max(0.0, next[static_cast<std::size_t>(x + 1)]) : 0.0;
        const double on_busy =
            may_continue ? std::max(0.0, next[static_cast<std::size_t>(x)]) : 0.0;
        cur[static_cast<std::size_t>(x)] =
            m * (1.0 - lambda + on_free) + (1.0 - m) * (-lambda + on_busy);
      }
      next.swap(cur);
    }
    return next[0];
  };

  double lo = 0.0, hi = 1.0;
  while (hi - lo > opts.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (root_value(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Two-channel policy for the one-known-channel problem: while on channel 1,
/// recompute the stopping index of the remaining horizon and switch to the
/// known channel 2 (for good) as soon as the index drops to theta2.
class OneKnownChannelStrategy : public SensingStrategy {
 public:
  OneKnownChannelStrategy(Belief belief1, double theta2, long horizon)
      : belief1_(std::move(belief1)), theta2_(theta2), horizon_(horizon) {
    if (n_channels(belief1_) != 1)
      throw config_error("OneKnownChannelStrategy expects a 1-channel belief");
    if (!(theta2 >= 0.0 && theta2 <= 1.0)) throw config_error("theta2 must lie in [0,1]");
    if (horizon < 1) throw config_error("horizon must be >= 1");
  }

  int choose() override {
    if (on_channel2_) return 1;
    const double index = stopping_index(belief1_, horizon_ - slot_ + 1);
    if (index <= theta2_) {
      on_channel2_ = true;
      return 1;
    }
    return 0;
  }

  void observe(int channel, int outcome) override {
    if (channel == 0) belief1_ = update_posterior(belief1_, 0, outcome);
    slot_ += 1;
  }

  bool switched() const { return on_channel2_; }

 private:
  Belief belief1_;
  double theta2_;
  long horizon_;
  long slot_ = 1;
  bool on_channel2_ = false;
};

/// Plays the exact DP policy computed from the prior at block start.
class OptimalDpStrategy : public SensingStrategy {
 public:
  OptimalDpStrategy(const Belief& prior, long horizon, double bits_per_slot,
                    std::size_t max_states = 10'000'000)
      : plan_(optimal_value(prior, horizon, bits_per_slot, max_states)),
        counts_(static_cast<std::size_t>(2 * n_channels(prior)), 0),
        remaining_(static_cast<int>(horizon)) {}

  int choose() override { return plan_.action(remaining_, counts_); }

  void observe(int channel, int outcome) override {
    counts_[static_cast<std::size_t>(2 * channel)] += static_cast<std::uint32_t>(outcome);
    counts_[static_cast<std::size_t>(2 * channel + 1)] += 1;
    remaining_ -= 1;
  }

  const PlanResult& plan() const { return plan_; }

 private:
  PlanResult plan_;
  std::vector<std::uint32_t> counts_;
  int remaining_;
};

}  // namespace cogmac
