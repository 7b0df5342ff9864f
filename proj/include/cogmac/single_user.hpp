#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "cogmac/belief.hpp"
#include "cogmac/channel_model.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/rng.hpp"
#include "cogmac/strategy.hpp"

namespace cogmac {

/// Sensing tallies: x_i = slots channel i was observed free, y_i = slots
/// channel i was sensed, slot = current 1-based slot counter.
struct CountStats {
  std::vector<long> observed_free;  // X
  std::vector<long> sensed;         // Y
  long slot = 1;

  explicit CountStats(int n_channels)
      : observed_free(static_cast<std::size_t>(n_channels), 0),
        sensed(static_cast<std::size_t>(n_channels), 0) {}

  double estimate(int i) const {
    return static_cast<double>(observed_free[static_cast<std::size_t>(i)]) /
           static_cast<double>(sensed[static_cast<std::size_t>(i)]);
  }
};

/// Single index of the order-optimal rule: x/y + sqrt(2 ln j / y).
inline double ucb_index(double x, double y, double j) {
  if (!(y >= 1.0)) throw config_error("ucb_index requires y >= 1");
  if (!(j >= 1.0)) throw config_error("ucb_index requires j >= 1");
  return x / y + std::sqrt(2.0 * std::log(j) / y);
}

/// Order-optimal single-index strategy: sense each channel once, then follow
/// the largest index, ties to the lowest channel.
class Rule1Strategy : public SensingStrategy {
 public:
  explicit Rule1Strategy(int n_channels) : n_(n_channels), stats_(n_channels) {
    if (n_channels < 1) throw config_error("Rule1Strategy needs n_channels >= 1");
  }

  int choose() override {
    if (stats_.slot <= n_) return static_cast<int>(stats_.slot - 1);
    int best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_; ++i) {
      const double idx = ucb_index(static_cast<double>(stats_.observed_free[i]),
                                   static_cast<double>(stats_.sensed[i]),
                                   static_cast<double>(stats_.slot));
      if (idx > best_index) {
        best_index = idx;
        best = i;
      }
    }
    return best;
  }

  void observe(int channel, int outcome) override {
    stats_.observed_free[static_cast<std::size_t>(channel)] += outcome;
    stats_.sensed[static_cast<std::size_t>(channel)] += 1;
    stats_.slot += 1;
  }

  const CountStats& stats() const { return stats_; }

 private:
  int n_;
  CountStats stats_;
};

/// Uniform random channel each slot.
class RandomStrategy : public SensingStrategy {
 public:
  RandomStrategy(int n_channels, Rng rng) : n_(n_channels), rng_(rng) {
    if (n_channels < 1) throw config_error("RandomStrategy needs n_channels >= 1");
  }

  int choose() override { return rng_.uniform_int(n_); }
  void observe(int, int) override {}

 private:
  int n_;
  Rng rng_;
};

/// Greedy rule: keep the posterior updated, sense the channel with the largest
/// posterior mean, ties to the lowest channel.
class MyopicStrategy : public SensingStrategy {
 public:
  explicit MyopicStrategy(Belief prior) : belief_(std::move(prior)) {}

  static MyopicStrategy with_uniform_prior(int n_channels) {
    return MyopicStrategy(BetaBelief::uniform(n_channels));
  }

  int choose() override {
    const int n = n_channels(belief_);
    int best = 0;
    double best_mean = -1.0;
    for (int i = 0; i < n; ++i) {
      const double m = posterior_mean(belief_, i);
      if (m > best_mean) {
        best_mean = m;
        best = i;
      }
    }
    return best;
  }

  void observe(int channel, int outcome) override {
    belief_ = update_posterior(belief_, channel, outcome);
  }

  const Belief& belief() const { return belief_; }

 private:
  Belief belief_;
};

enum class SwitchRule { kRoundRobin, kUniformRandom };

/// Stay with the winner, switch from the loser. Initial channel is uniform;
/// a busy outcome triggers the switch rule, a free outcome repeats the channel.
class StayWithWinnerStrategy : public SensingStrategy {
 public:
  StayWithWinnerStrategy(int n_channels, SwitchRule rule, Rng rng)
      : n_(n_channels), rule_(rule), rng_(rng) {
    if (n_channels < 1) throw config_error("StayWithWinnerStrategy needs n_channels >= 1");
  }

  int choose() override {
    if (current_ < 0) current_ = rng_.uniform_int(n_);
    return current_;
  }

  void observe(int channel, int outcome) override {
    if (outcome) return;
    if (n_ == 1) return;
    if (rule_ == SwitchRule::kRoundRobin) {
      current_ = (channel + 1) % n_;
    } else {
      int pick = rng_.uniform_int(n_ - 1);
      if (pick >= channel) ++pick;
      current_ = pick;
    }
  }

 private:
  int n_;
  SwitchRule rule_;
  Rng rng_;
  int current_ = -1;
};

/// KL divergence between Bernoulli(p) and Bernoulli(q), with 0 ln 0 := 0.
/// Returns +infinity when q is degenerate and p != q.
inline double kl_bernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw config_error("kl_bernoulli: p must lie in [0,1]");
  if (!(q >= 0.0 && q <= 1.0)) throw config_error("kl_bernoulli: q must lie in [0,1]");
  if (q <= 0.0 || q >= 1.0) {
    if (p == q) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  double d = 0.0;
  if (p > 0.0) d += p * std::log(p / q);
  if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return d;
}

/// Coefficient of the logarithmic loss lower bound:
/// B * sum_{i != i*} (theta* - theta_i) / D(theta_i || theta*).
/// Channels tied with the maximum contribute 0; an infinite divergence
/// (theta* degenerate) contributes 0 in the limit.
inline double regret_lower_bound_coefficient(const ThetaVector& theta, double bits_per_slot) {
  const double star = theta.max_value();
  double coeff = 0.0;
  for (int i = 0; i < theta.size(); ++i) {
    if (theta[i] >= star) continue;
    const double d = kl_bernoulli(theta[i], star);
    if (std::isinf(d)) continue;  // (theta* - theta_i)/inf -> 0
    coeff += (star - theta[i]) / d;
  }
  return bits_per_slot * coeff;
}

/// Throughput gap to the clairvoyant best-channel user.
struct LossReport {
  double realized_loss = 0.0;          // B * (T theta* - free slots actually won)
  double expected_loss = 0.0;          // B * sum_i (theta* - theta_i) * pulls_i
  double lower_bound_coefficient = 0.0;
  std::vector<long> per_channel_pulls;
};

inline LossReport compute_loss(const ThetaVector& theta, const std::vector<long>& pull_counts,
                               long n_slots, double bits_per_slot, long free_slots_won) {
  if (static_cast<int>(pull_counts.size()) != theta.size())
    throw config_error("compute_loss: pull_counts size must match theta");
  long total = 0;
  for (long c : pull_counts) total += c;
  if (total != n_slots) throw config_error("compute_loss: pull counts must sum to n_slots");

  const double star = theta.max_value();
  LossReport report;
  report.per_channel_pulls = pull_counts;
  for (int i = 0; i < theta.size(); ++i)
    report.expected_loss +=
        bits_per_slot * (star - theta[i]) * static_cast<double>(pull_counts[i]);
  report.realized_loss =
      bits_per_slot * (static_cast<double>(n_slots) * star - static_cast<double>(free_slots_won));
  report.lower_bound_coefficient = regret_lower_bound_coefficient(theta, bits_per_slot);
  return report;
}

}  // namespace cogmac
