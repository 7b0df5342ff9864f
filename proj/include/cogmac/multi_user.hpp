#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cogmac/channel_model.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/rng.hpp"
#include "cogmac/single_user.hpp"
#include "cogmac/strategy.hpp"

namespace cogmac {

/// Per-channel sensing probabilities of one user in the channel-selection game.
struct MixedStrategy {
  std::vector<double> p;

  explicit MixedStrategy(std::vector<double> probs) : p(std::move(probs)) {
    if (p.empty()) throw config_error("mixed strategy needs at least one channel");
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0 && v <= 1.0)) throw config_error("mixed strategy entries must lie in [0,1]");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw config_error("mixed strategy must sum to 1 within 1e-9");
  }

  int size() const { return static_cast<int>(p.size()); }
  double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }
};

/// CSMA-CA backoff among the users sensing one channel. The winner is the
/// minimum of i.i.d. continuous waiting times, which is uniform over the
/// contender set by exchangeability, so the waiting-time pdf never needs to
/// be materialized. Busy channel or empty set: nobody transmits.
inline std::optional<int> contention_resolve(std::span<const int> contenders, bool channel_free,
                                             Rng& rng) {
  if (!channel_free || contenders.empty()) return std::nullopt;
  return contenders[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(contenders.size())))];
}

struct SymmetricSolution {
  MixedStrategy p;
  double lambda_star = 0.0;      // exp(log_lambda_star); underflows to 0 at huge K
  double log_lambda_star = 0.0;
};

/// Throughput-optimal symmetric mixed strategy for K users:
/// p_i = {1 - (lambda/(K theta_i))^(1/(K-1))}^+ on theta_i > 0, with lambda
/// chosen by bisection so the entries sum to 1 (|sum - 1| <= 1e-12). The
/// search runs on ln(lambda): for large K the water level lambda* lies far
/// below the smallest normal double.
inline SymmetricSolution optimal_symmetric_strategy(const ThetaVector& theta, int n_users) {
  if (n_users < 2)
    throw config_error("optimal_symmetric_strategy requires K >= 2 (single-user rules apply)");
  const int n = theta.size();
  int positive = 0;
  int last_positive = -1;
  double theta_max = 0.0;
  for (int i = 0; i < n; ++i) {
    if (theta[i] > 0.0) {
      ++positive;
      last_positive = i;
      theta_max = std::max(theta_max, theta[i]);
    }
  }
  if (positive == 0) throw no_opportunity_error("all channels have zero availability");
  if (positive == 1) {
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    p[static_cast<std::size_t>(last_positive)] = 1.0;
    return SymmetricSolution{MixedStrategy(std::move(p)), 0.0,
                             -std::numeric_limits<double>::infinity()};
  }

  const double km1 = static_cast<double>(n_users) - 1.0;
  std::vector<double> log_k_theta(static_cast<std::size_t>(n),
                                  -std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) {
    if (theta[i] > 0.0)
      log_k_theta[static_cast<std::size_t>(i)] = std::log(n_users * theta[i]);
  }
  const auto mass = [&](double log_lambda) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (theta[i] <= 0.0) continue;
      const double v =
          1.0 - std::exp((log_lambda - log_k_theta[static_cast<std::size_t>(i)]) / km1);
      if (v > 0.0) s += v;
    }
    return s;
  };

  double hi = std::log(n_users * theta_max);  // mass(hi) = 0
  double lo = hi - km1;
  int guard = 0;
  while (mass(lo) < 1.0 && guard++ < 600) lo -= km1;  // mass -> Q >= 2 as lo -> -inf
  double log_lambda = 0.5 * (lo + hi);
  for (int iter = 0; iter < 300; ++iter) {
    log_lambda = 0.5 * (lo + hi);
    const double m = mass(log_lambda);
    if (std::abs(m - 1.0) <= 1e-13) break;
    if (m > 1.0)
      lo = log_lambda;
    else
      hi = log_lambda;
  }

  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    if (theta[i] <= 0.0) continue;
    const double v =
        1.0 - std::exp((log_lambda - log_k_theta[static_cast<std::size_t>(i)]) / km1);
    p[static_cast<std::size_t>(i)] = std::max(0.0, v);
  }
  return SymmetricSolution{MixedStrategy(std::move(p)), std::exp(log_lambda), log_lambda};
}

/// Large-K Nash equilibrium profile: tau_i = theta_i / sum theta.
inline MixedStrategy nash_strategy(const ThetaVector& theta) {
  const double total = theta.sum();
  if (total <= 0.0) throw no_opportunity_error("all channels have zero availability");
  std::vector<double> tau(static_cast<std::size_t>(theta.size()));
  for (int i = 0; i < theta.size(); ++i) tau[static_cast<std::size_t>(i)] = theta[i] / total;
  return MixedStrategy(std::move(tau));
}

/// Closed-form total throughput of K users all sampling from p:
/// B T sum_i theta_i (1 - (1 - p_i)^K).
inline double expected_total_throughput(const ThetaVector& theta, const MixedStrategy& p,
                                        int n_users, long n_slots, double bits_per_slot) {
  if (p.size() != theta.size()) throw config_error("mixed strategy size must match theta");
  double s = 0.0;
  for (int i = 0; i < theta.size(); ++i)
    s += theta[i] * (1.0 - std::pow(1.0 - p[i], static_cast<double>(n_users)));
  return bits_per_slot * static_cast<double>(n_slots) * s;
}

/// Gap to centralized scheduling: B T sum_i theta_i (1 - p_i)^K.
inline double centralized_loss(const ThetaVector& theta, const MixedStrategy& p, int n_users,
                               long n_slots, double bits_per_slot) {
  if (p.size() != theta.size()) throw config_error("mixed strategy size must match theta");
  double s = 0.0;
  for (int i = 0; i < theta.size(); ++i)
    s += theta[i] * std::pow(1.0 - p[i], static_cast<double>(n_users));
  return bits_per_slot * static_cast<double>(n_slots) * s;
}

/// Exponential decay rates of the distributed-vs-centralized loss in K.
/// q counts channels with positive availability; with q == 1 there is no loss
/// and both rates degenerate to the +infinity sentinel.
struct DecayConstants {
  int q = 0;
  double theta_lstar = 0.0;  // smallest positive availability
  double c1 = 0.0;           // ln(Q/(Q-1)), optimal symmetric strategy
  double c2 = 0.0;           // ln(sum theta / (sum theta - theta_lstar)), Nash profile
  bool no_loss() const { return q == 1; }
};

inline DecayConstants decay_constants(const ThetaVector& theta) {
  DecayConstants out;
  double total = 0.0;
  double min_positive = std::numeric_limits<double>::infinity();
  for (int i = 0; i < theta.size(); ++i) {
    if (theta[i] > 0.0) {
      ++out.q;
      total += theta[i];
      min_positive = std::min(min_positive, theta[i]);
    }
  }
  if (out.q == 0) throw no_opportunity_error("all channels have zero availability");
  out.theta_lstar = min_positive;
  if (out.q == 1) {
    out.c1 = std::numeric_limits<double>::infinity();
    out.c2 = std::numeric_limits<double>::infinity();
    return out;
  }
  out.c1 = std::log(static_cast<double>(out.q) / static_cast<double>(out.q - 1));
  out.c2 = std::log(total / (total - min_positive));
  return out;
}

/// Samples the channel from a fixed mixed strategy each slot (used for both
/// the optimal symmetric profile and the Nash profile under known theta).
class MixedSamplingStrategy : public SensingStrategy {
 public:
  MixedSamplingStrategy(MixedStrategy p, Rng rng) : p_(std::move(p)), rng_(rng) {}

  int choose() override { return rng_.categorical(p_.p); }
  void observe(int, int) override {}

 private:
  MixedStrategy p_;
  Rng rng_;
};

/// Availability-proportional online rule. Initialization senses every channel
/// once and pins X to 1 regardless of the outcome (no channel starves); after
/// that the channel is sampled with probability proportional to X_i/Y_i.
class Rule2Strategy : public SensingStrategy {
 public:
  Rule2Strategy(int n_channels, Rng rng) : n_(n_channels), stats_(n_channels), rng_(rng) {
    if (n_channels < 1) throw config_error("Rule2Strategy needs n_channels >= 1");
  }

  int choose() override {
    if (stats_.slot <= n_) return static_cast<int>(stats_.slot - 1);
    return rng_.categorical(estimates());
  }

  void observe(int channel, int outcome) override {
    const auto c = static_cast<std::size_t>(channel);
    stats_.sensed[c] += 1;
    if (stats_.slot <= n_)
      stats_.observed_free[c] = 1;  // forced at initialization
    else
      stats_.observed_free[c] += outcome;
    stats_.slot += 1;
  }

  /// Current channel-selection distribution (one-hot during initialization).
  virtual std::vector<double> choice_probabilities() const {
    std::vector<double> p(static_cast<std::size_t>(n_), 0.0);
    if (stats_.slot <= n_) {
      p[static_cast<std::size_t>(stats_.slot - 1)] = 1.0;
      return p;
    }
    const std::vector<double> est = estimates();
    double total = 0.0;
    for (double e : est) total += e;
    for (int i = 0; i < n_; ++i) p[static_cast<std::size_t>(i)] = est[static_cast<std::size_t>(i)] / total;
    return p;
  }

  const CountStats& stats() const { return stats_; }

 protected:
  std::vector<double> estimates() const {
    std::vector<double> est(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) est[static_cast<std::size_t>(i)] = stats_.estimate(i);
    return est;
  }

  int n_;
  CountStats stats_;
  Rng rng_;
};

/// Two-phase online rule for a known number of competing users: explore with
/// availability-proportional sampling while j < ln T, then sample from the
/// symmetric-optimal profile recomputed from the running estimates. The
/// initialization pass always completes first, and the boundary slot belongs
/// to the exploitation phase.
class Rule3Strategy : public Rule2Strategy {
 public:
  Rule3Strategy(int n_channels, int n_users, long n_slots, Rng rng)
      : Rule2Strategy(n_channels, rng), n_users_(n_users) {
    if (n_users < 2) throw config_error("Rule3Strategy requires K >= 2");
    if (n_slots < 2) throw config_error("Rule3Strategy requires T >= 2");
    switch_slot_ = static_cast<long>(std::ceil(std::log(static_cast<double>(n_slots))));
    if (switch_slot_ < 1) switch_slot_ = 1;
  }

  int choose() override {
    if (stats_.slot <= n_) return static_cast<int>(stats_.slot - 1);
    if (stats_.slot < switch_slot_) return rng_.categorical(estimates());
    return rng_.categorical(exploit_probabilities());
  }

  std::vector<double> choice_probabilities() const override {
    if (stats_.slot <= n_ || stats_.slot < switch_slot_)
      return Rule2Strategy::choice_probabilities();
    return exploit_probabilities();
  }

  /// First slot of the exploitation phase (before initialization precedence).
  long switch_slot() const { return switch_slot_; }

 private:
  std::vector<double> exploit_probabilities() const {
    // Eq-form with lambda absorbing the 1/K factor: same solver as the
    // known-theta symmetric optimum, applied to the running estimates.
    return optimal_symmetric_strategy(ThetaVector(estimates()), n_users_).p.p;
  }

  int n_users_;
  long switch_slot_ = 1;
};

}  // namespace cogmac
