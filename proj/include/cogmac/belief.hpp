#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "cogmac/channel_model.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/rng.hpp"

namespace cogmac {

/// Independent product-Beta posterior: per channel pseudo-counts (a, b).
/// Conjugate to the Bernoulli sensing outcome, so an observation is a unit
/// increment of a (free) or b (busy).
class BetaBelief {
 public:
  BetaBelief(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty() || a_.size() != b_.size())
      throw config_error("beta belief needs matching nonempty (a,b) vectors");
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (!(a_[i] > 0.0) || !(b_[i] > 0.0))
        throw config_error("beta belief pseudo-counts must be positive");
    }
  }

  /// Uniform Beta(1,1) over every channel.
  static BetaBelief uniform(int n_channels) {
    return BetaBelief(std::vector<double>(n_channels, 1.0), std::vector<double>(n_channels, 1.0));
  }

  int n_channels() const { return static_cast<int>(a_.size()); }
  double a(int i) const { return a_[static_cast<std::size_t>(i)]; }
  double b(int i) const { return b_[static_cast<std::size_t>(i)]; }
  double mean(int i) const { return a(i) / (a(i) + b(i)); }

  BetaBelief updated(int channel, int observation) const {
    BetaBelief next = *this;
    if (observation)
      next.a_[static_cast<std::size_t>(channel)] += 1.0;
    else
      next.b_[static_cast<std::size_t>(channel)] += 1.0;
    return next;
  }

  void update_in_place(int channel, int observation) {
    if (observation)
      a_[static_cast<std::size_t>(channel)] += 1.0;
    else
      b_[static_cast<std::size_t>(channel)] += 1.0;
  }

 private:
  std::vector<double> a_, b_;
};

/// Discretized joint posterior over theta: weighted support points in [0,1]^N.
/// Handles arbitrary (including correlated) priors at small N.
class GridBelief {
 public:
  GridBelief(std::vector<std::vector<double>> support, std::vector<double> weights)
      : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.empty() || support_.size() != weights_.size())
      throw config_error("grid belief needs matching nonempty support/weights");
    const std::size_t n = support_.front().size();
    if (n == 0) throw config_error("grid support points must be nonempty");
    double total = 0.0;
    for (std::size_t m = 0; m < support_.size(); ++m) {
      if (support_[m].size() != n) throw config_error("grid support points must share dimension");
      for (double t : support_[m]) {
        if (!(t >= 0.0 && t <= 1.0)) throw config_error("grid support entries must lie in [0,1]");
      }
      if (!(weights_[m] >= 0.0)) throw config_error("grid weights must be nonnegative");
      total += weights_[m];
    }
    if (std::abs(total - 1.0) > 1e-9) throw config_error("grid weights must sum to 1 within 1e-9");
  }

  static GridBelief point_mass(const std::vector<double>& theta) {
    return GridBelief({theta}, {1.0});
  }

  int n_channels() const { return static_cast<int>(support_.front().size()); }
  int n_points() const { return static_cast<int>(support_.size()); }
  const std::vector<std::vector<double>>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }

  double mean(int channel) const {
    double s = 0.0;
    for (std::size_t m = 0; m < support_.size(); ++m)
      s += weights_[m] * support_[m][static_cast<std::size_t>(channel)];
    return s;
  }

  GridBelief updated(int channel, int observation) const {
    GridBelief next = *this;
    next.update_in_place(channel, observation);
    return next;
  }

  void update_in_place(int channel, int observation) {
    double total = 0.0;
    for (std::size_t m = 0; m < support_.size(); ++m) {
      const double t = support_[m][static_cast<std::size_t>(channel)];
      weights_[m] *= observation ? t : (1.0 - t);
      total += weights_[m];
    }
    if (total <= 0.0)
      throw degenerate_evidence_error("grid posterior lost all mass after update");
    for (double& w : weights_) w /= total;
  }

 private:
  std::vector<std::vector<double>> support_;
  std::vector<double> weights_;
};

using Belief = std::variant<BetaBelief, GridBelief>;

inline int n_channels(const Belief& belief) {
  return std::visit([](const auto& b) { return b.n_channels(); }, belief);
}

inline double posterior_mean(const Belief& belief, int channel) {
  return std::visit([channel](const auto& b) { return b.mean(channel); }, belief);
}

/// Bayesian update on one channel's sensing outcome; returns the new posterior.
inline Belief update_posterior(const Belief& belief, int channel, int observation) {
  if (channel < 0 || channel >= n_channels(belief))
    throw config_error("update_posterior: channel out of range");
  if (observation != 0 && observation != 1)
    throw config_error("update_posterior: observation must be 0 or 1");
  return std::visit([&](const auto& b) -> Belief { return b.updated(channel, observation); },
                    belief);
}

/// Prior over theta: either per-channel Beta(a,b) factors or an explicit grid.
class PriorSpec {
 public:
  static PriorSpec product_beta(std::vector<std::pair<double, double>> params) {
    if (params.empty()) throw config_error("product-Beta prior needs at least one channel");
    for (auto [a, b] : params) {
      if (!(a > 0.0) || !(b > 0.0)) throw config_error("Beta parameters must be positive");
    }
    PriorSpec p;
    p.beta_ = std::move(params);
    return p;
  }

  static PriorSpec grid(std::vector<std::vector<double>> support, std::vector<double> weights) {
    PriorSpec p;
    p.grid_.emplace(std::move(support), std::move(weights));
    return p;
  }

  static PriorSpec point_mass(const std::vector<double>& theta) {
    return grid({theta}, {1.0});
  }

  bool is_product_beta() const { return !beta_.empty(); }
  const std::vector<std::pair<double, double>>& beta_params() const { return beta_; }
  const GridBelief& grid_belief() const { return *grid_; }

  int n_channels() const {
    return is_product_beta() ? static_cast<int>(beta_.size()) : grid_->n_channels();
  }

  Belief to_belief() const {
    if (is_product_beta()) {
      std::vector<double> a, b;
      a.reserve(beta_.size());
      b.reserve(beta_.size());
      for (auto [ai, bi] : beta_) {
        a.push_back(ai);
        b.push_back(bi);
      }
      return BetaBelief(std::move(a), std::move(b));
    }
    return *grid_;
  }

 private:
  PriorSpec() = default;
  std::vector<std::pair<double, double>> beta_;
  std::optional<GridBelief> grid_;
};

/// Draw theta from the prior. Deterministic given the rng state.
inline ThetaVector sample_theta(const PriorSpec& prior, Rng& rng) {
  if (prior.is_product_beta()) {
    std::vector<double> theta;
    theta.reserve(prior.beta_params().size());
    for (auto [a, b] : prior.beta_params()) theta.push_back(sample_beta(rng, a, b));
    return ThetaVector(std::move(theta));
  }
  const GridBelief& g = prior.grid_belief();
  const int m = rng.categorical(g.weights());
  return ThetaVector(g.support()[static_cast<std::size_t>(m)]);
}

}  // namespace cogmac
