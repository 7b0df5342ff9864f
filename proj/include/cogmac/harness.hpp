#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cogmac/belief.hpp"
#include "cogmac/channel_model.hpp"
#include "cogmac/config.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/gittins.hpp"
#include "cogmac/multi_user.hpp"
#include "cogmac/planning.hpp"
#include "cogmac/rng.hpp"
#include "cogmac/single_user.hpp"
#include "cogmac/strategy.hpp"

namespace cogmac {

/// Per-slot trace of one replication. Multi-user runs tag user 0 for the
/// per-user fields and additionally carry contention-level aggregates.
struct RunRecord {
  std::vector<int> chosen;                 // tagged user's channel per slot
  std::vector<std::uint8_t> outcomes;      // tagged user's sensing outcome
  std::vector<double> cumulative_bits;     // tagged user's running W
  std::vector<double> expected_loss_curve; // single user: cumulative theta-weighted loss
  std::vector<long> pull_counts;           // tagged user per channel
  long free_slots_won = 0;                 // tagged user slots transmitted
  double total_bits = 0.0;                 // W, or sum of W_k
  LossReport loss;                         // single user only

  // multi-user extras
  std::vector<double> user_bits;                        // W_k
  std::vector<double> cumulative_gap;                   // realized centralized-gap loss
  std::vector<std::vector<std::uint16_t>> user_counts;  // [slot][channel] contenders
};

inline RunRecord simulate_single_user(SensingStrategy& strategy, const ThetaVector& theta,
                                      const ChannelRealization& z, double bits_per_slot) {
  const long t = z.n_slots();
  const int n = z.n_channels();
  const double star = theta.max_value();
  RunRecord rec;
  rec.chosen.resize(static_cast<std::size_t>(t));
  rec.outcomes.resize(static_cast<std::size_t>(t));
  rec.cumulative_bits.resize(static_cast<std::size_t>(t));
  rec.expected_loss_curve.resize(static_cast<std::size_t>(t));
  rec.pull_counts.assign(static_cast<std::size_t>(n), 0);

  double bits = 0.0;
  double expected_loss = 0.0;
  for (long j = 0; j < t; ++j) {
    const int c = strategy.choose();
    if (c < 0 || c >= n) throw config_error("strategy chose a channel outside {1..N}");
    const int o = z.at(c, j);
    strategy.observe(c, o);
    rec.pull_counts[static_cast<std::size_t>(c)] += 1;
    if (o) {
      bits += bits_per_slot;
      rec.free_slots_won += 1;
    }
    expected_loss += bits_per_slot * (star - theta[c]);
    rec.chosen[static_cast<std::size_t>(j)] = c;
    rec.outcomes[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(o);
    rec.cumulative_bits[static_cast<std::size_t>(j)] = bits;
    rec.expected_loss_curve[static_cast<std::size_t>(j)] = expected_loss;
  }
  rec.total_bits = bits;
  rec.loss = compute_loss(theta, rec.pull_counts, t, bits_per_slot, rec.free_slots_won);
  return rec;
}

inline RunRecord simulate_multi_user(std::span<const std::unique_ptr<SensingStrategy>> users,
                                     const ThetaVector& theta, const ChannelRealization& z,
                                     double bits_per_slot, Rng& contention_rng) {
  const long t = z.n_slots();
  const int n = z.n_channels();
  const int k = static_cast<int>(users.size());
  RunRecord rec;
  rec.chosen.resize(static_cast<std::size_t>(t));
  rec.outcomes.resize(static_cast<std::size_t>(t));
  rec.cumulative_bits.resize(static_cast<std::size_t>(t));
  rec.pull_counts.assign(static_cast<std::size_t>(n), 0);
  rec.user_bits.assign(static_cast<std::size_t>(k), 0.0);
  rec.cumulative_gap.resize(static_cast<std::size_t>(t));
  rec.user_counts.assign(static_cast<std::size_t>(t),
                         std::vector<std::uint16_t>(static_cast<std::size_t>(n), 0));

  std::vector<int> choice(static_cast<std::size_t>(k));
  std::vector<std::vector<int>> contenders(static_cast<std::size_t>(n));
  double total = 0.0;
  double gap = 0.0;
  for (long j = 0; j < t; ++j) {
    for (auto& list : contenders) list.clear();
    for (int u = 0; u < k; ++u) {
      const int c = users[static_cast<std::size_t>(u)]->choose();
      if (c < 0 || c >= n) throw config_error("strategy chose a channel outside {1..N}");
      choice[static_cast<std::size_t>(u)] = c;
      contenders[static_cast<std::size_t>(c)].push_back(u);
      rec.user_counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] += 1;
    }
    int wins = 0;
    for (int i = 0; i < n; ++i) {
      const auto winner = contention_resolve(contenders[static_cast<std::size_t>(i)],
                                             z.at(i, j) != 0, contention_rng);
      if (winner) {
        rec.user_bits[static_cast<std::size_t>(*winner)] += bits_per_slot;
        total += bits_per_slot;
        ++wins;
      }
    }
    gap += bits_per_slot * static_cast<double>(z.free_count(j) - wins);
    for (int u = 0; u < k; ++u) {
      const int c = choice[static_cast<std::size_t>(u)];
      users[static_cast<std::size_t>(u)]->observe(c, z.at(c, j));
    }
    const int c0 = choice[0];
    rec.pull_counts[static_cast<std::size_t>(c0)] += 1;
    rec.chosen[static_cast<std::size_t>(j)] = c0;
    rec.outcomes[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(z.at(c0, j));
    rec.cumulative_bits[static_cast<std::size_t>(j)] = rec.user_bits[0];
    rec.cumulative_gap[static_cast<std::size_t>(j)] = gap;
  }
  rec.total_bits = total;
  return rec;
}

// --- replication inputs (common random numbers) ----------------------------

inline ThetaVector replication_theta(const ExperimentConfig& cfg, long rep) {
  if (cfg.theta) return *cfg.theta;
  Rng rng = substream(cfg.block.seed, StreamTag::kTheta, static_cast<std::uint64_t>(rep));
  return sample_theta(*cfg.prior, rng);
}

/// The channel realization of a replication depends only on (seed, rep) and
/// the theta source, never on the strategy: strategies compared under one
/// seed face identical blocks.
inline ChannelRealization replication_block(const ExperimentConfig& cfg, long rep) {
  const ThetaVector theta = replication_theta(cfg, rep);
  Rng rng = substream(cfg.block.seed, StreamTag::kEnvironment, static_cast<std::uint64_t>(rep));
  return generate_block(theta, cfg.block.n_slots, rng);
}

// --- strategy factories -----------------------------------------------------

inline Belief strategy_prior(const ExperimentConfig& cfg) {
  if (cfg.prior) return cfg.prior->to_belief();
  return BetaBelief::uniform(cfg.block.n_channels);
}

inline std::vector<GittinsArm> gittins_arms(const ExperimentConfig& cfg) {
  std::vector<GittinsArm> arms(static_cast<std::size_t>(cfg.block.n_channels));
  if (!cfg.prior) return arms;  // uniform Beta(1,1) arms
  if (!cfg.prior->is_product_beta())
    throw config_error("the gittins strategy needs a product-Beta prior (or explicit theta)");
  const auto& params = cfg.prior->beta_params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    arms[i].a = params[i].first;
    arms[i].b = params[i].second;
  }
  return arms;
}

inline GittinsParams gittins_params(const ExperimentConfig& cfg) {
  GittinsParams p;
  p.discount = cfg.strategy.discount;
  p.state_truncation = cfg.strategy.truncation;
  p.tolerance = cfg.strategy.tolerance;
  p.validate();
  return p;
}

inline std::unique_ptr<SensingStrategy> make_single_user_strategy(
    const ExperimentConfig& cfg, const ThetaVector& theta, Rng user_rng,
    std::shared_ptr<const GittinsTable> table) {
  const int n = cfg.block.n_channels;
  const std::string& name = cfg.strategy.name;
  if (name == "ucb-rule1") return std::make_unique<Rule1Strategy>(n);
  if (name == "random") return std::make_unique<RandomStrategy>(n, user_rng);
  if (name == "myopic") return std::make_unique<MyopicStrategy>(strategy_prior(cfg));
  if (name == "stay-winner-rr")
    return std::make_unique<StayWithWinnerStrategy>(n, SwitchRule::kRoundRobin, user_rng);
  if (name == "stay-winner-rand")
    return std::make_unique<StayWithWinnerStrategy>(n, SwitchRule::kUniformRandom, user_rng);
  if (name == "optimal-dp")
    return std::make_unique<OptimalDpStrategy>(strategy_prior(cfg), cfg.block.n_slots,
                                               cfg.block.bits_per_slot, cfg.strategy.max_states);
  if (name == "gittins")
    return std::make_unique<GittinsStrategy>(gittins_arms(cfg), gittins_params(cfg),
                                             std::move(table));
  if (name == "one-known") {
    Belief belief1 = BetaBelief::uniform(1);
    if (cfg.prior) {
      if (!cfg.prior->is_product_beta())
        throw config_error("one-known needs a product-Beta prior (or explicit theta)");
      const auto& ab = cfg.prior->beta_params();
      belief1 = BetaBelief({ab[0].first}, {ab[0].second});
    }
    return std::make_unique<OneKnownChannelStrategy>(std::move(belief1), theta[1],
                                                     cfg.block.n_slots);
  }
  throw config_error("unknown single-user strategy: " + name);
}

inline std::unique_ptr<SensingStrategy> make_multi_user_strategy(const ExperimentConfig& cfg,
                                                                 const ThetaVector& theta,
                                                                 Rng user_rng) {
  const std::string& name = cfg.strategy.name;
  if (name == "symmetric-opt")
    return std::make_unique<MixedSamplingStrategy>(
        optimal_symmetric_strategy(theta, cfg.block.n_users).p, user_rng);
  if (name == "nash-tau")
    return std::make_unique<MixedSamplingStrategy>(nash_strategy(theta), user_rng);
  if (name == "rule2") return std::make_unique<Rule2Strategy>(cfg.block.n_channels, user_rng);
  if (name == "rule3")
    return std::make_unique<Rule3Strategy>(cfg.block.n_channels, cfg.block.n_users,
                                           cfg.block.n_slots, user_rng);
  throw config_error("unknown multi-user strategy: " + name);
}

// --- aggregation ------------------------------------------------------------

/// Cross-replication aggregates. Standard errors are NaN when fewer than two
/// replications were run. Loss means the theta-weighted expected loss for
/// single-user runs and the realized centralized-gap loss for multi-user runs.
struct AggregateStats {
  long replications = 0;
  int n_channels = 0;
  long n_slots = 0;
  int n_users = 1;
  bool multi_user = false;
  double mean_throughput = 0.0, stderr_throughput = 0.0;
  double mean_loss = 0.0, stderr_loss = 0.0;
  double mean_realized_loss = 0.0, stderr_realized_loss = 0.0;  // single-user
  double mean_lower_bound_coefficient = 0.0;                    // single-user
  double mean_theta_star = 0.0;
  std::vector<double> mean_theta;
  std::vector<double> loss_curve_mean, loss_curve_stderr;
  std::vector<double> occupancy_mean;  // slot-major [slot * N + channel]
  std::vector<double> mean_pull_fraction;
};

namespace detail {

constexpr long kRepsPerBlock = 64;

struct BlockPartial {
  long count = 0;
  double sum_w = 0, sumsq_w = 0;
  double sum_loss = 0, sumsq_loss = 0;
  double sum_realized = 0, sumsq_realized = 0;
  double sum_lbc = 0;
  double sum_theta_star = 0;
  std::vector<double> sum_theta;
  std::vector<double> curve_sum, curve_sumsq;
  std::vector<double> occupancy_sum;
  std::vector<double> pull_fraction_sum;

  void init(int n, long t) {
    sum_theta.assign(static_cast<std::size_t>(n), 0.0);
    curve_sum.assign(static_cast<std::size_t>(t), 0.0);
    curve_sumsq.assign(static_cast<std::size_t>(t), 0.0);
    occupancy_sum.assign(static_cast<std::size_t>(t) * static_cast<std::size_t>(n), 0.0);
    pull_fraction_sum.assign(static_cast<std::size_t>(n), 0.0);
  }
};

inline void finalize_stats(const ExperimentConfig& cfg, std::vector<BlockPartial>& partials,
                           AggregateStats& stats) {
  const long r = cfg.replications;
  const long t = cfg.block.n_slots;
  const int n = cfg.block.n_channels;
  BlockPartial total;
  total.init(n, t);
  for (const auto& p : partials) {  // ascending block order: summation grouping is fixed
    total.count += p.count;
    total.sum_w += p.sum_w;
    total.sumsq_w += p.sumsq_w;
    total.sum_loss += p.sum_loss;
    total.sumsq_loss += p.sumsq_loss;
    total.sum_realized += p.sum_realized;
    total.sumsq_realized += p.sumsq_realized;
    total.sum_lbc += p.sum_lbc;
    total.sum_theta_star += p.sum_theta_star;
    for (std::size_t i = 0; i < total.sum_theta.size(); ++i) total.sum_theta[i] += p.sum_theta[i];
    for (std::size_t i = 0; i < total.curve_sum.size(); ++i) {
      total.curve_sum[i] += p.curve_sum[i];
      total.curve_sumsq[i] += p.curve_sumsq[i];
    }
    for (std::size_t i = 0; i < total.occupancy_sum.size(); ++i)
      total.occupancy_sum[i] += p.occupancy_sum[i];
    for (std::size_t i = 0; i < total.pull_fraction_sum.size(); ++i)
      total.pull_fraction_sum[i] += p.pull_fraction_sum[i];
  }

  const double rd = static_cast<double>(r);
  const auto stderr_of = [&](double sum, double sumsq) {
    if (r < 2) return std::numeric_limits<double>::quiet_NaN();
    const double var = (sumsq - sum * sum / rd) / (rd - 1.0);
    return std::sqrt(std::max(0.0, var) / rd);
  };

  stats.replications = r;
  stats.n_channels = n;
  stats.n_slots = t;
  stats.n_users = cfg.block.n_users;
  stats.mean_throughput = total.sum_w / rd;
  stats.stderr_throughput = stderr_of(total.sum_w, total.sumsq_w);
  stats.mean_loss = total.sum_loss / rd;
  stats.stderr_loss = stderr_of(total.sum_loss, total.sumsq_loss);
  stats.mean_realized_loss = total.sum_realized / rd;
  stats.stderr_realized_loss = stderr_of(total.sum_realized, total.sumsq_realized);
  stats.mean_lower_bound_coefficient = total.sum_lbc / rd;
  stats.mean_theta_star = total.sum_theta_star / rd;
  stats.mean_theta.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    stats.mean_theta[static_cast<std::size_t>(i)] = total.sum_theta[static_cast<std::size_t>(i)] / rd;
  stats.loss_curve_mean.resize(static_cast<std::size_t>(t));
  stats.loss_curve_stderr.resize(static_cast<std::size_t>(t));
  for (long j = 0; j < t; ++j) {
    const auto js = static_cast<std::size_t>(j);
    stats.loss_curve_mean[js] = total.curve_sum[js] / rd;
    stats.loss_curve_stderr[js] = stderr_of(total.curve_sum[js], total.curve_sumsq[js]);
  }
  stats.occupancy_mean.resize(total.occupancy_sum.size());
  for (std::size_t i = 0; i < total.occupancy_sum.size(); ++i)
    stats.occupancy_mean[i] = total.occupancy_sum[i] / rd;
  stats.mean_pull_fraction.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    stats.mean_pull_fraction[static_cast<std::size_t>(i)] =
        total.pull_fraction_sum[static_cast<std::size_t>(i)] / rd;
}

template <typename RepFn>
inline void run_blocks(const ExperimentConfig& cfg, std::vector<BlockPartial>& partials,
                       RepFn&& per_rep) {
  const long r = cfg.replications;
  const long n_blocks = (r + kRepsPerBlock - 1) / kRepsPerBlock;
  partials.resize(static_cast<std::size_t>(n_blocks));
  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (static_cast<long>(threads) > n_blocks) threads = static_cast<int>(n_blocks);

  std::atomic<long> next_block{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&]() {
    try {
      for (;;) {
        const long b = next_block.fetch_add(1);
        if (b >= n_blocks) return;
        auto& partial = partials[static_cast<std::size_t>(b)];
        partial.init(cfg.block.n_channels, cfg.block.n_slots);
        const long lo = b * kRepsPerBlock;
        const long hi = std::min(r, lo + kRepsPerBlock);
        for (long rep = lo; rep < hi; ++rep) per_rep(rep, partial);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

inline AggregateStats run_single_user(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.is_multi_user()) throw config_error("run_single_user given a multi-user strategy");
  const long t = cfg.block.n_slots;
  const int n = cfg.block.n_channels;
  const double b = cfg.block.bits_per_slot;

  std::shared_ptr<const GittinsTable> table;
  if (cfg.strategy.name == "gittins") {
    bool integral = true;
    for (const auto& arm : gittins_arms(cfg))
      integral = integral && std::round(arm.a) == arm.a && std::round(arm.b) == arm.b;
    if (integral) table = std::make_shared<GittinsTable>(gittins_params(cfg), cfg.threads);
  }

  std::vector<detail::BlockPartial> partials;
  detail::run_blocks(cfg, partials, [&](long rep, detail::BlockPartial& partial) {
    const ThetaVector theta = replication_theta(cfg, rep);
    const ChannelRealization z = replication_block(cfg, rep);
    Rng user_rng = substream(cfg.block.seed, StreamTag::kUser, static_cast<std::uint64_t>(rep), 0);
    const auto strategy = make_single_user_strategy(cfg, theta, user_rng, table);
    const RunRecord rec = simulate_single_user(*strategy, theta, z, b);

    partial.count += 1;
    partial.sum_w += rec.total_bits;
    partial.sumsq_w += rec.total_bits * rec.total_bits;
    partial.sum_loss += rec.loss.expected_loss;
    partial.sumsq_loss += rec.loss.expected_loss * rec.loss.expected_loss;
    partial.sum_realized += rec.loss.realized_loss;
    partial.sumsq_realized += rec.loss.realized_loss * rec.loss.realized_loss;
    partial.sum_lbc += rec.loss.lower_bound_coefficient;
    partial.sum_theta_star += theta.max_value();
    for (int i = 0; i < n; ++i) {
      partial.sum_theta[static_cast<std::size_t>(i)] += theta[i];
      partial.pull_fraction_sum[static_cast<std::size_t>(i)] +=
          static_cast<double>(rec.pull_counts[static_cast<std::size_t>(i)]) /
          static_cast<double>(t);
    }
    for (long j = 0; j < t; ++j) {
      const auto js = static_cast<std::size_t>(j);
      const double v = rec.expected_loss_curve[js];
      partial.curve_sum[js] += v;
      partial.curve_sumsq[js] += v * v;
      partial.occupancy_sum[js * static_cast<std::size_t>(n) +
                            static_cast<std::size_t>(rec.chosen[js])] += 1.0;
    }
  });

  AggregateStats stats;
  stats.multi_user = false;
  detail::finalize_stats(cfg, partials, stats);
  return stats;
}

inline AggregateStats run_multi_user(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.is_multi_user()) throw config_error("run_multi_user given a single-user strategy");
  const long t = cfg.block.n_slots;
  const int n = cfg.block.n_channels;
  const int k = cfg.block.n_users;
  const double b = cfg.block.bits_per_slot;

  std::vector<detail::BlockPartial> partials;
  detail::run_blocks(cfg, partials, [&](long rep, detail::BlockPartial& partial) {
    const ThetaVector theta = replication_theta(cfg, rep);
    const ChannelRealization z = replication_block(cfg, rep);
    std::vector<std::unique_ptr<SensingStrategy>> users;
    users.reserve(static_cast<std::size_t>(k));
    for (int u = 0; u < k; ++u) {
      Rng rng = substream(cfg.block.seed, StreamTag::kUser, static_cast<std::uint64_t>(rep),
                          static_cast<std::uint64_t>(u));
      users.push_back(make_multi_user_strategy(cfg, theta, rng));
    }
    Rng contention =
        substream(cfg.block.seed, StreamTag::kContention, static_cast<std::uint64_t>(rep));
    const RunRecord rec = simulate_multi_user(users, theta, z, b, contention);

    const double gap = rec.cumulative_gap.back();
    partial.count += 1;
    partial.sum_w += rec.total_bits;
    partial.sumsq_w += rec.total_bits * rec.total_bits;
    partial.sum_loss += gap;
    partial.sumsq_loss += gap * gap;
    partial.sum_theta_star += theta.max_value();
    for (int i = 0; i < n; ++i) {
      partial.sum_theta[static_cast<std::size_t>(i)] += theta[i];
      partial.pull_fraction_sum[static_cast<std::size_t>(i)] +=
          static_cast<double>(rec.pull_counts[static_cast<std::size_t>(i)]) /
          static_cast<double>(t);
    }
    for (long j = 0; j < t; ++j) {
      const auto js = static_cast<std::size_t>(j);
      const double v = rec.cumulative_gap[js];
      partial.curve_sum[js] += v;
      partial.curve_sumsq[js] += v * v;
      for (int i = 0; i < n; ++i)
        partial.occupancy_sum[js * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] +=
            static_cast<double>(rec.user_counts[js][static_cast<std::size_t>(i)]) /
            static_cast<double>(k);
    }
  });

  AggregateStats stats;
  stats.multi_user = true;
  detail::finalize_stats(cfg, partials, stats);
  return stats;
}

inline AggregateStats run_experiment(const ExperimentConfig& cfg) {
  return cfg.is_multi_user() ? run_multi_user(cfg) : run_single_user(cfg);
}

// --- output -----------------------------------------------------------------

namespace detail {

inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline nlohmann::json json_number_or_sentinel(double v) {
  if (std::isinf(v)) return "no-loss";
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace detail

/// Summary of all scalar outputs, including the closed-form references that
/// apply to the configured strategy when theta is explicit.
inline nlohmann::json make_summary(const ExperimentConfig& cfg, const AggregateStats& stats) {
  nlohmann::json j;
  j["strategy"] = cfg.strategy.name;
  j["channels"] = cfg.block.n_channels;
  j["slots"] = cfg.block.n_slots;
  j["users"] = cfg.block.n_users;
  j["bits_per_slot"] = cfg.block.bits_per_slot;
  j["seed"] = cfg.block.seed;
  j["replications"] = cfg.replications;
  j["mean_throughput"] = stats.mean_throughput;
  j["stderr_throughput"] = detail::json_number_or_sentinel(stats.stderr_throughput);
  if (cfg.theta)
    j["theta"] = cfg.theta->values();
  else
    j["theta_mean"] = stats.mean_theta;
  j["per_channel_pull_fraction"] = stats.mean_pull_fraction;

  if (!stats.multi_user) {
    j["mean_expected_loss"] = stats.mean_loss;
    j["stderr_expected_loss"] = detail::json_number_or_sentinel(stats.stderr_loss);
    j["mean_realized_loss"] = stats.mean_realized_loss;
    j["stderr_realized_loss"] = detail::json_number_or_sentinel(stats.stderr_realized_loss);
    j["lower_bound_coefficient"] = stats.mean_lower_bound_coefficient;
  } else {
    j["mean_centralized_gap_loss"] = stats.mean_loss;
    j["stderr_centralized_gap_loss"] = detail::json_number_or_sentinel(stats.stderr_loss);
    if (cfg.theta) {
      const ThetaVector& theta = *cfg.theta;
      const DecayConstants decay = decay_constants(theta);
      j["q"] = decay.q;
      j["theta_lstar"] = decay.theta_lstar;
      j["c1"] = detail::json_number_or_sentinel(decay.c1);
      j["c2"] = detail::json_number_or_sentinel(decay.c2);
      j["tau"] = nash_strategy(theta).p;
      const bool uses_symmetric =
          cfg.strategy.name == "symmetric-opt" || cfg.strategy.name == "rule3";
      const SymmetricSolution sym = optimal_symmetric_strategy(theta, cfg.block.n_users);
      j["lambda_star"] = sym.lambda_star;
      j["p_star"] = sym.p.p;
      const MixedStrategy& profile = uses_symmetric ? sym.p : nash_strategy(theta);
      j["expected_total_throughput"] = expected_total_throughput(
          theta, profile, cfg.block.n_users, cfg.block.n_slots, cfg.block.bits_per_slot);
      j["centralized_loss"] = centralized_loss(theta, profile, cfg.block.n_users,
                                               cfg.block.n_slots, cfg.block.bits_per_slot);
    }
  }
  if (!stats.multi_user && cfg.theta)
    j["lower_bound_coefficient"] =
        regret_lower_bound_coefficient(*cfg.theta, cfg.block.bits_per_slot);
  return j;
}

/// Write the selected outputs; returns the paths written. Result files carry
/// no timestamps, so identical configs reproduce identical bytes.
inline std::vector<std::string> emit_results(const AggregateStats& stats,
                                             const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  const bool csv = cfg.format == "csv";
  const int n = stats.n_channels;
  const long t = stats.n_slots;

  const auto open = [&](const std::string& name) {
    const std::string path = (fs::path(cfg.out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write output file: " + path);
    written.push_back(path);
    return out;
  };

  if (cfg.out_loss_curve) {
    if (csv) {
      auto out = open("loss_curve.csv");
      out << "slot,mean_cumulative_loss,stderr\n";
      for (long j = 0; j < t; ++j) {
        const auto js = static_cast<std::size_t>(j);
        out << (j + 1) << ',' << detail::fmt9(stats.loss_curve_mean[js]) << ',';
        if (stats.replications >= 2) out << detail::fmt9(stats.loss_curve_stderr[js]);
        out << '\n';
      }
    } else {
      auto out = open("loss_curve.json");
      nlohmann::json j;
      j["slots"] = t;
      j["mean_cumulative_loss"] = stats.loss_curve_mean;
      if (stats.replications >= 2)
        j["stderr"] = stats.loss_curve_stderr;
      else
        j["stderr"] = nullptr;
      out << j.dump(2) << '\n';
    }
  }

  if (cfg.out_occupancy) {
    if (csv) {
      auto out = open("occupancy.csv");
      out << "slot,channel,fraction\n";
      for (long j = 0; j < t; ++j) {
        for (int i = 0; i < n; ++i) {
          out << (j + 1) << ',' << (i + 1) << ','
              << detail::fmt9(stats.occupancy_mean[static_cast<std::size_t>(j) *
                                                       static_cast<std::size_t>(n) +
                                                   static_cast<std::size_t>(i)])
              << '\n';
        }
      }
    } else {
      auto out = open("occupancy.json");
      nlohmann::json j;
      j["slots"] = t;
      j["channels"] = n;
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < n; ++i) {
        nlohmann::json col = nlohmann::json::array();
        for (long s = 0; s < t; ++s)
          col.push_back(stats.occupancy_mean[static_cast<std::size_t>(s) *
                                                 static_cast<std::size_t>(n) +
                                             static_cast<std::size_t>(i)]);
        rows.push_back(std::move(col));
      }
      j["fraction"] = std::move(rows);
      out << j.dump(2) << '\n';
    }
  }

  if (cfg.out_summary) {
    auto out = open("summary.json");
    out << make_summary(cfg, stats).dump(2) << '\n';
  }
  return written;
}

}  // namespace cogmac
