#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "cogmac/errors.hpp"
#include "cogmac/strategy.hpp"

namespace cogmac {

/// Parameters of the discounted index computation. States with pseudo-count
/// total beyond state_truncation are treated as known arms worth their mean.
struct GittinsParams {
  double discount = 0.9;
  int state_truncation = 400;
  double tolerance = 1e-4;

  void validate() const {
    if (!(discount > 0.0 && discount < 1.0)) throw config_error("discount must lie in (0,1)");
    if (state_truncation < 2) throw config_error("state_truncation must be >= 2");
    if (!(tolerance > 0.0)) throw config_error("tolerance must be positive");
  }
};

struct GittinsIndexResult {
  double value = 0.0;
  /// Conservative truncation error bound: discount^(H - (a+b)).
  double truncation_bound = 0.0;
  /// False when the truncation bound alone already exceeds the tolerance;
  /// the value is still the best available at this truncation.
  bool within_tolerance = true;
};

/// Index of an arm with known success probability: the calibration equation
/// max(theta, lambda)/(1-alpha) balances exactly at lambda = theta.
inline double known_arm_index(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw config_error("known arm theta must lie in [0,1]");
  return theta;
}

namespace detail {

/// Value of continuing with the Beta(a,b) arm against a retirement rate
/// lambda, by backward induction over the truncated (a,b) cone. Returns the
/// continuation value at (a,b); retiring is worth lambda/(1-alpha).
inline double gittins_continue_value(double a, double b, double lambda,
                                     const GittinsParams& params) {
  const double alpha = params.discount;
  const double retire = lambda / (1.0 - alpha);
  const double h = static_cast<double>(params.state_truncation);
  const int depth = static_cast<int>(std::floor(h - (a + b)));  // extra observations available

  std::vector<double> next;  // V at level d+1, indexed by number of extra successes
  std::vector<double> cur;
  double cont_root = 0.0;
  for (int d = depth; d >= 0; --d) {
    cur.assign(static_cast<std::size_t>(d + 1), 0.0);
    for (int s = 0; s <= d; ++s) {
      const double ai = a + s;
      const double ni = a + b + d;
      const double mu = ai / ni;
      double v_up, v_dn;
      if (d == depth) {
        v_up = std::max((ai + 1.0) / (ni + 1.0), lambda) / (1.0 - alpha);
        v_dn = std::max(ai / (ni + 1.0), lambda) / (1.0 - alpha);
      } else {
        v_up = next[static_cast<std::size_t>(s + 1)];
        v_dn = next[static_cast<std::size_t>(s)];
      }
      const double cont = mu * (1.0 + alpha * v_up) + (1.0 - mu) * alpha * v_dn;
      if (d == 0) cont_root = cont;
      cur[static_cast<std::size_t>(s)] = std::max(retire, cont);
    }
    next.swap(cur);
  }
  return cont_root;
}

}  // namespace detail

/// Discounted index of a Beta(a,b) Bernoulli arm, by bisection on the known
/// calibration arm rate lambda over the truncated state triangle.
inline GittinsIndexResult gittins_index_checked(double a, double b, const GittinsParams& params) {
  params.validate();
  if (!(a > 0.0) || !(b > 0.0)) throw config_error("gittins_index requires a, b > 0");
  if (a + b > static_cast<double>(params.state_truncation))
    throw config_error("gittins_index requires a + b <= state_truncation");

  GittinsIndexResult result;
  result.truncation_bound =
      std::pow(params.discount, static_cast<double>(params.state_truncation) - (a + b));
  result.within_tolerance = result.truncation_bound <= params.tolerance;

  double lo = 0.0, hi = 1.0;
  while (hi - lo > 0.5 * params.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double cont = detail::gittins_continue_value(a, b, mid, params);
    if (cont > mid / (1.0 - params.discount))
      lo = mid;
    else
      hi = mid;
  }
  result.value = 0.5 * (lo + hi);
  return result;
}

inline double gittins_index(double a, double b, const GittinsParams& params) {
  return gittins_index_checked(a, b, params).value;
}

/// Index table over the whole integer lattice {a,b >= 1, a+b <= H}, computed
/// by sweeping a lambda grid at the tolerance resolution: one backward pass
/// per lambda scores continue-vs-retire for every state at once.
class GittinsTable {
 public:
  explicit GittinsTable(GittinsParams params, int n_threads = 0) : params_(params) {
    params_.validate();
    const int h = params_.state_truncation;
    index_.assign(static_cast<std::size_t>(offset(h + 1)), 0.0);

    const double step = params_.tolerance;
    const long n_lambda = static_cast<long>(std::ceil(1.0 / step));
    int threads = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (static_cast<long>(threads) > n_lambda) threads = static_cast<int>(n_lambda);

    std::vector<std::vector<double>> best_per_thread(
        static_cast<std::size_t>(threads),
        std::vector<double>(index_.size(), -std::numeric_limits<double>::infinity()));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        auto& best = best_per_thread[static_cast<std::size_t>(t)];
        for (long li = t; li < n_lambda; li += threads) {
          const double lambda = (static_cast<double>(li) + 0.5) * step;
          sweep_mark(lambda, best);
        }
      });
    }
    for (auto& th : pool) th.join();

    // index = largest marked lambda + half a grid step (monotone in lambda)
    for (std::size_t s = 0; s < index_.size(); ++s) {
      double lo = 0.0;
      for (int t = 0; t < threads; ++t)
        lo = std::max(lo, best_per_thread[static_cast<std::size_t>(t)][s]);
      index_[s] = lo + 0.5 * step;
    }
  }

  const GittinsParams& params() const { return params_; }

  double at(int a, int b) const {
    if (a < 1 || b < 1 || a + b > params_.state_truncation)
      throw config_error("GittinsTable::at: state outside the lattice");
    return index_[static_cast<std::size_t>(offset(a + b) + (a - 1))];
  }

 private:
  static long offset(int level) {  // first flat slot of states with a+b == level
    const long n = level - 2;
    return n * (n + 1) / 2;
  }

  /// One backward pass at a fixed lambda; raises best[s] to lambda for every
  /// state where continuing strictly beats retiring.
  void sweep_mark(double lambda, std::vector<double>& best) const {
    const double alpha = params_.discount;
    const double retire = lambda / (1.0 - alpha);
    const int h = params_.state_truncation;
    std::vector<double> next;  // V at level n+1, indexed a-1
    std::vector<double> cur;
    for (int n = h; n >= 2; --n) {
      cur.assign(static_cast<std::size_t>(n - 1), 0.0);
      const long base = offset(n);
      for (int a = 1; a <= n - 1; ++a) {
        const double mu = static_cast<double>(a) / static_cast<double>(n);
        double v_up, v_dn;
        if (n == h) {
          v_up = std::max(static_cast<double>(a + 1) / (n + 1.0), lambda) / (1.0 - alpha);
          v_dn = std::max(static_cast<double>(a) / (n + 1.0), lambda) / (1.0 - alpha);
        } else {
          v_up = next[static_cast<std::size_t>(a)];      // (a+1, b) at level n+1
          v_dn = next[static_cast<std::size_t>(a - 1)];  // (a, b+1) at level n+1
        }
        const double cont = mu * (1.0 + alpha * v_up) + (1.0 - mu) * alpha * v_dn;
        if (cont > retire) {
          double& slot = best[static_cast<std::size_t>(base + a - 1)];
          if (lambda > slot) slot = lambda;
        }
        cur[static_cast<std::size_t>(a - 1)] = std::max(retire, cont);
      }
      next.swap(cur);
    }
  }

  GittinsParams params_;
  std::vector<double> index_;
};

/// One bandit arm of the index policy: a Beta(a,b) posterior, or a channel
/// with known availability (no learning, constant index).
struct GittinsArm {
  double a = 1.0;
  double b = 1.0;
  std::optional<double> known;
};

/// Index policy: sense the channel with the largest current index, ties to
/// the lowest channel; only the sensed channel's posterior is updated.
class GittinsStrategy : public SensingStrategy {
 public:
  GittinsStrategy(std::vector<GittinsArm> arms, GittinsParams params,
                  std::shared_ptr<const GittinsTable> table = nullptr)
      : arms_(std::move(arms)), params_(params), table_(std::move(table)) {
    params_.validate();
    if (arms_.empty()) throw config_error("GittinsStrategy needs at least one arm");
    for (const auto& arm : arms_) {
      if (arm.known) {
        if (!(*arm.known >= 0.0 && *arm.known <= 1.0))
          throw config_error("known arm theta must lie in [0,1]");
      } else if (!(arm.a > 0.0) || !(arm.b > 0.0)) {
        throw config_error("arm pseudo-counts must be positive");
      }
    }
  }

  int choose() override {
    int best = 0;
    double best_index = -1.0;
    for (int i = 0; i < static_cast<int>(arms_.size()); ++i) {
      const double idx = current_index(i);
      if (idx > best_index) {
        best_index = idx;
        best = i;
      }
    }
    return best;
  }

  void observe(int channel, int outcome) override {
    auto& arm = arms_[static_cast<std::size_t>(channel)];
    if (arm.known) return;
    if (outcome)
      arm.a += 1.0;
    else
      arm.b += 1.0;
  }

  double current_index(int channel) const {
    const auto& arm = arms_[static_cast<std::size_t>(channel)];
    if (arm.known) return known_arm_index(*arm.known);
    // Past the truncation the arm is treated as known, matching the table's
    // boundary convention.
    if (arm.a + arm.b > static_cast<double>(params_.state_truncation))
      return arm.a / (arm.a + arm.b);
    if (table_) {
      const double ra = std::round(arm.a);
      const double rb = std::round(arm.b);
      if (ra == arm.a && rb == arm.b) return table_->at(static_cast<int>(ra), static_cast<int>(rb));
    }
    const auto key = std::make_pair(arm.a, arm.b);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    const double value = gittins_index(arm.a, arm.b, params_);
    memo_.emplace(key, value);
    return value;
  }

 private:
  std::vector<GittinsArm> arms_;
  GittinsParams params_;
  std::shared_ptr<const GittinsTable> table_;
  mutable std::map<std::pair<double, double>, double> memo_;
};

}  // namespace cogmac
