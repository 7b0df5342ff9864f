#pragma once

// Independent reference computations for the acceptance suite. These
// deliberately avoid the library's count-lattice dynamic programs and
// conjugate-update shortcuts: posterior moments come from Simpson quadrature
// over the prior density, and values come from enumerating the full history
// tree (equivalently, all strategy trees) or all pruned stopping rules.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cogmac::acceptance {

/// Quadrature moments of one Beta(a,b) channel:
/// moment(x, y) = integral of t^x (1-t)^(y-x) dBeta(a,b), for x <= y <= depth.
class BetaMomentTable {
 public:
  BetaMomentTable(double a, double b, int depth) : depth_(depth) {
    m_.resize(static_cast<std::size_t>(depth + 1));
    const int intervals = 20000;  // Simpson; integrands are low-degree polynomials
    const double h = 1.0 / intervals;
    // unnormalized prior density weights at the quadrature nodes
    std::vector<double> prior(static_cast<std::size_t>(intervals + 1));
    std::vector<double> node(static_cast<std::size_t>(intervals + 1));
    for (int i = 0; i <= intervals; ++i) {
      const double t = i * h;
      node[static_cast<std::size_t>(i)] = t;
      double w = 1.0;
      if (a != 1.0) w *= std::pow(t, a - 1.0);
      if (b != 1.0) w *= std::pow(1.0 - t, b - 1.0);
      prior[static_cast<std::size_t>(i)] = w;
    }
    const auto simpson = [&](const std::vector<double>& f) {
      double s = f.front() + f.back();
      for (int i = 1; i < intervals; ++i)
        s += f[static_cast<std::size_t>(i)] * ((i % 2) ? 4.0 : 2.0);
      return s * h / 3.0;
    };
    const double norm = simpson(prior);
    std::vector<double> f(static_cast<std::size_t>(intervals + 1));
    for (int y = 0; y <= depth; ++y) {
      m_[static_cast<std::size_t>(y)].resize(static_cast<std::size_t>(y + 1));
      for (int x = 0; x <= y; ++x) {
        for (int i = 0; i <= intervals; ++i) {
          const double t = node[static_cast<std::size_t>(i)];
          double v = prior[static_cast<std::size_t>(i)];
          if (x > 0) v *= std::pow(t, x);
          if (y - x > 0) v *= std::pow(1.0 - t, y - x);
          f[static_cast<std::size_t>(i)] = v;
        }
        m_[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = simpson(f) / norm;
      }
    }
  }

  double moment(int x, int y) const {
    return m_[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
  }

  /// P(next observation = 1 | x free among y sensed).
  double predictive(int x, int y) const {
    if (y + 1 > depth_) throw std::out_of_range("moment table depth exceeded");
    return moment(x + 1, y + 1) / moment(x, y);
  }

 private:
  int depth_;
  std::vector<std::vector<double>> m_;  // m_[y][x]
};

/// Exact optimal block value by recursion over the raw history tree: no
/// memoization, no count-state collapse. The max over channels at every
/// history node enumerates all strategy trees through distributivity.
class HistoryTreeOracle {
 public:
  /// Tables may be shared across oracles; each must cover depth >= horizon + 1.
  HistoryTreeOracle(std::vector<const BetaMomentTable*> channel_tables, int horizon,
                    double bits_per_slot)
      : n_(static_cast<int>(channel_tables.size())),
        horizon_(horizon),
        bits_(bits_per_slot),
        tables_(std::move(channel_tables)) {}

  HistoryTreeOracle(const std::vector<std::pair<double, double>>& beta_priors, int horizon,
                    double bits_per_slot)
      : n_(static_cast<int>(beta_priors.size())), horizon_(horizon), bits_(bits_per_slot) {
    owned_.reserve(beta_priors.size());
    for (auto [a, b] : beta_priors) owned_.emplace_back(a, b, horizon + 1);
    for (const auto& t : owned_) tables_.push_back(&t);
  }

  HistoryTreeOracle(const HistoryTreeOracle&) = delete;
  HistoryTreeOracle& operator=(const HistoryTreeOracle&) = delete;

  double value() {
    std::vector<std::pair<int, int>> history;
    history.reserve(static_cast<std::size_t>(horizon_));
    return recurse(history, horizon_);
  }

 private:
  double recurse(std::vector<std::pair<int, int>>& history, int remaining) {
    if (remaining == 0) return 0.0;
    double best = -1.0;
    for (int i = 0; i < n_; ++i) {
      int x = 0, y = 0;
      for (const auto& [channel, obs] : history) {
        if (channel == i) {
          ++y;
          x += obs;
        }
      }
      const double p = tables_[static_cast<std::size_t>(i)]->predictive(x, y);
      double v = p * bits_;
      if (p > 0.0) {
        history.emplace_back(i, 1);
        v += p * recurse(history, remaining - 1);
        history.pop_back();
      }
      if (p < 1.0) {
        history.emplace_back(i, 0);
        v += (1.0 - p) * recurse(history, remaining - 1);
        history.pop_back();
      }
      if (v > best) best = v;
    }
    return best;
  }

  int n_;
  int horizon_;
  double bits_;
  std::vector<const BetaMomentTable*> tables_;
  std::vector<BetaMomentTable> owned_;
};

/// Exhaustive stopping-rule enumeration for the one-unknown-channel problem:
/// every pruned stop/continue tree is evaluated exactly, and the best ratio
/// E[sum Z] / E[M] is returned.
inline double enumerate_stopping_index(double a, double b, int horizon) {
  BetaMomentTable table(a, b, horizon + 1);

  struct Pair {
    double ez;  // E[sum of observations while still sensing]
    double em;  // E[number of sensing slots]
  };

  // All (E[sum Z], E[M]) pairs achievable from the state "about to sense with
  // x free among y observed and r slots remaining".
  const auto all_rules = [&](auto&& self, int x, int y, int r) -> std::vector<Pair> {
    const double p = table.predictive(x, y);
    if (r == 1) return {Pair{p, 1.0}};
    const std::vector<Pair> cont1 = self(self, x + 1, y + 1, r - 1);
    const std::vector<Pair> cont0 = self(self, x, y + 1, r - 1);
    std::vector<Pair> out;
    out.reserve((cont1.size() + 1) * (cont0.size() + 1));
    // option index 0 = stop after this observation; otherwise continue with rule k-1
    for (std::size_t i = 0; i <= cont1.size(); ++i) {
      const Pair up = (i == 0) ? Pair{0.0, 0.0} : cont1[i - 1];
      for (std::size_t k = 0; k <= cont0.size(); ++k) {
        const Pair dn = (k == 0) ? Pair{0.0, 0.0} : cont0[k - 1];
        out.push_back(Pair{p * (1.0 + up.ez) + (1.0 - p) * dn.ez,
                           1.0 + p * up.em + (1.0 - p) * dn.em});
      }
    }
    return out;
  };

  const std::vector<Pair> rules = all_rules(all_rules, 0, 0, horizon);
  double best = 0.0;
  for (const Pair& r : rules) best = std::max(best, r.ez / r.em);
  return best;
}

}  // namespace cogmac::acceptance
