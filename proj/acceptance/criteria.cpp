#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "cogmac/cogmac.hpp"
#include "oracles.hpp"

namespace cogmac::acceptance {
namespace {

namespace fs = std::filesystem;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << "FAILED: " << what;
    }
  }
  void note(const std::string& what) {
    if (detail.tellp() > 0) detail << "; ";
    detail << what;
  }
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// ---- 1. DP-oracle equivalence ----------------------------------------------

Check criterion_dp_oracle() {
  Check c;
  // Shared quadrature tables for the nine (a,b) pairs with parameters <= 3.
  std::map<std::pair<int, int>, BetaMomentTable> tables;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b) tables.emplace(std::make_pair(a, b), BetaMomentTable(a, b, 7));

  double worst = 0.0;
  long cases = 0;
  for (int n = 1; n <= 3; ++n) {
    std::vector<int> combo(static_cast<std::size_t>(n), 0);  // 0..8 -> (a,b)
    const long total = static_cast<long>(std::pow(9.0, n));
    for (long code = 0; code < total; ++code) {
      long rest = code;
      std::vector<std::pair<double, double>> priors;
      std::vector<const BetaMomentTable*> prior_tables;
      std::vector<double> av, bv;
      for (int i = 0; i < n; ++i) {
        const int digit = static_cast<int>(rest % 9);
        rest /= 9;
        const int a = digit / 3 + 1;
        const int b = digit % 3 + 1;
        priors.emplace_back(a, b);
        prior_tables.push_back(&tables.at({a, b}));
        av.push_back(a);
        bv.push_back(b);
      }
      const Belief prior = BetaBelief(av, bv);
      for (int t = 1; t <= 6; ++t) {
        HistoryTreeOracle oracle(prior_tables, t, 1.0);
        const double expect = oracle.value();
        const double got = optimal_value(prior, t, 1.0).value;
        worst = std::max(worst, std::abs(got - expect));
        ++cases;
      }
    }
  }
  c.require(worst <= 1e-9, "max |V - oracle| = " + num(worst) + " > 1e-9");

  const double pinned = optimal_value(BetaBelief::uniform(2), 2, 1.0).value;
  c.require(std::abs(pinned - 13.0 / 12.0) <= 1e-9,
            "V(Beta(1,1)^2, T=2) = " + num(pinned) + " != 13/12");
  c.note(std::to_string(cases) + " prior/horizon cases, max |V - oracle| = " + num(worst) +
         " (tol 1e-9)");
  return c;
}

// ---- 2. stopping-index oracle ----------------------------------------------

Check criterion_stopping_oracle() {
  Check c;
  double worst = 0.0;
  for (int t = 1; t <= 5; ++t) {
    const double expect = enumerate_stopping_index(1.0, 1.0, t);
    const double got = stopping_index(BetaBelief({1.0}, {1.0}), t);
    worst = std::max(worst, std::abs(got - expect));
  }
  c.require(worst <= 1e-9, "max |index - enumeration| = " + num(worst) + " > 1e-9");
  const double two = stopping_index(BetaBelief({1.0}, {1.0}), 2);
  c.require(std::abs(two - 5.0 / 9.0) <= 1e-9, "index(Beta(1,1), T=2) = " + num(two) + " != 5/9");
  c.note("T = 1..5 vs exhaustive rule enumeration, max diff = " + num(worst) + " (tol 1e-9)");
  return c;
}

// ---- 3. Gittins sanity -------------------------------------------------------

Check criterion_gittins() {
  Check c;
  for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0})
    c.require(known_arm_index(theta) == theta, "known arm index != theta at " + num(theta));

  GittinsParams p400{0.9, 400, 1e-4};
  GittinsParams p800{0.9, 800, 1e-4};
  const GittinsTable t400(p400);

  double worst_mono = 0.0;
  for (int level = 2; level <= 400; ++level) {
    for (int a = 1; a <= level - 1; ++a) {
      const int b = level - a;
      if (a + 1 + b <= 400)
        worst_mono = std::max(worst_mono, t400.at(a, b) - t400.at(a + 1, b));
      if (a + b + 1 <= 400)
        worst_mono = std::max(worst_mono, t400.at(a, b + 1) - t400.at(a, b));
    }
  }
  c.require(worst_mono <= 1e-12,
            "monotonicity violated by " + num(worst_mono) + " on the H=400 lattice");

  const GittinsTable t800(p800);
  // Compare where the H=400 truncation bound alpha^(H-(a+b)) is itself below
  // 1e-3; nearer the boundary the 400-state computation is flagged as outside
  // tolerance by design.
  const int max_level =
      400 - static_cast<int>(std::ceil(std::log(1e-3) / std::log(p400.discount)));
  double worst_trunc = 0.0;
  for (int level = 2; level <= max_level; ++level)
    for (int a = 1; a <= level - 1; ++a)
      worst_trunc = std::max(worst_trunc, std::abs(t400.at(a, level - a) - t800.at(a, level - a)));
  c.require(worst_trunc <= 1e-3, "H=400 vs H=800 differ by " + num(worst_trunc) +
                                     " on levels <= " + std::to_string(max_level));
  const auto boundary = gittins_index_checked(200, 200, p400);
  c.require(!boundary.within_tolerance,
            "boundary state (200,200) should carry a truncation quality warning");

  const double pinned = gittins_index(1, 1, p400);
  c.require(std::abs(pinned - 0.702889193) <= 2e-4,
            "index(Beta(1,1), a=0.9) = " + num(pinned) + " != 0.702889193 (tol 2e-4)");
  c.note("monotone on full H=400 lattice (worst " + num(worst_mono) +
         "); |H400-H800| max = " + num(worst_trunc) + " on levels 2.." +
         std::to_string(max_level) + " (tol 1e-3); index(1,1) = " + num(pinned));
  return c;
}

// ---- 4. lower-bound arithmetic ----------------------------------------------

Check criterion_lower_bound() {
  Check c;
  // Independent hand evaluation: D(0.5 || 0.9) = 0.5 ln(25/9).
  const double d = 0.5 * std::log(25.0 / 9.0);
  const double expect = 0.4 / d;
  const double got = regret_lower_bound_coefficient(ThetaVector({0.9, 0.5}), 1.0);
  c.require(std::abs(got - expect) <= 1e-12, "coefficient differs from hand KL evaluation");
  c.require(std::abs(got - 0.783045) <= 1e-5, "coefficient " + num(got) + " != 0.783045 (1e-5)");
  c.note("coefficient = " + num(got));
  return c;
}

// ---- 5. Rule 1 order-optimality signature ------------------------------------

ExperimentConfig single_user_config(const std::string& name, std::vector<double> theta,
                                    long slots, long reps, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.block.n_channels = static_cast<int>(theta.size());
  cfg.block.n_slots = slots;
  cfg.block.n_users = 1;
  cfg.block.seed = seed;
  cfg.theta.emplace(std::move(theta));
  cfg.strategy.name = name;
  cfg.replications = reps;
  return cfg;
}

Check criterion_rule1() {
  Check c;
  auto cfg4 = single_user_config("ucb-rule1", {0.9, 0.5}, 10000, 2000, 90210);
  const AggregateStats s4 = run_single_user(cfg4);
  auto cfg2 = single_user_config("ucb-rule1", {0.9, 0.5}, 100, 2000, 90210);
  const AggregateStats s2 = run_single_user(cfg2);

  const double per_log = s4.mean_loss / std::log(1e4);
  c.require(per_log >= 0.39 && per_log <= 15.7,
            "loss/ln T = " + num(per_log) + " outside [0.39, 15.7]");
  const double growth = s4.mean_loss / s2.mean_loss;
  c.require(growth < 10.0, "loss(1e4)/loss(1e2) = " + num(growth) + " >= 10");
  c.note("loss(1e4) = " + num(s4.mean_loss) + ", loss/lnT = " + num(per_log) +
         " in [0.39, 15.7]; growth ratio = " + num(growth) + " < 10");
  return c;
}

// ---- 6. linear-loss baselines -------------------------------------------------

Check criterion_linear_baselines() {
  Check c;
  auto rnd = single_user_config("random", {0.9, 0.5}, 100000, 100, 777);
  const AggregateStats s = run_single_user(rnd);
  const double rate = s.mean_loss / 100000.0;
  c.require(std::abs(rate - 0.2) <= 0.004,
            "random loss rate " + num(rate) + " not within 2% of 0.2");
  c.note("random rate = " + num(rate));

  for (const std::string name : {"stay-winner-rr", "stay-winner-rand"}) {
    auto c4 = single_user_config(name, {0.9, 0.5}, 10000, 400, 778);
    auto c5 = single_user_config(name, {0.9, 0.5}, 100000, 100, 779);
    const double r4 = run_single_user(c4).mean_loss / 1e4;
    const double r5 = run_single_user(c5).mean_loss / 1e5;
    c.require(std::abs(r5 / r4 - 1.0) <= 0.02,
              name + " rate drifts: " + num(r4) + " at 1e4 vs " + num(r5) + " at 1e5");
    c.note(name + " rate = " + num(r5));
  }
  return c;
}

// ---- 7. symmetric-strategy solver ---------------------------------------------

Check criterion_symmetric_solver() {
  Check c;
  const auto pinned = optimal_symmetric_strategy(ThetaVector({0.8, 0.4}), 2);
  c.require(std::abs(pinned.p[0] - 2.0 / 3.0) <= 1e-9 && std::abs(pinned.p[1] - 1.0 / 3.0) <= 1e-9,
            "p*(0.8, 0.4; K=2) != (2/3, 1/3)");
  c.require(std::abs(pinned.lambda_star - 8.0 / 15.0) <= 1e-9, "lambda* != 8/15");

  Rng rng = substream(424242, {1});
  double worst_norm = 0.0, worst_kkt = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + rng.uniform_int(5);
    const int k = 2 + rng.uniform_int(59);
    std::vector<double> theta(static_cast<std::size_t>(n));
    int positive = 0;
    for (double& t : theta) {
      t = rng.bernoulli(0.15) ? 0.0 : 0.01 + 0.99 * rng.u01();
      if (t > 0.0) ++positive;
    }
    if (positive == 0) theta[0] = 0.5;
    const ThetaVector tv(theta);
    const auto sol = optimal_symmetric_strategy(tv, k);
    double total = 0.0;
    for (double v : sol.p.p) total += v;
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
    for (int i = 0; i < n; ++i) {
      if (tv[i] <= 0.0) continue;
      const double marginal =
          k * tv[i] * std::pow(1.0 - sol.p[i], static_cast<double>(k - 1));
      if (sol.p[i] > 0.0)
        worst_kkt = std::max(worst_kkt, std::abs(marginal - sol.lambda_star));
      else
        worst_kkt = std::max(worst_kkt, std::max(0.0, marginal - sol.lambda_star));
    }
  }
  c.require(worst_norm <= 1e-12, "normalization residual " + num(worst_norm) + " > 1e-12");
  c.require(worst_kkt <= 1e-8, "KKT equalization residual " + num(worst_kkt) + " > 1e-8");

  const auto flat = optimal_symmetric_strategy(ThetaVector({0.9, 0.5, 0.3, 0.0}), 10000);
  double worst_flat = 0.0;
  for (int i = 0; i < 3; ++i) worst_flat = std::max(worst_flat, std::abs(flat.p[i] - 1.0 / 3.0));
  c.require(flat.p[3] == 0.0, "p* must put 0 on a zero-availability channel");
  c.require(worst_flat <= 0.01, "p* not within 0.01 of 1/Q at K=1e4");
  c.note("300 random cases: max |sum p - 1| = " + num(worst_norm) +
         ", max KKT residual = " + num(worst_kkt) + ", flattening gap = " + num(worst_flat));
  return c;
}

// ---- 8. throughput/loss closed forms -------------------------------------------

Check criterion_closed_forms() {
  Check c;
  ExperimentConfig cfg;
  cfg.block.n_channels = 2;
  cfg.block.n_slots = 10000;
  cfg.block.n_users = 2;
  cfg.block.seed = 1234;
  cfg.theta.emplace(std::vector<double>{0.8, 0.4});
  cfg.strategy.name = "symmetric-opt";
  cfg.replications = 200;
  const AggregateStats s = run_multi_user(cfg);

  const ThetaVector theta({0.8, 0.4});
  const auto sol = optimal_symmetric_strategy(theta, 2);
  const double expect_w = expected_total_throughput(theta, sol.p, 2, 10000, 1.0);
  const double expect_l = centralized_loss(theta, sol.p, 2, 10000, 1.0);
  c.require(std::abs(s.mean_throughput - expect_w) <= 3.0 * s.stderr_throughput,
            "throughput " + num(s.mean_throughput) + " vs closed form " + num(expect_w) +
                " (3se = " + num(3.0 * s.stderr_throughput) + ")");
  c.require(std::abs(s.mean_loss - expect_l) <= 3.0 * s.stderr_loss,
            "loss " + num(s.mean_loss) + " vs closed form " + num(expect_l) +
                " (3se = " + num(3.0 * s.stderr_loss) + ")");
  c.note("throughput " + num(s.mean_throughput) + " vs " + num(expect_w) + " +- " +
         num(3.0 * s.stderr_throughput) + "; loss " + num(s.mean_loss) + " vs " + num(expect_l) +
         " +- " + num(3.0 * s.stderr_loss));
  return c;
}

// ---- 9. exponential decay -------------------------------------------------------

Check criterion_decay() {
  Check c;
  const ThetaVector theta({0.8, 0.4});
  const MixedStrategy tau = nash_strategy(theta);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int k_lo = 5, k_hi = 40;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double x = k;
    const double y = std::log(centralized_loss(theta, tau, k, 1, 1.0));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = k_hi - k_lo + 1;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double c2 = decay_constants(theta).c2;
  c.require(std::abs(-slope - c2) / c2 <= 0.05,
            "regressed slope " + num(slope) + " vs -c2 = " + num(-c2));
  c.require(std::abs(c2 - std::log(1.5)) <= 1e-15, "c2 != ln 1.5 for theta (0.8, 0.4)");

  const DecayConstants q2 = decay_constants(ThetaVector({0.3, 0.7}));
  c.require(q2.c1 == std::log(2.0), "c1 != ln 2 for Q = 2");
  c.note("slope = " + num(slope) + " vs -c2 = " + num(-c2) + " (within 5%); c1(Q=2) = ln 2");
  return c;
}

// ---- 10. Rules 2-3 convergence ---------------------------------------------------

ExperimentConfig multi_config(const std::string& name, std::vector<double> theta, int users,
                              long slots, long reps, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.block.n_channels = static_cast<int>(theta.size());
  cfg.block.n_slots = slots;
  cfg.block.n_users = users;
  cfg.block.seed = seed;
  cfg.theta.emplace(std::move(theta));
  cfg.strategy.name = name;
  cfg.replications = reps;
  return cfg;
}

std::vector<double> tagged_user_frequencies(const ExperimentConfig& cfg, long from_slot) {
  const int n = cfg.block.n_channels;
  std::vector<double> freq(static_cast<std::size_t>(n), 0.0);
  long counted = 0;
  for (long rep = 0; rep < cfg.replications; ++rep) {
    const ThetaVector theta = replication_theta(cfg, rep);
    const ChannelRealization z = replication_block(cfg, rep);
    std::vector<std::unique_ptr<SensingStrategy>> users;
    for (int u = 0; u < cfg.block.n_users; ++u)
      users.push_back(make_multi_user_strategy(
          cfg, theta,
          substream(cfg.block.seed, StreamTag::kUser, static_cast<std::uint64_t>(rep),
                    static_cast<std::uint64_t>(u))));
    Rng contention =
        substream(cfg.block.seed, StreamTag::kContention, static_cast<std::uint64_t>(rep));
    const RunRecord rec = simulate_multi_user(users, theta, z, 1.0, contention);
    for (long j = from_slot; j < cfg.block.n_slots; ++j) {
      freq[static_cast<std::size_t>(rec.chosen[static_cast<std::size_t>(j)])] += 1.0;
      ++counted;
    }
  }
  for (double& f : freq) f /= static_cast<double>(counted);
  return freq;
}

Check criterion_rules23() {
  Check c;
  const std::vector<double> theta{0.8, 0.6, 0.4, 0.2};

  // Rule 2: tagged-user selection frequencies over the last 10% of slots
  // approach the Nash profile tau.
  auto cfg2 = multi_config("rule2", theta, 200, 10000, 5, 31415);
  const auto freq2 = tagged_user_frequencies(cfg2, 9000);
  const MixedStrategy tau = nash_strategy(ThetaVector(theta));
  double worst2 = 0.0;
  for (int i = 0; i < 4; ++i) worst2 = std::max(worst2, std::abs(freq2[static_cast<std::size_t>(i)] - tau[i]));
  c.require(worst2 <= 0.05, "rule2 frequency gap to tau = " + num(worst2) + " > 0.05");

  // Rule 3: phase-2 frequencies approach the symmetric optimum for K = 10.
  auto cfg3 = multi_config("rule3", theta, 10, 10000, 3, 27182);
  const long switch_slot =
      static_cast<long>(std::ceil(std::log(10000.0)));  // exploitation starts here
  const auto freq3 = tagged_user_frequencies(cfg3, std::max<long>(switch_slot - 1, 4));
  const auto opt = optimal_symmetric_strategy(ThetaVector(theta), 10);
  double worst3 = 0.0;
  for (int i = 0; i < 4; ++i) worst3 = std::max(worst3, std::abs(freq3[static_cast<std::size_t>(i)] - opt.p[i]));
  c.require(worst3 <= 0.05, "rule3 frequency gap to p* = " + num(worst3) + " > 0.05");
  c.note("rule2 max gap to tau = " + num(worst2) + "; rule3 max gap to p* = " + num(worst3) +
         " (tol 0.05)");
  return c;
}

// ---- 11. determinism --------------------------------------------------------------

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_outputs(const ExperimentConfig& base, const fs::path& scratch, const std::string& tag,
                  Check& c) {
  ExperimentConfig a = base;
  ExperimentConfig b = base;
  a.out_dir = (scratch / (tag + "-a")).string();
  b.out_dir = (scratch / (tag + "-b")).string();
  b.threads = 1;  // byte-identical regardless of worker count
  const auto wa = emit_results(run_experiment(a), a);
  const auto wb = emit_results(run_experiment(b), b);
  if (wa.size() != wb.size()) return false;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    if (file_bytes(wa[i]) != file_bytes(wb[i])) {
      c.note("mismatch: " + wa[i] + " vs " + wb[i]);
      return false;
    }
  }
  return true;
}

Check criterion_determinism(const std::string& scratch_dir) {
  Check c;
  const fs::path scratch(scratch_dir);
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  auto single = single_user_config("ucb-rule1", {0.9, 0.5}, 400, 10, 5150);
  single.threads = 2;
  c.require(same_outputs(single, scratch, "single", c), "single-user outputs not byte-identical");

  auto single_json = single_user_config("myopic", {0.9, 0.5}, 300, 5, 5151);
  single_json.format = "json";
  c.require(same_outputs(single_json, scratch, "single-json", c),
            "json outputs not byte-identical");

  auto multi = multi_config("rule2", {0.8, 0.6, 0.4, 0.2}, 8, 400, 10, 5152);
  multi.threads = 2;
  c.require(same_outputs(multi, scratch, "multi", c), "multi-user outputs not byte-identical");
  c.note("single/json/multi reruns byte-identical (including 2-thread vs 1-thread)");
  fs::remove_all(scratch);
  return c;
}

}  // namespace

std::vector<CriterionResult> run_criteria(const std::vector<int>& ids,
                                          const std::string& scratch_dir) {
  struct Entry {
    int id;
    const char* name;
    std::function<Check()> fn;
  };
  const std::vector<Entry> entries = {
      {1, "dp-oracle-equivalence", criterion_dp_oracle},
      {2, "stopping-index-oracle", criterion_stopping_oracle},
      {3, "gittins-sanity", criterion_gittins},
      {4, "lower-bound-arithmetic", criterion_lower_bound},
      {5, "rule1-order-optimality", criterion_rule1},
      {6, "linear-loss-baselines", criterion_linear_baselines},
      {7, "symmetric-strategy-solver", criterion_symmetric_solver},
      {8, "throughput-loss-closed-forms", criterion_closed_forms},
      {9, "exponential-decay", criterion_decay},
      {10, "rules23-convergence", criterion_rules23},
      {11, "determinism", [&]() { return criterion_determinism(scratch_dir); }},
  };

  std::vector<CriterionResult> results;
  for (const auto& entry : entries) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), entry.id) == ids.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    r.id = entry.id;
    r.name = entry.name;
    try {
      Check c = entry.fn();
      r.pass = c.pass;
      r.detail = c.detail.str();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }
  return results;
}

int print_results(const std::vector<CriterionResult>& results, std::ostream& out) {
  int failures = 0;
  for (const auto& r : results) {
    out << '[' << std::setw(2) << r.id << "] " << (r.pass ? "PASS" : "FAIL") << "  "
        << r.name << "  (" << std::fixed << std::setprecision(1) << r.seconds << "s)  "
        << r.detail << '\n';
    out.unsetf(std::ios::fixed);
    if (!r.pass) ++failures;
  }
  return failures;
}

}  // namespace cogmac::acceptance
