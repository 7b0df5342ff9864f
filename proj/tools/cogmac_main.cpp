// Command-line front end: exact planners (`plan`), game-theoretic solvers
// (`solve`), Monte Carlo experiments (`sim`), and the desk-scale verification
// suite (`verify`). Errors come back as a single `error: ...` line on stderr
// with a nonzero exit code.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cogmac/cogmac.hpp"
#include "criteria.hpp"

namespace {

using nlohmann::json;

void write_or_print(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw cogmac::config_error("cannot write output file: " + out_path);
  out << j.dump(2) << '\n';
}

cogmac::PriorSpec parse_beta_prior(const std::string& text) {
  std::vector<std::pair<double, double>> ab;
  for (const auto& item : cogmac::detail::split(text, ',')) {
    const auto parts = cogmac::detail::split(item, ':');
    if (parts.size() != 2) throw cogmac::config_error("--beta entries must look like a:b");
    ab.emplace_back(cogmac::detail::parse_double(parts[0], "--beta"),
                    cogmac::detail::parse_double(parts[1], "--beta"));
  }
  return cogmac::PriorSpec::product_beta(std::move(ab));
}

struct SimFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> theta;
  std::optional<long> slots;
  std::optional<int> users;
  std::optional<long> replications;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> threads;
  std::optional<double> bits;
};

cogmac::ExperimentConfig build_sim_config(const SimFlags& f) {
  cogmac::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = cogmac::parse_config_file(f.config_path);
  if (f.seed) cfg.block.seed = *f.seed;
  if (f.strategy) cfg.strategy.name = *f.strategy;
  if (f.theta) {
    cfg.theta.emplace(cogmac::detail::parse_double_list(*f.theta, "--theta"));
    cfg.prior.reset();
    cfg.block.n_channels = cfg.theta->size();
  }
  if (f.slots) cfg.block.n_slots = *f.slots;
  if (f.users) cfg.block.n_users = *f.users;
  if (f.replications) cfg.replications = *f.replications;
  if (f.out) cfg.out_dir = *f.out;
  if (f.format) cfg.format = *f.format;
  if (f.threads) cfg.threads = *f.threads;
  if (f.bits) cfg.block.bits_per_slot = *f.bits;
  return cfg;
}

int run_plan_dp(const std::string& config_path, const std::string& beta, const std::string& theta,
                long slots, double bits, long max_states, bool full_policy,
                const std::string& out_path) {
  cogmac::Belief prior = cogmac::BetaBelief::uniform(1);
  if (!config_path.empty()) {
    const auto cfg = cogmac::parse_config_file(config_path);
    if (cfg.theta)
      prior = cogmac::GridBelief::point_mass(cfg.theta->values());
    else if (cfg.prior)
      prior = cfg.prior->to_belief();
    if (slots <= 0) slots = cfg.block.n_slots;
  } else if (!beta.empty()) {
    prior = parse_beta_prior(beta).to_belief();
  } else if (!theta.empty()) {
    prior = cogmac::GridBelief::point_mass(cogmac::detail::parse_double_list(theta, "--theta"));
  } else {
    throw cogmac::config_error("plan dp needs --config, --beta or --theta");
  }
  if (slots <= 0) throw cogmac::config_error("plan dp needs --slots >= 1");

  const auto plan =
      cogmac::optimal_value(prior, slots, bits, static_cast<std::size_t>(max_states));
  json j;
  j["value"] = plan.value;
  j["first_channel"] = plan.first_action + 1;
  j["states"] = plan.values.size();
  j["slots"] = slots;
  j["bits_per_slot"] = bits;
  if (full_policy) {
    json entries = json::array();
    for (const auto& [key, action] : plan.policy) {
      json e;
      e["remaining"] = key[0];
      json counts = json::array();
      for (std::size_t i = 1; i < key.size(); i += 2)
        counts.push_back({{"free", key[i]}, {"sensed", key[i + 1]}});
      e["counts"] = std::move(counts);
      e["channel"] = action + 1;
      entries.push_back(std::move(e));
    }
    j["policy"] = std::move(entries);
  }
  write_or_print(j, out_path);
  return 0;
}

int run_plan_stopping(const std::string& beta, double theta1, long slots,
                      const std::string& out_path) {
  cogmac::Belief belief = cogmac::BetaBelief({1.0}, {1.0});
  if (!beta.empty()) {
    const auto parts = cogmac::detail::split(beta, ':');
    if (parts.size() != 2) throw cogmac::config_error("--beta must look like a:b");
    belief = cogmac::BetaBelief({cogmac::detail::parse_double(parts[0], "--beta")},
                                {cogmac::detail::parse_double(parts[1], "--beta")});
  } else if (theta1 >= 0.0) {
    belief = cogmac::GridBelief::point_mass({theta1});
  }
  json j;
  j["slots"] = slots;
  j["stopping_index"] = cogmac::stopping_index(belief, slots);
  write_or_print(j, out_path);
  return 0;
}

int run_plan_gittins(double discount, int truncation, double tolerance, double a, double b,
                     int table_level, const std::string& format, const std::string& out_path) {
  cogmac::GittinsParams params{discount, truncation, tolerance};
  params.validate();
  if (table_level <= 0) {
    const auto r = cogmac::gittins_index_checked(a, b, params);
    json j;
    j["a"] = a;
    j["b"] = b;
    j["discount"] = discount;
    j["index"] = r.value;
    j["truncation_bound"] = r.truncation_bound;
    j["within_tolerance"] = r.within_tolerance;
    write_or_print(j, out_path);
    return 0;
  }
  if (table_level > truncation)
    throw cogmac::config_error("--table level cannot exceed --truncation");
  const cogmac::GittinsTable table(params);
  if (format == "csv") {
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path, std::ios::binary);
      if (!file) throw cogmac::config_error("cannot write output file: " + out_path);
      out = &file;
    }
    *out << "a,b,index\n";
    for (int level = 2; level <= table_level; ++level)
      for (int ai = 1; ai <= level - 1; ++ai)
        *out << ai << ',' << (level - ai) << ','
             << cogmac::detail::fmt9(table.at(ai, level - ai)) << '\n';
  } else {
    json rows = json::array();
    for (int level = 2; level <= table_level; ++level)
      for (int ai = 1; ai <= level - 1; ++ai)
        rows.push_back({{"a", ai}, {"b", level - ai}, {"index", table.at(ai, level - ai)}});
    json j;
    j["discount"] = discount;
    j["truncation"] = truncation;
    j["table"] = std::move(rows);
    write_or_print(j, out_path);
  }
  return 0;
}

int run_solve(const std::string& theta_text, int users, long slots, double bits,
              const std::string& out_path) {
  const cogmac::ThetaVector theta(cogmac::detail::parse_double_list(theta_text, "--theta"));
  json j;
  j["theta"] = theta.values();
  j["users"] = users;
  j["slots"] = slots;
  j["bits_per_slot"] = bits;
  const auto decay = cogmac::decay_constants(theta);
  j["q"] = decay.q;
  j["theta_lstar"] = decay.theta_lstar;
  j["c1"] = cogmac::detail::json_number_or_sentinel(decay.c1);
  j["c2"] = cogmac::detail::json_number_or_sentinel(decay.c2);
  j["tau"] = cogmac::nash_strategy(theta).p;
  j["lower_bound_coefficient"] = cogmac::regret_lower_bound_coefficient(theta, bits);
  if (users >= 2) {
    const auto sol = cogmac::optimal_symmetric_strategy(theta, users);
    j["p_star"] = sol.p.p;
    j["lambda_star"] = sol.lambda_star;
    j["expected_total_throughput"] =
        cogmac::expected_total_throughput(theta, sol.p, users, slots, bits);
    j["centralized_loss"] = cogmac::centralized_loss(theta, sol.p, users, slots, bits);
    const auto tau = cogmac::nash_strategy(theta);
    j["nash_expected_total_throughput"] =
        cogmac::expected_total_throughput(theta, tau, users, slots, bits);
    j["nash_centralized_loss"] = cogmac::centralized_loss(theta, tau, users, slots, bits);
  }
  write_or_print(j, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cognitive medium-access planning and simulation"};
  app.require_subcommand(1);

  // --- plan ---
  auto* plan = app.add_subcommand("plan", "Exact planners: DP value, stopping index, index tables");
  plan->require_subcommand(1);

  std::string dp_config, dp_beta, dp_theta, dp_out;
  long dp_slots = 0;
  double dp_bits = 1.0;
  long dp_max_states = 10'000'000;
  bool dp_full_policy = false;
  auto* dp = plan->add_subcommand("dp", "Optimal block value and policy");
  dp->add_option("--config", dp_config, "experiment config supplying the prior and slots");
  dp->add_option("--beta", dp_beta, "product-Beta prior, e.g. 1:1,1:1");
  dp->add_option("--theta", dp_theta, "known availability vector (point-mass prior)");
  dp->add_option("--slots", dp_slots, "horizon T");
  dp->add_option("--bits", dp_bits, "bits per free slot");
  dp->add_option("--max-states", dp_max_states, "memo budget");
  dp->add_flag("--full-policy", dp_full_policy, "include every reachable state's action");
  dp->add_option("--out", dp_out, "write JSON here instead of stdout");

  std::string st_beta, st_out;
  double st_theta1 = -1.0;
  long st_slots = 1;
  auto* stopping = plan->add_subcommand("stopping", "One-known-channel stopping index");
  stopping->add_option("--beta", st_beta, "Beta prior of the unknown channel, e.g. 1:1");
  stopping->add_option("--theta1", st_theta1, "point-mass availability of the unknown channel");
  stopping->add_option("--slots", st_slots, "remaining horizon T")->required();
  stopping->add_option("--out", st_out, "write JSON here instead of stdout");

  double gt_discount = 0.9, gt_tolerance = 1e-4, gt_a = 1.0, gt_b = 1.0;
  int gt_truncation = 400, gt_table = 0;
  std::string gt_format = "json", gt_out;
  auto* gittins = plan->add_subcommand("gittins", "Discounted index of Beta-Bernoulli arms");
  gittins->add_option("--discount", gt_discount, "discount factor in (0,1)");
  gittins->add_option("--truncation", gt_truncation, "state truncation H (max a+b)");
  gittins->add_option("--tolerance", gt_tolerance, "index tolerance");
  gittins->add_option("--a", gt_a, "free pseudo-count");
  gittins->add_option("--b", gt_b, "busy pseudo-count");
  gittins->add_option("--table", gt_table, "emit the whole lattice up to a+b <= LEVEL");
  gittins->add_option("--format", gt_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  gittins->add_option("--out", gt_out, "write here instead of stdout");

  // --- solve ---
  std::string sv_theta, sv_out;
  int sv_users = 2;
  long sv_slots = 1;
  double sv_bits = 1.0;
  auto* solve = app.add_subcommand("solve", "Mixed strategies and loss constants from theta");
  solve->add_option("--theta", sv_theta, "availability vector, e.g. 0.8,0.4")->required();
  solve->add_option("--users", sv_users, "number of cognitive users K");
  solve->add_option("--slots", sv_slots, "slots T for the closed-form totals");
  solve->add_option("--bits", sv_bits, "bits per free slot");
  solve->add_option("--out", sv_out, "write JSON here instead of stdout");

  // --- sim ---
  SimFlags sim_flags;
  auto* sim = app.add_subcommand("sim", "Monte Carlo experiment over replicated blocks");
  sim->add_option("--config", sim_flags.config_path, "experiment config file");
  std::uint64_t sim_seed = 0;
  std::string sim_strategy, sim_theta, sim_out, sim_format;
  long sim_slots = 0, sim_reps = 0;
  int sim_users = 0, sim_threads = 0;
  double sim_bits = 0.0;
  auto* o_seed = sim->add_option("--seed", sim_seed, "master seed");
  auto* o_strat = sim->add_option("--strategy", sim_strategy, "strategy identifier");
  auto* o_theta = sim->add_option("--theta", sim_theta, "explicit availability vector");
  auto* o_slots = sim->add_option("--slots", sim_slots, "slots per block T");
  auto* o_users = sim->add_option("--users", sim_users, "number of users K");
  auto* o_reps = sim->add_option("--replications", sim_reps, "Monte Carlo replications R");
  auto* o_out = sim->add_option("--out", sim_out, "output directory");
  auto* o_format = sim->add_option("--format", sim_format, "csv|json")
                       ->check(CLI::IsMember({"csv", "json"}));
  auto* o_threads = sim->add_option("--threads", sim_threads, "worker threads (0 = auto)");
  auto* o_bits = sim->add_option("--bits", sim_bits, "bits per free slot");

  // --- verify ---
  std::vector<int> verify_ids;
  std::string verify_scratch = "verify-scratch";
  auto* verify = app.add_subcommand("verify", "Run the desk-scale acceptance experiments");
  verify->add_option("--criterion", verify_ids, "criterion ids to run (default: all)");
  verify->add_option("--scratch", verify_scratch, "scratch directory for output-file checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dp->parsed())
      return run_plan_dp(dp_config, dp_beta, dp_theta, dp_slots, dp_bits, dp_max_states,
                         dp_full_policy, dp_out);
    if (stopping->parsed()) return run_plan_stopping(st_beta, st_theta1, st_slots, st_out);
    if (gittins->parsed())
      return run_plan_gittins(gt_discount, gt_truncation, gt_tolerance, gt_a, gt_b, gt_table,
                              gt_format, gt_out);
    if (solve->parsed()) return run_solve(sv_theta, sv_users, sv_slots, sv_bits, sv_out);
    if (sim->parsed()) {
      if (o_seed->count()) sim_flags.seed = sim_seed;
      if (o_strat->count()) sim_flags.strategy = sim_strategy;
      if (o_theta->count()) sim_flags.theta = sim_theta;
      if (o_slots->count()) sim_flags.slots = sim_slots;
      if (o_users->count()) sim_flags.users = sim_users;
      if (o_reps->count()) sim_flags.replications = sim_reps;
      if (o_out->count()) sim_flags.out = sim_out;
      if (o_format->count()) sim_flags.format = sim_format;
      if (o_threads->count()) sim_flags.threads = sim_threads;
      if (o_bits->count()) sim_flags.bits = sim_bits;
      const auto cfg = build_sim_config(sim_flags);
      cfg.validate();
      const auto stats = cogmac::run_experiment(cfg);
      const auto written = cogmac::emit_results(stats, cfg);
      for (const auto& path : written) std::cerr << "wrote " << path << '\n';
      std::cout << cogmac::make_summary(cfg, stats).dump(2) << '\n';
      return 0;
    }
    if (verify->parsed()) {
      const auto results = cogmac::acceptance::run_criteria(verify_ids, verify_scratch);
      const int failures = cogmac::acceptance::print_results(results, std::cout);
      if (failures > 0) {
        std::cerr << "error: " << failures << " acceptance criteria failed\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
