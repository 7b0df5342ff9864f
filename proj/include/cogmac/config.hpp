#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cogmac/belief.hpp"
#include "cogmac/channel_model.hpp"
#include "cogmac/errors.hpp"

namespace cogmac {

inline const std::set<std::string>& single_user_strategy_names() {
  static const std::set<std::string> names = {"optimal-dp",     "gittins", "one-known",
                                              "ucb-rule1",      "random",  "myopic",
                                              "stay-winner-rr", "stay-winner-rand"};
  return names;
}

inline const std::set<std::string>& multi_user_strategy_names() {
  static const std::set<std::string> names = {"symmetric-opt", "nash-tau", "rule2", "rule3"};
  return names;
}

struct StrategyConfig {
  std::string name = "ucb-rule1";
  // gittins
  double discount = 0.9;
  int truncation = 400;
  double tolerance = 1e-4;
  // optimal-dp
  std::size_t max_states = 10'000'000;
};

struct ExperimentConfig {
  BlockConfig block;
  std::optional<ThetaVector> theta;  // explicit availability vector
  std::optional<PriorSpec> prior;    // or a prior theta is drawn from per block
  StrategyConfig strategy;
  long replications = 1;
  int threads = 0;  // 0 = hardware default
  bool out_loss_curve = true;
  bool out_occupancy = true;
  bool out_summary = true;
  std::string format = "csv";
  std::string out_dir = "results";

  bool is_multi_user() const { return multi_user_strategy_names().count(strategy.name) > 0; }

  void validate() const {
    block.validate();
    if (replications < 1) throw config_error("replications must be >= 1");
    if (format != "csv" && format != "json") throw config_error("format must be csv or json");
    const bool single = single_user_strategy_names().count(strategy.name) > 0;
    const bool multi = multi_user_strategy_names().count(strategy.name) > 0;
    if (!single && !multi) throw config_error("unknown strategy: " + strategy.name);
    if (multi && block.n_users < 2)
      throw config_error("multi-user strategies require users >= 2");
    if (single && block.n_users != 1)
      throw config_error("single-user strategies require users = 1");
    if (!theta && !prior) throw config_error("either an explicit theta or a prior is required");
    if (theta && prior) throw config_error("give either theta or a prior, not both");
    const int n = theta ? theta->size() : prior->n_channels();
    if (n != block.n_channels)
      throw config_error("theta/prior dimension must match block channels");
    if (strategy.name == "one-known" && block.n_channels != 2)
      throw config_error("one-known requires exactly 2 channels");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse number for " + what + ": '" + s + "'");
  }
}

inline long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse integer for " + what + ": '" + s + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse unsigned integer for " + what + ": '" + s + "'");
  }
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    if (item.empty()) throw config_error("empty entry in list for " + what);
    out.push_back(parse_double(item, what));
  }
  if (out.empty()) throw config_error("empty list for " + what);
  return out;
}

}  // namespace detail

/// Parse `key = value` lines under `[section]` headers into "section.key"
/// entries. '#' and ';' start comments; keys must be unique.
inline std::map<std::string, std::string> read_ini(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("line " + std::to_string(lineno) + ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw config_error("line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw config_error("line " + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, value).second)
      throw config_error("duplicate config key: " + full);
  }
  return out;
}

/// Build the experiment from "section.key" entries; unknown keys are rejected.
inline ExperimentConfig config_from_entries(const std::map<std::string, std::string>& entries) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    seen.insert(key);
    return it->second;
  };

  if (auto v = get("block.channels")) cfg.block.n_channels = static_cast<int>(detail::parse_long(*v, "block.channels"));
  if (auto v = get("block.slots")) cfg.block.n_slots = detail::parse_long(*v, "block.slots");
  if (auto v = get("block.users")) cfg.block.n_users = static_cast<int>(detail::parse_long(*v, "block.users"));
  if (auto v = get("block.bits_per_slot")) cfg.block.bits_per_slot = detail::parse_double(*v, "block.bits_per_slot");
  if (auto v = get("block.seed")) cfg.block.seed = detail::parse_u64(*v, "block.seed");

  if (auto v = get("theta.values")) cfg.theta.emplace(detail::parse_double_list(*v, "theta.values"));

  if (auto type = get("prior.type")) {
    if (*type == "beta") {
      const auto params = get("prior.params");
      if (!params) throw config_error("prior.params required for prior.type = beta");
      std::vector<std::pair<double, double>> ab;
      for (const auto& item : detail::split(*params, ',')) {
        const auto parts = detail::split(item, ':');
        if (parts.size() != 2) throw config_error("prior.params entries must look like a:b");
        ab.emplace_back(detail::parse_double(parts[0], "prior.params"),
                        detail::parse_double(parts[1], "prior.params"));
      }
      cfg.prior = PriorSpec::product_beta(std::move(ab));
    } else if (*type == "grid") {
      const auto support = get("prior.support");
      const auto weights = get("prior.weights");
      if (!support || !weights)
        throw config_error("prior.support and prior.weights required for prior.type = grid");
      std::vector<std::vector<double>> points;
      for (const auto& pt : detail::split(*support, ';')) {
        std::vector<double> coords;
        std::istringstream in(pt);
        std::string tok;
        while (in >> tok) coords.push_back(detail::parse_double(tok, "prior.support"));
        if (coords.empty()) throw config_error("empty support point in prior.support");
        points.push_back(std::move(coords));
      }
      cfg.prior = PriorSpec::grid(std::move(points),
                                  detail::parse_double_list(*weights, "prior.weights"));
    } else {
      throw config_error("prior.type must be beta or grid");
    }
  }

  if (auto v = get("strategy.name")) cfg.strategy.name = *v;
  if (auto v = get("strategy.discount")) cfg.strategy.discount = detail::parse_double(*v, "strategy.discount");
  if (auto v = get("strategy.truncation")) cfg.strategy.truncation = static_cast<int>(detail::parse_long(*v, "strategy.truncation"));
  if (auto v = get("strategy.tolerance")) cfg.strategy.tolerance = detail::parse_double(*v, "strategy.tolerance");
  if (auto v = get("strategy.max_states")) cfg.strategy.max_states = static_cast<std::size_t>(detail::parse_long(*v, "strategy.max_states"));

  if (auto v = get("run.replications")) cfg.replications = detail::parse_long(*v, "run.replications");
  if (auto v = get("run.threads")) cfg.threads = static_cast<int>(detail::parse_long(*v, "run.threads"));
  if (auto v = get("run.format")) cfg.format = *v;
  if (auto v = get("run.out")) cfg.out_dir = *v;
  if (auto v = get("run.outputs")) {
    cfg.out_loss_curve = cfg.out_occupancy = cfg.out_summary = false;
    for (const auto& o : detail::split(*v, ',')) {
      if (o == "loss-curve")
        cfg.out_loss_curve = true;
      else if (o == "occupancy")
        cfg.out_occupancy = true;
      else if (o == "summary")
        cfg.out_summary = true;
      else
        throw config_error("unknown output kind: " + o);
    }
  }

  for (const auto& [key, value] : entries) {
    if (!seen.count(key)) throw config_error("unknown config key: " + key);
  }
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  return config_from_entries(read_ini(in));
}

}  // namespace cogmac
