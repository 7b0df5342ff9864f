#pragma once

#include <stdexcept>
#include <string>

namespace cogmac {

/// Configuration or input validation failure (malformed prior, bad theta, ...).
struct config_error : std::invalid_argument {
  explicit config_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A planner refused to run because its state space would exceed the budget.
struct resource_limit_error : std::runtime_error {
  explicit resource_limit_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A grid posterior lost all mass (observation impossible under every support point).
struct degenerate_evidence_error : std::runtime_error {
  explicit degenerate_evidence_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Every channel has zero availability; the requested quantity is undefined.
struct no_opportunity_error : std::runtime_error {
  explicit no_opportunity_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cogmac
