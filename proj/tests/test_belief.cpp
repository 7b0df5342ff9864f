#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogmac/belief.hpp"
#include "cogmac/rng.hpp"

using namespace cogmac;

TEST_CASE("conjugate update increments the matching pseudo-count") {
  Belief b = BetaBelief::uniform(2);
  b = update_posterior(b, 0, 1);
  const auto& beta = std::get<BetaBelief>(b);
  CHECK(beta.a(0) == 2.0);
  CHECK(beta.b(0) == 1.0);
  CHECK(posterior_mean(b, 0) == Catch::Approx(2.0 / 3.0));
  CHECK(posterior_mean(b, 1) == Catch::Approx(0.5));
}

TEST_CASE("grid update reweights by the likelihood and renormalizes") {
  Belief g = GridBelief({{0.2}, {0.8}}, {0.5, 0.5});
  g = update_posterior(g, 0, 1);
  const auto& grid = std::get<GridBelief>(g);
  CHECK(grid.weights()[0] == Catch::Approx(0.2));
  CHECK(grid.weights()[1] == Catch::Approx(0.8));
}

TEST_CASE("posterior means of the worked examples") {
  CHECK(posterior_mean(BetaBelief({3}, {1}), 0) == 0.75);
  CHECK(posterior_mean(GridBelief({{0.2}, {0.8}}, {0.25, 0.75}), 0) == Catch::Approx(0.65));
  CHECK(posterior_mean(GridBelief::point_mass({0.9}), 0) == 0.9);
}

TEST_CASE("updates commute (Bernoulli likelihood is exchangeable)") {
  const Belief start = GridBelief({{0.2, 0.5}, {0.7, 0.9}, {0.4, 0.1}}, {0.2, 0.5, 0.3});
  Belief ab = update_posterior(update_posterior(start, 0, 1), 0, 0);
  Belief ba = update_posterior(update_posterior(start, 0, 0), 0, 1);
  const auto& wa = std::get<GridBelief>(ab).weights();
  const auto& wb = std::get<GridBelief>(ba).weights();
  for (std::size_t i = 0; i < wa.size(); ++i) CHECK(wa[i] == Catch::Approx(wb[i]).margin(1e-15));

  Belief beta_ab = update_posterior(update_posterior(Belief(BetaBelief::uniform(1)), 0, 1), 0, 0);
  Belief beta_ba = update_posterior(update_posterior(Belief(BetaBelief::uniform(1)), 0, 0), 0, 1);
  CHECK(posterior_mean(beta_ab, 0) == posterior_mean(beta_ba, 0));
}

TEST_CASE("posterior depends on counts only, not the order") {
  Rng rng = substream(3, {1});
  std::vector<int> obs;
  for (int i = 0; i < 16; ++i) obs.push_back(rng.bernoulli(0.6) ? 1 : 0);
  Belief forward = BetaBelief::uniform(1);
  Belief backward = BetaBelief::uniform(1);
  for (int z : obs) forward = update_posterior(forward, 0, z);
  for (auto it = obs.rbegin(); it != obs.rend(); ++it) backward = update_posterior(backward, 0, *it);
  CHECK(posterior_mean(forward, 0) == posterior_mean(backward, 0));
}

TEST_CASE("grid weights stay a probability vector through updates") {
  Rng rng = substream(9, {2});
  std::vector<std::vector<double>> support;
  for (int m = 0; m < 31; ++m) support.push_back({(m + 0.5) / 31.0});
  GridBelief g(support, std::vector<double>(31, 1.0 / 31.0));
  for (int step = 0; step < 50; ++step) {
    g.update_in_place(0, rng.bernoulli(0.4) ? 1 : 0);
    double total = 0.0;
    for (double w : g.weights()) {
      REQUIRE(w >= 0.0);
      total += w;
    }
    REQUIRE(std::abs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("impossible evidence raises a degenerate-evidence error") {
  GridBelief g({{0.0}}, {1.0});
  CHECK_THROWS_AS(g.update_in_place(0, 1), degenerate_evidence_error);
  GridBelief h({{1.0}, {1.0}}, {0.5, 0.5});
  CHECK_THROWS_AS(h.update_in_place(0, 0), degenerate_evidence_error);
}

TEST_CASE("beta posterior mean matches a fine uniform grid") {
  // 2001 midpoint cells over [0,1] stand in for the Beta(1,1) density.
  const int m = 2001;
  std::vector<std::vector<double>> support;
  support.reserve(m);
  for (int i = 0; i < m; ++i) support.push_back({(i + 0.5) / m});
  Rng rng = substream(77, {5});
  for (int trial = 0; trial < 25; ++trial) {
    Belief grid = GridBelief(support, std::vector<double>(m, 1.0 / m));
    Belief beta = BetaBelief::uniform(1);
    const int steps = rng.uniform_int(21);
    for (int s = 0; s < steps; ++s) {
      const int z = rng.bernoulli(0.3) ? 1 : 0;
      grid = update_posterior(grid, 0, z);
      beta = update_posterior(beta, 0, z);
    }
    REQUIRE(std::abs(posterior_mean(grid, 0) - posterior_mean(beta, 0)) <= 1e-6);
  }
}

TEST_CASE("update_posterior validates its arguments") {
  const Belief b = BetaBelief::uniform(2);
  CHECK_THROWS_AS(update_posterior(b, 2, 1), config_error);
  CHECK_THROWS_AS(update_posterior(b, -1, 1), config_error);
  CHECK_THROWS_AS(update_posterior(b, 0, 2), config_error);
}

TEST_CASE("belief construction validates invariants") {
  CHECK_THROWS_AS(BetaBelief({1.0}, {0.0}), config_error);
  CHECK_THROWS_AS(BetaBelief({}, {}), config_error);
  CHECK_THROWS_AS(GridBelief({{0.5}, {0.6}}, {0.7, 0.7}), config_error);
  CHECK_THROWS_AS(GridBelief({{0.5}, {0.6, 0.7}}, {0.5, 0.5}), config_error);
}
