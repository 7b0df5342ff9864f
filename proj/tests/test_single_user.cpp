#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "cogmac/single_user.hpp"

using namespace cogmac;

TEST_CASE("ucb index formula") {
  CHECK(ucb_index(0, 1, 1) == 0.0);  // ln 1 = 0
  CHECK(ucb_index(4, 4, 10) >= 1.0);  // saturated estimate plus nonnegative bonus
  CHECK(ucb_index(3, 4, 100) == Catch::Approx(2.2674271293851467).margin(1e-12));
  CHECK_THROWS_AS(ucb_index(0, 0, 5), config_error);
  CHECK_THROWS_AS(ucb_index(0, 1, 0), config_error);
}

TEST_CASE("ucb index is monotone in the estimate and the slot") {
  for (int x = 0; x < 8; ++x)
    CHECK(ucb_index(x + 1, 10, 50) > ucb_index(x, 10, 50));
  for (double j : {2.0, 5.0, 20.0, 100.0})
    CHECK(ucb_index(3, 10, j * 2) > ucb_index(3, 10, j));
}

TEST_CASE("rule 1 senses every channel once, in order") {
  Rule1Strategy s(3);
  for (int j = 0; j < 3; ++j) {
    const int c = s.choose();
    REQUIRE(c == j);
    s.observe(c, 1);
  }
}

TEST_CASE("rule 1 exploits the channel with the only success after initialization") {
  Rule1Strategy s(3);
  const int init_obs[3] = {1, 0, 0};
  for (int j = 0; j < 3; ++j) s.observe(s.choose(), init_obs[j]);
  CHECK(s.choose() == 0);
}

TEST_CASE("rule 1 with one channel always senses it") {
  Rule1Strategy s(1);
  for (int j = 0; j < 5; ++j) {
    REQUIRE(s.choose() == 0);
    s.observe(0, 0);
  }
}

TEST_CASE("myopic strategy follows the posterior mean") {
  MyopicStrategy point(GridBelief::point_mass({0.9, 0.5}));
  for (int j = 0; j < 4; ++j) {
    REQUIRE(point.choose() == 0);
    point.observe(0, 0);  // even repeated failures cannot move a point mass
  }

  MyopicStrategy up = MyopicStrategy::with_uniform_prior(2);
  up.observe(0, 1);
  CHECK(up.choose() == 0);  // mean 2/3 vs 1/2

  MyopicStrategy down = MyopicStrategy::with_uniform_prior(2);
  down.observe(0, 0);
  CHECK(down.choose() == 1);  // mean 1/3 vs 1/2
}

TEST_CASE("stay-with-winner repeats on success and switches on failure") {
  Rng rng = substream(17, {1});
  StayWithWinnerStrategy rr(2, SwitchRule::kRoundRobin, rng);
  const int first = rr.choose();
  rr.observe(first, 1);
  CHECK(rr.choose() == first);  // winner kept
  rr.observe(first, 0);
  CHECK(rr.choose() == 1 - first);  // only one alternative at N = 2

  StayWithWinnerStrategy rnd(4, SwitchRule::kUniformRandom, substream(18, {1}));
  const int c = rnd.choose();
  rnd.observe(c, 0);
  CHECK(rnd.choose() != c);
}

TEST_CASE("stay-with-winner on a sure channel never leaves it") {
  StayWithWinnerStrategy s(2, SwitchRule::kRoundRobin, substream(19, {1}));
  int c = s.choose();
  for (int j = 0; j < 20; ++j) {
    if (c == 0) break;
    s.observe(c, 0);  // channel 2 is dead: theta = (1, 0)
    c = s.choose();
  }
  REQUIRE(c == 0);
  for (int j = 0; j < 20; ++j) {
    s.observe(0, 1);
    REQUIRE(s.choose() == 0);
  }
}

TEST_CASE("kl divergence of Bernoulli pairs") {
  CHECK(kl_bernoulli(0.5, 0.5) == 0.0);
  CHECK(kl_bernoulli(0.0, 0.5) == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(kl_bernoulli(0.5, 0.9) == Catch::Approx(0.5 * std::log(25.0 / 9.0)).margin(1e-12));
  CHECK(std::isinf(kl_bernoulli(0.5, 1.0)));
  CHECK(std::isinf(kl_bernoulli(0.5, 0.0)));
  CHECK(kl_bernoulli(1.0, 1.0) == 0.0);
  CHECK(kl_bernoulli(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(kl_bernoulli(1.5, 0.5), config_error);
}

TEST_CASE("logarithmic lower-bound coefficient") {
  CHECK(regret_lower_bound_coefficient(ThetaVector({0.9, 0.9}), 1.0) == 0.0);
  CHECK(regret_lower_bound_coefficient(ThetaVector({0.9, 0.5}), 1.0) ==
        Catch::Approx(0.783045).margin(1e-5));
  // A degenerate best channel is told apart in one failed sample: no log term.
  CHECK(regret_lower_bound_coefficient(ThetaVector({1.0, 0.5}), 1.0) == 0.0);
  CHECK(regret_lower_bound_coefficient(ThetaVector({0.9, 0.5}), 2.0) ==
        Catch::Approx(2.0 * 0.783045).margin(2e-5));
}

TEST_CASE("loss report arithmetic") {
  const ThetaVector theta({0.9, 0.5});
  const auto all_best = compute_loss(theta, {100, 0}, 100, 1.0, 90);
  CHECK(all_best.expected_loss == 0.0);
  CHECK(all_best.realized_loss == Catch::Approx(0.0).margin(1e-12));

  CHECK(compute_loss(theta, {90, 10}, 100, 1.0, 85).expected_loss == Catch::Approx(4.0));
  CHECK(compute_loss(theta, {0, 100}, 100, 1.0, 50).expected_loss == Catch::Approx(40.0));
  CHECK(compute_loss(theta, {0, 100}, 100, 1.0, 50).realized_loss == Catch::Approx(40.0));
  CHECK_THROWS_AS(compute_loss(theta, {50, 40}, 100, 1.0, 45), config_error);
  CHECK_THROWS_AS(compute_loss(theta, {50}, 50, 1.0, 45), config_error);
}
