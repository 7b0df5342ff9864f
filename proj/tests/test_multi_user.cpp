#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "cogmac/multi_user.hpp"
#include "cogmac/rng.hpp"

using namespace cogmac;

TEST_CASE("contention outcomes") {
  Rng rng = substream(1, {1});
  const std::vector<int> one{7};
  CHECK(contention_resolve(one, true, rng) == 7);
  CHECK_FALSE(contention_resolve(one, false, rng).has_value());
  CHECK_FALSE(contention_resolve(std::vector<int>{}, true, rng).has_value());
}

TEST_CASE("contention winner is uniform over the contenders") {
  Rng rng = substream(2, {1});
  const std::vector<int> four{0, 1, 2, 3};
  std::array<long, 4> wins{0, 0, 0, 0};
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) wins[static_cast<std::size_t>(*contention_resolve(four, true, rng))]++;
  for (long w : wins) CHECK(std::abs(static_cast<double>(w) / trials - 0.25) <= 0.01);
}

TEST_CASE("mixed strategy validation") {
  CHECK_THROWS_AS(MixedStrategy({0.5, 0.6}), config_error);
  CHECK_THROWS_AS(MixedStrategy({1.2, -0.2}), config_error);
  CHECK_NOTHROW(MixedStrategy({0.5, 0.5}));
}

TEST_CASE("symmetric optimum on symmetric channels is uniform") {
  for (int k : {2, 3, 17}) {
    const auto sol = optimal_symmetric_strategy(ThetaVector({0.5, 0.5}), k);
    CHECK(sol.p[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(sol.p[1] == Catch::Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("symmetric optimum pinned case") {
  const auto sol = optimal_symmetric_strategy(ThetaVector({0.8, 0.4}), 2);
  CHECK(sol.p[0] == Catch::Approx(2.0 / 3.0).margin(1e-9));
  CHECK(sol.p[1] == Catch::Approx(1.0 / 3.0).margin(1e-9));
  CHECK(sol.lambda_star == Catch::Approx(8.0 / 15.0).margin(1e-9));
}

TEST_CASE("zero-availability channels get zero probability") {
  const auto sol = optimal_symmetric_strategy(ThetaVector({0.8, 0.0}), 3);
  CHECK(sol.p[0] == 1.0);
  CHECK(sol.p[1] == 0.0);
}

TEST_CASE("symmetric solver rejects degenerate inputs") {
  CHECK_THROWS_AS(optimal_symmetric_strategy(ThetaVector({0.0, 0.0}), 3), no_opportunity_error);
  CHECK_THROWS_AS(optimal_symmetric_strategy(ThetaVector({0.5, 0.5}), 1), config_error);
}

TEST_CASE("nash profile is availability-proportional") {
  const auto tau = nash_strategy(ThetaVector({0.6, 0.4, 0.0}));
  CHECK(tau[0] == Catch::Approx(0.6));
  CHECK(tau[1] == Catch::Approx(0.4));
  CHECK(tau[2] == 0.0);
  const auto two = nash_strategy(ThetaVector({0.8, 0.4}));
  CHECK(two[0] == Catch::Approx(2.0 / 3.0));
  const auto single = nash_strategy(ThetaVector({0.5}));
  CHECK(single[0] == 1.0);
  CHECK_THROWS_AS(nash_strategy(ThetaVector({0.0})), no_opportunity_error);
}

TEST_CASE("closed-form throughput and loss") {
  const ThetaVector theta({0.8, 0.4});
  const MixedStrategy p({2.0 / 3.0, 1.0 / 3.0});
  CHECK(expected_total_throughput(theta, p, 2, 1, 1.0) ==
        Catch::Approx(0.8 * (1 - 1.0 / 9) + 0.4 * (1 - 4.0 / 9)).margin(1e-12));
  CHECK(centralized_loss(theta, p, 2, 1, 1.0) ==
        Catch::Approx(0.8 / 9 + 0.4 * 4.0 / 9).margin(1e-12));

  const MixedStrategy onehot({1.0, 0.0});
  CHECK(expected_total_throughput(theta, onehot, 5, 10, 1.0) == Catch::Approx(8.0));
  CHECK(centralized_loss(ThetaVector({0.8, 0.0}), onehot, 4, 10, 1.0) ==
        Catch::Approx(0.0).margin(1e-12));

  // Saturation: every supported channel is found with probability -> 1.
  CHECK(expected_total_throughput(theta, p, 400, 1, 1.0) ==
        Catch::Approx(1.2).margin(1e-10));
}

TEST_CASE("decay constants") {
  const auto d = decay_constants(ThetaVector({0.8, 0.4}));
  CHECK(d.q == 2);
  CHECK(d.theta_lstar == 0.4);
  CHECK(d.c1 == std::log(2.0));
  CHECK(d.c2 == Catch::Approx(std::log(1.5)).margin(1e-15));

  const auto no_loss = decay_constants(ThetaVector({0.7, 0.0}));
  CHECK(no_loss.q == 1);
  CHECK(no_loss.no_loss());
  CHECK(std::isinf(no_loss.c1));

  CHECK_THROWS_AS(decay_constants(ThetaVector({0.0, 0.0})), no_opportunity_error);
}

TEST_CASE("rule 2 initialization pins every observed-free count to one") {
  Rule2Strategy s(3, substream(3, {1}));
  for (int j = 0; j < 3; ++j) {
    const int c = s.choose();
    REQUIRE(c == j);
    s.observe(c, 0);  // busy everywhere; X is still forced to 1
  }
  const auto probs = s.choice_probabilities();
  for (double p : probs) CHECK(p == Catch::Approx(1.0 / 3.0));
  CHECK(s.stats().observed_free[0] == 1);
}

TEST_CASE("rule 2 samples proportionally to the running estimates") {
  Rule2Strategy s(2, substream(4, {1}));
  s.observe(0, 0);
  s.observe(1, 0);  // init: X = (1,1), Y = (1,1)
  // push the estimates to 4/5 and 2/5
  for (int i = 0; i < 3; ++i) s.observe(0, 1);
  s.observe(0, 0);
  s.observe(1, 1);
  for (int i = 0; i < 3; ++i) s.observe(1, 0);
  const auto probs = s.choice_probabilities();
  CHECK(probs[0] == Catch::Approx(2.0 / 3.0));
  CHECK(probs[1] == Catch::Approx(1.0 / 3.0));

  long counts[2] = {0, 0};
  for (int i = 0; i < 60000; ++i) counts[s.choose()]++;
  CHECK(std::abs(counts[0] / 60000.0 - 2.0 / 3.0) <= 0.01);
}

TEST_CASE("rule 2 with a single channel always senses it") {
  Rule2Strategy s(1, substream(5, {1}));
  for (int j = 0; j < 5; ++j) {
    REQUIRE(s.choose() == 0);
    s.observe(0, 0);
  }
}

TEST_CASE("rule 3 exploitation starts at the first slot at or past ln T") {
  CHECK(Rule3Strategy(2, 3, 54, substream(6, {1})).switch_slot() == 4);   // ln 54 = 3.989
  CHECK(Rule3Strategy(2, 3, 55, substream(6, {2})).switch_slot() == 5);   // ln 55 = 4.007
  CHECK(Rule3Strategy(2, 3, 10000, substream(6, {3})).switch_slot() == 10);
  CHECK_THROWS_AS(Rule3Strategy(2, 1, 54, substream(6, {4})), config_error);
  CHECK_THROWS_AS(Rule3Strategy(2, 3, 1, substream(6, {5})), config_error);
}

TEST_CASE("rule 3 phase-2 distribution matches the symmetric solver on its estimates") {
  Rule3Strategy s(2, 2, 54, substream(7, {1}));
  s.observe(0, 0);
  s.observe(1, 0);
  for (int i = 0; i < 3; ++i) s.observe(0, 1);
  s.observe(0, 0);
  s.observe(1, 1);
  for (int i = 0; i < 3; ++i) s.observe(1, 0);  // estimates (0.8, 0.4), slot 12 >= 4
  const auto probs = s.choice_probabilities();
  CHECK(probs[0] == Catch::Approx(2.0 / 3.0).margin(1e-9));
  CHECK(probs[1] == Catch::Approx(1.0 / 3.0).margin(1e-9));
}

TEST_CASE("rule 3 finishes initialization even when ln T has already passed") {
  Rule3Strategy s(4, 3, 10, substream(7, {2}));  // switch slot 3 < N = 4
  CHECK(s.switch_slot() == 3);
  for (int j = 0; j < 4; ++j) {
    REQUIRE(s.choose() == j);
    s.observe(j, 1);
  }
  const auto probs = s.choice_probabilities();
  double total = 0.0;
  for (double p : probs) total += p;
  CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("nash sampling occupancy concentrates for many users") {
  // 1000 users drawing i.i.d. from tau: the per-slot occupancy fraction stays
  // within 0.05 of tau on at least 99% of slots.
  const ThetaVector theta({0.5, 0.3, 0.2});
  const MixedStrategy tau = nash_strategy(theta);
  const int users = 1000;
  const long slots = 2000;
  Rng rng = substream(8, {1});
  long good = 0;
  std::array<long, 3> count{};
  for (long j = 0; j < slots; ++j) {
    count = {0, 0, 0};
    for (int k = 0; k < users; ++k) count[static_cast<std::size_t>(rng.categorical(tau.p))]++;
    bool ok = true;
    for (int i = 0; i < 3; ++i)
      ok = ok && std::abs(static_cast<double>(count[static_cast<std::size_t>(i)]) / users -
                          tau[i]) <= 0.05;
    good += ok;
  }
  CHECK(static_cast<double>(good) / static_cast<double>(slots) >= 0.99);
}
