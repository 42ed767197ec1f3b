#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "strata/influence.hpp"

using namespace strata;

TEST_CASE("single-layer influence equals the closed form") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = fixture::random_graph(6, 4, 0.3, rng);
    const auto t = EncodingTree::single_layer(g);
    for (double c : {0.1, 0.5, kDefaultInfluenceC}) {
      for (Index u = 0; u < g.num_users(); ++u) {
        const double path = influence(g, t, UserIndex{u}, c);
        CHECK(std::abs(path - influence_single_layer(g, UserIndex{u}, c)) < 1e-12);
      }
    }
  }
}

TEST_CASE("path-sum influence matches the recounting oracle on optimized trees") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = fixture::random_graph(8, 5, 0.3, rng);
    const auto t = optimize_tree(g, 3);
    for (Index u = 0; u < g.num_users(); ++u) {
      CHECK(std::abs(influence(g, t, UserIndex{u}, 0.5) - oracle::naive_influence(g, t, UserIndex{u}, 0.5)) <
            1e-12);
    }
  }
}

TEST_CASE("adjusting parameter must be positive") {
  auto g = fixture::make_graph(2, {1}, {{0, 0}, {1, 0}});
  const auto t = EncodingTree::single_layer(g);
  CHECK_THROWS_AS(influence(g, t, UserIndex{0}, 0.0), Error);
  CHECK_THROWS_AS(influence_single_layer(g, UserIndex{0}, -1.0), Error);
}

TEST_CASE("slice bounds split users in proportion to budgets") {
  auto [low, mid] = slice_bounds(100, Budgets{20, 10, 4});
  CHECK(low + (mid - low) + (100 - mid) == 100);
  CHECK(low >= 20);
  CHECK(mid - low >= 10);
  CHECK(100 - mid >= 4);
}

TEST_CASE("categorize rejects infeasible budgets") {
  auto g = fixture::make_graph(4, {1}, {{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  const auto t = EncodingTree::single_layer(g);
  CHECK_THROWS_WITH_AS(categorize(g, t, 0.5, Budgets{3, 1, 1}, 1), doctest::Contains("infeasible"), Error);
  CHECK_THROWS_AS(categorize(g, t, 0.5, Budgets{-1, 1, 1}, 1), Error);
  // 4 users at budgets 3:0:1 slice as 3 | 0 | 1, so every budget fits.
  CHECK_NOTHROW(categorize(g, t, 0.5, Budgets{3, 0, 1}, 1));
}

TEST_CASE("categorize yields disjoint groups ordered by influence") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = fixture::random_graph(40, 12, 0.15, rng);
    const auto t = optimize_tree(g, 3);
    const Budgets budgets{6 + trial % 3, 3, 1 + trial % 2};
    const auto groups = categorize(g, t, kDefaultInfluenceC, budgets, static_cast<std::uint64_t>(trial));
    CHECK(groups.bots.size() == static_cast<std::size_t>(budgets.bots));
    CHECK(groups.cyborgs.size() == static_cast<std::size_t>(budgets.cyborgs));
    CHECK(groups.workers.size() == static_cast<std::size_t>(budgets.workers));
    const auto all = groups.all();
    CHECK(std::set<UserIndex>(all.begin(), all.end()).size() == all.size());
    auto max_of = [&](const std::vector<UserIndex>& us) {
      double m = -INFINITY;
      for (UserIndex u : us) m = std::max(m, groups.influence[u]);
      return m;
    };
    auto min_of = [&](const std::vector<UserIndex>& us) {
      double m = INFINITY;
      for (UserIndex u : us) m = std::min(m, groups.influence[u]);
      return m;
    };
    CHECK(max_of(groups.bots) <= min_of(groups.cyborgs));
    CHECK(max_of(groups.cyborgs) <= min_of(groups.workers));
  }
}

TEST_CASE("categorize is deterministic per seed") {
  std::mt19937_64 rng(4);
  auto g = fixture::random_graph(30, 10, 0.2, rng);
  const auto t = optimize_tree(g, 2);
  const auto a = categorize(g, t, 0.5, Budgets{5, 3, 2}, 99);
  const auto b = categorize(g, t, 0.5, Budgets{5, 3, 2}, 99);
  CHECK(a.all() == b.all());
  CHECK(a.influence_sum(AgentKind::Worker) >= 0.0);
}

TEST_CASE("transform derivative endpoints match their closed forms") {
  for (double b : {10.0, 100.0, 1000.0}) {
    for (double c : {0.1, 0.3, kDefaultInfluenceC}) {
      const auto r = verify_influence_transform(b, c, 2000, 1);
      CHECK(std::abs(r.derivative_at_one - r.closed_form_max) < 1e-9);
      CHECK(std::abs(r.derivative_at_half_b - r.closed_form_min) < 1e-9);
      CHECK(r.derivative_decreasing);
      CHECK(r.monotonic_violations == 0);
    }
  }
}

TEST_CASE("transform derivative matches finite differences") {
  const double b = 50.0, c = 0.3;
  for (double x : {1.5, 7.0, 20.0}) {
    const auto fd = oracle::central_difference(
        [&](const std::vector<double>& v) { return influence_transform(v[0], b, c); }, {x}, 1e-5);
    CHECK(fd[0] == doctest::Approx(influence_transform_derivative(x, b, c)).epsilon(1e-6));
  }
}

TEST_CASE("transform check rejects parameters outside its domain") {
  CHECK_THROWS_AS(verify_influence_transform(2.0, 0.3, 100, 1), Error);
  CHECK_THROWS_AS(verify_influence_transform(10.0, 0.0, 100, 1), Error);
  CHECK_THROWS_AS(verify_influence_transform(10.0, 0.9, 100, 1), Error);
}
