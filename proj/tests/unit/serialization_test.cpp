#include <memory>

#include "doctest.h"
#include "strata/serialization.hpp"

using namespace strata;

namespace {

BipartiteGraph small_synthetic() {
  SyntheticSpec spec;
  spec.users_per_community = 30;
  spec.posts_per_community = 10;
  return generate_synthetic(spec, 12);
}

}  // namespace

TEST_CASE("graph round-trips through JSON") {
  const auto g = small_synthetic();
  const auto back = graph_from_json(to_json(g));
  CHECK(back == g);
  CHECK_THROWS_AS(graph_from_json(Json{{"users", Json::array()}}), Error);
}

TEST_CASE("tree round-trips with recomputed caches") {
  const auto g = small_synthetic();
  const auto t = optimize_tree(g, 3);
  const auto back = tree_from_json(g, to_json(g, t));
  back.validate(g);
  CHECK(back.size() == t.size());
  CHECK(tree_entropy(g, back) == doctest::Approx(tree_entropy(g, t)).epsilon(1e-12));
  Json broken = to_json(g, t);
  broken["nodes"][1]["vertices"].push_back("nobody");
  CHECK_THROWS_AS(tree_from_json(g, broken), Error);
}

TEST_CASE("account groups round-trip") {
  const auto g = small_synthetic();
  const auto t = optimize_tree(g, 2);
  const auto groups = categorize(g, t, 0.5, Budgets{5, 3, 2}, 4);
  const auto back = groups_from_json(g, to_json(g, groups));
  CHECK(back.all() == groups.all());
  CHECK(back.influence.scores == groups.influence.scores);
  CHECK(back.budgets.total() == 10);
}

TEST_CASE("frozen model round-trips and stays frozen") {
  const auto g = small_synthetic();
  Hyperparams hp;
  hp.epochs = 20;
  hp.hidden = 5;
  const auto trained = train(g, hp, 2);
  const auto back = model_from_json(to_json(trained.model));
  CHECK(back.frozen());
  CHECK(back.hyperparams().hidden == 5);
  CHECK(back.thaw().params() == trained.model.thaw().params());
  const BlackBox a(std::make_shared<const DetectorModel>(trained.model));
  const BlackBox b(std::make_shared<const DetectorModel>(back));
  CHECK(a.predict_all(g) == b.predict_all(g));
}

TEST_CASE("attack episodes expose their manipulated edges") {
  const auto g = small_synthetic();
  const auto t = optimize_tree(g, 3);
  const auto groups = categorize(g, t, kDefaultInfluenceC, Budgets{5, 3, 2}, 1);
  Hyperparams hp;
  hp.epochs = 40;
  const BlackBox box(std::make_shared<const DetectorModel>(train(g, hp, 1).model));
  std::vector<PostIndex> targets;
  for (Index p = 0; p < g.num_posts() && targets.size() < 2; ++p) {
    if (g.label(PostIndex{p}) == Label::Fake) targets.push_back(PostIndex{p});
  }
  AttackConfig cfg;
  cfg.episodes = 3;
  const auto result = run_attack(g, t, groups, box, targets, cfg, 3);
  const Json j = to_json(g, result);
  CHECK(j.at("targets").size() == targets.size());
  const auto edges = manipulated_edges_from_json(g, j);
  const auto expected = result.manipulated_edges();
  REQUIRE(edges.size() == expected.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    CHECK(edges[i].user == expected[i].user);
    CHECK(edges[i].post == expected[i].post);
  }
}
