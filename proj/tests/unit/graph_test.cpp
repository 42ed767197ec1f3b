#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "strata/graph.hpp"
#include "strata/graph_io.hpp"

using namespace strata;

TEST_CASE("degrees, volume and cut follow the edge list") {
  auto g = fixture::make_graph(3, {1, 0}, {{0, 0, 0.5}, {1, 0, 1.0}, {1, 1, 0.25}, {2, 1, 0.75}});
  CHECK(g.num_vertices() == 5);
  CHECK(g.degree(UserIndex{1}) == doctest::Approx(1.25));
  CHECK(g.degree(PostIndex{0}) == doctest::Approx(1.5));
  CHECK(g.total_weight() == doctest::Approx(2.5));

  const std::vector<Vertex> all{0, 1, 2, 3, 4};
  CHECK(volume(g, all) == doctest::Approx(2 * g.total_weight()));
  CHECK(cut(g, all) == 0.0);

  // {u0, u1, p0} is joined to the rest only by (u1, p1).
  const std::vector<Vertex> left{0, 1, 3};
  CHECK(cut(g, left) == doctest::Approx(0.25));
  CHECK(volume(g, left) == doctest::Approx(0.5 + 1.25 + 1.5));
}

TEST_CASE("graph construction rejects bad input") {
  GraphInput in;
  in.users = {"a"};
  in.posts = {"x"};
  in.labels["x"] = 1;
  in.edges.push_back({"a", "x", 0.5});
  CHECK_NOTHROW(build_graph(in));

  auto dup = in;
  dup.edges.push_back({"a", "x", 0.5});
  CHECK_THROWS_AS(build_graph(dup), Error);

  auto dangling = in;
  dangling.edges.push_back({"b", "x", 0.5});
  CHECK_THROWS_WITH_AS(build_graph(dangling), doctest::Contains("dangling"), Error);

  auto unlabeled = in;
  unlabeled.labels.clear();
  CHECK_THROWS_AS(build_graph(unlabeled), Error);

  auto bad_label = in;
  bad_label.labels["x"] = 2;
  CHECK_THROWS_AS(build_graph(bad_label), Error);

  auto heavy = in;
  heavy.edges[0].weight = 1.5;
  CHECK_THROWS_AS(build_graph(heavy), Error);

  auto no_weight = in;
  no_weight.edges[0].weight.reset();
  CHECK_THROWS_AS(build_graph(no_weight), Error);
}

TEST_CASE("edge weight is the shifted cosine similarity") {
  const std::vector<double> a{1, 0}, b{0, 1}, c{-2, 0};
  CHECK(edge_weight(a, a) == doctest::Approx(1.0));
  CHECK(edge_weight(a, b) == doctest::Approx(0.5));
  CHECK(edge_weight(a, c) == doctest::Approx(0.0));
  const std::vector<double> zero{0, 0}, three{1, 2, 3};
  CHECK_THROWS_AS(edge_weight(a, zero), Error);
  CHECK_THROWS_AS(edge_weight(a, three), Error);
}

TEST_CASE("add_edge updates degrees and refuses duplicates") {
  auto g = fixture::make_featured_graph(2, {0, 1}, {{0, 0}}, 4, 3);
  const double before = g.degree(UserIndex{1});
  g.add_edge(UserIndex{1}, PostIndex{1});
  const double w = g.edges().back().weight;
  CHECK(w >= 0.0);
  CHECK(w <= 1.0);
  CHECK(g.degree(UserIndex{1}) == doctest::Approx(before + w));
  CHECK(g.has_edge(UserIndex{1}, PostIndex{1}));
  CHECK_THROWS_AS(g.add_edge(UserIndex{1}, PostIndex{1}), Error);
  CHECK_THROWS_AS(g.add_edge(UserIndex{5}, PostIndex{1}), Error);
}

TEST_CASE("unweighted copy keeps topology with unit weights") {
  auto g = fixture::make_graph(2, {0, 1}, {{0, 0, 0.3}, {1, 1, 0.6}, {0, 1, 0.9}});
  auto u = g.unweighted();
  CHECK(u.num_edges() == 3);
  CHECK(u.total_weight() == 3.0);
  CHECK(u.degree(UserIndex{0}) == 2.0);
  CHECK_FALSE(u == g);
}

TEST_CASE("CSV reader assigns ids by first appearance") {
  std::istringstream edges("user_id,post_id,weight\nalice,n1,0.5\nbob,n1,\nbob,n2,1\n");
  std::istringstream labels("post_id,label\nn1,1\nn2,0\nn3,0\n");
  std::istringstream features("id,f0,f1\nalice,1,0\nbob,0,1\ncarol,1,1\nn1,1,0\nn2,0,1\nn3,1,1\n");
  auto g = build_graph(read_graph_csv(edges, labels, &features));
  CHECK(g.num_users() == 3);
  CHECK(g.num_posts() == 3);
  CHECK(g.user_name(UserIndex{2}) == "carol");
  CHECK(g.post_name(PostIndex{2}) == "n3");
  CHECK(g.label(PostIndex{0}) == Label::Fake);
  // bob-n1 carries no weight and falls back to the features: orthogonal => 0.5
  CHECK(g.edges()[1].weight == doctest::Approx(0.5));
  CHECK(g.degree(PostIndex{2}) == 0.0);
}

TEST_CASE("CSV reader reports malformed rows") {
  std::istringstream labels("post_id,label\nn1,1\n");
  std::istringstream short_row("user_id,post_id\nalice\n");
  CHECK_THROWS_WITH_AS(read_graph_csv(short_row, labels, nullptr), doctest::Contains("too few columns"), Error);

  std::istringstream edges("user_id,post_id,weight\nalice,n1,heavy\n");
  std::istringstream labels2("post_id,label\nn1,1\n");
  CHECK_THROWS_WITH_AS(read_graph_csv(edges, labels2, nullptr), doctest::Contains("malformed number"), Error);

  std::istringstream edges3("user_id,post_id\nalice,n1\n");
  std::istringstream labels3("post_id,label\nn1,0.5\n");
  CHECK_THROWS_AS(read_graph_csv(edges3, labels3, nullptr), Error);

  std::istringstream empty("");
  std::istringstream labels4("post_id,label\n");
  CHECK_THROWS_WITH_AS(read_graph_csv(empty, labels4, nullptr), doctest::Contains("missing header"), Error);
}

TEST_CASE("synthetic generator is deterministic and well formed") {
  SyntheticSpec spec;
  auto a = generate_synthetic(spec, 7);
  auto b = generate_synthetic(spec, 7);
  auto c = generate_synthetic(spec, 8);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.num_users() == 200);
  CHECK(a.num_posts() == 40);
  CHECK(a.feature_dim() == 8);
  std::size_t fake = 0;
  for (Label l : a.labels()) fake += l == Label::Fake;
  CHECK(fake > 0);
  CHECK(fake < a.num_posts());
  for (const auto& e : a.edges()) {
    CHECK(e.weight >= 0.0);
    CHECK(e.weight <= 1.0);
  }
  CHECK(synthetic_communities(spec).size() == a.num_vertices());

  SyntheticSpec bad;
  bad.p_intra = 1.5;
  CHECK_THROWS_AS(generate_synthetic(bad, 1), Error);
}
