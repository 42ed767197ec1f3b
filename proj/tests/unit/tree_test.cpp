#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "strata/encoding_tree.hpp"

using namespace strata;

namespace {

// Height-2 tree from community labels, built with the public stretch operator.
EncodingTree two_level(const BipartiteGraph& g, const std::vector<int>& community) {
  auto t = EncodingTree::single_layer(g, 2);
  std::map<int, std::vector<NodeId>> groups;
  for (Vertex v = 0; v < g.num_vertices(); ++v) groups[community[v]].push_back(t.leaf_of(v));
  for (const auto& [label, leaves] : groups) t.stretch(g, t.root(), leaves);
  return t;
}

}  // namespace

TEST_CASE("K_{1,3} single-layer entropy by hand") {
  auto g = fixture::make_graph(1, {0, 0, 1}, {{0, 0}, {0, 1}, {0, 2}});
  // degrees 3,1,1,1 over volume 6: 1/2 log2 2 + 3 * 1/6 log2 6
  const double expected = 0.5 + 0.5 * std::log2(6.0);
  CHECK(std::abs(one_dim_entropy(g) - expected) < 1e-9);
  CHECK(std::abs(one_dim_entropy(g) - 1.7925) < 1e-4);
  CHECK(std::abs(tree_entropy(g, EncodingTree::single_layer(g)) - expected) < 1e-9);
}

TEST_CASE("single edge carries one bit") {
  auto g = fixture::make_graph(1, {1}, {{0, 0}});
  CHECK(std::abs(one_dim_entropy(g) - 1.0) < 1e-9);
}

TEST_CASE("raw degree entropy is the unnormalized sum") {
  auto g = fixture::make_graph(1, {0, 0, 1}, {{0, 0}, {0, 1}, {0, 2}});
  CHECK(raw_degree_entropy(g) == doctest::Approx(-3.0 * std::log2(3.0)));
}

TEST_CASE("two-level node entropies match a hand computation") {
  // Two disjoint edges joined by a bridge: u0-p0, u1-p1, u0-p1.
  auto g = fixture::make_graph(2, {0, 1}, {{0, 0}, {1, 1}, {0, 1}});
  // vertices: u0=0 u1=1 p0=2 p1=3; communities {u0,p0} and {u1,p1}
  auto t = two_level(g, {0, 1, 0, 1});
  t.validate(g);
  // V = 6; both communities have volume 3 and cut 1.
  double expected = 2 * (-(1.0 / 6) * std::log2(3.0 / 6));
  // leaves: u0 (d=2), p0 (1) in community A; u1 (1), p1 (2) in community B.
  expected += -(2.0 / 6) * std::log2(2.0 / 3) * 2 - (1.0 / 6) * std::log2(1.0 / 3) * 2;
  CHECK(std::abs(tree_entropy(g, t) - expected) < 1e-12);
  CHECK(std::abs(tree_entropy(g, t) - oracle::two_level_entropy(g, {0, 1, 0, 1})) < 1e-12);
}

TEST_CASE("tree entropy agrees with the edge-list oracle on random trees") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = fixture::random_graph(4 + trial % 3, 3 + trial % 2, 0.4, rng);
    auto t = optimize_tree(g, 2 + trial % 3);
    t.validate(g);
    CHECK(t.height() <= t.max_height());
    CHECK(std::abs(tree_entropy(g, t) - oracle::naive_tree_entropy(g, t)) < 1e-9);
  }
}

TEST_CASE("optimizer never beats the exhaustive two-level optimum and never loses to single layer") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    auto g = fixture::random_graph(4, 3, 0.35, rng);
    const auto best = oracle::best_two_level(g);
    const auto t = optimize_tree(g, 2);
    const double h = tree_entropy(g, t);
    CHECK(h >= best.entropy - 1e-9);
    CHECK(h <= one_dim_entropy(g) + 1e-9);
  }
}

TEST_CASE("Bell numbers bound the partition enumeration") {
  std::mt19937_64 rng(2);
  auto g = fixture::random_graph(3, 3, 0.5, rng);
  CHECK(oracle::best_two_level(g).partitions == 203);  // B(6)
}

TEST_CASE("stretch then compress restores the entropy") {
  std::mt19937_64 rng(9);
  auto g = fixture::random_graph(4, 4, 0.4, rng);
  auto t = EncodingTree::single_layer(g, 3);
  const double flat = tree_entropy(g, t);
  const std::vector<NodeId> kids{t.leaf_of(0), t.leaf_of(1), t.leaf_of(5)};
  const NodeId mid = t.stretch(g, t.root(), kids);
  t.validate(g);
  CHECK(t.height() == 2);
  CHECK(t.node(mid).vertices == std::vector<Vertex>{0, 1, 5});
  t.compress(mid);
  t.compact();
  t.validate(g);
  CHECK(t.height() == 1);
  CHECK(tree_entropy(g, t) == doctest::Approx(flat).epsilon(1e-12));
  CHECK_THROWS_AS(t.compress(t.root()), Error);
}

TEST_CASE("stretch rejects foreign children") {
  auto g = fixture::make_graph(2, {0, 1}, {{0, 0}, {1, 1}, {0, 1}});
  auto t = EncodingTree::single_layer(g, 3);
  const NodeId a = t.stretch(g, t.root(), std::vector<NodeId>{t.leaf_of(0), t.leaf_of(2)});
  // leaf 1 is a child of the root, not of `a`
  CHECK_THROWS_AS(t.stretch(g, a, std::vector<NodeId>{t.leaf_of(1)}), Error);
  CHECK_THROWS_AS(t.stretch(g, t.root(), std::vector<NodeId>{a, a}), Error);
}

TEST_CASE("optimized communities nest inside the planted ones") {
  SyntheticSpec spec;
  spec.users_per_community = 30;
  spec.posts_per_community = 10;
  spec.p_intra = 0.3;
  spec.p_inter = 0.005;
  auto g = generate_synthetic(spec, 4);
  auto t = optimize_tree(g, 2);
  CHECK(tree_entropy(g, t) < one_dim_entropy(g));
  // Level-1 communities should be nearly pure with respect to the planted ones.
  const auto truth = synthetic_communities(spec);
  std::map<NodeId, std::map<int, int>> overlap;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const auto anc = t.ancestors(t.leaf_of(v));
    const NodeId top = anc.size() >= 2 ? anc[anc.size() - 2] : t.leaf_of(v);
    ++overlap[top][truth[v]];
  }
  int pure = 0;
  for (const auto& [node, counts] : overlap) {
    int best = 0;
    for (const auto& [k, n] : counts) best = std::max(best, n);
    pure += best;
  }
  CHECK(overlap.size() < g.num_vertices());
  CHECK(pure >= static_cast<int>(0.9 * static_cast<double>(g.num_vertices())));
}

TEST_CASE("subgraph lists the target first and keeps every user") {
  SyntheticSpec spec;
  auto g = generate_synthetic(spec, 3);
  auto t = optimize_tree(g, 3);
  for (Index p = 0; p < g.num_posts(); p += 7) {
    const PostIndex target{p};
    const auto sub = extract_subgraph(g, t, target);
    CHECK(sub.target == target);
    CHECK(sub.same_class().front() == target);
    CHECK(sub.users.size() == g.num_users());
    CHECK(sub.posts.size() == sub.fake_posts.size() + sub.real_posts.size());
    for (PostIndex q : sub.fake_posts) CHECK(g.label(q) == Label::Fake);
    for (PostIndex q : sub.real_posts) CHECK(g.label(q) == Label::Real);
    for (Index e : sub.edges) {
      CHECK(std::find(sub.posts.begin(), sub.posts.end(), g.edges()[e].post) != sub.posts.end());
    }
  }
  CHECK_THROWS_AS(extract_subgraph(g, t, PostIndex{0}, 7), Error);
}

TEST_CASE("from_nodes rejects inconsistent trees") {
  auto g = fixture::make_graph(1, {1}, {{0, 0}});
  std::vector<TreeNode> nodes(3);
  nodes[0].children = {1, 2};
  nodes[0].vertices = {0, 1};
  nodes[1].parent = 0;
  nodes[1].vertices = {0};
  nodes[2].parent = 0;
  nodes[2].vertices = {1};
  for (auto& n : nodes) {
    n.volume = volume(g, n.vertices);
    n.cut = cut(g, n.vertices);
  }
  CHECK_NOTHROW(EncodingTree::from_nodes(g, nodes, 0, 1));
  auto broken = nodes;
  broken[2].vertices = {0};
  CHECK_THROWS_AS(EncodingTree::from_nodes(g, broken, 0, 1), Error);
}
