#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "strata/graph.hpp"

namespace fixture {

struct WeightedEdge {
  int user;
  int post;
  double weight = 1.0;
};

/// Graph with users u0.., posts p0.., the given labels and explicit weights.
inline strata::BipartiteGraph make_graph(int users, const std::vector<int>& labels,
                                         const std::vector<WeightedEdge>& edges) {
  strata::GraphInput in;
  for (int u = 0; u < users; ++u) in.users.push_back("u" + std::to_string(u));
  for (std::size_t p = 0; p < labels.size(); ++p) {
    in.posts.push_back("p" + std::to_string(p));
    in.labels["p" + std::to_string(p)] = labels[p];
  }
  for (const auto& e : edges) {
    in.edges.push_back({"u" + std::to_string(e.user), "p" + std::to_string(e.post), e.weight});
  }
  return strata::build_graph(in);
}

/// Same, with random features of dimension `dim` so edges can be added later.
inline strata::BipartiteGraph make_featured_graph(int users, const std::vector<int>& labels,
                                                  const std::vector<WeightedEdge>& edges, std::size_t dim,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto vec = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
  };
  strata::GraphInput in;
  for (int u = 0; u < users; ++u) {
    in.users.push_back("u" + std::to_string(u));
    in.user_features[in.users.back()] = vec();
  }
  for (std::size_t p = 0; p < labels.size(); ++p) {
    in.posts.push_back("p" + std::to_string(p));
    in.labels[in.posts.back()] = labels[p];
    in.post_features[in.posts.back()] = vec();
  }
  for (const auto& e : edges) {
    in.edges.push_back({"u" + std::to_string(e.user), "p" + std::to_string(e.post), e.weight});
  }
  return strata::build_graph(in);
}

/// Random connected-ish bipartite graph with `users` + `posts` vertices.
/// Every vertex gets at least one edge; weights are uniform in [0.2, 1].
inline strata::BipartiteGraph random_graph(int users, int posts, double density, std::mt19937_64& rng,
                                           bool weighted = true) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<WeightedEdge> edges;
  std::vector<char> used(static_cast<std::size_t>(users * posts), 0);
  auto add = [&](int u, int p) {
    auto& slot = used[static_cast<std::size_t>(u * posts + p)];
    if (slot) return;
    slot = 1;
    edges.push_back({u, p, weighted ? 0.2 + 0.8 * unit(rng) : 1.0});
  };
  for (int u = 0; u < users; ++u) {
    for (int p = 0; p < posts; ++p) {
      if (unit(rng) < density) add(u, p);
    }
  }
  std::uniform_int_distribution<int> pick_user(0, users - 1), pick_post(0, posts - 1);
  for (int u = 0; u < users; ++u) add(u, pick_post(rng));
  for (int p = 0; p < posts; ++p) add(pick_user(rng), p);
  std::vector<int> labels(static_cast<std::size_t>(posts));
  for (int p = 0; p < posts; ++p) labels[static_cast<std::size_t>(p)] = p % 2;
  return make_graph(users, labels, edges);
}

}  // namespace fixture
