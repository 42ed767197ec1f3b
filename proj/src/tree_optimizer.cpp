#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "strata/encoding_tree.hpp"

namespace strata {
namespace {

// x * log2(y) with the 0 * log 0 = 0 convention.
double xlog2(double x, double y) { return x == 0.0 ? 0.0 : x * std::log2(y); }

struct Group {
  std::vector<NodeId> members;  // children of the stretched node
  double volume = 0.0;
  double cut = 0.0;
  double child_cut_sum = 0.0;
  Vertex first_vertex = 0;
  bool alive = true;
};

struct LevelPlan {
  double delta = 0.0;  // entropy change in bits (negative is better)
  std::vector<std::vector<NodeId>> groups;
};

// Greedy agglomeration of the children of `parent` into new intermediate
// communities. Each merge of two sibling groups A, B into C changes the
// entropy by
//   (1/V) [ -g_C log(V_C/V_p) + g_A log(V_A/V_p) + g_B log(V_B/V_p)
//           + S_A log(V_C/V_A) + S_B log(V_C/V_B) ]
// where S is the summed cut of a group's children. Merging groups that share
// no edge never lowers the entropy, so only adjacent pairs are scanned.
LevelPlan plan_level_stretch(const BipartiteGraph& g, const EncodingTree& t, NodeId parent,
                             double tolerance) {
  LevelPlan plan;
  const auto& node = t.node(parent);
  const int slack = t.max_height() - t.depth(parent) - 2;
  if (slack < 0) return plan;

  std::vector<Group> groups;
  std::vector<int> owner(g.num_vertices(), -1);
  for (NodeId c : node.children) {
    if (t.subtree_height(c) > slack) continue;
    const auto& child = t.node(c);
    const int gid = static_cast<int>(groups.size());
    for (Vertex v : child.vertices) owner[v] = gid;
    groups.push_back(Group{{c}, child.volume, child.cut, child.cut, child.vertices.front(), true});
  }
  if (groups.size() < 2) return plan;

  std::map<std::pair<int, int>, double> between;
  for (const auto& e : g.edges()) {
    const int a = owner[g.vertex_of(e.user)];
    const int b = owner[g.vertex_of(e.post)];
    if (a < 0 || b < 0 || a == b) continue;
    between[{std::min(a, b), std::max(a, b)}] += e.weight;
  }

  const double total = t.node(t.root()).volume;
  const double vp = node.volume;
  auto merge_delta = [&](const Group& A, const Group& B, double w) {
    const double vc = A.volume + B.volume;
    const double gc = A.cut + B.cut - 2.0 * w;
    const double d = -xlog2(gc, vc / vp) + xlog2(A.cut, A.volume / vp) + xlog2(B.cut, B.volume / vp) +
                     xlog2(A.child_cut_sum, vc / A.volume) + xlog2(B.child_cut_sum, vc / B.volume);
    return d / total;
  };

  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_pair{-1, -1};
    std::pair<Vertex, Vertex> best_key{};
    for (const auto& [pair, w] : between) {
      const auto& A = groups[static_cast<std::size_t>(pair.first)];
      const auto& B = groups[static_cast<std::size_t>(pair.second)];
      if (A.volume == 0.0 || B.volume == 0.0) continue;
      const double d = merge_delta(A, B, w);
      const std::pair<Vertex, Vertex> key{std::min(A.first_vertex, B.first_vertex),
                                          std::max(A.first_vertex, B.first_vertex)};
      if (d < best || (d == best && key < best_key)) {
        best = d;
        best_pair = pair;
        best_key = key;
      }
    }
    if (best_pair.first < 0 || !(best < -tolerance)) break;

    auto [ia, ib] = best_pair;
    auto& A = groups[static_cast<std::size_t>(ia)];
    auto& B = groups[static_cast<std::size_t>(ib)];
    const double w = between[best_pair];
    A.members.insert(A.members.end(), B.members.begin(), B.members.end());
    A.cut = A.cut + B.cut - 2.0 * w;
    A.volume += B.volume;
    A.child_cut_sum += B.child_cut_sum;
    A.first_vertex = std::min(A.first_vertex, B.first_vertex);
    B.alive = false;
    plan.delta += best;

    // Fold B's adjacency into A.
    std::map<std::pair<int, int>, double> next;
    for (const auto& [pair, weight] : between) {
      int a = pair.first == ib ? ia : pair.first;
      int b = pair.second == ib ? ia : pair.second;
      if (a == b) continue;
      next[{std::min(a, b), std::max(a, b)}] += weight;
    }
    between = std::move(next);
  }

  for (const auto& grp : groups) {
    if (grp.alive && grp.members.size() >= 2) plan.groups.push_back(grp.members);
  }
  return plan;
}

}  // namespace

EncodingTree optimize_tree(const BipartiteGraph& g, int max_height, double tolerance) {
  if (max_height < 2) throw Error("optimize_tree needs a height bound of at least 2");
  if (!(g.total_weight() > 0.0)) throw Error("empty graph: no edge weight to partition");

  EncodingTree t = EncodingTree::single_layer(g, max_height);
  const std::size_t limit = 50 * g.num_vertices();
  std::size_t applied = 0;

  while (applied < limit) {
    LevelPlan best;
    NodeId best_node = t.root();
    bool found = false;
    for (NodeId id : t.live_nodes()) {
      if (t.is_leaf(id) || t.node(id).children.size() < 2) continue;
      auto plan = plan_level_stretch(g, t, id, tolerance);
      if (plan.groups.empty() || !(plan.delta < -tolerance)) continue;
      const bool better = !found || plan.delta < best.delta ||
                          (plan.delta == best.delta && t.node(id).vertices < t.node(best_node).vertices);
      if (better) {
        best = std::move(plan);
        best_node = id;
        found = true;
      }
    }
    if (!found) break;
    for (const auto& members : best.groups) {
      t.stretch(g, best_node, members);
      ++applied;
    }
  }

  t.compact();
  return t;
}

}  // namespace strata
