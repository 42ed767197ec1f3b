#pragma once

#include <optional>
#include <span>
#include <vector>

#include "strata/graph.hpp"

namespace strata {

using NodeId = Index;

struct TreeNode {
  std::optional<NodeId> parent;  // absent for the root
  std::vector<NodeId> children;
  std::vector<Vertex> vertices;  // sorted ascending
  double volume = 0.0;           // sum of weighted degrees of `vertices`
  double cut = 0.0;              // weight of edges leaving `vertices`
};

/// Hierarchical partition of every graph vertex. The root holds all vertices,
/// leaves are singletons, and the children of each inner node partition it.
///
/// Node storage is an arena; compress() leaves a detached slot behind until
/// compact() renumbers the surviving nodes.
class EncodingTree {
 public:
  /// Root with one leaf per vertex. `max_height` is the K bound enforced by
  /// the optimizer and used to locate level-k communities.
  static EncodingTree single_layer(const BipartiteGraph& g, int max_height = 1);

  NodeId root() const { return root_; }
  int max_height() const { return max_height_; }
  void set_max_height(int k) { max_height_ = k; }
  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  bool is_live(NodeId id) const { return live_.at(id) != 0; }
  /// Live node ids in arena order.
  std::vector<NodeId> live_nodes() const;
  NodeId leaf_of(Vertex v) const { return leaf_of_.at(v); }
  bool is_leaf(NodeId id) const { return nodes_.at(id).children.empty(); }

  int depth(NodeId id) const;
  /// Longest root-to-leaf path length.
  int height() const;
  /// Height of the subtree below `id` (0 for a leaf).
  int subtree_height(NodeId id) const;
  /// Ancestors of `id` from its parent up to and including the root.
  std::vector<NodeId> ancestors(NodeId id) const;

  /// Inserts a new node under `parent` adopting the given children.
  /// Children must be distinct live children of `parent`.
  NodeId stretch(const BipartiteGraph& g, NodeId parent, std::span<const NodeId> children);
  /// Removes an intermediate node, handing its children to its parent.
  void compress(NodeId id);
  /// Drops detached slots and renumbers nodes in breadth-first order.
  void compact();

  /// Throws Error if any structural invariant or cached value is wrong.
  void validate(const BipartiteGraph& g, double tolerance = 1e-9) const;

  /// Assembles a tree from explicit nodes (used by deserialization and tests).
  static EncodingTree from_nodes(const BipartiteGraph& g, std::vector<TreeNode> nodes, NodeId root,
                                 int max_height);

 private:
  std::vector<TreeNode> nodes_;
  std::vector<char> live_;
  std::vector<NodeId> leaf_of_;
  NodeId root_ = 0;
  int max_height_ = 1;
};

/// Entropy (bits) of a random walk moving from the parent community of
/// `node` into `node`: -(g/V_root) * log2(V/V_parent). Zero when the cut is 0.
double node_entropy(const BipartiteGraph& g, const EncodingTree& t, NodeId node);

/// Sum of node_entropy over every non-root node.
double tree_entropy(const BipartiteGraph& g, const EncodingTree& t);

/// Volume-normalized one-dimensional structural entropy, i.e. the entropy of
/// the single-layer tree.
double one_dim_entropy(const BipartiteGraph& g);

/// The unnormalized -sum d_v log2 d_v form over weighted degrees.
double raw_degree_entropy(const BipartiteGraph& g);

/// Greedy structural-entropy minimization over trees of height <= max_height.
/// Starting from the single-layer tree, the best level stretch (agglomerating
/// the children of one node into new intermediate communities) is applied
/// until no candidate improves the entropy by more than `tolerance` bits.
EncodingTree optimize_tree(const BipartiteGraph& g, int max_height, double tolerance = 1e-9);

/// Associated subgraph of a target post: all users plus the posts of the
/// target's community at hierarchical level `level` (level K-1 is a child of
/// the root). Same-class posts are listed with the target first.
struct Subgraph {
  PostIndex target;
  std::vector<UserIndex> users;
  std::vector<PostIndex> posts;       // fake_posts followed by real_posts
  std::vector<Index> edges;           // edge ids of the parent graph with a post in `posts`
  std::vector<PostIndex> fake_posts;  // target first when it is fake
  std::vector<PostIndex> real_posts;  // target first when it is real

  /// Posts sharing the target's label, target first.
  std::span<const PostIndex> same_class() const;
  /// Posts with the opposite label.
  std::span<const PostIndex> other_class() const;
};

Subgraph extract_subgraph(const BipartiteGraph& g, const EncodingTree& t, PostIndex target,
                          std::optional<int> level = std::nullopt);

}  // namespace strata
