#include "strata/encoding_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace strata {
namespace {

double cut_of(const BipartiteGraph& g, std::span<const Vertex> vertices, std::vector<char>& scratch) {
  scratch.assign(g.num_vertices(), 0);
  for (Vertex v : vertices) scratch[v] = 1;
  double total = 0.0;
  for (Vertex v : vertices) {
    for (Index e : g.incident(v)) {
      const auto& edge = g.edges()[e];
      const Vertex other = g.is_user(v) ? g.vertex_of(edge.post) : g.vertex_of(edge.user);
      if (!scratch[other]) total += edge.weight;
    }
  }
  return total;
}

double volume_of(const BipartiteGraph& g, std::span<const Vertex> vertices) {
  double total = 0.0;
  for (Vertex v : vertices) total += g.degree(v);
  return total;
}

}  // namespace

EncodingTree EncodingTree::single_layer(const BipartiteGraph& g, int max_height) {
  EncodingTree t;
  t.max_height_ = max_height;
  const auto n = static_cast<Vertex>(g.num_vertices());
  t.nodes_.resize(n + 1);
  t.live_.assign(n + 1, 1);
  t.leaf_of_.resize(n);
  t.root_ = n;
  auto& root = t.nodes_[n];
  root.vertices.resize(n);
  for (Vertex v = 0; v < n; ++v) {
    root.vertices[v] = v;
    root.children.push_back(v);
    auto& leaf = t.nodes_[v];
    leaf.parent = n;
    leaf.vertices = {v};
    leaf.volume = g.degree(v);
    leaf.cut = g.degree(v);
    t.leaf_of_[v] = v;
  }
  root.volume = 2.0 * g.total_weight();
  root.cut = 0.0;
  return t;
}

std::vector<NodeId> EncodingTree::live_nodes() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (live_[i]) out.push_back(i);
  }
  return out;
}

int EncodingTree::depth(NodeId id) const {
  int d = 0;
  for (auto p = nodes_.at(id).parent; p; p = nodes_[*p].parent) ++d;
  return d;
}

int EncodingTree::height() const { return subtree_height(root_); }

int EncodingTree::subtree_height(NodeId id) const {
  int best = 0;
  for (NodeId c : nodes_.at(id).children) best = std::max(best, 1 + subtree_height(c));
  return best;
}

std::vector<NodeId> EncodingTree::ancestors(NodeId id) const {
  std::vector<NodeId> out;
  for (auto p = nodes_.at(id).parent; p; p = nodes_[*p].parent) out.push_back(*p);
  return out;
}

NodeId EncodingTree::stretch(const BipartiteGraph& g, NodeId parent, std::span<const NodeId> children) {
  if (parent >= nodes_.size() || !live_[parent]) throw Error("stretch: unknown parent node");
  if (children.empty()) throw Error("stretch: no children given");
  auto& siblings = nodes_[parent].children;
  std::vector<NodeId> adopted;
  for (NodeId c : siblings) {
    if (std::find(children.begin(), children.end(), c) != children.end()) adopted.push_back(c);
  }
  if (adopted.size() != children.size()) {
    throw Error("stretch: children must be distinct children of the parent");
  }

  const auto id = static_cast<NodeId>(nodes_.size());
  TreeNode fresh;
  fresh.parent = parent;
  fresh.children = adopted;
  for (NodeId c : adopted) {
    const auto& vs = nodes_[c].vertices;
    fresh.vertices.insert(fresh.vertices.end(), vs.begin(), vs.end());
  }
  std::sort(fresh.vertices.begin(), fresh.vertices.end());
  fresh.volume = volume_of(g, fresh.vertices);
  std::vector<char> scratch;
  fresh.cut = cut_of(g, fresh.vertices, scratch);

  auto first = std::find(siblings.begin(), siblings.end(), adopted.front());
  const auto position = std::distance(siblings.begin(), first);
  std::erase_if(siblings, [&](NodeId c) {
    return std::find(adopted.begin(), adopted.end(), c) != adopted.end();
  });
  siblings.insert(siblings.begin() + position, id);

  nodes_.push_back(std::move(fresh));
  live_.push_back(1);
  for (NodeId c : adopted) nodes_[c].parent = id;
  return id;
}

void EncodingTree::compress(NodeId id) {
  if (id >= nodes_.size() || !live_[id]) throw Error("compress: unknown node");
  if (id == root_) throw Error("compress: cannot remove the root");
  if (nodes_[id].children.empty()) throw Error("compress: cannot remove a leaf");
  const NodeId parent = *nodes_[id].parent;
  auto& siblings = nodes_[parent].children;
  auto it = std::find(siblings.begin(), siblings.end(), id);
  const auto position = std::distance(siblings.begin(), it);
  siblings.erase(it);
  auto moved = std::move(nodes_[id].children);
  siblings.insert(siblings.begin() + position, moved.begin(), moved.end());
  for (NodeId c : moved) nodes_[c].parent = parent;
  nodes_[id] = TreeNode{};
  live_[id] = 0;
}

void EncodingTree::compact() {
  std::vector<NodeId> order;
  std::deque<NodeId> queue{root_};
  while (!queue.empty()) {
    NodeId id = queue.front();
    queue.pop_front();
    order.push_back(id);
    for (NodeId c : nodes_[id].children) queue.push_back(c);
  }
  std::vector<NodeId> remap(nodes_.size(), 0);
  for (NodeId i = 0; i < order.size(); ++i) remap[order[i]] = i;
  std::vector<TreeNode> fresh(order.size());
  for (NodeId i = 0; i < order.size(); ++i) {
    TreeNode n = std::move(nodes_[order[i]]);
    if (n.parent) n.parent = remap[*n.parent];
    for (auto& c : n.children) c = remap[c];
    fresh[i] = std::move(n);
  }
  nodes_ = std::move(fresh);
  live_.assign(nodes_.size(), 1);
  for (auto& leaf : leaf_of_) leaf = remap[leaf];
  root_ = 0;
}

void EncodingTree::validate(const BipartiteGraph& g, double tolerance) const {
  const auto n = g.num_vertices();
  if (leaf_of_.size() != n) throw Error("tree does not match graph vertex count");
  if (root_ >= nodes_.size() || !live_[root_]) throw Error("tree root missing");
  const auto& root = nodes_[root_];
  if (root.parent) throw Error("root must not have a parent");
  if (root.vertices.size() != n) throw Error("root must hold every vertex");
  for (Vertex v = 0; v < n; ++v) {
    if (root.vertices[v] != v) throw Error("root vertex set is not the full vertex set");
  }

  std::vector<int> leaf_hits(n, 0);
  std::vector<char> scratch;
  std::function<void(NodeId, int)> visit = [&](NodeId id, int depth) {
    const auto& node = nodes_[id];
    if (!std::is_sorted(node.vertices.begin(), node.vertices.end())) {
      throw Error("node vertex set not sorted");
    }
    if (std::abs(node.volume - volume_of(g, node.vertices)) > tolerance) {
      throw Error("cached volume out of date at node " + std::to_string(id));
    }
    if (std::abs(node.cut - cut_of(g, node.vertices, scratch)) > tolerance) {
      throw Error("cached cut out of date at node " + std::to_string(id));
    }
    if (node.children.empty()) {
      if (node.vertices.size() != 1) throw Error("leaf must be a singleton");
      const Vertex v = node.vertices.front();
      ++leaf_hits[v];
      if (leaf_of_[v] != id) throw Error("leaf index out of date");
      if (depth > max_height_) throw Error("leaf deeper than the height bound");
      return;
    }
    std::vector<Vertex> merged;
    for (NodeId c : node.children) {
      if (c >= nodes_.size() || !live_[c]) throw Error("dangling child reference");
      if (nodes_[c].parent != id) throw Error("child/parent links disagree");
      merged.insert(merged.end(), nodes_[c].vertices.begin(), nodes_[c].vertices.end());
      visit(c, depth + 1);
    }
    std::sort(merged.begin(), merged.end());
    if (merged != node.vertices) throw Error("children do not partition node " + std::to_string(id));
  };
  visit(root_, 0);
  for (Vertex v = 0; v < n; ++v) {
    if (leaf_hits[v] != 1) throw Error("vertex " + std::to_string(v) + " not in exactly one leaf");
  }
}

EncodingTree EncodingTree::from_nodes(const BipartiteGraph& g, std::vector<TreeNode> nodes, NodeId root,
                                      int max_height) {
  EncodingTree t;
  t.nodes_ = std::move(nodes);
  t.live_.assign(t.nodes_.size(), 1);
  t.root_ = root;
  t.max_height_ = max_height;
  t.leaf_of_.assign(g.num_vertices(), 0);
  std::vector<char> seen(g.num_vertices(), 0);
  for (NodeId i = 0; i < t.nodes_.size(); ++i) {
    auto& n = t.nodes_[i];
    std::sort(n.vertices.begin(), n.vertices.end());
    for (Vertex v : n.vertices) {
      if (v >= g.num_vertices()) throw Error("tree references unknown vertex " + std::to_string(v));
    }
    if (n.children.empty()) {
      if (n.vertices.size() != 1) throw Error("leaf must be a singleton");
      if (seen[n.vertices.front()]++) throw Error("vertex appears in two leaves");
      t.leaf_of_[n.vertices.front()] = i;
    }
  }
  t.validate(g);
  return t;
}

double node_entropy(const BipartiteGraph&, const EncodingTree& t, NodeId node) {
  const auto& n = t.node(node);
  if (!n.parent) throw Error("node entropy is undefined for the root");
  const double total = t.node(t.root()).volume;
  if (!(total > 0.0)) throw Error("empty graph: total volume is zero");
  if (n.cut == 0.0) return 0.0;
  const double parent_volume = t.node(*n.parent).volume;
  return -(n.cut / total) * std::log2(n.volume / parent_volume);
}

double tree_entropy(const BipartiteGraph& g, const EncodingTree& t) {
  double total = 0.0;
  for (NodeId id : t.live_nodes()) {
    if (id != t.root()) total += node_entropy(g, t, id);
  }
  return total;
}

double one_dim_entropy(const BipartiteGraph& g) {
  return tree_entropy(g, EncodingTree::single_layer(g));
}

double raw_degree_entropy(const BipartiteGraph& g) {
  double total = 0.0;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const double d = g.degree(v);
    if (d > 0.0) total -= d * std::log2(d);
  }
  return total;
}

std::span<const PostIndex> Subgraph::same_class() const {
  return fake_posts.empty() || fake_posts.front() != target ? std::span<const PostIndex>(real_posts)
                                                            : std::span<const PostIndex>(fake_posts);
}

std::span<const PostIndex> Subgraph::other_class() const {
  return fake_posts.empty() || fake_posts.front() != target ? std::span<const PostIndex>(fake_posts)
                                                            : std::span<const PostIndex>(real_posts);
}

Subgraph extract_subgraph(const BipartiteGraph& g, const EncodingTree& t, PostIndex target,
                          std::optional<int> level) {
  if (target.value >= g.num_posts()) throw Error("unknown post #" + std::to_string(target.value));
  const int k = level.value_or(t.max_height() - 1);
  if (k < 0 || k >= t.max_height()) {
    throw Error("subgraph level must lie in [0, " + std::to_string(t.max_height()) + ")");
  }

  const NodeId leaf = t.leaf_of(g.vertex_of(target));
  auto path = t.ancestors(leaf);
  std::reverse(path.begin(), path.end());  // root first
  path.push_back(leaf);
  const auto wanted = static_cast<std::size_t>(t.max_height() - k);
  const NodeId community = path[std::min(wanted, path.size() - 1)];

  Subgraph sub;
  sub.target = target;
  sub.users.reserve(g.num_users());
  for (Index u = 0; u < g.num_users(); ++u) sub.users.push_back(UserIndex{u});

  const Label target_label = g.label(target);
  std::vector<PostIndex> same{target}, other;
  for (Vertex v : t.node(community).vertices) {
    if (g.is_user(v)) continue;
    const PostIndex p = g.post_at(v);
    if (p == target) continue;
    (g.label(p) == target_label ? same : other).push_back(p);
  }
  if (target_label == Label::Fake) {
    sub.fake_posts = same;
    sub.real_posts = other;
  } else {
    sub.real_posts = same;
    sub.fake_posts = other;
  }
  sub.posts = same;
  sub.posts.insert(sub.posts.end(), other.begin(), other.end());
  for (PostIndex p : sub.posts) {
    for (Index e : g.incident(g.vertex_of(p))) sub.edges.push_back(e);
  }
  std::sort(sub.edges.begin(), sub.edges.end());
  return sub;
}

}  // namespace strata
