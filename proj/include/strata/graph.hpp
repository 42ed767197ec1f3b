#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace strata {

using Index = std::uint32_t;

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UserIndex {
  Index value = 0;
  auto operator<=>(const UserIndex&) const = default;
};

struct PostIndex {
  Index value = 0;
  auto operator<=>(const PostIndex&) const = default;
};

/// Index into the combined vertex space: users occupy [0, m), posts [m, m + n).
using Vertex = Index;

enum class Label : std::uint8_t { Real = 0, Fake = 1 };

struct Edge {
  UserIndex user;
  PostIndex post;
  double weight = 1.0;
};

/// Maps two feature vectors to an engagement weight in [0, 1] via the shifted
/// cosine similarity (cos + 1) / 2. Throws on zero vectors or mismatched sizes.
double edge_weight(std::span<const double> user_feature, std::span<const double> post_feature);

/// Undirected bipartite user-post graph with weighted engagement edges.
///
/// Vertex indexing is dense and follows the order users/posts were supplied.
/// Values are immutable once built except through add_edge(), which the attack
/// engine calls on episode-local copies.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  std::size_t num_users() const { return user_names_.size(); }
  std::size_t num_posts() const { return post_names_.size(); }
  std::size_t num_vertices() const { return num_users() + num_posts(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return dim_; }

  const std::string& user_name(UserIndex u) const { return user_names_.at(u.value); }
  const std::string& post_name(PostIndex p) const { return post_names_.at(p.value); }
  std::optional<UserIndex> find_user(std::string_view name) const;
  std::optional<PostIndex> find_post(std::string_view name) const;
  /// Readable name for a combined vertex index.
  std::string vertex_name(Vertex v) const;

  Vertex vertex_of(UserIndex u) const { return u.value; }
  Vertex vertex_of(PostIndex p) const { return static_cast<Vertex>(num_users()) + p.value; }
  bool is_user(Vertex v) const { return v < num_users(); }
  UserIndex user_at(Vertex v) const { return UserIndex{v}; }
  PostIndex post_at(Vertex v) const { return PostIndex{static_cast<Index>(v - num_users())}; }

  std::span<const Edge> edges() const { return edges_; }
  /// Edge indices incident to a vertex.
  std::span<const Index> incident(Vertex v) const { return incident_.at(v); }
  bool has_edge(UserIndex u, PostIndex p) const;

  /// Weighted degree (sum of incident edge weights).
  double degree(Vertex v) const { return degree_.at(v); }
  double degree(UserIndex u) const { return degree(vertex_of(u)); }
  double degree(PostIndex p) const { return degree(vertex_of(p)); }
  double total_weight() const { return total_weight_; }

  std::span<const double> user_feature(UserIndex u) const;
  std::span<const double> post_feature(PostIndex p) const;
  Label label(PostIndex p) const { return labels_.at(p.value); }
  std::span<const Label> labels() const { return labels_; }

  /// Appends a new engagement. Throws on duplicates or out-of-range endpoints.
  void add_edge(UserIndex u, PostIndex p, double weight);
  /// Appends a new engagement weighted by edge_weight() over the endpoint features.
  void add_edge(UserIndex u, PostIndex p);

  /// Copy with every edge weight set to 1.
  BipartiteGraph unweighted() const;

  bool operator==(const BipartiteGraph& other) const;

 private:
  friend class GraphBuilder;

  static std::uint64_t key(UserIndex u, PostIndex p) {
    return (static_cast<std::uint64_t>(u.value) << 32) | p.value;
  }

  std::vector<std::string> user_names_;
  std::vector<std::string> post_names_;
  std::unordered_map<std::string, Index> user_lookup_;
  std::unordered_map<std::string, Index> post_lookup_;
  std::vector<Edge> edges_;
  std::unordered_set<std::uint64_t> edge_keys_;
  std::vector<std::vector<Index>> incident_;
  std::vector<double> degree_;
  double total_weight_ = 0.0;
  std::size_t dim_ = 0;
  std::vector<double> user_features_;  // row-major, m x dim
  std::vector<double> post_features_;  // row-major, n x dim
  std::vector<Label> labels_;
};

struct EdgeRecord {
  std::string user;
  std::string post;
  std::optional<double> weight;
};

/// Raw, name-keyed description of a graph as read from files.
struct GraphInput {
  std::vector<std::string> users;
  std::vector<std::string> posts;
  std::vector<EdgeRecord> edges;
  std::map<std::string, std::vector<double>> user_features;
  std::map<std::string, std::vector<double>> post_features;
  std::map<std::string, int> labels;
};

/// Validates the input and builds a graph. Missing edge weights are computed
/// from the endpoint features.
BipartiteGraph build_graph(const GraphInput& input);

/// Sum of weighted degrees over a vertex set (duplicates ignored).
double volume(const BipartiteGraph& g, std::span<const Vertex> vertices);
/// Total weight of edges with exactly one endpoint inside the vertex set.
double cut(const BipartiteGraph& g, std::span<const Vertex> vertices);

/// Planted-community generator used as a stand-in for real engagement data.
struct SyntheticSpec {
  int communities = 2;
  int users_per_community = 100;
  int posts_per_community = 20;
  double p_intra = 0.1;
  double p_inter = 0.01;
  double feature_noise = 0.5;
  double fake_fraction = 0.3;
  int feature_dim = 8;
  /// Engagement probability multiplier when a user's leaning disagrees with a
  /// post's label. 1 disables label homophily.
  double leaning_mismatch = 0.1;
  /// Strength of the label direction in post features.
  double post_signal = 0.5;
  /// Strength of the label direction in user features.
  double user_signal = 1.0;
};

BipartiteGraph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Community id each vertex was planted in (users then posts), reproduced
/// from the same spec and seed.
std::vector<int> synthetic_communities(const SyntheticSpec& spec);

}  // namespace strata
