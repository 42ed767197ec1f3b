#include "strata/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace strata {

double edge_weight(std::span<const double> user_feature, std::span<const double> post_feature) {
  if (user_feature.size() != post_feature.size()) {
    throw Error("feature dimension mismatch: " + std::to_string(user_feature.size()) + " vs " +
                std::to_string(post_feature.size()));
  }
  double dot = 0.0, nu = 0.0, np = 0.0;
  for (std::size_t i = 0; i < user_feature.size(); ++i) {
    dot += user_feature[i] * post_feature[i];
    nu += user_feature[i] * user_feature[i];
    np += post_feature[i] * post_feature[i];
  }
  if (nu == 0.0 || np == 0.0) throw Error("undefined cosine: zero feature vector");
  const double cosine = std::clamp(dot / (std::sqrt(nu) * std::sqrt(np)), -1.0, 1.0);
  return 0.5 * (cosine + 1.0);
}

std::optional<UserIndex> BipartiteGraph::find_user(std::string_view name) const {
  auto it = user_lookup_.find(std::string(name));
  if (it == user_lookup_.end()) return std::nullopt;
  return UserIndex{it->second};
}

std::optional<PostIndex> BipartiteGraph::find_post(std::string_view name) const {
  auto it = post_lookup_.find(std::string(name));
  if (it == post_lookup_.end()) return std::nullopt;
  return PostIndex{it->second};
}

std::string BipartiteGraph::vertex_name(Vertex v) const {
  if (v >= num_vertices()) throw Error("unknown vertex " + std::to_string(v));
  return is_user(v) ? user_name(user_at(v)) : post_name(post_at(v));
}

bool BipartiteGraph::has_edge(UserIndex u, PostIndex p) const {
  return edge_keys_.contains(key(u, p));
}

std::span<const double> BipartiteGraph::user_feature(UserIndex u) const {
  if (u.value >= num_users()) throw Error("unknown user index " + std::to_string(u.value));
  return std::span<const double>(user_features_).subspan(u.value * dim_, dim_);
}

std::span<const double> BipartiteGraph::post_feature(PostIndex p) const {
  if (p.value >= num_posts()) throw Error("unknown post index " + std::to_string(p.value));
  return std::span<const double>(post_features_).subspan(p.value * dim_, dim_);
}

void BipartiteGraph::add_edge(UserIndex u, PostIndex p, double weight) {
  if (u.value >= num_users()) throw Error("dangling endpoint user #" + std::to_string(u.value));
  if (p.value >= num_posts()) throw Error("dangling endpoint post #" + std::to_string(p.value));
  if (!(weight >= 0.0 && weight <= 1.0)) throw Error("edge weight outside [0,1]");
  if (!edge_keys_.insert(key(u, p)).second) {
    throw Error("duplicate edge (" + user_name(u) + ", " + post_name(p) + ")");
  }
  const auto id = static_cast<Index>(edges_.size());
  edges_.push_back(Edge{u, p, weight});
  incident_[vertex_of(u)].push_back(id);
  incident_[vertex_of(p)].push_back(id);
  degree_[vertex_of(u)] += weight;
  degree_[vertex_of(p)] += weight;
  total_weight_ += weight;
}

void BipartiteGraph::add_edge(UserIndex u, PostIndex p) {
  add_edge(u, p, edge_weight(user_feature(u), post_feature(p)));
}

BipartiteGraph BipartiteGraph::unweighted() const {
  BipartiteGraph copy = *this;
  std::fill(copy.degree_.begin(), copy.degree_.end(), 0.0);
  for (auto& e : copy.edges_) {
    e.weight = 1.0;
    copy.degree_[copy.vertex_of(e.user)] += 1.0;
    copy.degree_[copy.vertex_of(e.post)] += 1.0;
  }
  copy.total_weight_ = static_cast<double>(copy.edges_.size());
  return copy;
}

bool BipartiteGraph::operator==(const BipartiteGraph& other) const {
  if (user_names_ != other.user_names_ || post_names_ != other.post_names_) return false;
  if (dim_ != other.dim_ || user_features_ != other.user_features_ ||
      post_features_ != other.post_features_ || labels_ != other.labels_) {
    return false;
  }
  if (edges_.size() != other.edges_.size()) return false;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& a = edges_[i];
    const auto& b = other.edges_[i];
    if (a.user != b.user || a.post != b.post || a.weight != b.weight) return false;
  }
  return true;
}

class GraphBuilder {
 public:
  static BipartiteGraph build(const GraphInput& in) {
    if (in.users.empty()) throw Error("graph needs at least one user");
    if (in.posts.empty()) throw Error("graph needs at least one post");

    BipartiteGraph g;
    for (const auto& name : in.users) {
      if (!g.user_lookup_.emplace(name, static_cast<Index>(g.user_names_.size())).second) {
        throw Error("duplicate user id " + name);
      }
      g.user_names_.push_back(name);
    }
    for (const auto& name : in.posts) {
      if (!g.post_lookup_.emplace(name, static_cast<Index>(g.post_names_.size())).second) {
        throw Error("duplicate post id " + name);
      }
      g.post_names_.push_back(name);
    }

    const bool has_features = !in.user_features.empty() || !in.post_features.empty();
    if (has_features) {
      g.dim_ = !in.user_features.empty() ? in.user_features.begin()->second.size()
                                         : in.post_features.begin()->second.size();
      if (g.dim_ == 0) throw Error("feature vectors must be nonempty");
      g.user_features_.resize(g.num_users() * g.dim_);
      g.post_features_.resize(g.num_posts() * g.dim_);
      fill_features(in.user_features, g.user_names_, g.user_lookup_, g.dim_, "user",
                    g.user_features_);
      fill_features(in.post_features, g.post_names_, g.post_lookup_, g.dim_, "post",
                    g.post_features_);
    }

    g.labels_.resize(g.num_posts());
    std::vector<bool> labelled(g.num_posts(), false);
    for (const auto& [name, value] : in.labels) {
      auto p = g.find_post(name);
      if (!p) throw Error("label for unknown post " + name);
      if (value != 0 && value != 1) throw Error("label for " + name + " must be 0 or 1");
      g.labels_[p->value] = value == 1 ? Label::Fake : Label::Real;
      labelled[p->value] = true;
    }
    for (std::size_t i = 0; i < labelled.size(); ++i) {
      if (!labelled[i]) throw Error("missing label for post " + g.post_names_[i]);
    }

    g.incident_.assign(g.num_vertices(), {});
    g.degree_.assign(g.num_vertices(), 0.0);
    for (const auto& rec : in.edges) {
      auto u = g.find_user(rec.user);
      if (!u) throw Error("dangling endpoint " + rec.user);
      auto p = g.find_post(rec.post);
      if (!p) throw Error("dangling endpoint " + rec.post);
      if (rec.weight) {
        g.add_edge(*u, *p, *rec.weight);
      } else {
        if (!has_features) throw Error("edge (" + rec.user + ", " + rec.post +
                                       ") has no weight and the graph has no features");
        g.add_edge(*u, *p);
      }
    }
    return g;
  }

 private:
  static void fill_features(const std::map<std::string, std::vector<double>>& source,
                            const std::vector<std::string>& names,
                            const std::unordered_map<std::string, Index>& lookup, std::size_t dim,
                            const char* kind, std::vector<double>& out) {
    for (const auto& [name, vec] : source) {
      if (!lookup.contains(name)) throw Error(std::string("features for unknown ") + kind + " " + name);
      if (vec.size() != dim) {
        throw Error(std::string("feature dimension mismatch for ") + kind + " " + name);
      }
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto it = source.find(names[i]);
      if (it == source.end()) throw Error(std::string("missing features for ") + kind + " " + names[i]);
      std::copy(it->second.begin(), it->second.end(), out.begin() + static_cast<long>(i * dim));
    }
  }
};

BipartiteGraph build_graph(const GraphInput& input) { return GraphBuilder::build(input); }

namespace {

std::vector<char> membership(const BipartiteGraph& g, std::span<const Vertex> vertices) {
  std::vector<char> inside(g.num_vertices(), 0);
  for (Vertex v : vertices) {
    if (v >= g.num_vertices()) throw Error("unknown vertex " + std::to_string(v));
    inside[v] = 1;
  }
  return inside;
}

}  // namespace

double volume(const BipartiteGraph& g, std::span<const Vertex> vertices) {
  const auto inside = membership(g, vertices);
  double total = 0.0;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (inside[v]) total += g.degree(v);
  }
  return total;
}

double cut(const BipartiteGraph& g, std::span<const Vertex> vertices) {
  const auto inside = membership(g, vertices);
  double total = 0.0;
  for (const auto& e : g.edges()) {
    if (inside[g.vertex_of(e.user)] != inside[g.vertex_of(e.post)]) total += e.weight;
  }
  return total;
}

std::vector<int> synthetic_communities(const SyntheticSpec& spec) {
  std::vector<int> out;
  for (int k = 0; k < spec.communities; ++k) out.insert(out.end(), spec.users_per_community, k);
  for (int k = 0; k < spec.communities; ++k) out.insert(out.end(), spec.posts_per_community, k);
  return out;
}

BipartiteGraph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  auto check_prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(what) + " must lie in [0,1]");
  };
  check_prob(spec.p_intra, "p_intra");
  check_prob(spec.p_inter, "p_inter");
  check_prob(spec.fake_fraction, "fake_fraction");
  check_prob(spec.leaning_mismatch, "leaning_mismatch");
  if (spec.communities < 1 || spec.users_per_community < 1 || spec.posts_per_community < 1) {
    throw Error("synthetic spec needs at least one community, user and post");
  }
  if (spec.feature_dim < 1) throw Error("feature_dim must be positive");
  if (spec.feature_noise < 0.0) throw Error("feature_noise must be nonnegative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<std::size_t>(spec.feature_dim);

  auto random_unit = [&] {
    std::vector<double> v(d);
    double norm = 0.0;
    while (norm == 0.0) {
      norm = 0.0;
      for (auto& x : v) {
        x = normal(rng);
        norm += x * x;
      }
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  };

  std::vector<std::vector<double>> centroids;
  for (int k = 0; k < spec.communities; ++k) centroids.push_back(random_unit());
  const auto fake_direction = random_unit();

  const int per_fake = static_cast<int>(std::lround(spec.fake_fraction * spec.posts_per_community));
  const int per_leaning =
      static_cast<int>(std::lround(spec.fake_fraction * spec.users_per_community));

  auto pick_flags = [&](int total, int positives) {
    std::vector<char> flags(static_cast<std::size_t>(total), 0);
    std::fill(flags.begin(), flags.begin() + positives, 1);
    std::shuffle(flags.begin(), flags.end(), rng);
    return flags;
  };

  GraphInput in;
  std::vector<int> user_comm, post_comm;
  std::vector<char> user_fake_leaning, post_fake;
  for (int k = 0; k < spec.communities; ++k) {
    auto leaning = pick_flags(spec.users_per_community, per_leaning);
    for (int i = 0; i < spec.users_per_community; ++i) {
      in.users.push_back("u" + std::to_string(in.users.size()));
      user_comm.push_back(k);
      user_fake_leaning.push_back(leaning[static_cast<std::size_t>(i)]);
    }
  }
  for (int k = 0; k < spec.communities; ++k) {
    auto fake = pick_flags(spec.posts_per_community, per_fake);
    for (int i = 0; i < spec.posts_per_community; ++i) {
      in.posts.push_back("p" + std::to_string(in.posts.size()));
      post_comm.push_back(k);
      post_fake.push_back(fake[static_cast<std::size_t>(i)]);
    }
  }

  auto make_feature = [&](int community, bool fake_side, double signal) {
    std::vector<double> f(d);
    const double sign = fake_side ? 1.0 : -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      f[j] = centroids[static_cast<std::size_t>(community)][j] + sign * signal * fake_direction[j] +
             spec.feature_noise * normal(rng);
    }
    return f;
  };
  for (std::size_t i = 0; i < in.users.size(); ++i) {
    in.user_features[in.users[i]] = make_feature(user_comm[i], user_fake_leaning[i], spec.user_signal);
  }
  for (std::size_t j = 0; j < in.posts.size(); ++j) {
    in.post_features[in.posts[j]] = make_feature(post_comm[j], post_fake[j], spec.post_signal);
    in.labels[in.posts[j]] = post_fake[j] ? 1 : 0;
  }

  for (std::size_t i = 0; i < in.users.size(); ++i) {
    for (std::size_t j = 0; j < in.posts.size(); ++j) {
      double p = user_comm[i] == post_comm[j] ? spec.p_intra : spec.p_inter;
      if (user_fake_leaning[i] != post_fake[j]) p *= spec.leaning_mismatch;
      if (unit(rng) < p) in.edges.push_back(EdgeRecord{in.users[i], in.posts[j], std::nullopt});
    }
  }
  return build_graph(in);
}

}  // namespace strata
