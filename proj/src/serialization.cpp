#include "strata/serialization.hpp"

#include <fstream>
#include <set>

namespace strata {
namespace {

UserIndex user_by_name(const BipartiteGraph& g, const std::string& name) {
  auto u = g.find_user(name);
  if (!u) throw Error("unknown user '" + name + "'");
  return *u;
}

PostIndex post_by_name(const BipartiteGraph& g, const std::string& name) {
  auto p = g.find_post(name);
  if (!p) throw Error("unknown post '" + name + "'");
  return *p;
}

Vertex vertex_by_name(const BipartiteGraph& g, const std::string& name) {
  if (auto u = g.find_user(name)) return g.vertex_of(*u);
  if (auto p = g.find_post(name)) return g.vertex_of(*p);
  throw Error("unknown vertex '" + name + "'");
}

Json user_list(const BipartiteGraph& g, const std::vector<UserIndex>& users) {
  Json out = Json::array();
  for (UserIndex u : users) out.push_back(g.user_name(u));
  return out;
}

std::vector<UserIndex> users_from(const BipartiteGraph& g, const Json& j) {
  std::vector<UserIndex> out;
  for (const auto& name : j) out.push_back(user_by_name(g, name.get<std::string>()));
  return out;
}

Json state_json(const AttackState& s) {
  return Json{{"target_fake_prob", s.target_fake_prob},
              {"budget_used", s.budget_used},
              {"strategy_counts", s.strategy_counts},
              {"code", s.code()}};
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("write failed for " + path.string());
}

Json to_json(const BipartiteGraph& g) {
  Json users = Json::array(), posts = Json::array(), edges = Json::array();
  for (Index u = 0; u < g.num_users(); ++u) {
    const auto f = g.user_feature(UserIndex{u});
    users.push_back(Json{{"id", g.user_name(UserIndex{u})}, {"features", std::vector<double>(f.begin(), f.end())}});
  }
  for (Index p = 0; p < g.num_posts(); ++p) {
    const auto f = g.post_feature(PostIndex{p});
    posts.push_back(Json{{"id", g.post_name(PostIndex{p})},
                         {"label", static_cast<int>(g.label(PostIndex{p}))},
                         {"features", std::vector<double>(f.begin(), f.end())}});
  }
  for (const Edge& e : g.edges()) {
    edges.push_back(Json{{"user", g.user_name(e.user)}, {"post", g.post_name(e.post)}, {"weight", e.weight}});
  }
  return Json{{"feature_dim", g.feature_dim()}, {"users", users}, {"posts", posts}, {"edges", edges}};
}

BipartiteGraph graph_from_json(const Json& j) {
  try {
    GraphInput in;
    for (const auto& u : j.at("users")) {
      const auto id = u.at("id").get<std::string>();
      in.users.push_back(id);
      if (u.contains("features")) in.user_features[id] = u.at("features").get<std::vector<double>>();
    }
    for (const auto& p : j.at("posts")) {
      const auto id = p.at("id").get<std::string>();
      in.posts.push_back(id);
      in.labels[id] = p.at("label").get<int>();
      if (p.contains("features")) in.post_features[id] = p.at("features").get<std::vector<double>>();
    }
    for (const auto& e : j.at("edges")) {
      EdgeRecord rec{e.at("user").get<std::string>(), e.at("post").get<std::string>(), std::nullopt};
      if (e.contains("weight")) rec.weight = e.at("weight").get<double>();
      in.edges.push_back(std::move(rec));
    }
    return build_graph(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed graph JSON: ") + e.what());
  }
}

Json to_json(const BipartiteGraph& g, const EncodingTree& t) {
  Json nodes = Json::array();
  for (NodeId id = 0; id < t.size(); ++id) {
    const auto& n = t.node(id);
    Json vertices = Json::array();
    for (Vertex v : n.vertices) vertices.push_back(g.vertex_name(v));
    nodes.push_back(Json{{"parent", n.parent ? Json(*n.parent) : Json(nullptr)},
                         {"children", n.children},
                         {"vertices", vertices}});
  }
  return Json{{"max_height", t.max_height()}, {"root", t.root()}, {"nodes", nodes}};
}

EncodingTree tree_from_json(const BipartiteGraph& g, const Json& j) {
  try {
    std::vector<TreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
      TreeNode node;
      if (!n.at("parent").is_null()) node.parent = n.at("parent").get<NodeId>();
      node.children = n.at("children").get<std::vector<NodeId>>();
      for (const auto& name : n.at("vertices")) node.vertices.push_back(vertex_by_name(g, name.get<std::string>()));
      node.volume = volume(g, node.vertices);
      node.cut = cut(g, node.vertices);
      nodes.push_back(std::move(node));
    }
    return EncodingTree::from_nodes(g, std::move(nodes), j.at("root").get<NodeId>(), j.at("max_height").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed tree JSON: ") + e.what());
  }
}

Json to_json(const BipartiteGraph& g, const AccountGroups& groups) {
  Json influence = Json::object();
  for (Index u = 0; u < groups.influence.scores.size(); ++u) {
    influence[g.user_name(UserIndex{u})] = groups.influence.scores[u];
  }
  return Json{{"budgets", {{"bots", groups.budgets.bots}, {"cyborgs", groups.budgets.cyborgs},
                           {"workers", groups.budgets.workers}}},
              {"bots", user_list(g, groups.bots)},
              {"cyborgs", user_list(g, groups.cyborgs)},
              {"workers", user_list(g, groups.workers)},
              {"c", groups.influence.c},
              {"influence", influence}};
}

AccountGroups groups_from_json(const BipartiteGraph& g, const Json& j) {
  try {
    AccountGroups groups;
    const auto& b = j.at("budgets");
    groups.budgets = Budgets{b.at("bots").get<int>(), b.at("cyborgs").get<int>(), b.at("workers").get<int>()};
    groups.bots = users_from(g, j.at("bots"));
    groups.cyborgs = users_from(g, j.at("cyborgs"));
    groups.workers = users_from(g, j.at("workers"));
    groups.influence.c = j.at("c").get<double>();
    groups.influence.scores.assign(g.num_users(), 0.0);
    for (const auto& [name, value] : j.at("influence").items()) {
      groups.influence.scores[user_by_name(g, name).value] = value.get<double>();
    }
    return groups;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed groups JSON: ") + e.what());
  }
}

Json to_json(const Hyperparams& hp) {
  return Json{{"hidden", hp.hidden},
              {"learning_rate", hp.learning_rate},
              {"epochs", hp.epochs},
              {"weight_decay", hp.weight_decay}};
}

Hyperparams hyperparams_from_json(const Json& j, Hyperparams hp) {
  hp.hidden = j.value("hidden", hp.hidden);
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.epochs = j.value("epochs", hp.epochs);
  hp.weight_decay = j.value("weight_decay", hp.weight_decay);
  return hp;
}

Json to_json(const DetectorModel& model) {
  const DetectorModel owner = model.thaw();
  const Parameters& p = owner.params();
  return Json{{"hyperparams", to_json(model.hyperparams())},
              {"dim", p.dim},
              {"weights", {{"w1", p.w1}, {"w2", p.w2}}},
              {"biases", {{"b1", p.b1}, {"b2", p.b2}}},
              {"frozen", model.frozen()}};
}

DetectorModel model_from_json(const Json& j) {
  try {
    Parameters p;
    const Hyperparams hp = hyperparams_from_json(j.at("hyperparams"));
    p.dim = j.at("dim").get<std::size_t>();
    p.hidden = static_cast<std::size_t>(hp.hidden);
    p.w1 = j.at("weights").at("w1").get<std::vector<double>>();
    p.w2 = j.at("weights").at("w2").get<std::vector<double>>();
    p.b1 = j.at("biases").at("b1").get<std::vector<double>>();
    p.b2 = j.at("biases").at("b2").get<double>();
    return DetectorModel(std::move(p), hp, j.value("frozen", true));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model JSON: ") + e.what());
  }
}

Json to_json(const BipartiteGraph& g, const AttackResult& result) {
  Json runs = Json::array();
  for (const auto& run : result.runs) {
    Json steps = Json::array();
    for (const auto& s : run.final_episode.steps) {
      steps.push_back(Json{{"state", state_json(s.state)},
                           {"user", g.user_name(s.action.user)},
                           {"post", g.post_name(s.action.post)},
                           {"strategy", to_string(s.action.strategy)},
                           {"agent", to_string(s.action.agent)},
                           {"reward", s.reward},
                           {"next_state", state_json(s.next_state)}});
    }
    Json added = Json::array();
    for (const Edge& e : run.final_episode.added) {
      added.push_back(Json{{"user", g.user_name(e.user)}, {"post", g.post_name(e.post)}, {"weight", e.weight}});
    }
    Json successes = Json::array();
    for (const auto& s : run.episode_successes) successes.push_back(s ? Json(*s) : Json(nullptr));
    const auto& first = run.final_episode.first_success;
    runs.push_back(Json{{"target", g.post_name(run.target)},
                        {"success", run.success},
                        {"clean_probability", run.clean_probability},
                        {"attacked_probability", run.attacked_probability},
                        {"first_success", first ? Json(*first) : Json(nullptr)},
                        {"episode_rewards", run.episode_rewards},
                        {"episode_first_success", successes},
                        {"steps", steps},
                        {"added_edges", added}});
  }
  return Json{{"success_rate", result.success_rate},
              {"strategy_actions",
               {{"direct", result.strategy_actions[0]},
                {"indirect", result.strategy_actions[1]},
                {"feedback", result.strategy_actions[2]}}},
              {"targets", runs}};
}

std::vector<Edge> manipulated_edges_from_json(const BipartiteGraph& g, const Json& j) {
  try {
    std::vector<Edge> out;
    std::set<std::pair<Index, Index>> seen;
    for (const auto& run : j.at("targets")) {
      for (const auto& e : run.at("added_edges")) {
        Edge edge{user_by_name(g, e.at("user").get<std::string>()), post_by_name(g, e.at("post").get<std::string>()),
                  e.at("weight").get<double>()};
        if (seen.insert({edge.user.value, edge.post.value}).second) out.push_back(edge);
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed episodes JSON: ") + e.what());
  }
}

}  // namespace strata
