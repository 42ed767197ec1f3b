#pragma once

#include <filesystem>
#include <json.hpp>

#include "strata/attack.hpp"
#include "strata/detector.hpp"
#include "strata/encoding_tree.hpp"
#include "strata/graph.hpp"
#include "strata/influence.hpp"

namespace strata {

using Json = nlohmann::ordered_json;

Json read_json(const std::filesystem::path& path);
/// Writes with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

/// {"feature_dim", "users": [{"id", "features"}], "posts": [{"id", "label",
/// "features"}], "edges": [{"user", "post", "weight"}]}
Json to_json(const BipartiteGraph& g);
BipartiteGraph graph_from_json(const Json& j);

/// {"max_height", "root", "nodes": [{"parent", "children", "vertices"}]};
/// vertices are written by name.
Json to_json(const BipartiteGraph& g, const EncodingTree& t);
EncodingTree tree_from_json(const BipartiteGraph& g, const Json& j);

Json to_json(const BipartiteGraph& g, const AccountGroups& groups);
AccountGroups groups_from_json(const BipartiteGraph& g, const Json& j);

/// {"hyperparams", "weights": {"w1", "w2"}, "biases": {"b1", "b2"}, "frozen"}
Json to_json(const DetectorModel& model);
DetectorModel model_from_json(const Json& j);

Json to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const Json& j, Hyperparams defaults = {});

Json to_json(const BipartiteGraph& g, const AttackResult& result);
/// Added edges of every final episode, by name.
std::vector<Edge> manipulated_edges_from_json(const BipartiteGraph& g, const Json& j);

}  // namespace strata
