#pragma once

#include <filesystem>
#include <istream>
#include <optional>

#include "strata/graph.hpp"

namespace strata {

/// Reads an edge list with header `user_id,post_id[,weight]`, post labels
/// (`post_id,label`) and features (`id,f0,...,f{d-1}`, users and posts mixed).
/// Ids are assigned in order of first appearance: edges, then labels, then features.
GraphInput read_graph_csv(std::istream& edges, std::istream& labels, std::istream* features);

BipartiteGraph load_graph_csv(const std::filesystem::path& edges, const std::filesystem::path& labels,
                              const std::optional<std::filesystem::path>& features);

}  // namespace strata
