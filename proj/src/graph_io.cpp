#include "strata/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace strata {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) {
    auto first = cell.find_first_not_of(" \t\r");
    auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error("malformed number '" + text + "' in " + context);
  }
}

template <typename Fn>
void for_each_row(std::istream& in, const char* what, std::size_t min_cols, Fn&& fn) {
  std::string line;
  if (!std::getline(in, line)) throw Error(std::string(what) + ": missing header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_row(line);
    if (cells.size() < min_cols) {
      throw Error(std::string(what) + ": line " + std::to_string(lineno) + " has too few columns");
    }
    fn(cells, std::string(what) + " line " + std::to_string(lineno));
  }
}

struct OrderedIds {
  std::vector<std::string> order;
  std::unordered_set<std::string> seen;
  void add(const std::string& id) {
    if (seen.insert(id).second) order.push_back(id);
  }
};

}  // namespace

GraphInput read_graph_csv(std::istream& edges, std::istream& labels, std::istream* features) {
  GraphInput in;
  OrderedIds users, posts;

  for_each_row(edges, "edges", 2, [&](const std::vector<std::string>& c, const std::string& ctx) {
    EdgeRecord rec{c[0], c[1], std::nullopt};
    if (c.size() > 2 && !c[2].empty()) rec.weight = parse_double(c[2], ctx);
    users.add(rec.user);
    posts.add(rec.post);
    in.edges.push_back(std::move(rec));
  });

  for_each_row(labels, "labels", 2, [&](const std::vector<std::string>& c, const std::string& ctx) {
    const double value = parse_double(c[1], ctx);
    if (value != 0.0 && value != 1.0) throw Error(ctx + ": label must be 0 or 1");
    posts.add(c[0]);
    in.labels[c[0]] = static_cast<int>(value);
  });

  if (features) {
    for_each_row(*features, "features", 2,
                 [&](const std::vector<std::string>& c, const std::string& ctx) {
                   std::vector<double> vec;
                   for (std::size_t i = 1; i < c.size(); ++i) vec.push_back(parse_double(c[i], ctx));
                   if (posts.seen.contains(c[0])) {
                     in.post_features[c[0]] = std::move(vec);
                   } else {
                     users.add(c[0]);
                     in.user_features[c[0]] = std::move(vec);
                   }
                 });
  }

  in.users = std::move(users.order);
  in.posts = std::move(posts.order);
  return in;
}

BipartiteGraph load_graph_csv(const std::filesystem::path& edges, const std::filesystem::path& labels,
                              const std::optional<std::filesystem::path>& features) {
  auto open = [](const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw Error("cannot open " + p.string());
    return f;
  };
  auto e = open(edges);
  auto l = open(labels);
  if (features) {
    auto f = open(*features);
    return build_graph(read_graph_csv(e, l, &f));
  }
  return build_graph(read_graph_csv(e, l, nullptr));
}

}  // namespace strata
