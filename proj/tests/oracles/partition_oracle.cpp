#include <cmath>
#include <limits>
#include <map>

#include "oracles.hpp"

namespace oracle {

using namespace strata;

double two_level_entropy(const BipartiteGraph& g, const std::vector<int>& community) {
  const std::size_t n = g.num_vertices();
  std::vector<double> degree(n, 0.0);
  std::map<int, double> vol, cut;
  double total = 0.0;
  for (const Edge& e : g.edges()) {
    const Vertex a = g.vertex_of(e.user), b = g.vertex_of(e.post);
    degree[a] += e.weight;
    degree[b] += e.weight;
    total += 2.0 * e.weight;
    if (community[a] != community[b]) {
      cut[community[a]] += e.weight;
      cut[community[b]] += e.weight;
    }
  }
  for (std::size_t v = 0; v < n; ++v) vol[community[v]] += degree[v];

  double h = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] > 0.0) h -= degree[v] / total * std::log2(degree[v] / vol[community[v]]);
  }
  for (const auto& [c, v] : vol) {
    const double g_c = cut[c];
    if (g_c > 0.0) h -= g_c / total * std::log2(v / total);
  }
  return h;
}

PartitionOptimum best_two_level(const BipartiteGraph& g) {
  const std::size_t n = g.num_vertices();
  PartitionOptimum best;
  best.entropy = std::numeric_limits<double>::infinity();
  // Restricted growth strings enumerate each set partition exactly once.
  std::vector<int> a(n, 0), peak(n, 0);
  while (true) {
    ++best.partitions;
    const double h = two_level_entropy(g, a);
    if (h < best.entropy) {
      best.entropy = h;
      best.community = a;
    }
    std::size_t i = n;
    while (i-- > 1) {
      if (a[i] <= peak[i - 1]) break;
    }
    if (i == 0 || n < 2) break;
    ++a[i];
    for (std::size_t j = i + 1; j < n; ++j) a[j] = 0;
    for (std::size_t j = i; j < n; ++j) peak[j] = std::max(peak[j - 1], a[j]);
  }
  return best;
}

}  // namespace oracle
