#include "strata/influence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace strata {

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Bot: return "bot";
    case AgentKind::Cyborg: return "cyborg";
    case AgentKind::Worker: return "worker";
  }
  return "?";
}

double influence(const BipartiteGraph& g, const EncodingTree& t, UserIndex u, double c) {
  if (u.value >= g.num_users()) throw Error("unknown user #" + std::to_string(u.value));
  if (!(c > 0.0)) throw Error("influence adjusting parameter c must be positive");
  const double total = t.node(t.root()).volume;
  if (!(total > 0.0)) throw Error("empty graph: total volume is zero");

  double score = 0.0;
  NodeId id = t.leaf_of(g.vertex_of(u));
  while (id != t.root()) {
    const auto& node = t.node(id);
    const NodeId parent = *node.parent;
    if (node.cut > 0.0) {
      score -= (node.cut / total) * std::log2(c * node.volume / t.node(parent).volume);
    }
    id = parent;
  }
  return score;
}

double influence_single_layer(const BipartiteGraph& g, UserIndex u, double c) {
  if (u.value >= g.num_users()) throw Error("unknown user #" + std::to_string(u.value));
  if (!(c > 0.0)) throw Error("influence adjusting parameter c must be positive");
  const double total = 2.0 * g.total_weight();
  if (!(total > 0.0)) throw Error("empty graph: total volume is zero");
  const double d = g.degree(u);
  if (d == 0.0) return 0.0;
  return -(d / total) * std::log2(c * d / total);
}

InfluenceTable influence_table(const BipartiteGraph& g, const EncodingTree& t, double c) {
  InfluenceTable table;
  table.c = c;
  table.scores.resize(g.num_users());
  for (Index u = 0; u < g.num_users(); ++u) table.scores[u] = influence(g, t, UserIndex{u}, c);
  return table;
}

const std::vector<UserIndex>& AccountGroups::members(AgentKind kind) const {
  switch (kind) {
    case AgentKind::Bot: return bots;
    case AgentKind::Cyborg: return cyborgs;
    case AgentKind::Worker: return workers;
  }
  return bots;
}

std::vector<UserIndex> AccountGroups::all() const {
  std::vector<UserIndex> out = bots;
  out.insert(out.end(), cyborgs.begin(), cyborgs.end());
  out.insert(out.end(), workers.begin(), workers.end());
  return out;
}

double AccountGroups::influence_sum(AgentKind kind) const {
  double total = 0.0;
  for (UserIndex u : members(kind)) total += influence[u];
  return total;
}

std::pair<std::size_t, std::size_t> slice_bounds(std::size_t users, Budgets budgets) {
  const auto total = static_cast<std::size_t>(budgets.total());
  if (total == 0) return {0, 0};
  const auto low = users * static_cast<std::size_t>(budgets.bots) / total;
  const auto mid = users * static_cast<std::size_t>(budgets.bots + budgets.cyborgs) / total;
  return {low, mid};
}

AccountGroups categorize(const BipartiteGraph& g, const InfluenceTable& influence, Budgets budgets,
                         std::uint64_t seed) {
  if (budgets.bots < 0 || budgets.cyborgs < 0 || budgets.workers < 0) {
    throw Error("budgets must be nonnegative");
  }
  const std::size_t m = g.num_users();
  if (static_cast<std::size_t>(budgets.total()) > m) throw Error("infeasible budget: exceeds user count");
  if (influence.scores.size() != m) throw Error("influence table does not match the graph");

  std::vector<UserIndex> order(m);
  for (Index u = 0; u < m; ++u) order[u] = UserIndex{u};
  std::stable_sort(order.begin(), order.end(), [&](UserIndex a, UserIndex b) {
    return influence[a] < influence[b];
  });

  const auto [low_end, mid_end] = slice_bounds(m, budgets);
  std::mt19937_64 rng(seed);
  auto draw = [&](std::size_t begin, std::size_t end, int budget, const char* name) {
    if (end - begin < static_cast<std::size_t>(budget)) {
      throw Error(std::string("infeasible budget: ") + name + " slice holds " +
                  std::to_string(end - begin) + " users, budget is " + std::to_string(budget));
    }
    std::vector<UserIndex> picked;
    std::sample(order.begin() + static_cast<long>(begin), order.begin() + static_cast<long>(end),
                std::back_inserter(picked), budget, rng);
    std::sort(picked.begin(), picked.end());
    return picked;
  };

  AccountGroups groups;
  groups.budgets = budgets;
  groups.influence = influence;
  if (budgets.total() == 0) return groups;
  groups.bots = draw(0, low_end, budgets.bots, "low-influence");
  groups.cyborgs = draw(low_end, mid_end, budgets.cyborgs, "medium-influence");
  groups.workers = draw(mid_end, m, budgets.workers, "high-influence");
  return groups;
}

AccountGroups categorize(const BipartiteGraph& g, const EncodingTree& t, double c, Budgets budgets,
                         std::uint64_t seed) {
  return categorize(g, influence_table(g, t, c), budgets, seed);
}

double influence_transform(double x, double b, double c) { return -(x / b) * std::log2(c * x / b); }

double influence_transform_derivative(double x, double b, double c) {
  return -(1.0 / b) * (std::log2(c / b) + std::log2(x) + std::numbers::log2e);
}

TransformReport verify_influence_transform(double b, double c, std::size_t samples, std::uint64_t seed,
                                           std::size_t bins) {
  if (!(c > 0.0) || c > 2.0 / std::numbers::e) {
    throw Error("theorem regime violated: c must lie in (0, 2/e]");
  }
  if (!(b > 2.0)) throw Error("b must exceed 2 so that [1, b/2] is a proper interval");
  if (samples < 1000) throw Error("need at least 1000 samples");
  if (bins < 2) throw Error("need at least two histogram bins");

  TransformReport report;
  report.bins = bins;
  const double lo = 1.0, hi = b / 2.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(lo, hi);
  std::vector<double> xs(samples);
  for (auto& x : xs) x = uniform(rng);
  std::sort(xs.begin(), xs.end());

  std::vector<double> ys(samples);
  for (std::size_t i = 0; i < samples; ++i) ys[i] = influence_transform(xs[i], b, c);
  for (std::size_t i = 1; i < samples; ++i) {
    if (xs[i] > xs[i - 1] && ys[i] < ys[i - 1]) ++report.monotonic_violations;
  }
  report.monotonic = report.monotonic_violations == 0;

  const double denominator = 1.0 - std::log2(std::numbers::e * c);
  report.bound_value = denominator > 0.0 ? b / denominator : std::numeric_limits<double>::infinity();

  const double y_lo = influence_transform(lo, b, c);
  const double y_hi = influence_transform(hi, b, c);
  const double width = (y_hi - y_lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double y : ys) {
    auto bin = static_cast<std::size_t>((y - y_lo) / width);
    counts[std::min(bin, bins - 1)]++;
  }
  const auto n = static_cast<double>(samples);
  for (std::size_t count : counts) {
    const double p = static_cast<double>(count) / n;
    const double density = p / width;
    const double sigma = std::sqrt(p * (1.0 - p) / n) / width;
    report.max_density = std::max(report.max_density, density);
    if (density > report.bound_value + 3.0 * sigma) ++report.pdf_bound_violations;
  }

  report.derivative_at_one = influence_transform_derivative(lo, b, c);
  report.derivative_at_half_b = influence_transform_derivative(hi, b, c);
  report.closed_form_max = std::log2(b / (std::numbers::e * c)) / b;
  report.closed_form_min = std::log2(2.0 / (std::numbers::e * c)) / b;

  constexpr int kGrid = 1000;
  double previous = report.derivative_at_one;
  for (int i = 1; i <= kGrid; ++i) {
    const double x = lo + (hi - lo) * i / kGrid;
    const double d = influence_transform_derivative(x, b, c);
    if (d > previous) report.derivative_decreasing = false;
    previous = d;
  }
  return report;
}

}  // namespace strata
