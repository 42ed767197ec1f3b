#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "strata/encoding_tree.hpp"

namespace strata {

/// Largest adjusting parameter for which the degree-only influence transform
/// stays monotone on [1, b/2].
inline constexpr double kDefaultInfluenceC = 0.73575888234288464319;  // 2/e

/// Influence of user `u`: sum over the non-root nodes on its root-to-leaf path
/// (leaf included) of -(g/V_root) * log2(c * V / V_parent).
double influence(const BipartiteGraph& g, const EncodingTree& t, UserIndex u, double c);

/// Closed form of influence() on the single-layer tree:
/// -(d_u/V) * log2(c * d_u / V).
double influence_single_layer(const BipartiteGraph& g, UserIndex u, double c);

struct InfluenceTable {
  double c = kDefaultInfluenceC;
  std::vector<double> scores;  // indexed by user

  double operator[](UserIndex u) const { return scores.at(u.value); }
};

InfluenceTable influence_table(const BipartiteGraph& g, const EncodingTree& t, double c);

enum class AgentKind : std::uint8_t { Bot = 0, Cyborg = 1, Worker = 2 };
inline constexpr std::array<AgentKind, 3> kAgentKinds{AgentKind::Bot, AgentKind::Cyborg,
                                                       AgentKind::Worker};
const char* to_string(AgentKind kind);

struct Budgets {
  int bots = 0;
  int cyborgs = 0;
  int workers = 0;

  int total() const { return bots + cyborgs + workers; }
  int operator[](AgentKind k) const {
    return k == AgentKind::Bot ? bots : k == AgentKind::Cyborg ? cyborgs : workers;
  }
};

/// Disjoint malicious account groups of low, medium and high influence.
struct AccountGroups {
  std::vector<UserIndex> bots;
  std::vector<UserIndex> cyborgs;
  std::vector<UserIndex> workers;
  Budgets budgets;
  InfluenceTable influence;

  const std::vector<UserIndex>& members(AgentKind kind) const;
  /// Union of the three groups in bot, cyborg, worker order.
  std::vector<UserIndex> all() const;
  /// Sum of influence over one group's members.
  double influence_sum(AgentKind kind) const;
};

/// Sorts users by ascending influence (ties by user index), slices the order
/// in proportion to the budgets, then samples each budget uniformly without
/// replacement from its slice.
AccountGroups categorize(const BipartiteGraph& g, const InfluenceTable& influence, Budgets budgets,
                         std::uint64_t seed);
AccountGroups categorize(const BipartiteGraph& g, const EncodingTree& t, double c, Budgets budgets,
                         std::uint64_t seed);

/// Slice boundaries [0, low_end), [low_end, mid_end), [mid_end, m).
std::pair<std::size_t, std::size_t> slice_bounds(std::size_t users, Budgets budgets);

/// Monte Carlo check of the monotone degree-to-influence transform
/// x' = -(x/b) log2(c x / b) for x uniform on [1, b/2].
struct TransformReport {
  bool monotonic = true;
  std::size_t monotonic_violations = 0;
  std::size_t pdf_bound_violations = 0;
  double bound_value = std::numeric_limits<double>::infinity();
  double max_density = 0.0;
  double derivative_at_one = 0.0;       // analytic derivative at x = 1
  double derivative_at_half_b = 0.0;    // analytic derivative at x = b/2
  double closed_form_max = 0.0;         // (1/b) log2(b / (e c))
  double closed_form_min = 0.0;         // (1/b) log2(2 / (e c))
  bool derivative_decreasing = true;
  std::size_t bins = 0;
};

double influence_transform(double x, double b, double c);
double influence_transform_derivative(double x, double b, double c);

TransformReport verify_influence_transform(double b, double c, std::size_t samples, std::uint64_t seed,
                                           std::size_t bins = 50);

}  // namespace strata
