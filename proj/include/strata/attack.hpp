#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "strata/detector.hpp"
#include "strata/encoding_tree.hpp"
#include "strata/influence.hpp"

namespace strata {

enum class Strategy : std::uint8_t { Direct = 0, Indirect = 1, Feedback = 2 };
const char* to_string(Strategy s);

struct StrategyToggles {
  bool direct = true;
  bool indirect = true;
  bool feedback = true;

  bool allows(Strategy s) const {
    return s == Strategy::Direct ? direct : s == Strategy::Indirect ? indirect : feedback;
  }
};

inline constexpr int kScoreBins = 10;
inline constexpr int kBudgetBins = 4;
inline constexpr int kCountCap = 3;
/// 10 score bins x 4^3 budget bins x 4^3 capped strategy counts.
inline constexpr std::uint32_t kStateCount = 40960;

struct AttackState {
  double target_fake_prob = 0.0;
  std::array<double, 3> budget_used{};  // fraction per agent kind
  std::array<int, 3> strategy_counts{};  // direct, indirect, feedback

  std::uint32_t code() const;
  bool operator==(const AttackState&) const = default;
};

/// Tabular Q-learner for one agent over (state code, action), where the action
/// indexes the subgraph's posts in Subgraph-relative order: same-class posts
/// (target first) followed by other-class posts.
class AgentPolicy {
 public:
  AgentPolicy(AgentKind kind, std::vector<UserIndex> accounts, std::size_t actions, double gamma = 0.95,
              double epsilon = 1.0);

  AgentKind kind() const { return kind_; }
  const std::vector<UserIndex>& accounts() const { return accounts_; }
  std::size_t action_count() const { return actions_; }
  double gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double e);

  double q(std::uint32_t state, std::size_t action) const;
  double target_q(std::uint32_t state, std::size_t action) const;
  void set_q(std::uint32_t state, std::size_t action, double value);
  /// max over actions of Q-(state, .), 0 for unseen states.
  double max_target(std::uint32_t state) const;
  /// Copies Q into the target table Q-.
  void sync_target() { target_ = q_; }
  std::size_t visited_states() const { return q_.size(); }

 private:
  AgentKind kind_;
  std::vector<UserIndex> accounts_;
  std::size_t actions_;
  double gamma_;
  double epsilon_;
  std::unordered_map<std::uint32_t, std::vector<double>> q_;
  std::unordered_map<std::uint32_t, std::vector<double>> target_;
};

struct Transition {
  std::uint32_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::uint32_t next_state = 0;
  bool terminal = false;
};

/// Q(s,a) += lr * (r + gamma * max_a' Q-(s',a') - Q(s,a)); the bootstrap term
/// is dropped on terminal transitions. Returns the TD error.
double q_update(AgentPolicy& agent, const Transition& tr, double gamma, double learning_rate);

/// Sampling weight: summed node entropy of the non-root common ancestors
/// of u and p, or 0.01 when they share only the root.
double sample_prob(const BipartiteGraph& g, const EncodingTree& t, UserIndex u, PostIndex p);
inline constexpr double kRootOnlyWeight = 0.01;

/// Posts an agent may act on, in action order, with their strategy tags.
struct ActionSpace {
  PostIndex target;
  std::vector<PostIndex> posts;
  std::vector<Strategy> tags;

  static ActionSpace from(const Subgraph& sub);
  std::size_t size() const { return posts.size(); }
};

struct Proposal {
  UserIndex account;
  std::size_t action = 0;  // index into ActionSpace
  bool active = false;
};

/// Per-account epsilon-greedy choice among feasible actions (no existing edge,
/// strategy enabled). Greedy ties go to the lowest action index. Throws
/// "agent exhausted" when no account has a feasible action.
std::vector<Proposal> propose(const AgentPolicy& agent, const AttackState& s, const ActionSpace& space,
                              const BipartiteGraph& g, const StrategyToggles& toggles, std::mt19937_64& rng);

/// Draws one active proposal with probability proportional to its weight.
Proposal sample_agent_action(std::span<const Proposal> proposals, std::span<const double> weights,
                             std::mt19937_64& rng);

struct CollectiveAction {
  UserIndex user;
  PostIndex post;
  std::size_t action = 0;
  Strategy strategy = Strategy::Direct;
  AgentKind agent = AgentKind::Bot;
};

/// Chooses among the agents' single actions with probability proportional to
/// each agent's summed account influence (or the heaviest agent when
/// `argmax` is set). Returns nothing when no agent is active.
std::optional<CollectiveAction> aggregate(std::span<const std::optional<Proposal>> actions,
                                          const AccountGroups& groups, const ActionSpace& space,
                                          std::mt19937_64& rng, bool argmax = false);

/// 1 when the target is misclassified; otherwise the fraction of the other
/// same-class posts misclassified, capped at 0.99 so that only a flipped
/// target earns the full reward. 0 when there are no other same-class posts.
double reward(const BlackBox& model, const BipartiteGraph& g, const Subgraph& sub);
inline constexpr double kAuxiliaryRewardCap = 0.99;

struct Step {
  AttackState state;
  CollectiveAction action;
  double reward = 0.0;
  AttackState next_state;
};

struct EpisodeLog {
  std::vector<Step> steps;
  std::vector<Edge> added;
  std::optional<int> first_success;
  std::optional<int> exhausted_at;  // step at which no agent had a feasible action
  double total_reward = 0.0;
};

struct AttackConfig {
  std::optional<int> t_max;  // defaults to the total budget
  int t_up = 10;
  int episodes = 30;
  double gamma = 0.95;
  double learning_rate = 0.1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;
  StrategyToggles strategies;
  bool argmax_aggregation = false;
  std::optional<int> level;  // subgraph level, defaults to K - 1
};

/// Linear decay from epsilon_start to epsilon_end over the first
/// epsilon_decay_fraction of the episodes.
double epsilon_at(const AttackConfig& cfg, int episode);

struct TargetRun {
  PostIndex target;
  std::vector<double> episode_rewards;                // summed reward per training episode
  std::vector<std::optional<int>> episode_successes;  // first success step per training episode
  EpisodeLog final_episode;                           // greedy run, stops at success
  double clean_probability = 0.0;
  double attacked_probability = 0.0;
  bool success = false;
};

struct AttackResult {
  std::vector<TargetRun> runs;
  double success_rate = 0.0;
  std::array<std::size_t, 3> strategy_actions{};  // final-episode action counts per strategy

  /// Union of the final-episode edges over all targets, deduplicated.
  std::vector<Edge> manipulated_edges() const;
};

/// Trains per-target agent policies for cfg.episodes episodes and then runs
/// one greedy evaluation episode per target that stops on success.
AttackResult run_attack(const BipartiteGraph& g, const EncodingTree& t, const AccountGroups& groups,
                        const BlackBox& model, std::span<const PostIndex> targets, const AttackConfig& cfg,
                        std::uint64_t seed);

enum class BaselineKind : std::uint8_t { Random = 0, Dice = 1 };
const char* to_string(BaselineKind k);

/// Untargeted edge additions from the malicious accounts under the same
/// per-agent budgets and step limit, stopping once the target flips.
AttackResult baseline_attack(BaselineKind kind, const BipartiteGraph& g, const AccountGroups& groups,
                             const BlackBox& model, std::span<const PostIndex> targets,
                             std::optional<int> t_max, std::uint64_t seed);

}  // namespace strata
