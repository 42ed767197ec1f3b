#include "strata/attack.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "strata/random.hpp"

namespace strata {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Direct: return "direct";
    case Strategy::Indirect: return "indirect";
    case Strategy::Feedback: return "feedback";
  }
  return "?";
}

std::uint32_t AttackState::code() const {
  const int score_bin = std::clamp(static_cast<int>(std::floor(target_fake_prob * kScoreBins)), 0, kScoreBins - 1);
  std::uint32_t code = static_cast<std::uint32_t>(score_bin);
  for (double f : budget_used) {
    const int bin = std::clamp(static_cast<int>(std::floor(f * kBudgetBins)), 0, kBudgetBins - 1);
    code = code * kBudgetBins + static_cast<std::uint32_t>(bin);
  }
  for (int c : strategy_counts) {
    code = code * (kCountCap + 1) + static_cast<std::uint32_t>(std::clamp(c, 0, kCountCap));
  }
  return code;
}

AgentPolicy::AgentPolicy(AgentKind kind, std::vector<UserIndex> accounts, std::size_t actions, double gamma,
                         double epsilon)
    : kind_(kind), accounts_(std::move(accounts)), actions_(actions), gamma_(gamma), epsilon_(0.0) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error("discount must lie in [0, 1)");
  set_epsilon(epsilon);
}

void AgentPolicy::set_epsilon(double e) {
  if (!(e >= 0.0 && e <= 1.0)) throw Error("exploration rate must lie in [0, 1]");
  epsilon_ = e;
}

double AgentPolicy::q(std::uint32_t state, std::size_t action) const {
  auto it = q_.find(state);
  return it == q_.end() ? 0.0 : it->second.at(action);
}

double AgentPolicy::target_q(std::uint32_t state, std::size_t action) const {
  auto it = target_.find(state);
  return it == target_.end() ? 0.0 : it->second.at(action);
}

void AgentPolicy::set_q(std::uint32_t state, std::size_t action, double value) {
  if (action >= actions_) throw Error("action index out of range");
  if (!std::isfinite(value)) throw Error("non-finite Q value");
  auto [it, inserted] = q_.try_emplace(state, actions_, 0.0);
  it->second[action] = value;
}

double AgentPolicy::max_target(std::uint32_t state) const {
  auto it = target_.find(state);
  if (it == target_.end() || it->second.empty()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

double q_update(AgentPolicy& agent, const Transition& tr, double gamma, double learning_rate) {
  const double bootstrap = tr.terminal || gamma == 0.0 ? 0.0 : gamma * agent.max_target(tr.next_state);
  const double current = agent.q(tr.state, tr.action);
  const double td = tr.reward + bootstrap - current;
  agent.set_q(tr.state, tr.action, current + learning_rate * td);
  return td;
}

double sample_prob(const BipartiteGraph& g, const EncodingTree& t, UserIndex u, PostIndex p) {
  if (u.value >= g.num_users()) throw Error("unknown user #" + std::to_string(u.value));
  if (p.value >= g.num_posts()) throw Error("unknown post #" + std::to_string(p.value));
  const auto up = t.ancestors(t.leaf_of(g.vertex_of(u)));
  const auto pp = t.ancestors(t.leaf_of(g.vertex_of(p)));
  const std::set<NodeId> post_side(pp.begin(), pp.end());
  double weight = 0.0;
  bool shared = false;
  for (NodeId a : up) {
    if (a == t.root() || !post_side.contains(a)) continue;
    shared = true;
    weight += node_entropy(g, t, a);
  }
  // A shared ancestor with zero cut contributes nothing; keep the weight positive.
  if (!shared || weight <= 0.0) return kRootOnlyWeight;
  return weight;
}

ActionSpace ActionSpace::from(const Subgraph& sub) {
  ActionSpace space;
  space.target = sub.target;
  for (PostIndex p : sub.same_class()) {
    space.posts.push_back(p);
    space.tags.push_back(p == sub.target ? Strategy::Direct : Strategy::Feedback);
  }
  for (PostIndex p : sub.other_class()) {
    space.posts.push_back(p);
    space.tags.push_back(Strategy::Indirect);
  }
  return space;
}

std::vector<Proposal> propose(const AgentPolicy& agent, const AttackState& s, const ActionSpace& space,
                              const BipartiteGraph& g, const StrategyToggles& toggles, std::mt19937_64& rng) {
  if (space.size() == 0) throw Error("empty subgraph: no posts to act on");
  const std::uint32_t code = s.code();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Proposal> out;
  std::vector<std::size_t> feasible;
  bool any = false;
  for (UserIndex u : agent.accounts()) {
    feasible.clear();
    for (std::size_t a = 0; a < space.size(); ++a) {
      if (toggles.allows(space.tags[a]) && !g.has_edge(u, space.posts[a])) feasible.push_back(a);
    }
    Proposal prop{u, 0, !feasible.empty()};
    if (prop.active) {
      any = true;
      if (agent.epsilon() > 0.0 && coin(rng) < agent.epsilon()) {
        std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
        prop.action = feasible[pick(rng)];
      } else {
        prop.action = feasible.front();
        double best = agent.q(code, prop.action);
        for (std::size_t a : feasible) {
          const double v = agent.q(code, a);
          if (v > best) {
            best = v;
            prop.action = a;
          }
        }
      }
    }
    out.push_back(prop);
  }
  if (!any) throw Error("agent exhausted");
  return out;
}

Proposal sample_agent_action(std::span<const Proposal> proposals, std::span<const double> weights,
                             std::mt19937_64& rng) {
  if (proposals.size() != weights.size()) throw Error("proposal and weight counts differ");
  std::vector<double> w(proposals.size(), 0.0);
  bool any = false;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (!proposals[i].active) continue;
    if (!(weights[i] > 0.0)) throw Error("sampling weights must be positive");
    w[i] = weights[i];
    any = true;
  }
  if (!any) throw Error("no active account to sample");
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  return proposals[pick(rng)];
}

std::optional<CollectiveAction> aggregate(std::span<const std::optional<Proposal>> actions,
                                          const AccountGroups& groups, const ActionSpace& space,
                                          std::mt19937_64& rng, bool argmax) {
  if (actions.size() != kAgentKinds.size()) throw Error("aggregation needs one slot per agent");
  std::vector<double> w(actions.size(), 0.0);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    if (!actions[k]) continue;
    active.push_back(k);
    w[k] = groups.influence_sum(kAgentKinds[k]);
  }
  if (active.empty()) return std::nullopt;

  std::size_t chosen = active.front();
  double total = 0.0;
  for (std::size_t k : active) total += w[k];
  if (argmax) {
    for (std::size_t k : active) {
      if (w[k] > w[chosen]) chosen = k;
    }
  } else if (total > 0.0) {
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    chosen = pick(rng);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    chosen = active[pick(rng)];
  }

  const Proposal& p = *actions[chosen];
  CollectiveAction out;
  out.user = p.account;
  out.action = p.action;
  out.post = space.posts.at(p.action);
  out.strategy = space.tags.at(p.action);
  out.agent = kAgentKinds[chosen];
  return out;
}

double reward(const BlackBox& model, const BipartiteGraph& g, const Subgraph& sub) {
  if (model.misclassified(g, sub.target)) return 1.0;
  const auto same = sub.same_class();
  if (same.size() <= 1) return 0.0;
  std::size_t flipped = 0;
  for (PostIndex p : same.subspan(1)) flipped += model.misclassified(g, p);
  const double fraction = static_cast<double>(flipped) / static_cast<double>(same.size() - 1);
  return std::min(fraction, kAuxiliaryRewardCap);
}

double epsilon_at(const AttackConfig& cfg, int episode) {
  const double horizon = cfg.epsilon_decay_fraction * cfg.episodes;
  if (horizon <= 0.0 || episode >= horizon) return cfg.epsilon_end;
  const double frac = episode / horizon;
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

std::vector<Edge> AttackResult::manipulated_edges() const {
  std::vector<Edge> out;
  std::set<std::pair<Index, Index>> seen;
  for (const auto& run : runs) {
    for (const Edge& e : run.final_episode.added) {
      if (seen.insert({e.user.value, e.post.value}).second) out.push_back(e);
    }
  }
  return out;
}

namespace {

int resolve_t_max(std::optional<int> t_max, const AccountGroups& groups) {
  const int value = t_max.value_or(groups.budgets.total());
  if (value < 0) throw Error("t_max must be nonnegative");
  return value;
}

void check_targets(const BipartiteGraph& g, std::span<const PostIndex> targets) {
  if (targets.empty()) throw Error("no target posts");
  for (PostIndex p : targets) {
    if (p.value >= g.num_posts()) throw Error("target post #" + std::to_string(p.value) + " not in graph");
  }
}

std::array<double, 3> budget_fractions(const std::array<int, 3>& used, const Budgets& budgets) {
  std::array<double, 3> out{};
  for (std::size_t k = 0; k < 3; ++k) {
    const int cap = budgets[kAgentKinds[k]];
    out[k] = cap > 0 ? static_cast<double>(used[k]) / cap : 0.0;
  }
  return out;
}

struct Episode {
  const BipartiteGraph& g;
  const Subgraph& sub;
  const ActionSpace& space;
  const AccountGroups& groups;
  const BlackBox& model;
  const AttackConfig& cfg;
  const std::array<std::vector<double>, 3>& weights;
  int t_max;

  EpisodeLog run(std::array<AgentPolicy, 3>& agents, std::mt19937_64& rng, bool learn,
                 long& global_step) const {
    EpisodeLog log;
    BipartiteGraph work = g;
    std::array<int, 3> used{};
    AttackState state{model.predict_proba(work, sub.target), {}, {}};

    for (int step = 0; step < t_max; ++step) {
      if (!learn && model.misclassified(work, sub.target)) break;
      std::array<std::optional<Proposal>, 3> picks;
      for (std::size_t k = 0; k < 3; ++k) {
        const auto& agent = agents[k];
        if (agent.accounts().empty() || used[k] >= groups.budgets[agent.kind()]) continue;
        std::vector<Proposal> props;
        try {
          props = propose(agent, state, space, work, cfg.strategies, rng);
        } catch (const Error&) {
          continue;  // every account already engaged with every allowed post
        }
        picks[k] = sample_agent_action(props, weights[k], rng);
      }
      auto action = aggregate(picks, groups, space, rng, cfg.argmax_aggregation);
      if (!action) {
        log.exhausted_at = step;
        break;
      }

      work.add_edge(action->user, action->post);
      log.added.push_back(work.edges().back());
      const auto k = static_cast<std::size_t>(action->agent);
      ++used[k];
      AttackState next = state;
      next.target_fake_prob = model.predict_proba(work, sub.target);
      next.budget_used = budget_fractions(used, groups.budgets);
      ++next.strategy_counts[static_cast<std::size_t>(action->strategy)];
      const double r = reward(model, work, sub);

      if (learn) {
        Transition tr{state.code(), action->action, r, next.code(), step + 1 == t_max};
        q_update(agents[k], tr, cfg.gamma, cfg.learning_rate);
        if (++global_step % cfg.t_up == 0) {
          for (auto& a : agents) a.sync_target();
        }
      }
      log.steps.push_back(Step{state, *action, r, next});
      log.total_reward += r;
      const bool success = model.misclassified(work, sub.target);
      if (success && !log.first_success) log.first_success = step;
      state = next;
      if (success && !learn) break;
    }
    return log;
  }
};

}  // namespace

AttackResult run_attack(const BipartiteGraph& g, const EncodingTree& t, const AccountGroups& groups,
                        const BlackBox& model, std::span<const PostIndex> targets, const AttackConfig& cfg,
                        std::uint64_t seed) {
  check_targets(g, targets);
  if (cfg.episodes < 0) throw Error("episode count must be nonnegative");
  if (cfg.t_up < 1) throw Error("target update interval must be positive");
  if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) throw Error("learning rate must lie in (0, 1]");
  const int t_max = resolve_t_max(cfg.t_max, groups);

  AttackResult result;
  std::size_t successes = 0;
  for (PostIndex target : targets) {
    const Subgraph sub = extract_subgraph(g, t, target, cfg.level);
    const ActionSpace space = ActionSpace::from(sub);
    std::array<std::vector<double>, 3> weights;
    for (std::size_t k = 0; k < 3; ++k) {
      for (UserIndex u : groups.members(kAgentKinds[k])) weights[k].push_back(sample_prob(g, t, u, target));
    }
    std::array<AgentPolicy, 3> agents{
        AgentPolicy(AgentKind::Bot, groups.bots, space.size(), cfg.gamma, cfg.epsilon_start),
        AgentPolicy(AgentKind::Cyborg, groups.cyborgs, space.size(), cfg.gamma, cfg.epsilon_start),
        AgentPolicy(AgentKind::Worker, groups.workers, space.size(), cfg.gamma, cfg.epsilon_start)};

    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(target.value)));
    const Episode episode{g, sub, space, groups, model, cfg, weights, t_max};
    TargetRun run;
    run.target = target;
    run.clean_probability = model.predict_proba(g, target);
    long global_step = 0;
    for (int e = 0; e < cfg.episodes; ++e) {
      for (auto& a : agents) a.set_epsilon(epsilon_at(cfg, e));
      const auto log = episode.run(agents, rng, true, global_step);
      run.episode_rewards.push_back(log.total_reward);
      run.episode_successes.push_back(log.first_success);
    }

    // The greedy evaluation draws from its own stream so configurations that
    // learn the same policy replay the same trajectory.
    for (auto& a : agents) a.set_epsilon(0.0);
    std::mt19937_64 eval_rng(derive_seed(derive_seed(seed, "eval"), static_cast<std::uint64_t>(target.value)));
    run.final_episode = episode.run(agents, eval_rng, false, global_step);
    BipartiteGraph attacked = g;
    for (const Edge& e : run.final_episode.added) attacked.add_edge(e.user, e.post, e.weight);
    run.attacked_probability = model.predict_proba(attacked, target);
    run.success = model.misclassified(attacked, target);
    successes += run.success;
    for (const auto& s : run.final_episode.steps) ++result.strategy_actions[static_cast<std::size_t>(s.action.strategy)];
    result.runs.push_back(std::move(run));
  }
  result.success_rate = static_cast<double>(successes) / static_cast<double>(targets.size());
  return result;
}

}  // namespace strata
