#include <random>

#include "strata/attack.hpp"
#include "strata/random.hpp"

namespace strata {

const char* to_string(BaselineKind k) { return k == BaselineKind::Random ? "random" : "dice"; }

namespace {

// Majority label of the posts a user engaged with; nullopt on ties or no posts.
std::vector<std::optional<Label>> user_labels(const BipartiteGraph& g) {
  std::vector<std::optional<Label>> out(g.num_users());
  for (Index u = 0; u < g.num_users(); ++u) {
    int balance = 0;
    for (Index id : g.incident(g.vertex_of(UserIndex{u}))) {
      balance += g.label(g.edges()[id].post) == Label::Fake ? 1 : -1;
    }
    if (balance > 0) out[u] = Label::Fake;
    if (balance < 0) out[u] = Label::Real;
  }
  return out;
}

Strategy tag_for(const BipartiteGraph& g, PostIndex target, PostIndex p) {
  if (p == target) return Strategy::Direct;
  return g.label(p) == g.label(target) ? Strategy::Feedback : Strategy::Indirect;
}

}  // namespace

AttackResult baseline_attack(BaselineKind kind, const BipartiteGraph& g, const AccountGroups& groups,
                             const BlackBox& model, std::span<const PostIndex> targets,
                             std::optional<int> t_max, std::uint64_t seed) {
  if (targets.empty()) throw Error("no target posts");
  for (PostIndex p : targets) {
    if (p.value >= g.num_posts()) throw Error("target post #" + std::to_string(p.value) + " not in graph");
  }
  const int steps = t_max.value_or(groups.budgets.total());
  if (steps < 0) throw Error("t_max must be nonnegative");
  const auto leaning = user_labels(g);

  AttackResult result;
  std::size_t successes = 0;
  for (PostIndex target : targets) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(target.value)));
    BipartiteGraph work = g;
    std::array<int, 3> used{};
    TargetRun run;
    run.target = target;
    run.clean_probability = model.predict_proba(g, target);
    EpisodeLog& log = run.final_episode;

    for (int step = 0; step < steps && !model.misclassified(work, target); ++step) {
      std::vector<CollectiveAction> feasible;
      for (std::size_t k = 0; k < 3; ++k) {
        const AgentKind agent = kAgentKinds[k];
        if (used[k] >= groups.budgets[agent]) continue;
        for (UserIndex u : groups.members(agent)) {
          for (Index p = 0; p < g.num_posts(); ++p) {
            const PostIndex post{p};
            if (work.has_edge(u, post)) continue;
            if (kind == BaselineKind::Dice && leaning[u.value] && *leaning[u.value] == g.label(post)) continue;
            feasible.push_back(CollectiveAction{u, post, p, tag_for(g, target, post), agent});
          }
        }
      }
      if (feasible.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
      const CollectiveAction action = feasible[pick(rng)];
      AttackState state{model.predict_proba(work, target), {}, {}};
      work.add_edge(action.user, action.post);
      log.added.push_back(work.edges().back());
      ++used[static_cast<std::size_t>(action.agent)];
      AttackState next{model.predict_proba(work, target), {}, {}};
      const double r = model.misclassified(work, target) ? 1.0 : 0.0;
      log.steps.push_back(Step{state, action, r, next});
      log.total_reward += r;
      if (r == 1.0) log.first_success = step;
      ++result.strategy_actions[static_cast<std::size_t>(action.strategy)];
    }

    run.attacked_probability = model.predict_proba(work, target);
    run.success = model.misclassified(work, target);
    successes += run.success;
    result.runs.push_back(std::move(run));
  }
  result.success_rate = static_cast<double>(successes) / static_cast<double>(targets.size());
  return result;
}

}  // namespace strata
