#include "strata/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "strata/graph_io.hpp"
#include "strata/random.hpp"

namespace strata {
namespace {

using Clock = std::chrono::steady_clock;

template <typename T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

ProbShift prob_shift(const BipartiteGraph& g, const BlackBox& box, const AttackResult& result) {
  ProbShift s;
  for (const auto& run : result.runs) {
    s.fake_before += run.clean_probability;
    s.fake_after += run.attacked_probability;
  }
  if (!result.runs.empty()) {
    s.fake_before /= static_cast<double>(result.runs.size());
    s.fake_after /= static_cast<double>(result.runs.size());
  }
  BipartiteGraph attacked = g;
  for (const Edge& e : result.manipulated_edges()) attacked.add_edge(e.user, e.post, e.weight);
  const auto before = box.predict_all(g);
  const auto after = box.predict_all(attacked);
  std::size_t real = 0;
  for (Index p = 0; p < g.num_posts(); ++p) {
    if (g.label(PostIndex{p}) != Label::Real) continue;
    s.real_before += before[p];
    s.real_after += after[p];
    ++real;
  }
  if (real > 0) {
    s.real_before /= static_cast<double>(real);
    s.real_after /= static_cast<double>(real);
  }
  return s;
}

Json shift_json(const ProbShift& s) {
  return Json{{"fake_before", s.fake_before},
              {"fake_after", s.fake_after},
              {"real_before", s.real_before},
              {"real_after", s.real_after}};
}

ProbShift shift_from(const Json& j) {
  return ProbShift{j.at("fake_before").get<double>(), j.at("fake_after").get<double>(),
                   j.at("real_before").get<double>(), j.at("real_after").get<double>()};
}

class SeedRun {
 public:
  SeedRun(std::uint64_t seed, std::map<std::string, double>& timings) : seed_(seed), timings_(timings) {}

  template <typename F>
  auto phase(const std::string& name, F&& body) {
    const auto start = Clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record(name, start);
      } else {
        auto out = body();
        record(name, start);
        return out;
      }
    } catch (const PhaseError&) {
      throw;
    } catch (const std::exception& e) {
      throw PhaseError(name, seed_, e.what());
    }
  }

 private:
  void record(const std::string& name, Clock::time_point start) {
    timings_[name] += std::chrono::duration<double>(Clock::now() - start).count();
  }

  std::uint64_t seed_;
  std::map<std::string, double>& timings_;
};

std::vector<PostIndex> pick_targets(const BipartiteGraph& g, std::size_t limit) {
  std::vector<PostIndex> out;
  for (Index p = 0; p < g.num_posts(); ++p) {
    if (g.label(PostIndex{p}) == Label::Fake) out.push_back(PostIndex{p});
  }
  if (limit > 0 && out.size() > limit) out.resize(limit);
  if (out.empty()) throw Error("graph has no fake posts to target");
  return out;
}

SeedMetrics run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const BipartiteGraph* fixed,
                     std::map<std::string, double>& timings) {
  SeedRun run(seed, timings);
  SeedMetrics m;
  m.seed = seed;

  const BipartiteGraph g = run.phase("graph", [&] {
    return fixed ? *fixed : generate_synthetic(cfg.dataset.spec, phase_seed(seed, "graph"));
  });
  m.users = g.num_users();
  m.posts = g.num_posts();
  m.edges = g.num_edges();

  const EncodingTree tree = run.phase("tree", [&] { return optimize_tree(g, cfg.height); });
  m.one_dim_entropy = one_dim_entropy(g);
  m.tree_entropy = tree_entropy(g, tree);
  m.tree_height = tree.height();

  const std::uint64_t categorize_seed = phase_seed(seed, "categorize");
  const AccountGroups groups =
      run.phase("categorize", [&] { return categorize(g, tree, cfg.c, cfg.budgets, categorize_seed); });

  const std::uint64_t detector_seed = phase_seed(seed, "detector");
  const Trained trained = run.phase("train", [&] { return train(g, cfg.detector, detector_seed); });
  m.clean_accuracy = trained.report.test_accuracy;
  m.clean_f1 = trained.report.test_f1;
  const auto model = std::make_shared<const DetectorModel>(trained.model);
  const BlackBox box(model);

  const auto targets = run.phase("targets", [&] { return pick_targets(g, cfg.max_targets); });
  m.targets = targets.size();

  const std::uint64_t attack_seed = phase_seed(seed, "attack");
  const AttackResult si2af =
      run.phase("attack", [&] { return run_attack(g, tree, groups, box, targets, cfg.attack, attack_seed); });
  m.success["si2af/clean"] = si2af.success_rate;
  m.shift["si2af/clean"] = prob_shift(g, box, si2af);
  m.strategy_actions = si2af.strategy_actions;
  {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : si2af.runs) {
      if (r.final_episode.first_success) {
        sum += *r.final_episode.first_success;
        ++n;
      }
    }
    if (n > 0) m.mean_first_success = sum / static_cast<double>(n);
    const std::size_t episodes = static_cast<std::size_t>(cfg.attack.episodes);
    m.reward_curve.assign(episodes, 0.0);
    for (const auto& r : si2af.runs) {
      for (std::size_t e = 0; e < episodes; ++e) m.reward_curve[e] += r.episode_rewards[e];
    }
    for (double& x : m.reward_curve) x /= static_cast<double>(si2af.runs.size());
  }

  if (cfg.baselines) {
    for (BaselineKind kind : {BaselineKind::Random, BaselineKind::Dice}) {
      const std::string name = to_string(kind);
      const AttackResult r = run.phase(name, [&] {
        return baseline_attack(kind, g, groups, box, targets, cfg.attack.t_max, phase_seed(seed, name));
      });
      m.success[name + "/clean"] = r.success_rate;
      m.shift[name + "/clean"] = prob_shift(g, box, r);
    }
  }

  if (cfg.ablation) {
    const std::array<std::pair<const char*, StrategyToggles>, 3> only{{
        {"direct", StrategyToggles{true, false, false}},
        {"indirect", StrategyToggles{false, true, false}},
        {"feedback", StrategyToggles{false, false, true}},
    }};
    for (const auto& [name, toggles] : only) {
      AttackConfig ac = cfg.attack;
      ac.strategies = toggles;
      const AttackResult r =
          run.phase("ablation", [&] { return run_attack(g, tree, groups, box, targets, ac, attack_seed); });
      m.success[std::string("si2af_") + name + "/clean"] = r.success_rate;
    }
  }

  if (cfg.defense) {
    Hyperparams hp = cfg.detector;
    hp.epochs = cfg.refine_epochs;
    const auto refined = run.phase("refine", [&] {
      return std::make_shared<const DetectorModel>(
          refine_with_attacks(trained.model, g, si2af.manipulated_edges(), hp, detector_seed));
    });
    const BlackBox hardened(refined);
    const auto ev = evaluate(hardened.predict_all(g), g, trained.report.split.test);
    m.refined_accuracy = ev.accuracy;
    m.refined_f1 = ev.f1;
    const AttackResult again = run.phase(
        "reattack", [&] { return run_attack(g, tree, groups, hardened, targets, cfg.attack, attack_seed); });
    m.success["si2af/refined"] = again.success_rate;
    m.shift["si2af/refined"] = prob_shift(g, hardened, again);
  }

  for (int k : cfg.height_sweep) {
    m.height_sweep[k] = run.phase("height_sweep", [&] {
      const EncodingTree tk = optimize_tree(g, k);
      const AccountGroups gk = categorize(g, tk, cfg.c, cfg.budgets, categorize_seed);
      AttackConfig ac = cfg.attack;
      ac.level.reset();
      return run_attack(g, tk, gk, box, targets, ac, attack_seed).success_rate;
    });
  }
  return m;
}

Json seed_json(const SeedMetrics& m) {
  Json success = Json::object(), shift = Json::object(), sweep = Json::object();
  for (const auto& [k, v] : m.success) success[k] = v;
  for (const auto& [k, v] : m.shift) shift[k] = shift_json(v);
  for (const auto& [k, v] : m.height_sweep) sweep[std::to_string(k)] = v;
  return Json{{"seed", m.seed},
              {"users", m.users},
              {"posts", m.posts},
              {"edges", m.edges},
              {"targets", m.targets},
              {"one_dim_entropy", m.one_dim_entropy},
              {"tree_entropy", m.tree_entropy},
              {"tree_height", m.tree_height},
              {"clean_accuracy", m.clean_accuracy},
              {"clean_f1", m.clean_f1},
              {"refined_accuracy", m.refined_accuracy},
              {"refined_f1", m.refined_f1},
              {"success", success},
              {"prob_shift", shift},
              {"strategy_actions",
               {{"direct", m.strategy_actions[0]},
                {"indirect", m.strategy_actions[1]},
                {"feedback", m.strategy_actions[2]}}},
              {"mean_first_success", m.mean_first_success ? Json(*m.mean_first_success) : Json(nullptr)},
              {"reward_curve", m.reward_curve},
              {"height_sweep", sweep}};
}

SeedMetrics seed_from(const Json& j) {
  SeedMetrics m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.users = j.at("users").get<std::size_t>();
  m.posts = j.at("posts").get<std::size_t>();
  m.edges = j.at("edges").get<std::size_t>();
  m.targets = j.at("targets").get<std::size_t>();
  m.one_dim_entropy = j.at("one_dim_entropy").get<double>();
  m.tree_entropy = j.at("tree_entropy").get<double>();
  m.tree_height = j.at("tree_height").get<int>();
  m.clean_accuracy = j.at("clean_accuracy").get<double>();
  m.clean_f1 = j.at("clean_f1").get<double>();
  m.refined_accuracy = j.at("refined_accuracy").get<double>();
  m.refined_f1 = j.at("refined_f1").get<double>();
  for (const auto& [k, v] : j.at("success").items()) m.success[k] = v.get<double>();
  for (const auto& [k, v] : j.at("prob_shift").items()) m.shift[k] = shift_from(v);
  const auto& sa = j.at("strategy_actions");
  m.strategy_actions = {sa.at("direct").get<std::size_t>(), sa.at("indirect").get<std::size_t>(),
                        sa.at("feedback").get<std::size_t>()};
  if (!j.at("mean_first_success").is_null()) m.mean_first_success = j.at("mean_first_success").get<double>();
  m.reward_curve = j.at("reward_curve").get<std::vector<double>>();
  for (const auto& [k, v] : j.at("height_sweep").items()) m.height_sweep[std::stoi(k)] = v.get<double>();
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string file_stem(const std::string& key) {
  std::string s = key;
  for (char& ch : s) {
    if (ch == '/') ch = '_';
  }
  return s;
}

}  // namespace

PhaseError::PhaseError(std::string phase_name, std::uint64_t run_seed, const std::string& what)
    : Error("phase '" + phase_name + "' failed for seed " + std::to_string(run_seed) + ": " + what),
      phase(std::move(phase_name)),
      seed(run_seed) {}

std::uint64_t phase_seed(std::uint64_t root, const std::string& phase) { return derive_seed(root, phase); }

void ExperimentConfig::validate() const {
  if (height < 2) throw ConfigError("height K must be at least 2");
  if (level && (*level < 1 || *level >= height)) throw ConfigError("level k must satisfy 1 <= k < K");
  if (!(c > 0.0)) throw ConfigError("influence parameter c must be positive");
  if (budgets.bots < 0 || budgets.cyborgs < 0 || budgets.workers < 0 || budgets.total() == 0) {
    throw ConfigError("budgets must be nonnegative with a positive total");
  }
  if (dataset.synthetic) {
    const auto& s = dataset.spec;
    if (s.communities < 1 || s.users_per_community < 1 || s.posts_per_community < 1 || s.feature_dim < 1) {
      throw ConfigError("synthetic dataset sizes must be positive");
    }
    if (budgets.total() > s.communities * s.users_per_community) {
      throw ConfigError("budgets exceed the number of synthetic users");
    }
  } else if (dataset.edges.empty() || dataset.labels.empty()) {
    throw ConfigError("csv dataset needs edges and labels paths");
  }
  if (detector.hidden < 1 || detector.epochs < 0 || !(detector.learning_rate > 0.0) || detector.weight_decay < 0.0) {
    throw ConfigError("invalid detector hyperparameters");
  }
  if (refine_epochs < 0) throw ConfigError("refine_epochs must be nonnegative");
  const auto& a = attack;
  if (a.episodes < 0 || a.t_up < 1 || (a.t_max && *a.t_max < 0)) throw ConfigError("invalid attack schedule");
  if (!(a.gamma >= 0.0 && a.gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(a.learning_rate > 0.0 && a.learning_rate <= 1.0)) throw ConfigError("attack learning rate must lie in (0, 1]");
  if (!(a.epsilon_start >= 0.0 && a.epsilon_start <= 1.0 && a.epsilon_end >= 0.0 && a.epsilon_end <= 1.0)) {
    throw ConfigError("epsilon values must lie in [0, 1]");
  }
  if (!a.strategies.direct && !a.strategies.indirect && !a.strategies.feedback) {
    throw ConfigError("at least one attack strategy must be enabled");
  }
  for (int k : height_sweep) {
    if (k < 2) throw ConfigError("height sweep values must be at least 2");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  reject_unknown(j, {"dataset", "height", "level", "c", "budgets", "detector", "refine_epochs", "attack", "baselines",
                     "ablation", "defense", "height_sweep", "max_targets", "seeds", "output_dir"},
                 "config");
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown(d, {"type", "communities", "users_per_community", "posts_per_community", "p_intra", "p_inter",
                       "feature_noise", "fake_fraction", "feature_dim", "leaning_mismatch", "post_signal",
                       "user_signal", "edges", "labels", "features"},
                   "dataset");
    const auto type = field<std::string>(d, "type", "synthetic");
    if (type == "synthetic") {
      auto& s = cfg.dataset.spec;
      s.communities = field(d, "communities", s.communities);
      s.users_per_community = field(d, "users_per_community", s.users_per_community);
      s.posts_per_community = field(d, "posts_per_community", s.posts_per_community);
      s.p_intra = field(d, "p_intra", s.p_intra);
      s.p_inter = field(d, "p_inter", s.p_inter);
      s.feature_noise = field(d, "feature_noise", s.feature_noise);
      s.fake_fraction = field(d, "fake_fraction", s.fake_fraction);
      s.feature_dim = field(d, "feature_dim", s.feature_dim);
      s.leaning_mismatch = field(d, "leaning_mismatch", s.leaning_mismatch);
      s.post_signal = field(d, "post_signal", s.post_signal);
      s.user_signal = field(d, "user_signal", s.user_signal);
    } else if (type == "csv") {
      cfg.dataset.synthetic = false;
      cfg.dataset.edges = field<std::string>(d, "edges", "");
      cfg.dataset.labels = field<std::string>(d, "labels", "");
      if (d.contains("features") && !d.at("features").is_null()) {
        cfg.dataset.features = field<std::string>(d, "features", "");
      }
    } else {
      throw ConfigError("dataset.type must be 'synthetic' or 'csv'");
    }
  }
  cfg.height = field(j, "height", cfg.height);
  if (j.contains("level") && !j.at("level").is_null()) cfg.level = field(j, "level", 0);
  cfg.c = field(j, "c", cfg.c);
  if (j.contains("budgets")) {
    const auto& b = j.at("budgets");
    reject_unknown(b, {"bots", "cyborgs", "workers"}, "budgets");
    cfg.budgets = Budgets{field(b, "bots", 0), field(b, "cyborgs", 0), field(b, "workers", 0)};
  }
  if (j.contains("detector")) {
    const auto& d = j.at("detector");
    reject_unknown(d, {"hidden", "learning_rate", "epochs", "weight_decay"}, "detector");
    try {
      cfg.detector = hyperparams_from_json(d, cfg.detector);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("detector hyperparameters have the wrong type");
    }
  }
  cfg.refine_epochs = field(j, "refine_epochs", cfg.refine_epochs);
  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    reject_unknown(a, {"t_max", "t_up", "episodes", "gamma", "learning_rate", "epsilon_start", "epsilon_end",
                       "epsilon_decay_fraction", "strategies", "argmax_aggregation"},
                   "attack");
    auto& ac = cfg.attack;
    if (a.contains("t_max") && !a.at("t_max").is_null()) ac.t_max = field(a, "t_max", 0);
    ac.t_up = field(a, "t_up", ac.t_up);
    ac.episodes = field(a, "episodes", ac.episodes);
    ac.gamma = field(a, "gamma", ac.gamma);
    ac.learning_rate = field(a, "learning_rate", ac.learning_rate);
    ac.epsilon_start = field(a, "epsilon_start", ac.epsilon_start);
    ac.epsilon_end = field(a, "epsilon_end", ac.epsilon_end);
    ac.epsilon_decay_fraction = field(a, "epsilon_decay_fraction", ac.epsilon_decay_fraction);
    ac.argmax_aggregation = field(a, "argmax_aggregation", ac.argmax_aggregation);
    if (a.contains("strategies")) {
      const auto& s = a.at("strategies");
      reject_unknown(s, {"direct", "indirect", "feedback"}, "attack.strategies");
      ac.strategies = StrategyToggles{field(s, "direct", true), field(s, "indirect", true), field(s, "feedback", true)};
    }
  }
  cfg.attack.level = cfg.level;
  cfg.baselines = field(j, "baselines", cfg.baselines);
  cfg.ablation = field(j, "ablation", cfg.ablation);
  cfg.defense = field(j, "defense", cfg.defense);
  cfg.height_sweep = field(j, "height_sweep", cfg.height_sweep);
  cfg.max_targets = field(j, "max_targets", cfg.max_targets);
  cfg.seeds = field(j, "seeds", cfg.seeds);
  cfg.output_dir = field<std::string>(j, "output_dir", cfg.output_dir.string());
  cfg.validate();
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json dataset;
  if (cfg.dataset.synthetic) {
    const auto& s = cfg.dataset.spec;
    dataset = Json{{"type", "synthetic"},
                   {"communities", s.communities},
                   {"users_per_community", s.users_per_community},
                   {"posts_per_community", s.posts_per_community},
                   {"p_intra", s.p_intra},
                   {"p_inter", s.p_inter},
                   {"feature_noise", s.feature_noise},
                   {"fake_fraction", s.fake_fraction},
                   {"feature_dim", s.feature_dim},
                   {"leaning_mismatch", s.leaning_mismatch},
                   {"post_signal", s.post_signal},
                   {"user_signal", s.user_signal}};
  } else {
    dataset = Json{{"type", "csv"},
                   {"edges", cfg.dataset.edges.string()},
                   {"labels", cfg.dataset.labels.string()},
                   {"features", cfg.dataset.features ? Json(cfg.dataset.features->string()) : Json(nullptr)}};
  }
  const auto& a = cfg.attack;
  return Json{{"dataset", dataset},
              {"height", cfg.height},
              {"level", cfg.level ? Json(*cfg.level) : Json(nullptr)},
              {"c", cfg.c},
              {"budgets", {{"bots", cfg.budgets.bots}, {"cyborgs", cfg.budgets.cyborgs}, {"workers", cfg.budgets.workers}}},
              {"detector", to_json(cfg.detector)},
              {"refine_epochs", cfg.refine_epochs},
              {"attack",
               {{"t_max", a.t_max ? Json(*a.t_max) : Json(nullptr)},
                {"t_up", a.t_up},
                {"episodes", a.episodes},
                {"gamma", a.gamma},
                {"learning_rate", a.learning_rate},
                {"epsilon_start", a.epsilon_start},
                {"epsilon_end", a.epsilon_end},
                {"epsilon_decay_fraction", a.epsilon_decay_fraction},
                {"strategies",
                 {{"direct", a.strategies.direct}, {"indirect", a.strategies.indirect}, {"feedback", a.strategies.feedback}}},
                {"argmax_aggregation", a.argmax_aggregation}}},
              {"baselines", cfg.baselines},
              {"ablation", cfg.ablation},
              {"defense", cfg.defense},
              {"height_sweep", cfg.height_sweep},
              {"max_targets", cfg.max_targets},
              {"seeds", cfg.seeds},
              {"output_dir", cfg.output_dir.string()}};
}

double sign_test_p(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0.0;
  for (std::size_t k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  return std::min(p, 1.0);
}

MetricsReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  MetricsReport report;
  report.config = config;

  std::optional<BipartiteGraph> fixed;
  if (!config.dataset.synthetic) {
    try {
      fixed = load_graph_csv(config.dataset.edges, config.dataset.labels, config.dataset.features);
    } catch (const std::exception& e) {
      throw PhaseError("load", config.seeds.front(), e.what());
    }
  }

  for (std::uint64_t seed : config.seeds) {
    report.seeds.push_back(run_seed(config, seed, fixed ? &*fixed : nullptr, report.timings));
  }

  std::map<std::string, std::vector<double>> rates;
  std::map<std::string, std::vector<ProbShift>> shifts;
  for (const auto& m : report.seeds) {
    for (const auto& [k, v] : m.success) rates[k].push_back(v);
    for (const auto& [k, v] : m.shift) shifts[k].push_back(v);
  }
  for (const auto& [k, xs] : rates) report.success[k] = summarize(xs);
  for (const auto& [k, xs] : shifts) {
    ProbShift mean;
    for (const auto& s : xs) {
      mean.fake_before += s.fake_before;
      mean.fake_after += s.fake_after;
      mean.real_before += s.real_before;
      mean.real_after += s.real_after;
    }
    const auto n = static_cast<double>(xs.size());
    report.shift[k] = ProbShift{mean.fake_before / n, mean.fake_after / n, mean.real_before / n, mean.real_after / n};
  }

  if (config.baselines) {
    for (const auto& m : report.seeds) {
      const double d = m.success.at("si2af/clean") - m.success.at("dice/clean");
      if (d > 0) ++report.dice_wins;
      if (d < 0) ++report.dice_losses;
    }
    report.dice_sign_p = sign_test_p(report.dice_wins, report.dice_losses);
  }
  if (config.defense) {
    std::size_t wins = 0;
    for (const auto& m : report.seeds) {
      if (m.success.at("si2af/refined") < m.success.at("si2af/clean")) ++wins;
      report.max_accuracy_drop = std::max(report.max_accuracy_drop, m.clean_accuracy - m.refined_accuracy);
    }
    report.defense_win_share = static_cast<double>(wins) / static_cast<double>(report.seeds.size());
  }
  return report;
}

std::vector<std::string> attack_rows(const MetricsReport& report) {
  static const std::vector<std::string> order{"si2af/clean",          "random/clean",         "dice/clean",
                                              "si2af_direct/clean",   "si2af_indirect/clean", "si2af_feedback/clean",
                                              "si2af/refined"};
  std::vector<std::string> out;
  for (const auto& k : order) {
    if (report.success.contains(k)) out.push_back(k);
  }
  for (const auto& [k, v] : report.success) {
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

Json to_json(const MetricsReport& report) {
  Json success = Json::object(), shift = Json::object(), seeds = Json::array();
  for (const auto& k : attack_rows(report)) {
    success[k] = Json{{"mean", report.success.at(k).mean}, {"std", report.success.at(k).std}};
  }
  for (const auto& [k, v] : report.shift) shift[k] = shift_json(v);
  for (const auto& m : report.seeds) seeds.push_back(seed_json(m));
  return Json{{"config", to_json(report.config)},
              {"success", success},
              {"prob_shift", shift},
              {"dice_sign_test", {{"wins", report.dice_wins}, {"losses", report.dice_losses}, {"p", report.dice_sign_p}}},
              {"defense", {{"win_share", report.defense_win_share}, {"max_accuracy_drop", report.max_accuracy_drop}}},
              {"seeds", seeds}};
}

MetricsReport report_from_json(const Json& j) {
  try {
    MetricsReport r;
    r.config = config_from_json(j.at("config"));
    for (const auto& [k, v] : j.at("success").items()) r.success[k] = Summary{v.at("mean"), v.at("std")};
    for (const auto& [k, v] : j.at("prob_shift").items()) r.shift[k] = shift_from(v);
    r.dice_wins = j.at("dice_sign_test").at("wins");
    r.dice_losses = j.at("dice_sign_test").at("losses");
    r.dice_sign_p = j.at("dice_sign_test").at("p");
    r.defense_win_share = j.at("defense").at("win_share");
    r.max_accuracy_drop = j.at("defense").at("max_accuracy_drop");
    for (const auto& s : j.at("seeds")) r.seeds.push_back(seed_from(s));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report JSON: ") + e.what());
  }
}

void emit_report(const MetricsReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "plots", ec);
  if (ec) throw Error("cannot create " + (dir / "plots").string() + ": " + ec.message());

  write_json(dir / "report.json", to_json(report));
  write_json(dir / "config.json", to_json(report.config));

  std::string csv = "attack,phase,mean,std\n";
  for (const auto& key : attack_rows(report)) {
    const auto slash = key.find('/');
    const auto& s = report.success.at(key);
    csv += key.substr(0, slash) + "," + key.substr(slash + 1) + "," + fmt(s.mean) + "," + fmt(s.std) + "\n";
  }
  write_text(dir / "success_rates.csv", csv);

  std::string shift = "attack,phase,fake_before,fake_after,real_before,real_after\n";
  for (const auto& [key, s] : report.shift) {
    const auto slash = key.find('/');
    shift += key.substr(0, slash) + "," + key.substr(slash + 1) + "," + fmt(s.fake_before) + "," +
             fmt(s.fake_after) + "," + fmt(s.real_before) + "," + fmt(s.real_after) + "\n";
  }
  write_text(dir / "prob_shift.csv", shift);

  for (const auto& key : attack_rows(report)) {
    std::string dat = "# seed success_rate\n";
    for (const auto& m : report.seeds) {
      if (m.success.contains(key)) dat += std::to_string(m.seed) + " " + fmt(m.success.at(key)) + "\n";
    }
    write_text(dir / "plots" / ("success_" + file_stem(key) + ".dat"), dat);
  }

  std::vector<double> curve;
  for (const auto& m : report.seeds) {
    if (curve.size() < m.reward_curve.size()) curve.resize(m.reward_curve.size(), 0.0);
    for (std::size_t e = 0; e < m.reward_curve.size(); ++e) curve[e] += m.reward_curve[e];
  }
  std::string rewards = "# episode mean_reward\n";
  for (std::size_t e = 0; e < curve.size(); ++e) {
    rewards += std::to_string(e) + " " + fmt(curve[e] / static_cast<double>(report.seeds.size())) + "\n";
  }
  write_text(dir / "plots" / "reward_curve.dat", rewards);

  std::map<int, std::vector<double>> sweep;
  for (const auto& m : report.seeds) {
    for (const auto& [k, v] : m.height_sweep) sweep[k].push_back(v);
  }
  if (!sweep.empty()) {
    std::string dat = "# height mean_success_rate\n";
    for (const auto& [k, xs] : sweep) dat += std::to_string(k) + " " + fmt(summarize(xs).mean) + "\n";
    write_text(dir / "plots" / "height_sweep.dat", dat);
  }

  Json timings = Json::object();
  for (const auto& [k, v] : report.timings) timings[k] = v;
  write_json(dir / "timings.json", timings);
}

}  // namespace strata
