// strata: command-line front end for the attack laboratory.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "strata/attack.hpp"
#include "strata/detector.hpp"
#include "strata/encoding_tree.hpp"
#include "strata/experiment.hpp"
#include "strata/graph_io.hpp"
#include "strata/influence.hpp"
#include "strata/serialization.hpp"

namespace {

using namespace strata;

constexpr int kConfigExit = 2;
constexpr int kPhaseExit = 3;

// Failures in reading inputs are configuration errors; failures while
// computing are phase errors.
template <typename F>
auto load(const std::string& what, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

template <typename F>
auto compute(const std::string& phase, std::uint64_t seed, F&& body) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const PhaseError&) {
    throw;
  } catch (const std::exception& e) {
    throw PhaseError(phase, seed, e.what());
  }
}

Budgets parse_budgets(const std::string& text) {
  Budgets b;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> b.bots >> c1 >> b.cyborgs >> c2 >> b.workers) || c1 != ',' || c2 != ',' || !in.eof()) {
    throw ConfigError("budgets must look like 20,10,4");
  }
  if (b.bots < 0 || b.cyborgs < 0 || b.workers < 0) throw ConfigError("budgets must be nonnegative");
  return b;
}

StrategyToggles parse_strategies(const std::string& text) {
  if (text == "all") return {};
  StrategyToggles t{false, false, false};
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "direct") t.direct = true;
    else if (item == "indirect") t.indirect = true;
    else if (item == "feedback") t.feedback = true;
    else throw ConfigError("unknown strategy '" + item + "'");
  }
  if (!t.direct && !t.indirect && !t.feedback) throw ConfigError("no strategy enabled");
  return t;
}

std::vector<PostIndex> read_targets(const BipartiteGraph& g, const std::string& path) {
  std::vector<PostIndex> out;
  if (path.empty()) {
    for (Index p = 0; p < g.num_posts(); ++p) {
      if (g.label(PostIndex{p}) == Label::Fake) out.push_back(PostIndex{p});
    }
    return out;
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto p = g.find_post(line);
    if (!p) throw ConfigError("target post '" + line + "' not in graph");
    out.push_back(*p);
  }
  return out;
}

void print_summary(const MetricsReport& report) {
  std::cout << "attack,phase,mean,std\n";
  for (const auto& key : attack_rows(report)) {
    const auto slash = key.find('/');
    const auto& s = report.success.at(key);
    std::cout << key.substr(0, slash) << "," << key.substr(slash + 1) << "," << s.mean << "," << s.std << "\n";
  }
  if (report.config.baselines) {
    std::cout << "si2af vs dice sign test: wins=" << report.dice_wins << " losses=" << report.dice_losses
              << " p=" << report.dice_sign_p << "\n";
  }
  if (report.config.defense) {
    std::cout << "defense: lower success on " << report.defense_win_share * 100.0
              << "% of seeds, max accuracy drop " << report.max_accuracy_drop << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural-entropy-guided attacks on graph fake news detectors"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a planted-community graph");
  SyntheticSpec spec;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output graph JSON")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--communities", spec.communities, "Number of communities");
  synth->add_option("--users", spec.users_per_community, "Users per community");
  synth->add_option("--posts", spec.posts_per_community, "Posts per community");
  synth->add_option("--p-intra", spec.p_intra, "Engagement probability inside a community");
  synth->add_option("--p-inter", spec.p_inter, "Engagement probability across communities");
  synth->add_option("--fake-fraction", spec.fake_fraction, "Share of fake posts");
  synth->add_option("--noise", spec.feature_noise, "Feature noise scale");
  synth->add_option("--dim", spec.feature_dim, "Feature dimension");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert edge/label/feature CSV files into graph JSON");
  std::string csv_edges, csv_labels, csv_features, ingest_out;
  ingest->add_option("--edges", csv_edges, "user_id,post_id[,weight] CSV")->required();
  ingest->add_option("--labels", csv_labels, "post_id,label CSV")->required();
  ingest->add_option("--features", csv_features, "id,f0,...,f{d-1} CSV");
  ingest->add_option("--out", ingest_out, "Output graph JSON")->required();

  // build-tree
  auto* build_tree = app.add_subcommand("build-tree", "Optimize a height-bounded encoding tree");
  std::string graph_path, tree_out;
  int height = 3;
  build_tree->add_option("--graph", graph_path, "Graph JSON")->required();
  build_tree->add_option("--height", height, "Tree height bound K")->check(CLI::Range(2, 64));
  build_tree->add_option("--out", tree_out, "Output tree JSON")->required();

  // categorize
  auto* categorize_cmd = app.add_subcommand("categorize", "Split malicious accounts into bots, cyborgs and workers");
  std::string tree_path, budgets_text = "20,10,4", groups_out;
  double c = kDefaultInfluenceC;
  std::uint64_t seed = 1;
  categorize_cmd->add_option("--graph", graph_path, "Graph JSON")->required();
  categorize_cmd->add_option("--tree", tree_path, "Tree JSON")->required();
  categorize_cmd->add_option("--budgets", budgets_text, "Bot,cyborg,worker budgets");
  categorize_cmd->add_option("--c", c, "Influence adjusting parameter");
  categorize_cmd->add_option("--seed", seed, "Sampling seed");
  categorize_cmd->add_option("--out", groups_out, "Output groups JSON")->required();

  // train-detector
  auto* train_cmd = app.add_subcommand("train-detector", "Train the graph detector");
  Hyperparams hp;
  std::string model_out;
  train_cmd->add_option("--graph", graph_path, "Graph JSON")->required();
  train_cmd->add_option("--epochs", hp.epochs, "Gradient steps");
  train_cmd->add_option("--hidden", hp.hidden, "Hidden width");
  train_cmd->add_option("--lr", hp.learning_rate, "Learning rate");
  train_cmd->add_option("--weight-decay", hp.weight_decay, "L2 coefficient");
  train_cmd->add_option("--seed", seed, "Split and initialization seed");
  train_cmd->add_option("--out", model_out, "Output model JSON")->required();

  // attack
  auto* attack_cmd = app.add_subcommand("attack", "Attack target posts against a frozen detector");
  std::string groups_path, model_path, targets_path, episodes_out, baseline, strategies = "all";
  AttackConfig acfg;
  int t_max = -1;
  attack_cmd->add_option("--graph", graph_path, "Graph JSON")->required();
  attack_cmd->add_option("--tree", tree_path, "Tree JSON")->required();
  attack_cmd->add_option("--groups", groups_path, "Groups JSON")->required();
  attack_cmd->add_option("--model", model_path, "Model JSON")->required();
  attack_cmd->add_option("--targets", targets_path, "File with one target post id per line (default: all fake posts)");
  attack_cmd->add_option("--t-max", t_max, "Steps per episode (default: total budget)");
  attack_cmd->add_option("--t-up", acfg.t_up, "Target table sync interval");
  attack_cmd->add_option("--episodes", acfg.episodes, "Training episodes per target");
  attack_cmd->add_option("--gamma", acfg.gamma, "Discount");
  attack_cmd->add_option("--q-lr", acfg.learning_rate, "Q-learning rate");
  attack_cmd->add_option("--strategies", strategies, "all, or a comma list of direct,indirect,feedback");
  attack_cmd->add_flag("--argmax", acfg.argmax_aggregation, "Pick the most influential agent instead of sampling");
  attack_cmd->add_option("--baseline", baseline, "Run a baseline instead")->check(CLI::IsMember({"random", "dice"}));
  attack_cmd->add_option("--seed", seed, "Attack seed");
  attack_cmd->add_option("--out", episodes_out, "Output episodes JSON")->required();

  // defend
  auto* defend_cmd = app.add_subcommand("defend", "Refine a detector on attack-generated edges");
  std::string episodes_path;
  int refine_epochs = 150;
  defend_cmd->add_option("--graph", graph_path, "Graph JSON")->required();
  defend_cmd->add_option("--model", model_path, "Model JSON")->required();
  defend_cmd->add_option("--episodes", episodes_path, "Episodes JSON from attack")->required();
  defend_cmd->add_option("--epochs", refine_epochs, "Refinement steps");
  defend_cmd->add_option("--seed", seed, "Seed used to train the model (fixes the split)");
  defend_cmd->add_option("--out", model_out, "Output model JSON")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Print a summary of report.json and optionally re-emit tables");
  std::string report_path, report_dir;
  report_cmd->add_option("--input", report_path, "report.json")->required();
  report_cmd->add_option("--out", report_dir, "Directory to re-emit tables and plot data into");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline from a JSON config");
  std::string config_path, run_out;
  run_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
  run_cmd->add_option("--out", run_out, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*synth) {
      const auto g = compute("synth", synth_seed, [&] { return generate_synthetic(spec, synth_seed); });
      write_json(synth_out, to_json(g));
      std::cout << g.num_users() << " users, " << g.num_posts() << " posts, " << g.num_edges() << " edges\n";
    } else if (*ingest) {
      const auto g = load("ingest", [&] {
        std::optional<std::filesystem::path> features;
        if (!csv_features.empty()) features = csv_features;
        return load_graph_csv(csv_edges, csv_labels, features);
      });
      write_json(ingest_out, to_json(g));
      std::cout << g.num_users() << " users, " << g.num_posts() << " posts, " << g.num_edges() << " edges\n";
    } else if (*build_tree) {
      const auto g = load("graph", [&] { return graph_from_json(read_json(graph_path)); });
      const auto t = compute("tree", 0, [&] { return optimize_tree(g, height); });
      write_json(tree_out, to_json(g, t));
      std::cout << "entropy " << tree_entropy(g, t) << " bits (single layer " << one_dim_entropy(g) << "), height "
                << t.height() << ", " << t.size() << " nodes\n";
    } else if (*categorize_cmd) {
      const auto budgets = parse_budgets(budgets_text);
      const auto g = load("graph", [&] { return graph_from_json(read_json(graph_path)); });
      const auto t = load("tree", [&] { return tree_from_json(g, read_json(tree_path)); });
      const auto groups = compute("categorize", seed, [&] { return categorize(g, t, c, budgets, seed); });
      write_json(groups_out, to_json(g, groups));
      for (AgentKind k : kAgentKinds) {
        std::cout << to_string(k) << ": " << groups.members(k).size() << " accounts, influence "
                  << groups.influence_sum(k) << "\n";
      }
    } else if (*train_cmd) {
      const auto g = load("graph", [&] { return graph_from_json(read_json(graph_path)); });
      const auto trained = compute("train", seed, [&] { return train(g, hp, seed); });
      write_json(model_out, to_json(trained.model));
      std::cout << "test accuracy " << trained.report.test_accuracy << ", F1 " << trained.report.test_f1
                << ", final loss " << (trained.report.losses.empty() ? 0.0 : trained.report.losses.back()) << "\n";
    } else if (*attack_cmd) {
      if (t_max >= 0) acfg.t_max = t_max;
      acfg.strategies = parse_strategies(strategies);
      const auto g = load("graph", [&] { return graph_from_json(read_json(graph_path)); });
      const auto t = load("tree", [&] { return tree_from_json(g, read_json(tree_path)); });
      const auto groups = load("groups", [&] { return groups_from_json(g, read_json(groups_path)); });
      const auto model = load("model", [&] {
        auto m = model_from_json(read_json(model_path));
        m.freeze();
        return std::make_shared<const DetectorModel>(std::move(m));
      });
      const BlackBox box(model);
      const auto targets = read_targets(g, targets_path);
      const auto result = compute("attack", seed, [&] {
        if (baseline.empty()) return run_attack(g, t, groups, box, targets, acfg, seed);
        const auto kind = baseline == "random" ? BaselineKind::Random : BaselineKind::Dice;
        return baseline_attack(kind, g, groups, box, targets, acfg.t_max, seed);
      });
      write_json(episodes_out, to_json(g, result));
      std::cout << "success rate " << result.success_rate << " over " << targets.size() << " targets\n";
    } else if (*defend_cmd) {
      const auto g = load("graph", [&] { return graph_from_json(read_json(graph_path)); });
      const auto model = load("model", [&] { return model_from_json(read_json(model_path)); });
      const auto edges = load("episodes", [&] { return manipulated_edges_from_json(g, read_json(episodes_path)); });
      Hyperparams rh = model.hyperparams();
      rh.epochs = refine_epochs;
      const auto refined = compute("refine", seed, [&] { return refine_with_attacks(model, g, edges, rh, seed); });
      write_json(model_out, to_json(refined));
      const auto split = split_posts(g, seed);
      const BlackBox box(std::make_shared<const DetectorModel>(refined));
      const auto ev = evaluate(box.predict_all(g), g, split.test);
      std::cout << "refined on " << edges.size() << " edges, clean test accuracy " << ev.accuracy << "\n";
    } else if (*report_cmd) {
      const auto report = load("report", [&] { return report_from_json(read_json(report_path)); });
      print_summary(report);
      if (!report_dir.empty()) emit_report(report, report_dir);
    } else if (*run_cmd) {
      auto cfg = load("config", [&] { return config_from_json(read_json(config_path)); });
      if (!run_out.empty()) cfg.output_dir = run_out;
      const auto report = run_experiment(cfg);
      emit_report(report, cfg.output_dir);
      print_summary(report);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const PhaseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPhaseExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPhaseExit;
  }
  return 0;
}
