#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strata/attack.hpp"
#include "strata/detector.hpp"
#include "strata/graph.hpp"
#include "strata/influence.hpp"
#include "strata/serialization.hpp"

namespace strata {

/// Invalid or inconsistent configuration (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

/// A pipeline phase failed for one seed (CLI exit code 3).
struct PhaseError : Error {
  PhaseError(std::string phase, std::uint64_t seed, const std::string& what);
  std::string phase;
  std::uint64_t seed;
};

struct DatasetConfig {
  /// Synthetic graphs are regenerated per seed; CSV graphs are fixed.
  bool synthetic = true;
  SyntheticSpec spec;
  std::filesystem::path edges;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> features;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  int height = 3;             // K
  std::optional<int> level;   // k, defaults to K - 1
  double c = kDefaultInfluenceC;
  Budgets budgets{20, 10, 4};
  Hyperparams detector;
  int refine_epochs = 150;
  AttackConfig attack;
  bool baselines = true;
  bool ablation = true;
  bool defense = true;
  std::vector<int> height_sweep;     // extra K values to attack at
  std::size_t max_targets = 0;       // 0 keeps every fake post
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);

/// Seed for one phase of one run; each phase draws from its own stream.
std::uint64_t phase_seed(std::uint64_t root, const std::string& phase);

struct ProbShift {
  double fake_before = 0.0;  // mean fake probability over targets, clean graph
  double fake_after = 0.0;   // same targets, each after its own attack
  double real_before = 0.0;  // mean fake probability over real posts
  double real_after = 0.0;   // after all attack edges are applied together
};

struct SeedMetrics {
  std::uint64_t seed = 0;
  std::size_t users = 0, posts = 0, edges = 0, targets = 0;
  double one_dim_entropy = 0.0;
  double tree_entropy = 0.0;
  int tree_height = 0;
  double clean_accuracy = 0.0;
  double clean_f1 = 0.0;
  double refined_accuracy = 0.0;
  double refined_f1 = 0.0;
  /// Keyed "attack/phase", e.g. "si2af/clean", "dice/clean", "si2af/refined".
  std::map<std::string, double> success;
  std::map<std::string, ProbShift> shift;
  std::array<std::size_t, 3> strategy_actions{};
  std::optional<double> mean_first_success;
  std::vector<double> reward_curve;  // mean training reward per episode over targets
  std::map<int, double> height_sweep;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

struct MetricsReport {
  ExperimentConfig config;
  std::vector<SeedMetrics> seeds;
  std::map<std::string, Summary> success;  // "attack/phase"
  std::map<std::string, ProbShift> shift;  // means over seeds
  /// One-sided sign test of SI2AF over DICE on the clean model.
  std::size_t dice_wins = 0, dice_losses = 0;
  double dice_sign_p = 1.0;
  /// Share of seeds where the refined model lowered SI2AF success.
  double defense_win_share = 0.0;
  double max_accuracy_drop = 0.0;
  std::map<std::string, double> timings;  // seconds per phase, summed over seeds
};

MetricsReport run_experiment(const ExperimentConfig& config);

/// Attack names in report order.
std::vector<std::string> attack_rows(const MetricsReport& report);

/// Writes report.json, success_rates.csv, prob_shift.csv, plots/*.dat,
/// config.json and timings.json. Only timings.json varies between runs.
void emit_report(const MetricsReport& report, const std::filesystem::path& dir);

Json to_json(const MetricsReport& report);
MetricsReport report_from_json(const Json& j);

/// P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
double sign_test_p(std::size_t wins, std::size_t losses);

}  // namespace strata
