#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "strata/experiment.hpp"

using namespace strata;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("strata_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dataset.spec.users_per_community = 40;
  cfg.dataset.spec.posts_per_community = 12;
  cfg.dataset.spec.p_intra = 0.2;
  cfg.budgets = Budgets{6, 3, 2};
  cfg.detector.epochs = 80;
  cfg.refine_epochs = 20;
  cfg.attack.episodes = 4;
  cfg.max_targets = 3;
  cfg.height_sweep = {2};
  cfg.seeds = {1, 2};
  return cfg;
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
  auto cfg = small_config();
  cfg.level = 1;
  cfg.attack.strategies.feedback = false;
  const auto back = config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.attack.level == 1);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(config_from_json(Json{{"heigth", 3}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"attack", {{"episodes", 3}, {"epislon", 1}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"height", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"height", 3}, {"level", 3}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"height", "three"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"budgets", {{"bots", 0}, {"cyborgs", 0}, {"workers", 0}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"attack", {{"gamma", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(
      config_from_json(Json{{"attack", {{"strategies", {{"direct", false}, {"indirect", false}, {"feedback", false}}}}}}),
      ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"dataset", {{"type", "parquet"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"dataset", {{"type", "csv"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"seeds", Json::array()}}), ConfigError);
  CHECK_NOTHROW(config_from_json(Json::object()));
}

TEST_CASE("sign test tail probabilities") {
  CHECK(sign_test_p(0, 0) == 1.0);
  CHECK(sign_test_p(5, 0) == doctest::Approx(1.0 / 32));
  CHECK(sign_test_p(3, 2) == doctest::Approx(16.0 / 32));
  CHECK(sign_test_p(0, 4) == doctest::Approx(1.0));
}

TEST_CASE("phase seeds differ by phase and root") {
  CHECK(phase_seed(1, "graph") != phase_seed(1, "detector"));
  CHECK(phase_seed(1, "graph") != phase_seed(2, "graph"));
}

TEST_CASE("experiment produces a complete, reproducible report") {
  const auto cfg = small_config();
  const auto report = run_experiment(cfg);
  REQUIRE(report.seeds.size() == 2);
  for (const auto& s : report.seeds) {
    CHECK(s.targets <= 3);
    CHECK(s.tree_entropy <= s.one_dim_entropy + 1e-9);
    for (const char* key : {"si2af/clean", "random/clean", "dice/clean", "si2af_direct/clean", "si2af_indirect/clean",
                            "si2af_feedback/clean", "si2af/refined"}) {
      REQUIRE(s.success.contains(key));
      CHECK(s.success.at(key) >= 0.0);
      CHECK(s.success.at(key) <= 1.0);
    }
    CHECK(s.height_sweep.contains(2));
    CHECK(s.reward_curve.size() == 4);
  }
  CHECK(report.success.contains("si2af/clean"));
  CHECK(report.dice_sign_p <= 1.0);

  const auto a = scratch("report_a"), b = scratch("report_b");
  emit_report(report, a);
  emit_report(run_experiment(cfg), b);
  for (const char* file : {"report.json", "config.json", "success_rates.csv", "prob_shift.csv",
                           "plots/success_si2af_clean.dat", "plots/reward_curve.dat", "plots/height_sweep.dat"}) {
    REQUIRE(std::filesystem::exists(a / file));
    CHECK(slurp(a / file) == slurp(b / file));
  }
  CHECK(std::filesystem::exists(a / "timings.json"));

  const auto reread = report_from_json(read_json(a / "report.json"));
  CHECK(to_json(reread) == to_json(report));
}

TEST_CASE("phase failures name the phase and seed") {
  auto cfg = small_config();
  cfg.seeds = {9};
  cfg.dataset.spec.fake_fraction = 0.0;  // no fake posts leaves the detector nothing to learn
  try {
    run_experiment(cfg);
    FAIL("expected a phase error");
  } catch (const PhaseError& e) {
    CHECK(e.phase == "train");
    CHECK(e.seed == 9);
  }
}
