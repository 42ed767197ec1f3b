#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "strata/graph.hpp"

namespace strata {

struct Hyperparams {
  int hidden = 16;
  double learning_rate = 0.5;
  int epochs = 300;
  double weight_decay = 1e-4;
};

/// Trainable parameters of the one-layer aggregator. W1 is hidden x 2d,
/// row-major; its first d columns act on the aggregated neighbor features,
/// the last d on the post's own features.
struct Parameters {
  std::size_t dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  std::size_t size() const { return w1.size() + b1.size() + w2.size() + 1; }
  /// Flat view in the order w1, b1, w2, b2.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool operator==(const Parameters&) const = default;
};

/// Posts split 60/20/20 per label.
struct PostSplit {
  std::vector<PostIndex> train;
  std::vector<PostIndex> validation;
  std::vector<PostIndex> test;
};

PostSplit split_posts(const BipartiteGraph& g, std::uint64_t seed);

/// Owner-side handle on the classifier. Once frozen, parameter access throws;
/// attackers see the model only through BlackBox.
class DetectorModel {
 public:
  DetectorModel() = default;
  DetectorModel(Parameters params, Hyperparams hp, bool frozen = false);

  /// Uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static DetectorModel initialize(std::size_t dim, const Hyperparams& hp, std::uint64_t seed);

  const Hyperparams& hyperparams() const { return hp_; }
  std::size_t dim() const { return params_.dim; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }
  /// Unfrozen copy, for the model's owner (refinement, persistence).
  DetectorModel thaw() const;

  const Parameters& params() const;
  Parameters& params();

  /// Score of one post from precomputed inputs z = [a_p; x_p].
  double score(std::span<const double> z) const;

 private:
  Parameters params_;
  Hyperparams hp_;
  bool frozen_ = false;
};

/// z = [a_p; x_p] for one post, where a_p = sum_u w_up / sqrt(d_p d_u) x_u.
/// Posts without neighbors get a_p = 0.
std::vector<double> post_input(const BipartiteGraph& g, PostIndex p);

/// Fake probability of every post. Throws on a frozen model or a feature
/// dimension mismatch.
std::vector<double> forward(const DetectorModel& model, const BipartiteGraph& g);

/// Summed binary cross-entropy (natural log, probabilities clamped to
/// [1e-7, 1 - 1e-7]) over a post subset.
double ce_loss(const DetectorModel& model, const BipartiteGraph& g, std::span<const PostIndex> posts);
double ce_loss(std::span<const double> probabilities, std::span<const Label> labels);

/// Analytic gradient of ce_loss with respect to Parameters::flatten().
std::vector<double> ce_gradient(const DetectorModel& model, const BipartiteGraph& g,
                                std::span<const PostIndex> posts);

struct Evaluation {
  double accuracy = 0.0;
  double f1 = 0.0;  // fake is the positive class
};

Evaluation evaluate(const std::vector<double>& probabilities, const BipartiteGraph& g,
                    std::span<const PostIndex> posts);

struct TrainReport {
  std::vector<double> losses;  // mean training cross-entropy before each epoch's step
  double test_accuracy = 0.0;
  double test_f1 = 0.0;
  double validation_accuracy = 0.0;
  PostSplit split;
};

struct Trained {
  DetectorModel model;  // frozen
  TrainReport report;
};

/// Full-batch gradient descent on mean training cross-entropy plus
/// (weight_decay / 2) * |W|^2. Throws "degenerate labels" unless each class
/// has at least two training posts.
Trained train(const BipartiteGraph& g, const Hyperparams& hp, std::uint64_t seed);

/// Continues training on g plus the manipulated edges (weights from the
/// endpoint features), over the same training split. Returns a frozen model.
DetectorModel refine_with_attacks(const DetectorModel& model, const BipartiteGraph& g,
                                  std::span<const Edge> manipulated, const Hyperparams& hp,
                                  std::uint64_t seed);

/// Query-only view of a frozen model.
class BlackBox {
 public:
  explicit BlackBox(std::shared_ptr<const DetectorModel> model);

  double predict_proba(const BipartiteGraph& g, PostIndex p) const;
  std::vector<double> predict_all(const BipartiteGraph& g) const;
  bool misclassified(const BipartiteGraph& g, PostIndex p) const;

 private:
  std::shared_ptr<const DetectorModel> model_;
};

inline double predict_proba(const BlackBox& box, const BipartiteGraph& g, PostIndex p) {
  return box.predict_proba(g, p);
}

}  // namespace strata
