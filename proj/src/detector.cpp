#include "strata/detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace strata {
namespace {

constexpr double kClamp = 1e-7;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool predicted_fake(double probability) { return probability > 0.5; }

void check_dim(const DetectorModel& model, const BipartiteGraph& g) {
  if (model.dim() != g.feature_dim()) {
    throw Error("feature dimension mismatch: model expects " + std::to_string(model.dim()) +
                ", graph has " + std::to_string(g.feature_dim()));
  }
}

// Hidden activations and output probability for one input.
struct Pass {
  std::vector<double> h;
  double probability = 0.0;
};

Pass run(const Parameters& p, std::span<const double> z) {
  Pass out;
  out.h.resize(p.hidden);
  double o = p.b2;
  const std::size_t width = 2 * p.dim;
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double s = p.b1[j];
    const double* row = p.w1.data() + j * width;
    for (std::size_t i = 0; i < width; ++i) s += row[i] * z[i];
    out.h[j] = std::tanh(s);
    o += p.w2[j] * out.h[j];
  }
  out.probability = sigmoid(o);
  return out;
}

std::vector<std::vector<double>> all_inputs(const BipartiteGraph& g) {
  std::vector<std::vector<double>> zs(g.num_posts());
  for (Index p = 0; p < g.num_posts(); ++p) zs[p] = post_input(g, PostIndex{p});
  return zs;
}

// Gradient of the summed clamped cross-entropy over `posts`, flattened.
std::vector<double> gradient(const Parameters& p, const std::vector<std::vector<double>>& zs,
                             const BipartiteGraph& g, std::span<const PostIndex> posts) {
  const std::size_t width = 2 * p.dim;
  std::vector<double> grad(p.size(), 0.0);
  double* gw1 = grad.data();
  double* gb1 = gw1 + p.w1.size();
  double* gw2 = gb1 + p.b1.size();
  double* gb2 = gw2 + p.w2.size();
  for (PostIndex post : posts) {
    const auto& z = zs[post.value];
    const Pass pass = run(p, z);
    // The clamp is flat outside [kClamp, 1 - kClamp].
    if (pass.probability < kClamp || pass.probability > 1.0 - kClamp) continue;
    const double y = g.label(post) == Label::Fake ? 1.0 : 0.0;
    const double delta = pass.probability - y;
    *gb2 += delta;
    for (std::size_t j = 0; j < p.hidden; ++j) {
      gw2[j] += delta * pass.h[j];
      const double dh = delta * p.w2[j] * (1.0 - pass.h[j] * pass.h[j]);
      gb1[j] += dh;
      double* row = gw1 + j * width;
      for (std::size_t i = 0; i < width; ++i) row[i] += dh * z[i];
    }
  }
  return grad;
}

double summed_loss(const Parameters& p, const std::vector<std::vector<double>>& zs, const BipartiteGraph& g,
                   std::span<const PostIndex> posts) {
  double loss = 0.0;
  for (PostIndex post : posts) {
    const double q = std::clamp(run(p, zs[post.value]).probability, kClamp, 1.0 - kClamp);
    loss -= g.label(post) == Label::Fake ? std::log(q) : std::log(1.0 - q);
  }
  return loss;
}

// Plain gradient descent on mean cross-entropy plus L2 on the weight matrices.
void descend(Parameters& p, const Hyperparams& hp, const BipartiteGraph& g,
             std::span<const PostIndex> train_posts, std::vector<double>* losses) {
  const auto zs = all_inputs(g);
  const double scale = 1.0 / static_cast<double>(train_posts.size());
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    if (losses) losses->push_back(summed_loss(p, zs, g, train_posts) * scale);
    auto grad = gradient(p, zs, g, train_posts);
    auto flat = p.flatten();
    const std::size_t b1_start = p.w1.size();
    const std::size_t w2_start = b1_start + p.b1.size();
    const std::size_t w2_end = w2_start + p.w2.size();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      double step = grad[i] * scale;
      const bool is_weight = i < b1_start || (i >= w2_start && i < w2_end);
      if (is_weight) step += hp.weight_decay * flat[i];
      flat[i] -= hp.learning_rate * step;
    }
    p.assign(flat);
  }
}

}  // namespace

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.push_back(b2);
  return flat;
}

void Parameters::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw Error("parameter vector has the wrong length");
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += static_cast<long>(w1.size());
  std::copy_n(it, b1.size(), b1.begin());
  it += static_cast<long>(b1.size());
  std::copy_n(it, w2.size(), w2.begin());
  it += static_cast<long>(w2.size());
  b2 = *it;
}

PostSplit split_posts(const BipartiteGraph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PostSplit split;
  for (Label label : {Label::Fake, Label::Real}) {
    std::vector<PostIndex> posts;
    for (Index p = 0; p < g.num_posts(); ++p) {
      if (g.label(PostIndex{p}) == label) posts.push_back(PostIndex{p});
    }
    std::shuffle(posts.begin(), posts.end(), rng);
    const auto n = static_cast<double>(posts.size());
    const auto n_train = static_cast<std::size_t>(std::lround(0.6 * n));
    const auto n_val = static_cast<std::size_t>(std::lround(0.2 * n));
    for (std::size_t i = 0; i < posts.size(); ++i) {
      auto& bucket = i < n_train ? split.train : i < n_train + n_val ? split.validation : split.test;
      bucket.push_back(posts[i]);
    }
  }
  for (auto* part : {&split.train, &split.validation, &split.test}) std::sort(part->begin(), part->end());
  return split;
}

DetectorModel::DetectorModel(Parameters params, Hyperparams hp, bool frozen)
    : params_(std::move(params)), hp_(hp), frozen_(frozen) {
  const std::size_t width = 2 * params_.dim;
  if (params_.w1.size() != params_.hidden * width || params_.b1.size() != params_.hidden ||
      params_.w2.size() != params_.hidden) {
    throw Error("detector parameter shapes are inconsistent");
  }
}

DetectorModel DetectorModel::initialize(std::size_t dim, const Hyperparams& hp, std::uint64_t seed) {
  if (hp.hidden < 1) throw Error("hidden width must be positive");
  if (dim == 0) throw Error("feature dimension must be positive");
  std::mt19937_64 rng(seed);
  Parameters p;
  p.dim = dim;
  p.hidden = static_cast<std::size_t>(hp.hidden);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(2 * dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(p.hidden));
  std::uniform_real_distribution<double> first(-a1, a1), second(-a2, a2);
  p.w1.resize(p.hidden * 2 * dim);
  for (auto& w : p.w1) w = first(rng);
  p.b1.resize(p.hidden);
  for (auto& b : p.b1) b = first(rng);
  p.w2.resize(p.hidden);
  for (auto& w : p.w2) w = second(rng);
  p.b2 = second(rng);
  return DetectorModel(std::move(p), hp);
}

DetectorModel DetectorModel::thaw() const { return DetectorModel(params_, hp_, false); }

const Parameters& DetectorModel::params() const {
  if (frozen_) throw Error("black-box model: parameters are not accessible");
  return params_;
}

Parameters& DetectorModel::params() {
  if (frozen_) throw Error("black-box model: parameters are not accessible");
  return params_;
}

double DetectorModel::score(std::span<const double> z) const {
  if (z.size() != 2 * params_.dim) throw Error("feature dimension mismatch");
  return run(params_, z).probability;
}

std::vector<double> post_input(const BipartiteGraph& g, PostIndex p) {
  const std::size_t d = g.feature_dim();
  std::vector<double> z(2 * d, 0.0);
  const Vertex pv = g.vertex_of(p);
  const double dp = g.degree(pv);
  if (dp > 0.0) {
    for (Index id : g.incident(pv)) {
      const Edge& e = g.edges()[id];
      const double du = g.degree(e.user);
      const double coef = e.weight / std::sqrt(dp * du);
      const auto x = g.user_feature(e.user);
      for (std::size_t i = 0; i < d; ++i) z[i] += coef * x[i];
    }
  }
  const auto self = g.post_feature(p);
  std::copy(self.begin(), self.end(), z.begin() + static_cast<long>(d));
  return z;
}

std::vector<double> forward(const DetectorModel& model, const BipartiteGraph& g) {
  check_dim(model, g);
  const Parameters& p = model.params();
  std::vector<double> out(g.num_posts());
  for (Index i = 0; i < g.num_posts(); ++i) out[i] = run(p, post_input(g, PostIndex{i})).probability;
  return out;
}

double ce_loss(std::span<const double> probabilities, std::span<const Label> labels) {
  if (probabilities.empty()) throw Error("cross-entropy over an empty post set");
  if (probabilities.size() != labels.size()) throw Error("probability and label counts differ");
  double loss = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double q = std::clamp(probabilities[i], kClamp, 1.0 - kClamp);
    loss -= labels[i] == Label::Fake ? std::log(q) : std::log(1.0 - q);
  }
  return loss;
}

double ce_loss(const DetectorModel& model, const BipartiteGraph& g, std::span<const PostIndex> posts) {
  if (posts.empty()) throw Error("cross-entropy over an empty post set");
  check_dim(model, g);
  const Parameters& p = model.params();
  std::vector<double> probs;
  std::vector<Label> labels;
  for (PostIndex post : posts) {
    probs.push_back(run(p, post_input(g, post)).probability);
    labels.push_back(g.label(post));
  }
  return ce_loss(probs, labels);
}

std::vector<double> ce_gradient(const DetectorModel& model, const BipartiteGraph& g,
                                std::span<const PostIndex> posts) {
  if (posts.empty()) throw Error("cross-entropy over an empty post set");
  check_dim(model, g);
  return gradient(model.params(), all_inputs(g), g, posts);
}

Evaluation evaluate(const std::vector<double>& probabilities, const BipartiteGraph& g,
                    std::span<const PostIndex> posts) {
  Evaluation ev;
  if (posts.empty()) return ev;
  std::size_t correct = 0, tp = 0, fp = 0, fn = 0;
  for (PostIndex post : posts) {
    const bool fake = g.label(post) == Label::Fake;
    const bool guess = predicted_fake(probabilities.at(post.value));
    correct += fake == guess;
    tp += fake && guess;
    fp += !fake && guess;
    fn += fake && !guess;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(posts.size());
  const std::size_t denom = 2 * tp + fp + fn;
  ev.f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  return ev;
}

Trained train(const BipartiteGraph& g, const Hyperparams& hp, std::uint64_t seed) {
  if (hp.epochs < 0) throw Error("epoch count must be nonnegative");
  PostSplit split = split_posts(g, seed);
  std::size_t fake = 0;
  for (PostIndex p : split.train) fake += g.label(p) == Label::Fake;
  if (fake < 2 || split.train.size() - fake < 2) {
    throw Error("degenerate labels: need at least two training posts per class");
  }

  Trained out;
  out.model = DetectorModel::initialize(g.feature_dim(), hp, seed ^ 0x9e3779b97f4a7c15ULL);
  descend(out.model.params(), hp, g, split.train, &out.report.losses);

  const auto probs = forward(out.model, g);
  const auto test = evaluate(probs, g, split.test);
  out.report.test_accuracy = test.accuracy;
  out.report.test_f1 = test.f1;
  out.report.validation_accuracy = evaluate(probs, g, split.validation).accuracy;
  out.report.split = std::move(split);
  out.model.freeze();
  return out;
}

DetectorModel refine_with_attacks(const DetectorModel& model, const BipartiteGraph& g,
                                  std::span<const Edge> manipulated, const Hyperparams& hp,
                                  std::uint64_t seed) {
  BipartiteGraph enriched = g;
  for (const Edge& e : manipulated) {
    if (enriched.has_edge(e.user, e.post)) {
      throw Error("manipulated edge (" + g.user_name(e.user) + ", " + g.post_name(e.post) +
                  ") already in the graph");
    }
    enriched.add_edge(e.user, e.post);
  }
  DetectorModel refined = model.thaw();
  check_dim(refined, enriched);
  const PostSplit split = split_posts(g, seed);
  descend(refined.params(), hp, enriched, split.train, nullptr);
  refined.freeze();
  return refined;
}

BlackBox::BlackBox(std::shared_ptr<const DetectorModel> model) : model_(std::move(model)) {
  if (!model_) throw Error("black box needs a model");
  if (!model_->frozen()) throw Error("black-box queries require a frozen model");
}

double BlackBox::predict_proba(const BipartiteGraph& g, PostIndex p) const {
  if (g.feature_dim() != model_->dim()) throw Error("feature dimension mismatch");
  if (p.value >= g.num_posts()) throw Error("unknown post #" + std::to_string(p.value));
  return model_->score(post_input(g, p));
}

std::vector<double> BlackBox::predict_all(const BipartiteGraph& g) const {
  std::vector<double> out(g.num_posts());
  for (Index p = 0; p < g.num_posts(); ++p) out[p] = predict_proba(g, PostIndex{p});
  return out;
}

bool BlackBox::misclassified(const BipartiteGraph& g, PostIndex p) const {
  return predicted_fake(predict_proba(g, p)) != (g.label(p) == Label::Fake);
}

}  // namespace strata
