#include "dialseg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "dialseg/coherence.hpp"
#include "dialseg/parallel.hpp"
#include "dialseg/pipeline.hpp"
#include "dialseg/relevance.hpp"
#include "dialseg/similarity.hpp"

namespace dialseg {

void TrainConfig::validate() const {
  if (!(margin > 0.0)) throw InvalidArgument("margin must be > 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning rate must be finite and >= 0");
  }
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (refresh_pseudo_every < 1) throw InvalidArgument("refresh interval must be >= 1");
  if (!(num_weight >= 0.0) || !(rm_weight >= 0.0)) {
    throw InvalidArgument("loss weights must be >= 0");
  }
  if (neighbor_window < 1) throw InvalidArgument("neighbor window w must be >= 1");
  if (topic_dimension < 1) throw InvalidArgument("topic dimension must be >= 1");
  if (rm_per_interval < 1) throw InvalidArgument("fragments per interval must be >= 1");
  tiling.validate();
}

TrainingCorpus TrainingCorpus::embed(const std::vector<Dialogue>& corpus,
                                     const EmbeddingProvider& provider, int jobs) {
  TrainingCorpus out;
  out.ids.reserve(corpus.size());
  for (const auto& d : corpus) out.ids.push_back(d.id());
  out.base.resize(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t d) { out.base[d] = provider.embed(corpus[d]); });
  return out;
}

double num_loss(const Eigen::VectorXd& anchor, const Eigen::MatrixXd& positives,
                const Eigen::MatrixXd& negatives, double margin) {
  if (positives.cols() == 0 || negatives.cols() == 0) {
    throw InvalidArgument("NUM loss needs at least one positive and one negative");
  }
  double sum = 0.0;
  for (Eigen::Index p = 0; p < positives.cols(); ++p) {
    const double pos = cosine(anchor, positives.col(p));
    for (Eigen::Index q = 0; q < negatives.cols(); ++q) {
      sum += std::max(0.0, margin + cosine(anchor, negatives.col(q)) - pos);
    }
  }
  return sum / static_cast<double>(positives.cols() * negatives.cols());
}

double rm_loss(double r_plus, double r_minus, double margin) {
  return std::max(0.0, margin + r_minus - r_plus);
}

double total_loss(std::span<const double> num_terms, std::span<const double> rm_terms,
                  const TrainConfig& config) {
  if (num_terms.empty() && rm_terms.empty()) {
    throw InvalidArgument("total loss needs at least one NUM or RM term");
  }
  auto mean = [](std::span<const double> xs) {
    return xs.empty() ? 0.0
                      : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };
  double loss = 0.0;
  if (!num_terms.empty()) loss += config.num_weight * mean(num_terms);
  if (!rm_terms.empty()) loss += config.rm_weight * mean(rm_terms);
  return loss;
}

HeadGradients HeadGradients::zero_like(const Heads& heads) {
  return {Eigen::MatrixXd::Zero(heads.projection.weight.rows(), heads.projection.weight.cols()),
          Eigen::VectorXd::Zero(heads.projection.bias.size()),
          Eigen::MatrixXd::Zero(heads.coherence.M.rows(), heads.coherence.M.cols())};
}

bool HeadGradients::is_zero() const {
  return weight.isZero(0.0) && bias.isZero(0.0) && M.isZero(0.0);
}

namespace {

using UtteranceKey = std::pair<std::size_t, int>;  // (dialogue, 1-based utterance)

class TopicCache {
public:
  TopicCache(const ProjectionHeadd& head, const TrainingCorpus& corpus)
      : head_(head), corpus_(corpus) {}

  const Eigen::VectorXd& operator()(std::size_t dialogue, int utterance) {
    auto [it, inserted] = cache_.try_emplace({dialogue, utterance});
    if (inserted) it->second = project(head_, corpus_.base[dialogue].col(utterance - 1));
    return it->second;
  }

private:
  const ProjectionHeadd& head_;
  const TrainingCorpus& corpus_;
  std::map<UtteranceKey, Eigen::VectorXd> cache_;
};

// Accumulates dL/dh per utterance, then folds into dW and db.
class TopicGradient {
public:
  void add(std::size_t dialogue, int utterance, const Eigen::VectorXd& g) {
    auto [it, inserted] = grads_.try_emplace({dialogue, utterance});
    if (inserted) {
      it->second = g;
    } else {
      it->second += g;
    }
  }

  void fold_into(HeadGradients& out, const TrainingCorpus& corpus) const {
    for (const auto& [key, g] : grads_) {
      out.weight.noalias() += g * corpus.base[key.first].col(key.second - 1).transpose();
      out.bias += g;
    }
  }

private:
  std::map<UtteranceKey, Eigen::VectorXd> grads_;
};

std::string sample_name(const TrainingCorpus& corpus, std::size_t dialogue, const char* what, int index) {
  return "'" + corpus.ids[dialogue] + "' " + what + " " + std::to_string(index);
}

}  // namespace

BatchEvaluation evaluate_batch(const Heads& heads, const TrainingCorpus& corpus,
                               std::span<const NumSample> num, std::span<const RmFragmentPair> rm,
                               const TrainConfig& config, bool with_gradient) {
  heads.validate();
  if (!corpus.base.empty() && corpus.base_dimension() != heads.base_dimension()) {
    throw InvalidArgument("heads expect d_base " + std::to_string(heads.base_dimension()) +
                          ", corpus embeddings have " + std::to_string(corpus.base_dimension()));
  }
  const double eta = config.margin;
  TopicCache topic(heads.projection, corpus);
  TopicGradient topic_grad;
  BatchEvaluation out;
  if (with_gradient) out.gradient = HeadGradients::zero_like(heads);

  const double num_scale = num.empty() ? 0.0 : config.num_weight / static_cast<double>(num.size());
  for (const auto& sample : num) {
    const auto& pairs = sample.pairs;
    const std::size_t d = sample.dialogue;
    if (pairs.positives.empty() || pairs.negatives.empty()) {
      throw InvalidArgument("NUM sample " + sample_name(corpus, d, "anchor", pairs.anchor) +
                            " has an empty positive or negative set");
    }
    const Eigen::VectorXd h_anchor = topic(d, pairs.anchor);
    std::vector<CosineGradient<double>> pos, neg;
    for (int p : pairs.positives) pos.push_back(cosine_with_gradient(h_anchor, topic(d, p)));
    for (int q : pairs.negatives) neg.push_back(cosine_with_gradient(h_anchor, topic(d, q)));

    // Net count of active hinges each cosine takes part in, with sign.
    std::vector<double> pos_coef(pos.size(), 0.0), neg_coef(neg.size(), 0.0);
    double sum = 0.0;
    for (std::size_t a = 0; a < pos.size(); ++a) {
      for (std::size_t b = 0; b < neg.size(); ++b) {
        const double arg = eta + neg[b].value - pos[a].value;
        if (arg > 0.0) {
          sum += arg;
          pos_coef[a] -= 1.0;
          neg_coef[b] += 1.0;
        }
      }
    }
    const double pair_count = static_cast<double>(pos.size() * neg.size());
    const double term = sum / pair_count;
    if (!std::isfinite(term)) {
      throw NumericError("non-finite NUM loss at " + sample_name(corpus, d, "anchor", pairs.anchor));
    }
    out.num_terms.push_back(term);
    if (!with_gradient || sum == 0.0) continue;

    const double scale = num_scale / pair_count;
    Eigen::VectorXd g_anchor = Eigen::VectorXd::Zero(h_anchor.size());
    for (std::size_t a = 0; a < pos.size(); ++a) {
      if (pos_coef[a] == 0.0) continue;
      g_anchor += scale * pos_coef[a] * pos[a].d_a;
      topic_grad.add(d, pairs.positives[a], scale * pos_coef[a] * pos[a].d_b);
    }
    for (std::size_t b = 0; b < neg.size(); ++b) {
      if (neg_coef[b] == 0.0) continue;
      g_anchor += scale * neg_coef[b] * neg[b].d_a;
      topic_grad.add(d, pairs.negatives[b], scale * neg_coef[b] * neg[b].d_b);
    }
    topic_grad.add(d, pairs.anchor, g_anchor);
  }

  const double rm_scale = rm.empty() ? 0.0 : config.rm_weight / static_cast<double>(rm.size());
  for (const auto& f : rm) {
    const std::size_t d = f.dialogue;
    const std::size_t sd = f.synthetic_dialogue;
    const int i = f.interval;
    const int a = f.synthetic_start;
    const BaseMatrix& base = corpus.base[d];
    const BaseMatrix& donor = corpus.base[sd];
    if (i < 2 || i + 2 > base.cols() || a < 1 || a + 1 > donor.cols()) {
      throw InvalidArgument("RM fragment " + sample_name(corpus, d, "interval", i) +
                            " does not fit its dialogues");
    }

    CosineGradient<double> real{0.0, {}, {}}, fake{0.0, {}, {}};
    if (config.use_topic) {
      const Eigen::VectorXd left = (topic(d, i - 1) + topic(d, i)) / 2.0;
      const Eigen::VectorXd right_real = (topic(d, i + 1) + topic(d, i + 2)) / 2.0;
      const Eigen::VectorXd right_fake = (topic(sd, a) + topic(sd, a + 1)) / 2.0;
      real = cosine_with_gradient(left, right_real);
      fake = cosine_with_gradient(left, right_fake);
    }
    const Eigen::VectorXd ctx = coherence_context(base, i);
    const double t_real = std::tanh(coherence_raw(heads.coherence, ctx, base.col(i)));
    const double t_fake = std::tanh(coherence_raw(heads.coherence, ctx, donor.col(a - 1)));
    const double r_plus = real.value + t_real;
    const double r_minus = fake.value + t_fake;
    const double arg = eta + r_minus - r_plus;
    const double term = std::max(0.0, arg);
    if (!std::isfinite(term)) {
      throw NumericError("non-finite RM loss at " + sample_name(corpus, d, "interval", i));
    }
    out.rm_terms.push_back(term);
    if (!with_gradient || !(arg > 0.0)) continue;

    const double s = rm_scale;
    if (config.use_topic) {
      const Eigen::VectorXd g_left = s * fake.d_a - s * real.d_a;
      topic_grad.add(d, i - 1, g_left / 2.0);
      topic_grad.add(d, i, g_left / 2.0);
      const Eigen::VectorXd g_real = -s * real.d_b / 2.0;
      topic_grad.add(d, i + 1, g_real);
      topic_grad.add(d, i + 2, g_real);
      const Eigen::VectorXd g_fake = s * fake.d_b / 2.0;
      topic_grad.add(sd, a, g_fake);
      topic_grad.add(sd, a + 1, g_fake);
    }
    // d tanh(ctx' M resp) / dM = (1 - tanh^2) ctx resp'
    out.gradient.M.noalias() += (s * (1.0 - t_fake * t_fake)) * ctx * donor.col(a - 1).transpose();
    out.gradient.M.noalias() -= (s * (1.0 - t_real * t_real)) * ctx * base.col(i).transpose();
  }

  out.loss = total_loss(out.num_terms, out.rm_terms, config);
  out.num_mean = out.num_terms.empty()
                     ? 0.0
                     : std::accumulate(out.num_terms.begin(), out.num_terms.end(), 0.0) /
                           static_cast<double>(out.num_terms.size());
  out.rm_mean = out.rm_terms.empty()
                    ? 0.0
                    : std::accumulate(out.rm_terms.begin(), out.rm_terms.end(), 0.0) /
                          static_cast<double>(out.rm_terms.size());
  if (with_gradient) topic_grad.fold_into(out.gradient, corpus);
  return out;
}

std::size_t parameter_count(const Heads& heads) {
  return static_cast<std::size_t>(heads.projection.weight.size() + heads.projection.bias.size() +
                                  heads.coherence.M.size());
}

double& parameter(Heads& heads, std::size_t index) {
  auto k = static_cast<Eigen::Index>(index);
  if (k < heads.projection.weight.size()) return heads.projection.weight.data()[k];
  k -= heads.projection.weight.size();
  if (k < heads.projection.bias.size()) return heads.projection.bias.data()[k];
  k -= heads.projection.bias.size();
  if (k < heads.coherence.M.size()) return heads.coherence.M.data()[k];
  throw InvalidArgument("parameter index " + std::to_string(index) + " out of range");
}

double parameter_gradient(const HeadGradients& gradient, std::size_t index) {
  auto k = static_cast<Eigen::Index>(index);
  if (k < gradient.weight.size()) return gradient.weight.data()[k];
  k -= gradient.weight.size();
  if (k < gradient.bias.size()) return gradient.bias.data()[k];
  k -= gradient.bias.size();
  if (k < gradient.M.size()) return gradient.M.data()[k];
  throw InvalidArgument("parameter index " + std::to_string(index) + " out of range");
}

std::string parameter_name(const Heads& heads, std::size_t index) {
  auto k = static_cast<Eigen::Index>(index);
  const auto& w = heads.projection.weight;
  if (k < w.size()) {
    return "weight(" + std::to_string(k % w.rows()) + "," + std::to_string(k / w.rows()) + ")";
  }
  k -= w.size();
  if (k < heads.projection.bias.size()) return "bias(" + std::to_string(k) + ")";
  k -= heads.projection.bias.size();
  const auto& m = heads.coherence.M;
  return "M(" + std::to_string(k % m.rows()) + "," + std::to_string(k / m.rows()) + ")";
}

const char* to_string(GradientCheck status) {
  switch (status) {
    case GradientCheck::Skipped: return "skipped";
    case GradientCheck::Passed: return "passed";
    case GradientCheck::Failed: return "failed";
  }
  return "unknown";
}

std::vector<Segmentation> pseudo_segment(const Heads& heads, const TrainingCorpus& corpus,
                                         const TrainConfig& config) {
  const PipelineConfig pipeline{config.tiling, config.use_topic};
  std::vector<Segmentation> out(corpus.base.size());
  parallel_for(corpus.base.size(), config.jobs, [&](std::size_t d) {
    const BaseMatrix& base = corpus.base[d];
    const Eigen::VectorXd coherence = coherence_series(heads.coherence, base);
    out[d] = analyze(base, &heads.projection, coherence, pipeline).segmentation;
  });
  return out;
}

std::vector<NumSample> mine_num_samples(const TrainingCorpus& corpus,
                                        const std::vector<Segmentation>& pseudo,
                                        const TrainConfig& config) {
  std::vector<NumSample> out;
  for (std::size_t d = 0; d < corpus.base.size(); ++d) {
    const int n = static_cast<int>(corpus.base[d].cols());
    auto pairs = config.use_pseudo ? refined_pairs(n, config.neighbor_window, pseudo.at(d))
                                   : neighbor_pairs(n, config.neighbor_window);
    for (auto& p : pairs) out.push_back({d, std::move(p)});
  }
  return out;
}

namespace {

// Spot-checks a few partials of one batch against central differences.
// Coordinates whose perturbation flips any hinge are inconclusive and skipped.
GradientCheck spot_check(const Heads& heads, const TrainingCorpus& corpus,
                         std::span<const NumSample> num, std::span<const RmFragmentPair> rm,
                         const TrainConfig& config, const BatchEvaluation& analytic,
                         std::uint64_t seed) {
  constexpr double kStep = 1e-5;
  constexpr double kTolerance = 1e-4;
  constexpr int kPerBlock = 3;
  std::mt19937_64 rng(seed);
  const auto w_size = static_cast<std::size_t>(heads.projection.weight.size());
  const auto b_size = static_cast<std::size_t>(heads.projection.bias.size());
  const auto m_size = static_cast<std::size_t>(heads.coherence.M.size());
  std::vector<std::size_t> coords;
  auto pick = [&](std::size_t offset, std::size_t size) {
    std::uniform_int_distribution<std::size_t> dist(0, size - 1);
    for (int k = 0; k < kPerBlock; ++k) coords.push_back(offset + dist(rng));
  };
  pick(0, w_size);
  pick(w_size, b_size);
  pick(w_size + b_size, m_size);

  auto active = [&](const BatchEvaluation& e) {
    std::vector<bool> pattern;
    for (double t : e.num_terms) pattern.push_back(t > 0.0);
    for (double t : e.rm_terms) pattern.push_back(t > 0.0);
    return pattern;
  };
  const auto base_pattern = active(analytic);

  bool any = false;
  Heads probe = heads;
  for (std::size_t c : coords) {
    const double original = parameter(probe, c);
    parameter(probe, c) = original + kStep;
    const auto plus = evaluate_batch(probe, corpus, num, rm, config, false);
    parameter(probe, c) = original - kStep;
    const auto minus = evaluate_batch(probe, corpus, num, rm, config, false);
    parameter(probe, c) = original;
    if (active(plus) != base_pattern || active(minus) != base_pattern) continue;
    const double numeric = (plus.loss - minus.loss) / (2.0 * kStep);
    const double exact = parameter_gradient(analytic.gradient, c);
    const double scale = std::max({std::abs(numeric), std::abs(exact), 1e-6});
    if (std::abs(numeric - exact) / scale >= kTolerance) return GradientCheck::Failed;
    any = true;
  }
  return any ? GradientCheck::Passed : GradientCheck::Skipped;
}

std::size_t count_boundaries(const std::vector<Segmentation>& segs) {
  std::size_t total = 0;
  for (const auto& s : segs) total += s.boundaries().size();
  return total;
}

}  // namespace

TrainResult train(const std::vector<Dialogue>& corpus, const EmbeddingProvider& provider,
                  const TrainConfig& config, std::optional<Heads> initial) {
  config.validate();
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");
  return train(corpus, TrainingCorpus::embed(corpus, provider, config.jobs), config,
               std::move(initial));
}

TrainResult train(const std::vector<Dialogue>& corpus, const TrainingCorpus& embedded,
                  const TrainConfig& config, std::optional<Heads> initial) {
  config.validate();
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");
  if (embedded.base.size() != corpus.size()) {
    throw InvalidArgument("embedded corpus does not match the dialogue corpus");
  }
  const Eigen::Index d_base = embedded.base_dimension();
  Heads heads = initial ? std::move(*initial)
                        : Heads::initialized(d_base, config.topic_dimension, config.seed);
  heads.validate();
  if (heads.base_dimension() != d_base) {
    throw InvalidArgument("initial heads expect d_base " + std::to_string(heads.base_dimension()) +
                          ", provider yields " + std::to_string(d_base));
  }

  std::vector<RmFragmentPair> fragments;
  if (config.rm_weight > 0.0) {
    fragments = rm_fragments(corpus, config.seed, {config.rm_per_interval, true});
  }

  TrainResult result{heads, {}};
  std::vector<NumSample> num_samples;
  std::size_t pseudo_boundaries = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch % config.refresh_pseudo_every == 0) {
      const auto pseudo = pseudo_segment(result.heads, embedded, config);
      pseudo_boundaries = count_boundaries(pseudo);
      num_samples = mine_num_samples(embedded, pseudo, config);
    }
    if (num_samples.empty() && fragments.empty()) {
      throw GenerationError("corpus yields neither NUM anchors nor RM fragments to train on");
    }

    EpochReport report;
    const auto snapshot = evaluate_batch(result.heads, embedded, num_samples, fragments, config, false);
    report.num_loss = snapshot.num_mean;
    report.rm_loss = snapshot.rm_mean;
    report.total_loss = snapshot.loss;
    report.num_anchors = num_samples.size();
    report.rm_fragments = fragments.size();
    report.pseudo_boundaries = pseudo_boundaries;

    // Interleave both sample kinds in one shuffled order; a zero-weighted kind
    // is left out so it does not dilute the batches.
    struct Slot {
      bool is_num;
      std::size_t index;
    };
    std::vector<Slot> order;
    if (config.num_weight > 0.0) {
      for (std::size_t k = 0; k < num_samples.size(); ++k) order.push_back({true, k});
    }
    for (std::size_t k = 0; k < fragments.size(); ++k) order.push_back({false, k});
    std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch + 1)));
    std::shuffle(order.begin(), order.end(), rng);

    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<NumSample> num_batch;
      std::vector<RmFragmentPair> rm_batch;
      for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) {
        if (order[k].is_num) {
          num_batch.push_back(num_samples[order[k].index]);
        } else {
          rm_batch.push_back(fragments[order[k].index]);
        }
      }
      const auto eval = evaluate_batch(result.heads, embedded, num_batch, rm_batch, config, true);
      if (start == 0 && config.gradient_check) {
        report.gradient_check = spot_check(result.heads, embedded, num_batch, rm_batch, config, eval,
                                           config.seed + static_cast<std::uint64_t>(epoch));
      }
      result.heads.projection.weight -= config.learning_rate * eval.gradient.weight;
      result.heads.projection.bias -= config.learning_rate * eval.gradient.bias;
      result.heads.coherence.M -= config.learning_rate * eval.gradient.M;
      if (!result.heads.all_finite()) {
        throw NumericError("parameters became non-finite in epoch " + std::to_string(epoch + 1) +
                           " at batch starting with sample " + std::to_string(start));
      }
    }
    result.report.epochs.push_back(report);
  }
  return result;
}

}  // namespace dialseg
