#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dialseg/dialogue.hpp"
#include "dialseg/embeddings.hpp"
#include "dialseg/heads.hpp"
#include "dialseg/selfsup.hpp"
#include "dialseg/texttiling.hpp"

namespace dialseg {

struct TrainConfig {
  double margin = 1.0;  // eta
  double learning_rate = 0.01;
  int epochs = 10;
  int batch_size = 32;
  int refresh_pseudo_every = 1;
  std::uint64_t seed = 0;
  double num_weight = 1.0;
  double rm_weight = 1.0;
  int neighbor_window = 5;  // w
  bool use_pseudo = true;   // false: NUM pairs from neighbor sets alone
  bool use_topic = true;    // false: coherence-only relevance
  Eigen::Index topic_dimension = 64;
  int rm_per_interval = 1;
  TilingConfig tiling;
  int jobs = 1;
  bool gradient_check = true;  // spot-check a few partials every epoch

  void validate() const;
};

// Base embeddings of a corpus, computed once since providers are frozen.
struct TrainingCorpus {
  std::vector<std::string> ids;
  std::vector<BaseMatrix> base;

  static TrainingCorpus embed(const std::vector<Dialogue>& corpus,
                              const EmbeddingProvider& provider, int jobs);
  Eigen::Index base_dimension() const { return base.empty() ? 0 : base.front().rows(); }
};

struct NumSample {
  std::size_t dialogue;
  NumAnchor pairs;
};

// Columns of `positives` / `negatives` are topic vectors. Mean over every
// (positive, negative) combination of the hinge
// max(0, eta + cos(anchor, neg) - cos(anchor, pos)).
double num_loss(const Eigen::VectorXd& anchor, const Eigen::MatrixXd& positives,
                const Eigen::MatrixXd& negatives, double margin);

double rm_loss(double r_plus, double r_minus, double margin);

// num_weight * mean(num_terms) + rm_weight * mean(rm_terms); an empty term
// contributes nothing.
double total_loss(std::span<const double> num_terms, std::span<const double> rm_terms,
                  const TrainConfig& config);

struct HeadGradients {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Eigen::MatrixXd M;

  static HeadGradients zero_like(const Heads& heads);
  bool is_zero() const;
};

struct BatchEvaluation {
  double loss = 0.0;
  double num_mean = 0.0;
  double rm_mean = 0.0;
  std::vector<double> num_terms;
  std::vector<double> rm_terms;
  HeadGradients gradient;  // empty unless requested
};

// Loss of one minibatch and, optionally, its analytic gradient. Hinges exactly
// at the margin count as inactive.
BatchEvaluation evaluate_batch(const Heads& heads, const TrainingCorpus& corpus,
                               std::span<const NumSample> num, std::span<const RmFragmentPair> rm,
                               const TrainConfig& config, bool with_gradient);

// Scalar views of every trainable parameter, in a fixed order
// (weight column-major, bias, M column-major).
std::size_t parameter_count(const Heads& heads);
double& parameter(Heads& heads, std::size_t index);
double parameter_gradient(const HeadGradients& gradient, std::size_t index);
std::string parameter_name(const Heads& heads, std::size_t index);

enum class GradientCheck { Skipped, Passed, Failed };

const char* to_string(GradientCheck status);

struct EpochReport {
  double num_loss = 0.0;  // mean over NUM anchors
  double rm_loss = 0.0;   // mean over RM fragments
  double total_loss = 0.0;
  std::size_t num_anchors = 0;
  std::size_t rm_fragments = 0;
  std::size_t pseudo_boundaries = 0;
  GradientCheck gradient_check = GradientCheck::Skipped;
};

// Losses are measured on the epoch's mined data with the heads as they stood
// when the epoch began.
struct TrainReport {
  std::vector<EpochReport> epochs;
};

struct TrainResult {
  Heads heads;
  TrainReport report;
};

// Pseudo segmentation of every dialogue under the given heads.
std::vector<Segmentation> pseudo_segment(const Heads& heads, const TrainingCorpus& corpus,
                                         const TrainConfig& config);

std::vector<NumSample> mine_num_samples(const TrainingCorpus& corpus,
                                        const std::vector<Segmentation>& pseudo,
                                        const TrainConfig& config);

TrainResult train(const std::vector<Dialogue>& corpus, const EmbeddingProvider& provider,
                  const TrainConfig& config, std::optional<Heads> initial = std::nullopt);

TrainResult train(const std::vector<Dialogue>& corpus, const TrainingCorpus& embedded,
                  const TrainConfig& config, std::optional<Heads> initial = std::nullopt);

}  // namespace dialseg
