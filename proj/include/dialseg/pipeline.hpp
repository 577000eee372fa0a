#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dialseg/coherence.hpp"
#include "dialseg/dialogue.hpp"
#include "dialseg/embeddings.hpp"
#include "dialseg/metrics.hpp"
#include "dialseg/relevance.hpp"
#include "dialseg/texttiling.hpp"

namespace dialseg {

struct PipelineConfig {
  TilingConfig tiling;
  bool use_topic = true;  // false: coherence-only relevance
};

struct DialogueAnalysis {
  RelevanceSeriesd relevance;
  Eigen::VectorXd depths;
  Segmentation segmentation;
};

// Relevance, depth and boundaries for one dialogue from precomputed base
// embeddings. Without a projection head the base vectors serve as topic
// vectors.
DialogueAnalysis analyze(const BaseMatrix& base, const ProjectionHeadd* projection,
                         const Eigen::VectorXd& coherence, const PipelineConfig& config);

class Segmenter {
public:
  Segmenter(const EmbeddingProvider& provider, std::optional<ProjectionHeadd> projection,
            const CoherenceScorer& coherence, PipelineConfig config);

  DialogueAnalysis analyze(const Dialogue& dialogue) const;

  // One analysis per dialogue, in corpus order.
  std::vector<DialogueAnalysis> analyze_corpus(const std::vector<Dialogue>& corpus, int jobs) const;

  std::vector<LabeledSegmentation> segment_corpus(const std::vector<Dialogue>& corpus, int jobs) const;

private:
  const EmbeddingProvider& provider_;
  std::optional<ProjectionHeadd> projection_;
  const CoherenceScorer& coherence_;
  PipelineConfig config_;
};

}  // namespace dialseg
