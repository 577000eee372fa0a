#include "dialseg/pipeline.hpp"

#include "dialseg/parallel.hpp"

namespace dialseg {

DialogueAnalysis analyze(const BaseMatrix& base, const ProjectionHeadd* projection,
                         const Eigen::VectorXd& coherence, const PipelineConfig& config) {
  const int n = static_cast<int>(base.cols());
  if (n < 2) {
    return {RelevanceSeriesd{Eigen::VectorXd(0), Eigen::VectorXd(0), Eigen::VectorXd(0)},
            Eigen::VectorXd(0), Segmentation::whole(std::max(n, 1))};
  }
  DialogueAnalysis out;
  if (projection != nullptr) {
    out.relevance = relevance_series(project_all(*projection, base), coherence, config.use_topic);
  } else {
    out.relevance = relevance_series(base, coherence, config.use_topic);
  }
  out.depths = depth_scores(out.relevance.scores, config.tiling);
  out.segmentation = segment(out.relevance.scores, config.tiling);
  return out;
}

Segmenter::Segmenter(const EmbeddingProvider& provider, std::optional<ProjectionHeadd> projection,
                     const CoherenceScorer& coherence, PipelineConfig config)
    : provider_(provider),
      projection_(std::move(projection)),
      coherence_(coherence),
      config_(config) {
  config_.tiling.validate();
  if (projection_ && projection_->base_dimension() != provider_.dimension()) {
    throw InvalidArgument("head expects d_base " + std::to_string(projection_->base_dimension()) +
                          " but provider " + provider_.describe() + " yields " +
                          std::to_string(provider_.dimension()));
  }
}

DialogueAnalysis Segmenter::analyze(const Dialogue& dialogue) const {
  const BaseMatrix base = provider_.embed(dialogue);
  const Eigen::VectorXd coherence = coherence_.series(dialogue, base);
  return dialseg::analyze(base, projection_ ? &*projection_ : nullptr, coherence, config_);
}

std::vector<DialogueAnalysis> Segmenter::analyze_corpus(const std::vector<Dialogue>& corpus,
                                                        int jobs) const {
  std::vector<DialogueAnalysis> out(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t d) { out[d] = analyze(corpus[d]); });
  return out;
}

std::vector<LabeledSegmentation> Segmenter::segment_corpus(const std::vector<Dialogue>& corpus,
                                                           int jobs) const {
  const auto analyses = analyze_corpus(corpus, jobs);
  std::vector<LabeledSegmentation> out;
  out.reserve(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    out.push_back({corpus[d].id(), analyses[d].segmentation});
  }
  return out;
}

}  // namespace dialseg
