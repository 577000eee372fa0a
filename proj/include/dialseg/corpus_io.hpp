#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dialseg/dialogue.hpp"
#include "dialseg/metrics.hpp"

namespace dialseg {

// One dialogue per line: {"id": string, "utterances": [string], "boundaries": [int]}.
// "boundaries" is optional; when present it is the gold segmentation.
std::vector<Dialogue> load_corpus(const std::string& path);
std::vector<Dialogue> parse_corpus(const std::string& text, const std::string& source = "<memory>");
void save_corpus(const std::string& path, const std::vector<Dialogue>& corpus);
std::string format_corpus(const std::vector<Dialogue>& corpus);

struct RawPrediction {
  std::string id;
  std::vector<int> boundaries;
};

// {"id", "boundaries"} per line; other keys are ignored, so a gold corpus file
// loads as well.
std::vector<RawPrediction> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<LabeledSegmentation>& predictions);
std::string format_predictions(const std::vector<LabeledSegmentation>& predictions);

// Gold segmentations of a corpus; throws EvaluationError listing unlabeled ids.
std::vector<LabeledSegmentation> gold_segmentations(const std::vector<Dialogue>& corpus);

// Validates raw predictions against the reference utterance counts.
std::vector<LabeledSegmentation> bind_predictions(const std::vector<RawPrediction>& raw,
                                                  const std::vector<LabeledSegmentation>& references);

struct IntRange {
  int min;
  int max;
};

// Topic-block dialogues. Topic t draws tokens from its own pool; pools are
// laid out on a ring so that pools t and t + 1 share `adjacent_overlap` of
// their tokens (0 gives pairwise disjoint pools). Consecutive segments of a
// dialogue use consecutive topics.
struct SyntheticSpec {
  int dialogues = 50;
  IntRange segments_per_dialogue{3, 6};
  IntRange utterances_per_segment{3, 8};
  IntRange tokens_per_utterance{5, 10};
  int topics = 10;
  int pool_size = 8;
  double adjacent_overlap = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Missing keys keep their defaults.
SyntheticSpec load_synthetic_spec(const std::string& path);
SyntheticSpec parse_synthetic_spec(const std::string& json_text);

// Token pool of every topic.
std::vector<std::vector<std::string>> topic_pools(const SyntheticSpec& spec);

std::vector<Dialogue> generate_synthetic(const SyntheticSpec& spec);

}  // namespace dialseg
