#pragma once

#include <string>
#include <vector>

#include "dialseg/dialogue.hpp"

namespace dialseg {

struct MetricResult {
  double pk = 0.0;
  double window_diff = 0.0;
  int window_size = 1;
};

// Half the mean reference segment length, rounded half up, clamped to
// [1, n - 1] (or 1 for single-utterance dialogues).
int window_size(const Segmentation& reference);

// Fraction of probe pairs (i, i + k), i = 1..n-k, on which the two
// segmentations disagree about whether both ends share a segment.
double pk(const Segmentation& reference, const Segmentation& hypothesis, int k);

// Fraction of windows [i, i + k) whose boundary counts differ.
double window_diff(const Segmentation& reference, const Segmentation& hypothesis, int k);

struct DialogueMetric {
  std::string id;
  MetricResult result;
};

struct CorpusMetrics {
  double pk = 0.0;
  double window_diff = 0.0;
  std::vector<DialogueMetric> per_dialogue;  // in reference order
  std::size_t skipped = 0;                   // single-utterance dialogues
};

struct LabeledSegmentation {
  std::string id;
  Segmentation segmentation;
};

// Macro average over dialogues, each with its own k from the reference.
// Single-utterance dialogues have no probe windows and are skipped.
CorpusMetrics evaluate_corpus(const std::vector<LabeledSegmentation>& references,
                              const std::vector<LabeledSegmentation>& hypotheses);

}  // namespace dialseg
