#include "dialseg/dialogue.hpp"

#include <algorithm>
#include <cctype>

#include "dialseg/errors.hpp"

namespace dialseg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::DuplicateId: return "duplicate-id";
    case ErrorKind::BoundaryOutOfRange: return "boundary-out-of-range";
    case ErrorKind::InvalidDialogue: return "invalid-dialogue";
    case ErrorKind::MissingEmbedding: return "missing-embedding";
    case ErrorKind::MissingScore: return "missing-score";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Generation: return "generation";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

IntervalIndex::IntervalIndex(int value, int utterance_count) : value_(value) {
  if (value < 1 || value > utterance_count - 1) {
    throw InvalidArgument("interval " + std::to_string(value) +
                          " outside [1, " + std::to_string(utterance_count - 1) + "]");
  }
}

void validate_boundaries(int utterance_count, const std::vector<int>& boundaries) {
  if (utterance_count < 1) {
    throw InvalidArgument("segmentation needs at least one utterance");
  }
  int previous = 0;
  for (int b : boundaries) {
    if (b < 1 || b > utterance_count - 1) {
      throw InvalidArgument("boundary " + std::to_string(b) + " outside [1, " +
                            std::to_string(utterance_count - 1) + "]");
    }
    if (b <= previous) {
      throw InvalidArgument("boundaries must be strictly increasing");
    }
    previous = b;
  }
}

Segmentation::Segmentation(int utterance_count, std::vector<int> boundaries)
    : n_(utterance_count), boundaries_(std::move(boundaries)) {
  validate_boundaries(n_, boundaries_);
}

Segmentation Segmentation::whole(int utterance_count) {
  return Segmentation(utterance_count, {});
}

namespace {

void check_utterance(const Segmentation& seg, int i) {
  if (i < 1 || i > seg.utterance_count()) {
    throw InvalidArgument("utterance " + std::to_string(i) + " outside [1, " +
                          std::to_string(seg.utterance_count()) + "]");
  }
}

}  // namespace

SegmentRange segment_of(const Segmentation& seg, int utterance) {
  check_utterance(seg, utterance);
  const auto& b = seg.boundaries();
  // First boundary >= utterance closes the segment.
  auto it = std::lower_bound(b.begin(), b.end(), utterance);
  const int ordinal = static_cast<int>(it - b.begin()) + 1;
  const int first = it == b.begin() ? 1 : *(it - 1) + 1;
  const int last = it == b.end() ? seg.utterance_count() : *it;
  return {ordinal, first, last};
}

bool same_segment(const Segmentation& seg, int i, int j) {
  check_utterance(seg, i);
  check_utterance(seg, j);
  const auto& b = seg.boundaries();
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  auto it = std::lower_bound(b.begin(), b.end(), lo);
  return it == b.end() || *it >= hi;
}

namespace {

bool blank(const std::string& text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Dialogue::Dialogue(std::string id, std::vector<std::string> utterances,
                   std::optional<Segmentation> gold)
    : id_(std::move(id)), utterances_(std::move(utterances)), gold_(std::move(gold)) {
  if (utterances_.empty()) {
    throw InvalidArgument("dialogue '" + id_ + "' has no utterances");
  }
  for (std::size_t k = 0; k < utterances_.size(); ++k) {
    if (blank(utterances_[k])) {
      throw InvalidArgument("dialogue '" + id_ + "' utterance " +
                            std::to_string(k + 1) + " is empty");
    }
  }
  if (gold_ && gold_->utterance_count() != size()) {
    throw InvalidArgument("dialogue '" + id_ + "' gold segmentation refers to " +
                          std::to_string(gold_->utterance_count()) +
                          " utterances, dialogue has " + std::to_string(size()));
  }
}

}  // namespace dialseg
