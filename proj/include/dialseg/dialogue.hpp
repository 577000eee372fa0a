#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dialseg {

// Interval i (1-based) is the gap between utterance i and utterance i + 1.
class IntervalIndex {
public:
  IntervalIndex(int value, int utterance_count);

  int value() const noexcept { return value_; }

private:
  int value_;
};

// Strictly increasing boundary intervals over a dialogue of n utterances.
// Boundary b splits between utterance b and utterance b + 1.
class Segmentation {
public:
  Segmentation() = default;
  Segmentation(int utterance_count, std::vector<int> boundaries);

  // A single segment covering all n utterances.
  static Segmentation whole(int utterance_count);

  int utterance_count() const noexcept { return n_; }
  const std::vector<int>& boundaries() const noexcept { return boundaries_; }
  int segment_count() const noexcept {
    return static_cast<int>(boundaries_.size()) + 1;
  }

  friend bool operator==(const Segmentation&, const Segmentation&) = default;

private:
  int n_ = 1;
  std::vector<int> boundaries_;
};

struct SegmentRange {
  int ordinal;  // 1-based segment number
  int first;    // inclusive utterance range
  int last;

  friend bool operator==(const SegmentRange&, const SegmentRange&) = default;
};

SegmentRange segment_of(const Segmentation& seg, int utterance);

bool same_segment(const Segmentation& seg, int i, int j);

// Throws InvalidArgument unless boundaries form a valid segmentation of n.
void validate_boundaries(int utterance_count, const std::vector<int>& boundaries);

class Dialogue {
public:
  Dialogue(std::string id, std::vector<std::string> utterances,
           std::optional<Segmentation> gold = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  const std::vector<std::string>& utterances() const noexcept { return utterances_; }
  // 1-based access.
  const std::string& utterance(int i) const { return utterances_.at(i - 1); }
  int size() const noexcept { return static_cast<int>(utterances_.size()); }
  const std::optional<Segmentation>& gold() const noexcept { return gold_; }

  friend bool operator==(const Dialogue&, const Dialogue&) = default;

private:
  std::string id_;
  std::vector<std::string> utterances_;
  std::optional<Segmentation> gold_;
};

}  // namespace dialseg
