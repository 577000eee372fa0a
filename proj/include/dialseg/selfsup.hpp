#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dialseg/dialogue.hpp"

namespace dialseg {

// Index sets are sorted, 1-based utterance indices.
using IndexSet = std::vector<int>;

struct NeighborSets {
  IndexSet near;  // |i - j| <= w, j != i
  IndexSet far;   // |i - j| > w
};

NeighborSets neighbor_sets(int utterance_count, int anchor, int w);

struct PseudoSegmentSets {
  IndexSet inside;   // same pseudo segment as the anchor, anchor excluded
  IndexSet outside;
};

PseudoSegmentSets pseudo_segment_sets(const Segmentation& seg, int anchor);

struct NumAnchor {
  int anchor;
  IndexSet positives;
  IndexSet negatives;
};

// Anchors whose positive or negative set is empty are left out.
using NumPairSet = std::vector<NumAnchor>;

// Positives are near and inside the anchor's pseudo segment; negatives are
// far and outside it.
NumPairSet refined_pairs(int utterance_count, int w, const Segmentation& seg);

// Unrefined variant: positives = near, negatives = far.
NumPairSet neighbor_pairs(int utterance_count, int w);

enum class RmScheme { Intra, Cross };

const char* to_string(RmScheme scheme);

// A real fragment (u_{i-1}, u_i | u_{i+1}, u_{i+2}) of dialogue `dialogue`
// paired with a synthetic one whose right side is the contiguous pair
// (u'_a, u'_{a+1}) of dialogue `synthetic_dialogue`.
struct RmFragmentPair {
  std::size_t dialogue;  // corpus position
  int interval;
  std::size_t synthetic_dialogue;
  int synthetic_start;  // a
  RmScheme scheme;

  friend bool operator==(const RmFragmentPair&, const RmFragmentPair&) = default;
};

struct RmOptions {
  int per_interval = 1;
  bool allow_cross = true;
};

// Seed used for one dialogue's draws, so results do not depend on the order
// dialogues are visited in.
std::uint64_t dialogue_seed(std::uint64_t seed, const std::string& dialogue_id);

std::vector<RmFragmentPair> rm_fragments(const std::vector<Dialogue>& corpus,
                                         std::uint64_t seed, const RmOptions& options = {});

}  // namespace dialseg
