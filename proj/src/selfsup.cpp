#include "dialseg/selfsup.hpp"

#include <algorithm>
#include <random>

#include "dialseg/embeddings.hpp"
#include "dialseg/errors.hpp"

namespace dialseg {

namespace {

void check_anchor(int utterance_count, int anchor) {
  if (anchor < 1 || anchor > utterance_count) {
    throw InvalidArgument("utterance " + std::to_string(anchor) + " outside [1, " +
                          std::to_string(utterance_count) + "]");
  }
}

IndexSet intersect(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

NeighborSets neighbor_sets(int utterance_count, int anchor, int w) {
  check_anchor(utterance_count, anchor);
  if (w < 1) throw InvalidArgument("neighbor window w must be >= 1");
  NeighborSets sets;
  for (int j = 1; j <= utterance_count; ++j) {
    if (j == anchor) continue;
    (std::abs(anchor - j) <= w ? sets.near : sets.far).push_back(j);
  }
  return sets;
}

PseudoSegmentSets pseudo_segment_sets(const Segmentation& seg, int anchor) {
  const auto range = segment_of(seg, anchor);
  PseudoSegmentSets sets;
  for (int j = 1; j <= seg.utterance_count(); ++j) {
    if (j == anchor) continue;
    (j >= range.first && j <= range.last ? sets.inside : sets.outside).push_back(j);
  }
  return sets;
}

NumPairSet refined_pairs(int utterance_count, int w, const Segmentation& seg) {
  if (seg.utterance_count() != utterance_count) {
    throw InvalidArgument("pseudo segmentation covers " + std::to_string(seg.utterance_count()) +
                          " utterances, dialogue has " + std::to_string(utterance_count));
  }
  NumPairSet pairs;
  for (int i = 1; i <= utterance_count; ++i) {
    const auto neighbors = neighbor_sets(utterance_count, i, w);
    const auto pseudo = pseudo_segment_sets(seg, i);
    NumAnchor a{i, intersect(neighbors.near, pseudo.inside),
                intersect(neighbors.far, pseudo.outside)};
    if (!a.positives.empty() && !a.negatives.empty()) pairs.push_back(std::move(a));
  }
  return pairs;
}

NumPairSet neighbor_pairs(int utterance_count, int w) {
  NumPairSet pairs;
  for (int i = 1; i <= utterance_count; ++i) {
    auto neighbors = neighbor_sets(utterance_count, i, w);
    if (!neighbors.near.empty() && !neighbors.far.empty()) {
      pairs.push_back({i, std::move(neighbors.near), std::move(neighbors.far)});
    }
  }
  return pairs;
}

const char* to_string(RmScheme scheme) {
  return scheme == RmScheme::Intra ? "intra" : "cross";
}

std::uint64_t dialogue_seed(std::uint64_t seed, const std::string& dialogue_id) {
  return seed ^ hash_token(dialogue_id, 0);
}

std::vector<RmFragmentPair> rm_fragments(const std::vector<Dialogue>& corpus,
                                         std::uint64_t seed, const RmOptions& options) {
  if (options.per_interval < 1) {
    throw InvalidArgument("fragments per interval must be >= 1");
  }
  std::vector<std::size_t> donors;  // dialogues able to supply a contiguous pair
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (corpus[d].size() >= 2) donors.push_back(d);
  }

  std::vector<RmFragmentPair> out;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const Dialogue& dialogue = corpus[d];
    const int n = dialogue.size();
    std::mt19937_64 rng(dialogue_seed(seed, dialogue.id()));
    std::vector<std::size_t> other_donors;
    if (options.allow_cross) {
      for (std::size_t k : donors) {
        if (k != d) other_donors.push_back(k);
      }
    }
    for (int i = 2; i <= n - 2; ++i) {
      // Intra starts keep (a, a + 1) clear of the real window [i - 1, i + 2].
      std::vector<int> intra_starts;
      for (int a = 1; a <= i - 3; ++a) intra_starts.push_back(a);
      for (int a = i + 3; a <= n - 1; ++a) intra_starts.push_back(a);
      const bool intra_ok = !intra_starts.empty();
      const bool cross_ok = !other_donors.empty();
      if (!intra_ok && !cross_ok) {
        throw GenerationError("dialogue '" + dialogue.id() + "' interval " + std::to_string(i) +
                              ": no room for an intra-dialogue fragment and no other "
                              "dialogue to sample from");
      }
      for (int k = 0; k < options.per_interval; ++k) {
        RmScheme scheme;
        if (intra_ok && cross_ok) {
          scheme = std::bernoulli_distribution(0.5)(rng) ? RmScheme::Cross : RmScheme::Intra;
        } else {
          scheme = intra_ok ? RmScheme::Intra : RmScheme::Cross;
        }
        if (scheme == RmScheme::Intra) {
          std::uniform_int_distribution<std::size_t> pick(0, intra_starts.size() - 1);
          out.push_back({d, i, d, intra_starts[pick(rng)], scheme});
        } else {
          std::uniform_int_distribution<std::size_t> pick_dialogue(0, other_donors.size() - 1);
          const std::size_t donor = other_donors[pick_dialogue(rng)];
          std::uniform_int_distribution<int> pick_start(1, corpus[donor].size() - 1);
          out.push_back({d, i, donor, pick_start(rng), scheme});
        }
      }
    }
  }
  return out;
}

}  // namespace dialseg
