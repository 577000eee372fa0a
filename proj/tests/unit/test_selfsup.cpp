#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "dialseg/errors.hpp"
#include "dialseg/selfsup.hpp"
#include "oracles.hpp"

using namespace dialseg;

namespace {

IndexSet range(int first, int last) {
  IndexSet out;
  for (int i = first; i <= last; ++i) out.push_back(i);
  return out;
}

const NumAnchor* find_anchor(const NumPairSet& pairs, int anchor) {
  for (const auto& a : pairs) {
    if (a.anchor == anchor) return &a;
  }
  return nullptr;
}

Dialogue numbered(const std::string& id, int n) {
  std::vector<std::string> utterances;
  for (int i = 1; i <= n; ++i) utterances.push_back("utterance " + std::to_string(i));
  return Dialogue(id, utterances);
}

}  // namespace

TEST_CASE("neighbor set examples") {
  auto s = neighbor_sets(10, 4, 2);
  CHECK(s.near == IndexSet{2, 3, 5, 6});
  CHECK(s.far == IndexSet{1, 7, 8, 9, 10});
  s = neighbor_sets(3, 2, 5);
  CHECK(s.near == IndexSet{1, 3});
  CHECK(s.far.empty());
  s = neighbor_sets(4, 1, 1);
  CHECK(s.near == IndexSet{2});
  CHECK(s.far == IndexSet{3, 4});
}

TEST_CASE("pseudo segment set examples") {
  auto s = pseudo_segment_sets(Segmentation(10, {5}), 4);
  CHECK(s.inside == IndexSet{1, 2, 3, 5});
  CHECK(s.outside == range(6, 10));
  s = pseudo_segment_sets(Segmentation(4, {}), 2);
  CHECK(s.inside == IndexSet{1, 3, 4});
  CHECK(s.outside.empty());
  s = pseudo_segment_sets(Segmentation(4, {1, 2, 3}), 2);
  CHECK(s.inside.empty());
  CHECK(s.outside == IndexSet{1, 3, 4});
}

TEST_CASE("refined pair examples") {
  const auto pairs = refined_pairs(10, 2, Segmentation(10, {5}));
  const auto* a4 = find_anchor(pairs, 4);
  REQUIRE(a4 != nullptr);
  CHECK(a4->positives == IndexSet{2, 3, 5});
  CHECK(a4->negatives == IndexSet{7, 8, 9, 10});

  const auto none = refined_pairs(10, 2, Segmentation(10, {}));
  CHECK(none.empty());
}

TEST_CASE("refined pairs match set-builder enumeration") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const int w = 1 + static_cast<int>(rng() % 4);
    const auto b = oracle::random_boundaries(n, rng);
    const auto pairs = refined_pairs(n, w, Segmentation(n, b));
    std::set<int> seen;
    for (int i = 1; i <= n; ++i) {
      const auto want = oracle::mine(n, w, b, i);
      const auto* got = find_anchor(pairs, i);
      if (want.positives.empty() || want.negatives.empty()) {
        CHECK(got == nullptr);
        continue;
      }
      REQUIRE(got != nullptr);
      CHECK(std::set<int>(got->positives.begin(), got->positives.end()) == want.positives);
      CHECK(std::set<int>(got->negatives.begin(), got->negatives.end()) == want.negatives);
      CHECK(std::is_sorted(got->positives.begin(), got->positives.end()));
    }
    for (const auto& a : pairs) CHECK(seen.insert(a.anchor).second);
  }
}

TEST_CASE("refined pairs are subsets of their sources") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 14);
    const int w = 1 + static_cast<int>(rng() % 5);
    Segmentation seg(n, oracle::random_boundaries(n, rng));
    for (const auto& a : refined_pairs(n, w, seg)) {
      const auto u = neighbor_sets(n, a.anchor, w);
      const auto ws = pseudo_segment_sets(seg, a.anchor);
      for (int p : a.positives) {
        CHECK(std::binary_search(u.near.begin(), u.near.end(), p));
        CHECK(std::binary_search(ws.inside.begin(), ws.inside.end(), p));
      }
      for (int q : a.negatives) {
        CHECK_FALSE(std::binary_search(u.near.begin(), u.near.end(), q));
        CHECK_FALSE(std::binary_search(ws.inside.begin(), ws.inside.end(), q));
        CHECK(q != a.anchor);
      }
    }
  }
}

TEST_CASE("gold pseudo segmentation with a window spanning the dialogue") {
  const Segmentation gold(9, {3, 6});
  for (int i = 1; i <= 9; ++i) {
    const auto near = neighbor_sets(9, i, 100).near;
    const auto mates = pseudo_segment_sets(gold, i).inside;
    IndexSet positives;
    std::set_intersection(near.begin(), near.end(), mates.begin(), mates.end(),
                          std::back_inserter(positives));
    CHECK(positives == mates);
  }
  // Every utterance is near every other, so no negatives survive.
  CHECK(refined_pairs(9, 100, gold).empty());
  const auto neighbors = neighbor_pairs(9, 100);
  CHECK(neighbors.empty());
  const auto sets = pseudo_segment_sets(gold, 5);
  CHECK(sets.inside == IndexSet{4, 6});
  CHECK(sets.outside == IndexSet{1, 2, 3, 7, 8, 9});
}

TEST_CASE("neighbor pairs skip refinement") {
  const auto pairs = neighbor_pairs(10, 2);
  const auto* a4 = find_anchor(pairs, 4);
  REQUIRE(a4 != nullptr);
  CHECK(a4->positives == IndexSet{2, 3, 5, 6});
  CHECK(a4->negatives == IndexSet{1, 7, 8, 9, 10});
}

TEST_CASE("intra fragments avoid the real window") {
  const std::vector<Dialogue> corpus{numbered("solo", 12)};
  const auto frags = rm_fragments(corpus, 5, {1, false});
  CHECK(frags.size() == 9);
  for (const auto& f : frags) {
    CHECK(f.scheme == RmScheme::Intra);
    CHECK(f.synthetic_dialogue == 0);
    CHECK(f.interval >= 2);
    CHECK(f.interval <= 10);
    const int a = f.synthetic_start;
    CHECK(a >= 1);
    CHECK(a + 1 <= 12);
    const bool overlaps = a + 1 >= f.interval - 1 && a <= f.interval + 2;
    CHECK_FALSE(overlaps);
  }
}

TEST_CASE("fragment generation is deterministic and counts interior intervals") {
  const std::vector<Dialogue> corpus{numbered("a", 7), numbered("b", 3), numbered("c", 5),
                                     numbered("d", 1)};
  const auto first = rm_fragments(corpus, 99);
  CHECK(first == rm_fragments(corpus, 99));
  CHECK(first.size() == 4u + 0u + 2u + 0u);
  const auto twice = rm_fragments(corpus, 99, {2, true});
  CHECK(twice.size() == 12);
  bool any_cross = false;
  for (const auto& f : first) {
    if (f.scheme == RmScheme::Cross) {
      any_cross = true;
      CHECK(f.synthetic_dialogue != f.dialogue);
      CHECK(f.synthetic_start + 1 <= corpus[f.synthetic_dialogue].size());
    }
  }
  // Dialogue "c" has no room for an intra fragment, so it must borrow.
  CHECK(any_cross);
}

TEST_CASE("per-dialogue seeds make generation order independent") {
  const std::vector<Dialogue> forward{numbered("x", 9), numbered("y", 8)};
  const std::vector<Dialogue> reversed{numbered("y", 8), numbered("x", 9)};
  const RmOptions intra_only{1, false};
  const auto f = rm_fragments(forward, 3, intra_only);
  const auto r = rm_fragments(reversed, 3, intra_only);
  REQUIRE(f.size() == r.size());
  std::vector<int> fx, rx;
  for (const auto& p : f) {
    if (p.dialogue == 0) fx.push_back(p.synthetic_start);
  }
  for (const auto& p : r) {
    if (p.dialogue == 1) rx.push_back(p.synthetic_start);
  }
  CHECK(fx == rx);
  CHECK(dialogue_seed(3, "x") != dialogue_seed(3, "y"));
}

TEST_CASE("impossible fragments are reported") {
  const std::vector<Dialogue> corpus{numbered("short", 5)};
  CHECK_THROWS_AS(rm_fragments(corpus, 1, {1, false}), GenerationError);
  CHECK_THROWS_AS(rm_fragments(corpus, 1, {0, true}), InvalidArgument);
  CHECK(std::string(to_string(RmScheme::Cross)) == "cross");
}
