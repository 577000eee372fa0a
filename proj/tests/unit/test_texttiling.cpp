#include <doctest.h>

#include <cmath>
#include <random>

#include "dialseg/relevance.hpp"
#include "dialseg/texttiling.hpp"
#include "oracles.hpp"

using namespace dialseg;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("depth walk example") {
  const auto d = depth_scores(vec({0.9, 0.2, 0.8}), {});
  CHECK(d(0) == 0.0);
  CHECK(d(1) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(d(2) == 0.0);
}

TEST_CASE("flat series and local maxima of monotone series have zero depth") {
  CHECK(depth_scores(Eigen::VectorXd::Constant(6, 0.4), {}).isZero());
  const auto rising = depth_scores(vec({0.1, 0.2, 0.3, 0.4}), {});
  CHECK(rising(3) == 0.0);
  CHECK(rising(0) == doctest::Approx(0.3));
  const auto falling = depth_scores(vec({0.4, 0.3, 0.2, 0.1}), {});
  CHECK(falling(0) == 0.0);
  CHECK(segment(Eigen::VectorXd::Constant(6, 0.4), {}).boundaries().empty());
}

TEST_CASE("two orthogonal blocks split once between them") {
  Eigen::MatrixXd h(2, 10);
  for (int u = 0; u < 10; ++u) h.col(u) = u < 5 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
  const auto r = relevance_series(h, Eigen::VectorXd::Zero(9));
  const auto d = depth_scores(r.scores, {});
  CHECK(d(4) == doctest::Approx(2.0));
  CHECK(d(3) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(d(5) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  const auto seg = segment(r.scores, {});
  CHECK(seg.utterance_count() == 10);
  CHECK(seg.boundaries() == std::vector<int>{5});
}

TEST_CASE("one sharp valley among tiny noise") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> noise(-1e-9, 1e-9);
  Eigen::VectorXd r = Eigen::VectorXd::Constant(12, 0.8);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) += noise(rng);
  r(6) = -0.5;
  CHECK(segment(r, {}).boundaries() == std::vector<int>{7});
}

TEST_CASE("a depth equal to the threshold is a boundary") {
  // Two identical valleys: sigma is zero, so tau equals both depths.
  const auto seg = segment(vec({1, 0, 1, 0, 1}), {});
  CHECK(seg.boundaries() == std::vector<int>{2, 4});
}

TEST_CASE("minimum segment length keeps the stronger boundary") {
  TilingConfig cfg;
  cfg.threshold_alpha = -10;
  cfg.min_segment_utterances = 2;
  // Valleys at intervals 2 (depth 0.5) and 3 (depth 1.6) are adjacent.
  const auto seg = segment(vec({1, 0.5, 0.2, 1, 1}), cfg);
  CHECK(seg.boundaries() == std::vector<int>{3});

  // Equal depths: the later boundary gives way.
  const auto tie = segment(vec({1, 1, 0, 1, 0, 1, 1}), cfg);
  CHECK(tie.boundaries() == std::vector<int>{3, 5});
  cfg.min_segment_utterances = 3;
  const auto tie3 = segment(vec({1, 1, 0, 1, 0, 1, 1}), cfg);
  CHECK(tie3.boundaries() == std::vector<int>{3});
}

TEST_CASE("smoothing truncates windows at the edges") {
  const auto s = smooth(vec({3, 0, 0, 6}), 3);
  CHECK(s(0) == doctest::Approx(1.5));
  CHECK(s(1) == doctest::Approx(1.0));
  CHECK(s(3) == doctest::Approx(3.0));
  CHECK(smooth(vec({1, 2}), 1) == vec({1, 2}));
}

TEST_CASE("threshold statistics") {
  const Eigen::VectorXd d = vec({0, 1, 0, 3});
  TilingConfig positive;
  positive.threshold_alpha = 1.0;
  CHECK(depth_threshold(d, positive) == doctest::Approx(2.0 + 1.0));
  TilingConfig all = positive;
  all.stats_over = DepthStats::All;
  CHECK(depth_threshold(d, all) == doctest::Approx(1.0 + std::sqrt(1.5)));
  CHECK(parse_depth_stats("all") == DepthStats::All);
  CHECK_THROWS_AS(parse_depth_stats("median"), InvalidArgument);
}

TEST_CASE("matches the reference rules on every small grid series") {
  const double grid[] = {0.0, 0.5, 1.0};
  for (int len = 1; len <= 6; ++len) {
    int combos = 1;
    for (int i = 0; i < len; ++i) combos *= 3;
    for (int code = 0; code < combos; ++code) {
      Eigen::VectorXd r(len);
      int rest = code;
      for (int i = 0; i < len; ++i) {
        r(i) = grid[rest % 3];
        rest /= 3;
      }
      CHECK(to_std(depth_scores(r, {})) == oracle::depths(to_std(r)));
      for (double alpha : {-0.5, 0.0, 0.5, 1.0}) {
        for (bool over_all : {false, true}) {
          TilingConfig cfg;
          cfg.threshold_alpha = alpha;
          cfg.stats_over = over_all ? DepthStats::All : DepthStats::Positive;
          const auto seg = segment(r, cfg);
          CHECK(seg.utterance_count() == len + 1);
          CHECK(seg.boundaries() == oracle::tiling_boundaries(to_std(r), alpha, over_all));
        }
      }
    }
  }
}

TEST_CASE("shift invariance and validity on random series") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int len = 1 + static_cast<int>(rng() % 15);
    Eigen::VectorXd r(len);
    for (int i = 0; i < len; ++i) r(i) = u(rng);
    TilingConfig cfg;
    cfg.smoothing_window = 1 + 2 * static_cast<int>(rng() % 2);
    cfg.min_segment_utterances = 1 + static_cast<int>(rng() % 3);
    const auto seg = segment(r, cfg);
    CHECK_NOTHROW(validate_boundaries(len + 1, seg.boundaries()));
    const Eigen::VectorXd shifted = r.array() + 0.5;
    CHECK((depth_scores(shifted, cfg) - depth_scores(r, cfg)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(segment(r, cfg) == seg);
    if (cfg.smoothing_window == 1 && cfg.min_segment_utterances == 1) {
      CHECK(segment(shifted, cfg).boundaries() == seg.boundaries());
    }
    const auto b = seg.boundaries();
    for (std::size_t k = 0; k + 1 < b.size() && cfg.min_segment_utterances > 1; ++k) {
      CHECK(b[k + 1] - b[k] >= cfg.min_segment_utterances);
    }
  }
}

TEST_CASE("config validation and non-finite input") {
  TilingConfig even;
  even.smoothing_window = 2;
  CHECK_THROWS_AS(segment(vec({1, 0, 1}), even), InvalidArgument);
  TilingConfig zero_len;
  zero_len.min_segment_utterances = 0;
  CHECK_THROWS_AS(zero_len.validate(), InvalidArgument);
  CHECK_THROWS_AS(segment(vec({1, NAN, 1}), {}), NumericError);
  CHECK(segment(Eigen::VectorXd(0), {}) == Segmentation::whole(1));
}
