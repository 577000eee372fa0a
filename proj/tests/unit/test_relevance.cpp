#include <doctest.h>

#include <cmath>
#include <random>

#include "dialseg/relevance.hpp"
#include "oracles.hpp"

using namespace dialseg;

namespace {

Eigen::MatrixXd random_topics(std::mt19937_64& rng, Eigen::Index d, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(d, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) m(r, c) = g(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("identical topics plus constant coherence") {
  const Eigen::MatrixXd h = Eigen::Vector3d(0.2, -1, 4).replicate(1, 6);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(5, 0.3);
  const auto r = relevance_series(h, c);
  REQUIRE(r.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(r.scores(i) == doctest::Approx(1.3).epsilon(1e-15));
}

TEST_CASE("two utterances use singleton windows") {
  Eigen::MatrixXd h(2, 2);
  h << 1, 1, 0, 2;
  const auto r = relevance_series(h, Eigen::VectorXd::Constant(1, 0.25));
  CHECK(r.scores(0) == doctest::Approx(oracle::naive_cosine(h.col(0), h.col(1)) + 0.25));
}

TEST_CASE("hand-computed block example") {
  Eigen::MatrixXd h(2, 4);
  h << 1, 1, 0, 0, 0, 0, 1, 1;
  const auto r = relevance_series(h, Eigen::VectorXd::Zero(3));
  CHECK(r.scores(1) == doctest::Approx(0.0));
  CHECK(r.scores(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("edge windows are clamped") {
  const auto w1 = interval_windows(6, 1);
  CHECK(w1.left_first == 1);
  CHECK(w1.left_last == 1);
  CHECK(w1.right_first == 2);
  CHECK(w1.right_last == 3);
  const auto w5 = interval_windows(6, 5);
  CHECK(w5.left_first == 4);
  CHECK(w5.right_last == 6);
  CHECK_THROWS_AS(interval_windows(6, 6), InvalidArgument);
}

TEST_CASE("interior intervals match the literal window formula") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 8);
    const auto h = random_topics(rng, 5, n);
    const Eigen::VectorXd c = random_topics(rng, n - 1, 1).col(0) * 0.1;
    const auto r = relevance_series(h, c);
    for (int i = 2; i <= n - 2; ++i) {
      const Eigen::VectorXd left = (h.col(i - 2) + h.col(i - 1)) / 2.0;
      const Eigen::VectorXd right = (h.col(i) + h.col(i + 1)) / 2.0;
      const double want = oracle::naive_cosine(left, right) + c(i - 1);
      CHECK(std::abs(r.scores(i - 1) - want) < 1e-12);
    }
  }
}

TEST_CASE("decomposition and positive-scale invariance") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const auto h = random_topics(rng, 4, n);
    const Eigen::VectorXd c = random_topics(rng, n - 1, 1).col(0) * 0.5;
    const auto r = relevance_series(h, c);
    const auto scaled = relevance_series(Eigen::MatrixXd(3.7 * h), c);
    for (int i = 0; i < n - 1; ++i) {
      CHECK(std::abs(r.scores(i) - r.coherence(i) - r.topic_sim(i)) <= 1e-15);
      CHECK(std::abs(scaled.topic_sim(i) - r.topic_sim(i)) < 1e-12);
    }
  }
}

TEST_CASE("coherence-only relevance drops the topic term") {
  std::mt19937_64 rng(2);
  const auto h = random_topics(rng, 3, 5);
  const Eigen::VectorXd c = Eigen::Vector4d(0.1, -0.2, 0.3, 0.0);
  const auto r = relevance_series(h, c, false);
  CHECK(r.scores == c);
  CHECK(r.topic_sim.isZero());
}

TEST_CASE("relevance argument checks") {
  CHECK_THROWS_AS(relevance_series(Eigen::MatrixXd::Ones(2, 4), Eigen::VectorXd::Zero(2)),
                  InvalidArgument);
  CHECK(relevance_series(Eigen::MatrixXd::Ones(2, 1), Eigen::VectorXd::Zero(0)).size() == 0);
}
