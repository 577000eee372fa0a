#include <doctest.h>

#include <cmath>
#include <random>

#include "dialseg/similarity.hpp"
#include "oracles.hpp"

using namespace dialseg;

namespace {

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST_CASE("cosine examples") {
  Eigen::Vector3d a(1.0, -2.0, 0.5);
  CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
  CHECK(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("cosine is symmetric, scale invariant and bounded") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_vector(rng, 7);
    const auto b = random_vector(rng, 7);
    const double c = cosine(a, b);
    CHECK(c == doctest::Approx(cosine(b, a)).epsilon(1e-14));
    CHECK(cosine(Eigen::VectorXd(scale(rng) * a), b) == doctest::Approx(c).epsilon(1e-12));
    CHECK(c == doctest::Approx(oracle::naive_cosine(a, b)).epsilon(1e-12));
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("zero vector yields zero and is counted") {
  reset_degenerate_cosine_count();
  CHECK(cosine(Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 2, 3)) == 0.0);
  CHECK(degenerate_cosine_count() == 1);
  const auto g = cosine_with_gradient(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d::Zero());
  CHECK(g.value == 0.0);
  CHECK(g.d_a.isZero());
  CHECK(g.d_b.isZero());
  CHECK(degenerate_cosine_count() == 2);
  reset_degenerate_cosine_count();
  CHECK(degenerate_cosine_count() == 0);
}

TEST_CASE("dimension mismatch throws") {
  CHECK_THROWS_AS(cosine(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3)), InvalidArgument);
}

TEST_CASE("cosine gradient matches central differences") {
  std::mt19937_64 rng(5);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_vector(rng, 5);
    const auto b = random_vector(rng, 5);
    const auto g = cosine_with_gradient(a, b);
    CHECK(g.value == doctest::Approx(cosine(a, b)).epsilon(1e-14));
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd ap = a, am = a, bp = b, bm = b;
      ap(i) += h;
      am(i) -= h;
      bp(i) += h;
      bm(i) -= h;
      const double na = (oracle::naive_cosine(ap, b) - oracle::naive_cosine(am, b)) / (2 * h);
      const double nb = (oracle::naive_cosine(a, bp) - oracle::naive_cosine(a, bm)) / (2 * h);
      CHECK(g.d_a(i) == doctest::Approx(na).epsilon(1e-6));
      CHECK(g.d_b(i) == doctest::Approx(nb).epsilon(1e-6));
    }
  }
}
