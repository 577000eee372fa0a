#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>

#include "dialseg/dialogue.hpp"
#include "dialseg/embeddings.hpp"
#include "dialseg/errors.hpp"

namespace dialseg {

// Bilinear response-fit scorer over base embeddings: c = tanh(ctx' M resp).
template <typename Scalar>
struct CoherenceHead {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix M;  // d_base x d_base

  Eigen::Index dimension() const { return M.rows(); }

  // 0.1 * I plus uniform noise in [-0.01, 0.01].
  static CoherenceHead initialized(Eigen::Index d_base, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.01, 0.01);
    CoherenceHead head{Matrix(d_base, d_base)};
    for (Eigen::Index c = 0; c < d_base; ++c) {
      for (Eigen::Index r = 0; r < d_base; ++r) {
        head.M(r, c) = static_cast<Scalar>((r == c ? 0.1 : 0.0) + dist(rng));
      }
    }
    return head;
  }

  static CoherenceHead zero(Eigen::Index d_base) { return {Matrix::Zero(d_base, d_base)}; }

  bool all_finite() const { return M.allFinite(); }
};

using CoherenceHeadd = CoherenceHead<double>;

// Context for interval i: mean of e_{i-1} and e_i, or e_1 alone when i = 1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> coherence_context(
    const Eigen::MatrixBase<Derived>& base, int interval) {
  if (interval == 1) return base.col(0);
  return (base.col(interval - 2) + base.col(interval - 1)) / typename Derived::Scalar(2);
}

template <typename Scalar, typename DerivedC, typename DerivedR>
Scalar coherence_raw(const CoherenceHead<Scalar>& head, const Eigen::MatrixBase<DerivedC>& ctx,
                     const Eigen::MatrixBase<DerivedR>& resp) {
  if (ctx.size() != head.dimension() || resp.size() != head.dimension()) {
    throw InvalidArgument("coherence: embedding dimension " + std::to_string(ctx.size()) +
                          " does not match head " + std::to_string(head.dimension()));
  }
  return ctx.dot(head.M * resp);
}

template <typename Scalar, typename Derived>
Scalar coherence_score(const CoherenceHead<Scalar>& head, const Eigen::MatrixBase<Derived>& base,
                       int interval) {
  const auto n = static_cast<int>(base.cols());
  IntervalIndex checked(interval, n);
  const auto ctx = coherence_context(base, checked.value());
  return std::tanh(coherence_raw(head, ctx, base.col(checked.value())));
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coherence_series(
    const CoherenceHead<Scalar>& head, const Eigen::MatrixBase<Derived>& base) {
  const auto n = static_cast<int>(base.cols());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(std::max(0, n - 1));
  for (int i = 1; i <= n - 1; ++i) out(i - 1) = coherence_score(head, base, i);
  return out;
}

// Produces c_1..c_{n-1} for a dialogue.
class CoherenceScorer {
public:
  virtual ~CoherenceScorer() = default;
  virtual Eigen::VectorXd series(const Dialogue& dialogue, const BaseMatrix& base) const = 0;
};

class ZeroCoherence final : public CoherenceScorer {
public:
  Eigen::VectorXd series(const Dialogue& dialogue, const BaseMatrix&) const override {
    return Eigen::VectorXd::Zero(std::max(0, dialogue.size() - 1));
  }
};

class HeadCoherence final : public CoherenceScorer {
public:
  explicit HeadCoherence(CoherenceHeadd head) : head_(std::move(head)) {}

  Eigen::VectorXd series(const Dialogue&, const BaseMatrix& base) const override {
    return coherence_series(head_, base);
  }

  const CoherenceHeadd& head() const noexcept { return head_; }

private:
  CoherenceHeadd head_;
};

// JSON Lines {"dialogue_id", "interval", "score"} with 1-based intervals.
class FileCoherence final : public CoherenceScorer {
public:
  explicit FileCoherence(const std::string& path);

  Eigen::VectorXd series(const Dialogue& dialogue, const BaseMatrix& base) const override;
  double score(const std::string& dialogue_id, int interval) const;

private:
  std::map<std::pair<std::string, int>, double> scores_;
};

}  // namespace dialseg
