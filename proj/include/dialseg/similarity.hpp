#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>

#include "dialseg/errors.hpp"

namespace dialseg {

namespace detail {
inline std::atomic<std::uint64_t>& degenerate_cosine_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}
}  // namespace detail

// Number of cosine evaluations that hit a zero-norm operand since start-up
// (or the last reset). Callers surface this as a warning.
inline std::uint64_t degenerate_cosine_count() {
  return detail::degenerate_cosine_counter().load(std::memory_order_relaxed);
}

inline void reset_degenerate_cosine_count() {
  detail::degenerate_cosine_counter().store(0, std::memory_order_relaxed);
}

// Cosine similarity clamped to [-1, 1]. A zero-norm operand yields 0 and bumps
// the degenerate counter.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw InvalidArgument("cosine: dimension mismatch " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) {
    detail::degenerate_cosine_counter().fetch_add(1, std::memory_order_relaxed);
    return Scalar(0);
  }
  const Scalar c = a.dot(b) / (na * nb);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

// Partial derivatives of cos(a, b) with respect to a and b. Zero-norm operands
// give zero gradients, consistent with the constant 0 returned by cosine().
template <typename Scalar>
struct CosineGradient {
  Scalar value;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d_a;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d_b;
};

template <typename DerivedA, typename DerivedB>
CosineGradient<typename DerivedA::Scalar> cosine_with_gradient(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (a.size() != b.size()) {
    throw InvalidArgument("cosine: dimension mismatch");
  }
  if (na == Scalar(0) || nb == Scalar(0)) {
    detail::degenerate_cosine_counter().fetch_add(1, std::memory_order_relaxed);
    return {Scalar(0), Vector::Zero(a.size()), Vector::Zero(b.size())};
  }
  const Scalar c = a.dot(b) / (na * nb);
  // d cos / d a = b / (|a||b|) - cos * a / |a|^2, symmetrically for b.
  Vector d_a = b / (na * nb) - c * a / (na * na);
  Vector d_b = a / (na * nb) - c * b / (nb * nb);
  return {std::clamp(c, Scalar(-1), Scalar(1)), std::move(d_a), std::move(d_b)};
}

}  // namespace dialseg
