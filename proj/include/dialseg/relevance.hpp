#pragma once

#include <Eigen/Dense>

#include <algorithm>

#include "dialseg/errors.hpp"
#include "dialseg/similarity.hpp"

namespace dialseg {

// Inclusive utterance ranges on either side of an interval. Interior intervals
// see two utterances per side; edge intervals are clamped to the dialogue.
struct IntervalWindows {
  int left_first;
  int left_last;
  int right_first;
  int right_last;
};

inline IntervalWindows interval_windows(int utterance_count, int interval) {
  if (interval < 1 || interval > utterance_count - 1) {
    throw InvalidArgument("interval " + std::to_string(interval) + " outside [1, " +
                          std::to_string(utterance_count - 1) + "]");
  }
  return {std::max(1, interval - 1), interval, interval + 1,
          std::min(utterance_count, interval + 2)};
}

// Mean of columns first..last (1-based, inclusive).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> window_mean(
    const Eigen::MatrixBase<Derived>& topic, int first, int last) {
  const int count = last - first + 1;
  return topic.middleCols(first - 1, count).rowwise().sum() /
         static_cast<typename Derived::Scalar>(count);
}

template <typename Scalar>
struct RelevanceSeries {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector scores;     // r_i = topic_sim_i + coherence_i
  Vector topic_sim;
  Vector coherence;

  Eigen::Index size() const { return scores.size(); }
};

using RelevanceSeriesd = RelevanceSeries<double>;

// Topic term of interval i: cosine of the left and right window means.
template <typename Derived>
typename Derived::Scalar topic_similarity(const Eigen::MatrixBase<Derived>& topic, int interval) {
  const auto w = interval_windows(static_cast<int>(topic.cols()), interval);
  return cosine(window_mean(topic, w.left_first, w.left_last),
                window_mean(topic, w.right_first, w.right_last));
}

// topic: d_topic x n, one column per utterance. coherence: n - 1 scores.
// With use_topic = false the topic term is dropped (coherence-only relevance).
template <typename DerivedT, typename DerivedC>
RelevanceSeries<typename DerivedT::Scalar> relevance_series(
    const Eigen::MatrixBase<DerivedT>& topic, const Eigen::MatrixBase<DerivedC>& coherence,
    bool use_topic = true) {
  using Scalar = typename DerivedT::Scalar;
  const auto n = topic.cols();
  if (n < 1) throw InvalidArgument("relevance: dialogue has no utterances");
  if (coherence.size() != n - 1) {
    throw InvalidArgument("relevance: " + std::to_string(coherence.size()) +
                          " coherence scores for " + std::to_string(n - 1) + " intervals");
  }
  RelevanceSeries<Scalar> out;
  out.coherence = coherence;
  out.topic_sim.resize(n - 1);
  for (int i = 1; i <= n - 1; ++i) {
    out.topic_sim(i - 1) = use_topic ? topic_similarity(topic, i) : Scalar(0);
  }
  out.scores = out.topic_sim + out.coherence;
  return out;
}

}  // namespace dialseg
