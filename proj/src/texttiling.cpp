#include "dialseg/texttiling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dialseg/errors.hpp"

namespace dialseg {

void TilingConfig::validate() const {
  if (smoothing_window < 1 || smoothing_window % 2 == 0) {
    throw InvalidArgument("smoothing window must be an odd integer >= 1");
  }
  if (min_segment_utterances < 1) {
    throw InvalidArgument("min segment length must be >= 1");
  }
  if (!std::isfinite(threshold_alpha)) {
    throw InvalidArgument("threshold alpha must be finite");
  }
}

DepthStats parse_depth_stats(const std::string& name) {
  if (name == "positive") return DepthStats::Positive;
  if (name == "all") return DepthStats::All;
  throw InvalidArgument("stats-over must be 'positive' or 'all', got '" + name + "'");
}

Eigen::VectorXd smooth(const Eigen::VectorXd& series, int window) {
  if (window <= 1) return series;
  const auto n = series.size();
  const Eigen::Index half = window / 2;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    out(i) = series.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

Eigen::VectorXd depth_scores(const Eigen::VectorXd& relevance, const TilingConfig& config) {
  config.validate();
  if (relevance.size() == 0) throw InvalidArgument("depth scores need a non-empty series");
  if (!relevance.allFinite()) throw NumericError("relevance series contains non-finite values");
  const Eigen::VectorXd r = smooth(relevance, config.smoothing_window);
  const auto n = r.size();
  Eigen::VectorXd depth(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double left = r(i);
    for (Eigen::Index j = i - 1; j >= 0 && r(j) >= left; --j) left = r(j);
    double right = r(i);
    for (Eigen::Index j = i + 1; j < n && r(j) >= right; ++j) right = r(j);
    depth(i) = (left - r(i)) + (right - r(i));
  }
  return depth;
}

double depth_threshold(const Eigen::VectorXd& depths, const TilingConfig& config) {
  std::vector<double> pool;
  for (Eigen::Index i = 0; i < depths.size(); ++i) {
    if (config.stats_over == DepthStats::All || depths(i) > 0.0) pool.push_back(depths(i));
  }
  if (pool.empty()) return 0.0;
  const double mean = std::accumulate(pool.begin(), pool.end(), 0.0) / static_cast<double>(pool.size());
  double var = 0.0;
  for (double d : pool) var += (d - mean) * (d - mean);
  var /= static_cast<double>(pool.size());
  return mean + config.threshold_alpha * std::sqrt(var);
}

Segmentation segment(const Eigen::VectorXd& relevance, const TilingConfig& config) {
  const int n = static_cast<int>(relevance.size()) + 1;
  if (relevance.size() == 0) return Segmentation::whole(n);
  const Eigen::VectorXd depths = depth_scores(relevance, config);
  const double tau = depth_threshold(depths, config);

  std::vector<int> candidates;
  for (int i = 1; i <= n - 1; ++i) {
    const double d = depths(i - 1);
    if (d > 0.0 && d >= tau) candidates.push_back(i);
  }
  if (config.min_segment_utterances <= 1) return Segmentation(n, std::move(candidates));

  // Strongest boundaries claim their place first; equal depths favor the earlier one.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](int a, int b) { return depths(a - 1) > depths(b - 1); });
  const int min_len = config.min_segment_utterances;
  std::vector<int> kept;
  for (int b : candidates) {
    auto it = std::lower_bound(kept.begin(), kept.end(), b);
    const int left = it == kept.begin() ? 0 : *(it - 1);
    const int right = it == kept.end() ? n : *it;
    if (b - left >= min_len && right - b >= min_len) kept.insert(it, b);
  }
  return Segmentation(n, std::move(kept));
}

}  // namespace dialseg
