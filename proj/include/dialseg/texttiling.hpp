#pragma once

#include <Eigen/Dense>

#include <string>

#include "dialseg/dialogue.hpp"

namespace dialseg {

enum class DepthStats {
  Positive,  // mean/std over strictly positive depths
  All,       // over every interval (Hearst's original)
};

struct TilingConfig {
  int smoothing_window = 1;  // odd, 1 disables smoothing
  double threshold_alpha = 0.5;
  int min_segment_utterances = 1;
  DepthStats stats_over = DepthStats::Positive;

  void validate() const;
};

DepthStats parse_depth_stats(const std::string& name);

// Centered moving average; windows are truncated at the series edges.
Eigen::VectorXd smooth(const Eigen::VectorXd& series, int window);

// depth_i = (left peak - r_i) + (right peak - r_i), where each peak is found
// by walking outward while the values do not decrease.
Eigen::VectorXd depth_scores(const Eigen::VectorXd& relevance, const TilingConfig& config);

// Cut threshold mu + alpha * sigma over the depths selected by stats_over.
double depth_threshold(const Eigen::VectorXd& depths, const TilingConfig& config);

// Boundaries are the intervals with positive depth at or above the threshold,
// then thinned to honor min_segment_utterances, strongest depth first.
Segmentation segment(const Eigen::VectorXd& relevance, const TilingConfig& config);

}  // namespace dialseg
