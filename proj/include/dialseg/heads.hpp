#pragma once

#include <cstdint>
#include <string>

#include "dialseg/coherence.hpp"
#include "dialseg/embeddings.hpp"

namespace dialseg {

// The two trainable heads. Value type: copies are immutable snapshots.
struct Heads {
  ProjectionHeadd projection;
  CoherenceHeadd coherence;

  Eigen::Index base_dimension() const { return projection.base_dimension(); }
  Eigen::Index topic_dimension() const { return projection.topic_dimension(); }

  static Heads initialized(Eigen::Index d_base, Eigen::Index d_topic, std::uint64_t seed);

  // Throws InvalidArgument when the shapes disagree with each other.
  void validate() const;
  bool all_finite() const { return projection.all_finite() && coherence.all_finite(); }

  friend bool operator==(const Heads& a, const Heads& b) {
    return a.projection.weight == b.projection.weight && a.projection.bias == b.projection.bias &&
           a.coherence.M == b.coherence.M;
  }
};

// {"d_base", "d_topic", "weight": [[...]], "bias": [...], "M": [[...]]}
std::string format_heads(const Heads& heads);
Heads parse_heads(const std::string& json_text, const std::string& source = "<memory>");
void save_heads(const std::string& path, const Heads& heads);
Heads load_heads(const std::string& path);

}  // namespace dialseg
