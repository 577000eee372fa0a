#include "dialseg/metrics.hpp"

#include <algorithm>
#include <map>

#include "dialseg/errors.hpp"

namespace dialseg {

namespace {

// prefix[t] = number of boundaries b with b <= t, for t in [0, n].
std::vector<int> boundary_prefix(const Segmentation& seg) {
  std::vector<int> prefix(static_cast<std::size_t>(seg.utterance_count()) + 1, 0);
  for (int b : seg.boundaries()) prefix[static_cast<std::size_t>(b)] = 1;
  for (std::size_t t = 1; t < prefix.size(); ++t) prefix[t] += prefix[t - 1];
  return prefix;
}

void check_pair(const Segmentation& reference, const Segmentation& hypothesis, int k) {
  if (reference.utterance_count() != hypothesis.utterance_count()) {
    throw InvalidArgument("reference has " + std::to_string(reference.utterance_count()) +
                          " utterances, hypothesis " +
                          std::to_string(hypothesis.utterance_count()));
  }
  const int n = reference.utterance_count();
  if (k < 1 || k >= n) {
    throw InvalidArgument("window size " + std::to_string(k) + " outside [1, " +
                          std::to_string(n - 1) + "]");
  }
}

// Boundaries b with i <= b < i + k.
int count_in_window(const std::vector<int>& prefix, int i, int k) {
  return prefix[static_cast<std::size_t>(i + k - 1)] - prefix[static_cast<std::size_t>(i - 1)];
}

}  // namespace

int window_size(const Segmentation& reference) {
  const int n = reference.utterance_count();
  const int segments = reference.segment_count();
  // round(n / (2 * segments)), halves rounded up, in integer arithmetic.
  const int k = (n + segments) / (2 * segments);
  return std::clamp(k, 1, std::max(1, n - 1));
}

double pk(const Segmentation& reference, const Segmentation& hypothesis, int k) {
  check_pair(reference, hypothesis, k);
  const int n = reference.utterance_count();
  const auto ref = boundary_prefix(reference);
  const auto hyp = boundary_prefix(hypothesis);
  int misses = 0;
  for (int i = 1; i <= n - k; ++i) {
    const bool ref_same = count_in_window(ref, i, k) == 0;
    const bool hyp_same = count_in_window(hyp, i, k) == 0;
    if (ref_same != hyp_same) ++misses;
  }
  return static_cast<double>(misses) / static_cast<double>(n - k);
}

double window_diff(const Segmentation& reference, const Segmentation& hypothesis, int k) {
  check_pair(reference, hypothesis, k);
  const int n = reference.utterance_count();
  const auto ref = boundary_prefix(reference);
  const auto hyp = boundary_prefix(hypothesis);
  int misses = 0;
  for (int i = 1; i <= n - k; ++i) {
    if (count_in_window(ref, i, k) != count_in_window(hyp, i, k)) ++misses;
  }
  return static_cast<double>(misses) / static_cast<double>(n - k);
}

CorpusMetrics evaluate_corpus(const std::vector<LabeledSegmentation>& references,
                              const std::vector<LabeledSegmentation>& hypotheses) {
  std::map<std::string, const Segmentation*> by_id;
  for (const auto& h : hypotheses) by_id[h.id] = &h.segmentation;

  std::vector<std::string> missing;
  std::vector<std::string> mismatched;
  std::map<std::string, bool> known;
  for (const auto& r : references) {
    known[r.id] = true;
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      missing.push_back(r.id);
    } else if (it->second->utterance_count() != r.segmentation.utterance_count()) {
      mismatched.push_back(r.id);
    }
  }
  std::vector<std::string> extra;
  for (const auto& h : hypotheses) {
    if (!known.count(h.id)) extra.push_back(h.id);
  }
  if (!missing.empty() || !mismatched.empty() || !extra.empty()) {
    auto join = [](const std::vector<std::string>& ids) {
      std::string s;
      for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
      return s;
    };
    std::string what = "reference and hypothesis do not align;";
    if (!missing.empty()) what += " no hypothesis for: " + join(missing) + ";";
    if (!mismatched.empty()) what += " utterance count differs for: " + join(mismatched) + ";";
    if (!extra.empty()) what += " unknown ids in hypothesis: " + join(extra) + ";";
    throw EvaluationError(what);
  }

  CorpusMetrics out;
  for (const auto& r : references) {
    const Segmentation& ref = r.segmentation;
    if (ref.utterance_count() < 2) {
      ++out.skipped;
      continue;
    }
    const Segmentation& hyp = *by_id.at(r.id);
    const int k = window_size(ref);
    out.per_dialogue.push_back({r.id, {pk(ref, hyp, k), window_diff(ref, hyp, k), k}});
  }
  if (!out.per_dialogue.empty()) {
    for (const auto& d : out.per_dialogue) {
      out.pk += d.result.pk;
      out.window_diff += d.result.window_diff;
    }
    out.pk /= static_cast<double>(out.per_dialogue.size());
    out.window_diff /= static_cast<double>(out.per_dialogue.size());
  }
  return out;
}

}  // namespace dialseg
