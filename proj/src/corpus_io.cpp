#include "dialseg/corpus_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dialseg/errors.hpp"

namespace dialseg {

using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

template <typename Fn>
void for_each_json_line(const std::string& text, const std::string& source, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line_no, "expected a JSON object");
    fn(obj, line_no);
  }
}

std::vector<int> read_boundaries(const json& obj, const std::string& source, std::size_t line_no) {
  const auto& b = obj["boundaries"];
  if (!b.is_array()) throw ParseError(source, line_no, "\"boundaries\" must be an array");
  std::vector<int> out;
  for (const auto& v : b) {
    if (!v.is_number_integer()) {
      throw ParseError(source, line_no, "\"boundaries\" must hold integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

std::vector<Dialogue> parse_corpus(const std::string& text, const std::string& source) {
  std::vector<Dialogue> corpus;
  std::set<std::string> seen;
  for_each_json_line(text, source, [&](const json& obj, std::size_t line_no) {
    if (!obj.contains("id") || !obj["id"].is_string()) {
      throw ParseError(source, line_no, "\"id\" must be a string");
    }
    if (!obj.contains("utterances") || !obj["utterances"].is_array()) {
      throw ParseError(source, line_no, "\"utterances\" must be an array of strings");
    }
    const auto id = obj["id"].get<std::string>();
    std::vector<std::string> utterances;
    for (const auto& u : obj["utterances"]) {
      if (!u.is_string()) {
        throw ParseError(source, line_no, "\"utterances\" must be an array of strings");
      }
      utterances.push_back(u.get<std::string>());
    }
    if (!seen.insert(id).second) throw DuplicateIdError(id);

    const int n = static_cast<int>(utterances.size());
    if (n == 0) throw InvalidDialogueError(id, "no utterances (line " + std::to_string(line_no) + ")");
    std::optional<Segmentation> gold;
    if (obj.contains("boundaries") && !obj["boundaries"].is_null()) {
      auto boundaries = read_boundaries(obj, source, line_no);
      try {
        validate_boundaries(n, boundaries);
      } catch (const InvalidArgument& e) {
        throw BoundaryError(id, e.what());
      }
      gold = Segmentation(n, std::move(boundaries));
    }
    try {
      corpus.emplace_back(id, std::move(utterances), std::move(gold));
    } catch (const InvalidArgument& e) {
      throw InvalidDialogueError(id, e.what());
    }
  });
  return corpus;
}

std::vector<Dialogue> load_corpus(const std::string& path) {
  return parse_corpus(read_file(path), path);
}

std::string format_corpus(const std::vector<Dialogue>& corpus) {
  std::string out;
  for (const auto& d : corpus) {
    json obj;
    obj["id"] = d.id();
    obj["utterances"] = d.utterances();
    if (d.gold()) obj["boundaries"] = d.gold()->boundaries();
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const std::string& path, const std::vector<Dialogue>& corpus) {
  write_file(path, format_corpus(corpus));
}

std::vector<RawPrediction> load_predictions(const std::string& path) {
  std::vector<RawPrediction> out;
  std::set<std::string> seen;
  for_each_json_line(read_file(path), path, [&](const json& obj, std::size_t line_no) {
    if (!obj.contains("id") || !obj["id"].is_string()) {
      throw ParseError(path, line_no, "\"id\" must be a string");
    }
    if (!obj.contains("boundaries")) {
      throw ParseError(path, line_no, "missing \"boundaries\"");
    }
    RawPrediction p{obj["id"].get<std::string>(), read_boundaries(obj, path, line_no)};
    if (!seen.insert(p.id).second) throw DuplicateIdError(p.id);
    out.push_back(std::move(p));
  });
  return out;
}

std::string format_predictions(const std::vector<LabeledSegmentation>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    json obj;
    obj["id"] = p.id;
    obj["boundaries"] = p.segmentation.boundaries();
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_predictions(const std::string& path, const std::vector<LabeledSegmentation>& predictions) {
  write_file(path, format_predictions(predictions));
}

std::vector<LabeledSegmentation> gold_segmentations(const std::vector<Dialogue>& corpus) {
  std::vector<LabeledSegmentation> out;
  std::string unlabeled;
  for (const auto& d : corpus) {
    if (!d.gold()) {
      unlabeled += (unlabeled.empty() ? "" : ", ") + d.id();
      continue;
    }
    out.push_back({d.id(), *d.gold()});
  }
  if (!unlabeled.empty()) {
    throw EvaluationError("reference dialogues without gold boundaries: " + unlabeled);
  }
  return out;
}

std::vector<LabeledSegmentation> bind_predictions(const std::vector<RawPrediction>& raw,
                                                  const std::vector<LabeledSegmentation>& references) {
  std::map<std::string, int> lengths;
  for (const auto& r : references) lengths[r.id] = r.segmentation.utterance_count();
  std::vector<LabeledSegmentation> out;
  std::string unknown;
  for (const auto& p : raw) {
    auto it = lengths.find(p.id);
    if (it == lengths.end()) {
      unknown += (unknown.empty() ? "" : ", ") + p.id;
      continue;
    }
    try {
      out.push_back({p.id, Segmentation(it->second, p.boundaries)});
    } catch (const InvalidArgument& e) {
      throw EvaluationError("hypothesis for '" + p.id + "' is invalid: " + e.what());
    }
  }
  if (!unknown.empty()) {
    throw EvaluationError("hypothesis ids missing from the reference: " + unknown);
  }
  return out;
}

// --- synthetic corpora ----------------------------------------------------------

void SyntheticSpec::validate() const {
  auto check_range = [](const IntRange& r, const char* name) {
    if (r.min < 1 || r.max < r.min) {
      throw InvalidArgument(std::string(name) + " range must satisfy 1 <= min <= max");
    }
  };
  if (dialogues < 1) throw InvalidArgument("synthetic spec needs at least one dialogue");
  check_range(segments_per_dialogue, "segments_per_dialogue");
  check_range(utterances_per_segment, "utterances_per_segment");
  check_range(tokens_per_utterance, "tokens_per_utterance");
  if (pool_size < 1) throw InvalidArgument("pool_size must be >= 1");
  if (!(adjacent_overlap >= 0.0 && adjacent_overlap <= 0.5)) {
    throw InvalidArgument("adjacent_overlap must lie in [0, 0.5]");
  }
  if (topics < segments_per_dialogue.max) {
    throw GenerationError("synthetic spec has " + std::to_string(topics) +
                          " topic pools but dialogues may need " +
                          std::to_string(segments_per_dialogue.max));
  }
}

namespace {

IntRange read_range(const json& obj, const char* key, IntRange fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (v.is_number_integer()) return {v.get<int>(), v.get<int>()};
  if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
    return {v[0].get<int>(), v[1].get<int>()};
  }
  if (v.is_object() && v.contains("min") && v.contains("max")) {
    return {v["min"].get<int>(), v["max"].get<int>()};
  }
  throw InvalidArgument(std::string("\"") + key + "\" must be an integer, [min, max] or {\"min\", \"max\"}");
}

// Pronounceable, collision-free word for a vocabulary index: base-70
// syllables, most significant first, at least two syllables.
std::string vocabulary_word(int index) {
  static constexpr const char* kConsonants = "bdfgklmnprstvz";
  static constexpr const char* kVowels = "aeiou";
  constexpr int kSyllables = 14 * 5;
  constexpr int kTwoSyllables = kSyllables * kSyllables;
  // Bijective scramble within each block of two-syllable words.
  int rest = (index / kTwoSyllables) * kTwoSyllables + (index % kTwoSyllables * 2971 + 137) % kTwoSyllables;
  std::string word;
  do {
    const int syllable = rest % kSyllables;
    rest /= kSyllables;
    word.insert(0, {kConsonants[syllable / 5], kVowels[syllable % 5]});
  } while (rest > 0 || word.size() < 4);
  return word;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("synthetic spec", 1, e.what());
  }
  if (!obj.is_object()) throw ParseError("synthetic spec", 1, "expected a JSON object");
  SyntheticSpec spec;
  try {
    if (obj.contains("dialogues")) spec.dialogues = obj["dialogues"].get<int>();
    spec.segments_per_dialogue = read_range(obj, "segments_per_dialogue", spec.segments_per_dialogue);
    spec.utterances_per_segment = read_range(obj, "utterances_per_segment", spec.utterances_per_segment);
    spec.tokens_per_utterance = read_range(obj, "tokens_per_utterance", spec.tokens_per_utterance);
    if (obj.contains("topics")) spec.topics = obj["topics"].get<int>();
    if (obj.contains("pool_size")) spec.pool_size = obj["pool_size"].get<int>();
    if (obj.contains("adjacent_overlap")) spec.adjacent_overlap = obj["adjacent_overlap"].get<double>();
    if (obj.contains("seed")) spec.seed = obj["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError("synthetic spec", 1, e.what());
  }
  spec.validate();
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  return parse_synthetic_spec(read_file(path));
}

std::vector<std::vector<std::string>> topic_pools(const SyntheticSpec& spec) {
  spec.validate();
  const int shared = static_cast<int>(std::lround(spec.pool_size * spec.adjacent_overlap));
  const int stride = spec.pool_size - shared;
  const int vocabulary = spec.topics * stride;
  std::vector<std::vector<std::string>> pools(static_cast<std::size_t>(spec.topics));
  for (int t = 0; t < spec.topics; ++t) {
    for (int j = 0; j < spec.pool_size; ++j) {
      pools[static_cast<std::size_t>(t)].push_back(vocabulary_word((t * stride + j) % vocabulary));
    }
  }
  return pools;
}

std::vector<Dialogue> generate_synthetic(const SyntheticSpec& spec) {
  const auto pools = topic_pools(spec);
  std::mt19937_64 rng(spec.seed);
  auto draw = [&rng](IntRange r) { return std::uniform_int_distribution<int>(r.min, r.max)(rng); };

  std::vector<Dialogue> corpus;
  corpus.reserve(static_cast<std::size_t>(spec.dialogues));
  for (int d = 0; d < spec.dialogues; ++d) {
    const int segments = draw(spec.segments_per_dialogue);
    const int first_topic = std::uniform_int_distribution<int>(0, spec.topics - 1)(rng);
    std::vector<std::string> utterances;
    std::vector<int> boundaries;
    for (int s = 0; s < segments; ++s) {
      const auto& pool = pools[static_cast<std::size_t>((first_topic + s) % spec.topics)];
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const int length = draw(spec.utterances_per_segment);
      for (int u = 0; u < length; ++u) {
        const int tokens = draw(spec.tokens_per_utterance);
        std::string text;
        for (int k = 0; k < tokens; ++k) {
          if (k > 0) text += ' ';
          text += pool[pick(rng)];
        }
        text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
        text += '.';
        utterances.push_back(std::move(text));
      }
      if (s + 1 < segments) boundaries.push_back(static_cast<int>(utterances.size()));
    }
    char id[32];
    std::snprintf(id, sizeof id, "synth-%04d", d + 1);
    const int n = static_cast<int>(utterances.size());
    corpus.emplace_back(id, std::move(utterances), Segmentation(n, std::move(boundaries)));
  }
  return corpus;
}

}  // namespace dialseg
