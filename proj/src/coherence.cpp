#include "dialseg/coherence.hpp"

#include <fstream>

#include <json.hpp>

namespace dialseg {

using json = nlohmann::json;

FileCoherence::FileCoherence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coherence file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    // Exporters may prefix a "#" comment line documenting the score mapping.
    if (line.front() == '#') continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path, line_no, e.what());
    }
    if (!obj.is_object() || !obj.contains("dialogue_id") || !obj["dialogue_id"].is_string() ||
        !obj.contains("interval") || !obj["interval"].is_number_integer() ||
        !obj.contains("score") || !obj["score"].is_number()) {
      throw ParseError(path, line_no,
                       R"(expected {"dialogue_id": string, "interval": int, "score": number})");
    }
    const double score = obj["score"].get<double>();
    if (!(score >= -1.0 && score <= 1.0)) {
      throw ParseError(path, line_no, "score must lie in [-1, 1]");
    }
    const int interval = obj["interval"].get<int>();
    if (interval < 1) {
      throw ParseError(path, line_no, "interval must be >= 1");
    }
    scores_[{obj["dialogue_id"].get<std::string>(), interval}] = score;
  }
}

double FileCoherence::score(const std::string& dialogue_id, int interval) const {
  auto it = scores_.find({dialogue_id, interval});
  if (it == scores_.end()) throw MissingScoreError(dialogue_id, interval);
  return it->second;
}

Eigen::VectorXd FileCoherence::series(const Dialogue& dialogue, const BaseMatrix&) const {
  Eigen::VectorXd out(std::max(0, dialogue.size() - 1));
  for (int i = 1; i < dialogue.size(); ++i) out(i - 1) = score(dialogue.id(), i);
  return out;
}

}  // namespace dialseg
