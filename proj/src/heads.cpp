#include "dialseg/heads.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dialseg {

using json = nlohmann::json;

Heads Heads::initialized(Eigen::Index d_base, Eigen::Index d_topic, std::uint64_t seed) {
  // Separate streams for the two heads.
  return {ProjectionHeadd::initialized(d_base, d_topic, seed),
          CoherenceHeadd::initialized(d_base, seed ^ 0x9e3779b97f4a7c15ULL)};
}

void Heads::validate() const {
  if (projection.weight.rows() != projection.bias.size()) {
    throw InvalidArgument("projection bias has " + std::to_string(projection.bias.size()) +
                          " entries for " + std::to_string(projection.weight.rows()) + " rows");
  }
  if (coherence.M.rows() != coherence.M.cols()) {
    throw InvalidArgument("coherence matrix must be square");
  }
  if (coherence.M.rows() != projection.weight.cols()) {
    throw InvalidArgument("coherence matrix is " + std::to_string(coherence.M.rows()) +
                          "-dimensional, projection expects d_base " +
                          std::to_string(projection.weight.cols()));
  }
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw InvalidArgument(std::string("\"") + name + "\" must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidArgument(std::string("\"") + name + "\" row " + std::to_string(r) +
                            " must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string format_heads(const Heads& heads) {
  json obj;
  obj["d_base"] = heads.base_dimension();
  obj["d_topic"] = heads.topic_dimension();
  obj["weight"] = matrix_to_json(heads.projection.weight);
  obj["bias"] = std::vector<double>(heads.projection.bias.data(),
                                    heads.projection.bias.data() + heads.projection.bias.size());
  obj["M"] = matrix_to_json(heads.coherence.M);
  return obj.dump() + "\n";
}

Heads parse_heads(const std::string& json_text, const std::string& source) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  try {
    const auto d_base = obj.at("d_base").get<Eigen::Index>();
    const auto d_topic = obj.at("d_topic").get<Eigen::Index>();
    if (d_base < 1 || d_topic < 1) throw InvalidArgument("dimensions must be >= 1");
    Heads heads;
    heads.projection.weight = matrix_from_json(obj.at("weight"), d_topic, d_base, "weight");
    const auto& bias = obj.at("bias");
    if (!bias.is_array() || static_cast<Eigen::Index>(bias.size()) != d_topic) {
      throw InvalidArgument("\"bias\" must have d_topic entries");
    }
    heads.projection.bias.resize(d_topic);
    for (Eigen::Index k = 0; k < d_topic; ++k) {
      heads.projection.bias(k) = bias[static_cast<std::size_t>(k)].get<double>();
    }
    heads.coherence.M = matrix_from_json(obj.at("M"), d_base, d_base, "M");
    if (!heads.all_finite()) throw InvalidArgument("head parameters must be finite");
    return heads;
  } catch (const json::exception& e) {
    throw ParseError(source, 1, e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 1, e.what());
  }
}

void save_heads(const std::string& path, const Heads& heads) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << format_heads(heads);
}

Heads load_heads(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open head file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_heads(ss.str(), path);
}

}  // namespace dialseg
