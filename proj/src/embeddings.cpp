#include "dialseg/embeddings.hpp"

#include <array>
#include <cctype>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace dialseg {

using json = nlohmann::json;

std::string embedding_key(std::string_view dialogue_id, int utterance) {
  std::string key(dialogue_id);
  key += ':';
  key += std::to_string(utterance);
  return key;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

std::uint64_t hash_token(std::string_view token, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (char ch : token) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

LexicalHashProvider::LexicalHashProvider(Eigen::Index dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension < 1) {
    throw InvalidArgument("lexical provider dimension must be >= 1");
  }
}

std::string LexicalHashProvider::describe() const {
  return "lexical(d=" + std::to_string(dimension_) + ", seed=" + std::to_string(seed_) + ")";
}

Eigen::VectorXd LexicalHashProvider::embed_text(std::string_view text) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension_);
  const auto tokens = tokenize(text);
  if (tokens.empty()) return v;
  const double weight = 1.0 / std::sqrt(static_cast<double>(tokens.size()));
  const auto buckets = static_cast<std::uint64_t>(dimension_);
  for (const auto& token : tokens) {
    v(static_cast<Eigen::Index>(hash_token(token, seed_) % buckets)) += weight;
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

BaseMatrix LexicalHashProvider::embed(const Dialogue& dialogue) const {
  BaseMatrix out(dimension_, dialogue.size());
  for (int i = 1; i <= dialogue.size(); ++i) {
    out.col(i - 1) = embed_text(dialogue.utterance(i));
  }
  return out;
}

// --- precomputed files --------------------------------------------------------

namespace {

constexpr std::array<char, 4> kMagic{'U', 'E', 'B', '1'};

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw ParseError(path, 0, "truncated binary embedding file");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::vector<StoredEmbedding> read_binary(std::istream& in, const std::string& path) {
  const std::uint32_t dim = read_u32(in, path);
  const std::uint32_t count = read_u32(in, path);
  std::vector<StoredEmbedding> entries;
  entries.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint32_t key_len = read_u32(in, path);
    std::string key(key_len, '\0');
    if (!in.read(key.data(), key_len)) {
      throw ParseError(path, r + 1, "truncated key in record");
    }
    Eigen::VectorXd v(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      const float f = std::bit_cast<float>(read_u32(in, path));
      if (!std::isfinite(f)) {
        throw ParseError(path, r + 1, "non-finite value for key '" + key + "'");
      }
      v(k) = static_cast<double>(f);
    }
    entries.push_back({std::move(key), std::move(v)});
  }
  return entries;
}

std::vector<StoredEmbedding> read_jsonl(std::istream& in, const std::string& path) {
  std::vector<StoredEmbedding> entries;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path, line_no, e.what());
    }
    if (!obj.is_object() || !obj.contains("key") || !obj["key"].is_string() ||
        !obj.contains("vec") || !obj["vec"].is_array()) {
      throw ParseError(path, line_no, R"(expected {"key": string, "vec": [number, ...]})");
    }
    const auto& vec = obj["vec"];
    const auto size = static_cast<Eigen::Index>(vec.size());
    if (dim < 0) dim = size;
    if (size != dim) {
      throw ParseError(path, line_no,
                       "vector length " + std::to_string(size) + " differs from " +
                           std::to_string(dim));
    }
    Eigen::VectorXd v(size);
    for (Eigen::Index k = 0; k < size; ++k) {
      const auto& x = vec[static_cast<std::size_t>(k)];
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        throw ParseError(path, line_no, "vector entries must be finite numbers");
      }
      v(k) = x.get<double>();
    }
    entries.push_back({obj["key"].get<std::string>(), std::move(v)});
  }
  return entries;
}

}  // namespace

std::vector<StoredEmbedding> read_embedding_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  std::array<char, 4> head{};
  in.read(head.data(), 4);
  if (in.gcount() == 4 && head == kMagic) {
    return read_binary(in, path);
  }
  in.clear();
  in.seekg(0);
  return read_jsonl(in, path);
}

void write_embeddings_jsonl(const std::string& path,
                            const std::vector<StoredEmbedding>& entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (const auto& e : entries) {
    json obj;
    obj["key"] = e.key;
    obj["vec"] = std::vector<double>(e.vector.data(), e.vector.data() + e.vector.size());
    out << obj.dump() << '\n';
  }
}

void write_embeddings_binary(const std::string& path,
                             const std::vector<StoredEmbedding>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  const auto dim = entries.empty() ? 0u : static_cast<std::uint32_t>(entries.front().vector.size());
  out.write(kMagic.data(), 4);
  write_u32(out, dim);
  write_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (static_cast<std::uint32_t>(e.vector.size()) != dim) {
      throw InvalidArgument("binary embedding file needs equal vector lengths");
    }
    write_u32(out, static_cast<std::uint32_t>(e.key.size()));
    out.write(e.key.data(), static_cast<std::streamsize>(e.key.size()));
    for (Eigen::Index k = 0; k < e.vector.size(); ++k) {
      write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(e.vector(k))));
    }
  }
}

PrecomputedFileProvider::PrecomputedFileProvider(const std::string& path) : path_(path) {
  auto entries = read_embedding_file(path);
  if (entries.empty()) {
    throw ParseError(path, 0, "embedding file holds no vectors");
  }
  dimension_ = entries.front().vector.size();
  for (auto& e : entries) {
    vectors_.insert_or_assign(std::move(e.key), std::move(e.vector));
  }
}

const Eigen::VectorXd& PrecomputedFileProvider::lookup(const std::string& key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw MissingEmbeddingError(key);
  return it->second;
}

BaseMatrix PrecomputedFileProvider::embed(const Dialogue& dialogue) const {
  BaseMatrix out(dimension_, dialogue.size());
  for (int i = 1; i <= dialogue.size(); ++i) {
    out.col(i - 1) = lookup(embedding_key(dialogue.id(), i));
  }
  return out;
}

// --- http ---------------------------------------------------------------------

HttpProvider::HttpProvider(std::string endpoint) : endpoint_(std::move(endpoint)) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  const auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("http endpoint needs a scheme, got '" + endpoint_ + "'");
  }
  const auto path_start = endpoint_.find('/', scheme_end + 3);
  host_ = endpoint_.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : endpoint_.substr(path_start);
}

std::vector<Eigen::VectorXd> HttpProvider::embed_texts(
    const std::vector<std::string>& texts) const {
  httplib::Client client(host_);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  const json body{{"texts", texts}};
  auto res = client.Post(path_prefix_ + "/embed", body.dump(), "application/json");
  if (!res) {
    throw TransportError(endpoint_, 0, httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError(endpoint_, res->status, res->body.substr(0, 200));
  }
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw TransportError(endpoint_, res->status, std::string("malformed reply: ") + e.what());
  }
  if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
      reply["vectors"].size() != texts.size()) {
    throw TransportError(endpoint_, res->status,
                         "reply must carry one vector per text under \"vectors\"");
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(texts.size());
  for (const auto& row : reply["vectors"]) {
    if (!row.is_array()) {
      throw TransportError(endpoint_, res->status, "vector entries must be arrays");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!row[k].is_number()) {
        throw TransportError(endpoint_, res->status, "vector entries must be numbers");
      }
      v(static_cast<Eigen::Index>(k)) = static_cast<double>(row[k].get<float>());
    }
    if (!out.empty() && v.size() != out.front().size()) {
      throw TransportError(endpoint_, res->status, "vectors differ in length");
    }
    out.push_back(std::move(v));
  }
  return out;
}

Eigen::Index HttpProvider::dimension() const {
  {
    std::lock_guard lock(mutex_);
    if (dimension_ > 0) return dimension_;
  }
  const auto probe = embed_texts({"dimension probe"});
  std::lock_guard lock(mutex_);
  dimension_ = probe.front().size();
  return dimension_;
}

BaseMatrix HttpProvider::embed(const Dialogue& dialogue) const {
  const auto vectors = embed_texts(dialogue.utterances());
  const Eigen::Index dim = vectors.front().size();
  {
    std::lock_guard lock(mutex_);
    if (dimension_ == 0) dimension_ = dim;
    if (dimension_ != dim) {
      throw TransportError(endpoint_, 200, "vector length changed between calls");
    }
  }
  BaseMatrix out(dim, dialogue.size());
  for (int i = 0; i < dialogue.size(); ++i) out.col(i) = vectors[static_cast<std::size_t>(i)];
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec,
                                                 Eigen::Index lexical_dimension,
                                                 std::uint64_t lexical_seed) {
  if (spec == "lexical") {
    return std::make_unique<LexicalHashProvider>(lexical_dimension, lexical_seed);
  }
  if (spec.rfind("file:", 0) == 0) {
    return std::make_unique<PrecomputedFileProvider>(spec.substr(5));
  }
  if (spec.rfind("http:", 0) == 0) {
    std::string url = spec.substr(5);
    // Accept both "http:http://host" and "http://host".
    if (url.rfind("//", 0) == 0) url = "http:" + url;
    return std::make_unique<HttpProvider>(url);
  }
  throw InvalidArgument("unknown provider '" + spec + "' (expected lexical, file:PATH or http:URL)");
}

}  // namespace dialseg
