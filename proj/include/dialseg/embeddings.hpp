#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dialseg/dialogue.hpp"
#include "dialseg/errors.hpp"

namespace dialseg {

// Base embeddings of one dialogue: column j - 1 holds e_j.
using BaseMatrix = Eigen::MatrixXd;

// "dialogue_id:index", 1-based.
std::string embedding_key(std::string_view dialogue_id, int utterance);

class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual BaseMatrix embed(const Dialogue& dialogue) const = 0;
  virtual std::string describe() const = 0;
};

// Lowercased alphanumeric runs. Bytes >= 0x80 count as word characters so
// UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

// Seeded 64-bit token hash.
std::uint64_t hash_token(std::string_view token, std::uint64_t seed);

// Feature-hashed bag of words, L2-normalized. Needs no external assets.
class LexicalHashProvider final : public EmbeddingProvider {
public:
  LexicalHashProvider(Eigen::Index dimension, std::uint64_t seed);

  Eigen::Index dimension() const override { return dimension_; }
  BaseMatrix embed(const Dialogue& dialogue) const override;
  std::string describe() const override;

  Eigen::VectorXd embed_text(std::string_view text) const;

private:
  Eigen::Index dimension_;
  std::uint64_t seed_;
};

struct StoredEmbedding {
  std::string key;
  Eigen::VectorXd vector;
};

// Reads either the JSON Lines layout or the "UEB1" binary layout, detected
// from the leading magic bytes.
std::vector<StoredEmbedding> read_embedding_file(const std::string& path);
void write_embeddings_jsonl(const std::string& path,
                            const std::vector<StoredEmbedding>& entries);
// Vectors are narrowed to f32.
void write_embeddings_binary(const std::string& path,
                             const std::vector<StoredEmbedding>& entries);

class PrecomputedFileProvider final : public EmbeddingProvider {
public:
  explicit PrecomputedFileProvider(const std::string& path);

  Eigen::Index dimension() const override { return dimension_; }
  BaseMatrix embed(const Dialogue& dialogue) const override;
  std::string describe() const override { return "file:" + path_; }

  const Eigen::VectorXd& lookup(const std::string& key) const;

private:
  std::string path_;
  Eigen::Index dimension_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

// POST <endpoint>/embed {"texts": [...]} -> {"vectors": [[...], ...]}.
class HttpProvider final : public EmbeddingProvider {
public:
  explicit HttpProvider(std::string endpoint);

  // Probes the service once with a single text when not yet known.
  Eigen::Index dimension() const override;
  BaseMatrix embed(const Dialogue& dialogue) const override;
  std::string describe() const override { return "http:" + endpoint_; }

  std::vector<Eigen::VectorXd> embed_texts(const std::vector<std::string>& texts) const;

private:
  std::string endpoint_;
  std::string host_;  // scheme://host:port
  std::string path_prefix_;
  mutable std::mutex mutex_;
  mutable Eigen::Index dimension_ = 0;
};

// Parses "lexical", "file:PATH" or "http:URL".
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec,
                                                 Eigen::Index lexical_dimension,
                                                 std::uint64_t lexical_seed);

// Affine map from base space to topic space: h = W e + bias.
template <typename Scalar>
struct ProjectionHead {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weight;  // d_topic x d_base
  Vector bias;    // d_topic

  Eigen::Index base_dimension() const { return weight.cols(); }
  Eigen::Index topic_dimension() const { return weight.rows(); }

  // Uniform weights in [-1/sqrt(d_base), 1/sqrt(d_base)], zero bias.
  static ProjectionHead initialized(Eigen::Index d_base, Eigen::Index d_topic,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_base));
    std::uniform_real_distribution<double> dist(-bound, bound);
    ProjectionHead head{Matrix(d_topic, d_base), Vector::Zero(d_topic)};
    // Column-major fill keeps the draw order independent of Eigen internals.
    for (Eigen::Index c = 0; c < d_base; ++c) {
      for (Eigen::Index r = 0; r < d_topic; ++r) {
        head.weight(r, c) = static_cast<Scalar>(dist(rng));
      }
    }
    return head;
  }

  static ProjectionHead identity(Eigen::Index d) {
    return {Matrix::Identity(d, d), Vector::Zero(d)};
  }

  bool all_finite() const { return weight.allFinite() && bias.allFinite(); }
};

using ProjectionHeadd = ProjectionHead<double>;

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project(const ProjectionHead<Scalar>& head,
                                                 const Eigen::MatrixBase<Derived>& e) {
  if (e.size() != head.base_dimension()) {
    throw InvalidArgument("project: base dimension " + std::to_string(e.size()) +
                          " does not match head input " +
                          std::to_string(head.base_dimension()));
  }
  return head.weight * e + head.bias;
}

// Column-wise projection of a whole dialogue.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> project_all(
    const ProjectionHead<Scalar>& head, const Eigen::MatrixBase<Derived>& base) {
  if (base.rows() != head.base_dimension()) {
    throw InvalidArgument("project: base dimension " + std::to_string(base.rows()) +
                          " does not match head input " +
                          std::to_string(head.base_dimension()));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = head.weight * base;
  out.colwise() += head.bias;
  return out;
}

}  // namespace dialseg
