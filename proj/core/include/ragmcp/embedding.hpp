#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragmcp/registry.hpp"

namespace ragmcp {

// Fixed-dimension vector, either all zeros or unit L2 norm (within 1e-6).
// Components are stored as 32-bit floats so that an on-disk snapshot reloads
// bit-identically.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::size_t dimension) : values_(dimension, 0.0f) {}

  // L2-normalises `weights`; an all-zero input stays all-zero.
  static EmbeddingVector normalized(std::span<const double> weights);
  // Takes stored components as-is. Throws std::invalid_argument when they are
  // neither all zero nor unit norm.
  static EmbeddingVector from_values(std::vector<float> values);

  std::span<const float> values() const noexcept { return values_; }
  std::size_t dimension() const noexcept { return values_.size(); }
  bool is_zero() const noexcept;
  double norm() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<float> values_;
};

// Dot product of two stored unit vectors (0 when either is all-zero), clamped
// to [-1, 1]. Throws DimensionMismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

enum class EmbedderBackend { HashedTfidf, ExternalApi };

std::string_view to_string(EmbedderBackend backend);
EmbedderBackend parse_embedder_backend(std::string_view text);

struct EmbedderConfig {
  EmbedderBackend backend = EmbedderBackend::HashedTfidf;
  std::size_t dimension = 1024;
  std::string api_endpoint;
  std::string api_model;
  std::chrono::milliseconds timeout{10000};

  // Throws ConfigError when dimension < 8 or the external backend has no endpoint.
  void validate() const;
  // Fills api_endpoint / api_model from RAGMCP_EMBED_ENDPOINT / RAGMCP_EMBED_MODEL
  // when they are unset.
  EmbedderConfig with_environment() const;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dimension() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
};

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

// Hashing-trick tf-idf. For each distinct token t of the text:
//   slot = fnv1a64(t) mod D,  weight[slot] += tf(t) * ln(1 + N / (1 + df(t)))
// where N and df come from the fitted corpus; the result is L2-normalised.
class HashedTfidfEmbedder final : public Embedder {
 public:
  HashedTfidfEmbedder(std::size_t dimension, std::size_t document_count,
                      std::map<std::string, std::size_t, std::less<>> document_frequency);

  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override;

  std::size_t document_count() const noexcept { return document_count_; }
  std::size_t document_frequency(std::string_view token) const;
  double idf(std::string_view token) const;
  const std::map<std::string, std::size_t, std::less<>>& document_frequencies() const noexcept {
    return document_frequency_;
  }

  friend bool operator==(const HashedTfidfEmbedder& a, const HashedTfidfEmbedder& b) {
    return a.dimension_ == b.dimension_ && a.document_count_ == b.document_count_ &&
           a.document_frequency_ == b.document_frequency_;
  }

 private:
  std::size_t dimension_;
  std::size_t document_count_;
  std::map<std::string, std::size_t, std::less<>> document_frequency_;
};

// Client for an embedding service: POST {"model", "input": [text...]} and
// expects {"embeddings": [[number...]...]}. Returned vectors are normalised.
// Transport failures and malformed replies throw TransportError.
class ExternalApiEmbedder final : public Embedder {
 public:
  explicit ExternalApiEmbedder(EmbedderConfig config);

  std::size_t dimension() const override { return config_.dimension; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  EmbedderConfig config_;
};

// Builds an embedder for `config`. hashed_tfidf collects document frequencies
// over `documents` (throws EmptyCorpus when there are none); external_api
// ignores the corpus and only fails once it is first called.
std::shared_ptr<const Embedder> fit_corpus(std::span<const ToolDocument> documents,
                                           const EmbedderConfig& config);

}  // namespace ragmcp
