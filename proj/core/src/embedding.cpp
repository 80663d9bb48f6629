#include "ragmcp/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "ragmcp/errors.hpp"
#include "ragmcp/tokens.hpp"

namespace ragmcp {

EmbeddingVector EmbeddingVector::normalized(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w * w;
  EmbeddingVector out(weights.size());
  if (sum == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sum);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.values_[i] = static_cast<float>(weights[i] * inv);
  }
  return out;
}

EmbeddingVector EmbeddingVector::from_values(std::vector<float> values) {
  EmbeddingVector out;
  out.values_ = std::move(values);
  if (!std::all_of(out.values_.begin(), out.values_.end(), [](float v) { return std::isfinite(v); })) {
    throw std::invalid_argument("embedding vector has non-finite values");
  }
  if (!out.is_zero() && std::abs(out.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("embedding vector is neither zero nor unit norm");
  }
  return out;
}

bool EmbeddingVector::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return v == 0.0f; });
}

double EmbeddingVector::norm() const noexcept {
  double sum = 0.0;
  for (float v : values_) sum += static_cast<double>(v) * v;
  return std::sqrt(sum);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch(a.dimension(), b.dimension());
  const auto x = a.values();
  const auto y = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += static_cast<double>(x[i]) * y[i];
  return std::clamp(dot, -1.0, 1.0);
}

std::string_view to_string(EmbedderBackend backend) {
  return backend == EmbedderBackend::HashedTfidf ? "hashed_tfidf" : "external_api";
}

EmbedderBackend parse_embedder_backend(std::string_view text) {
  if (text == "hashed_tfidf") return EmbedderBackend::HashedTfidf;
  if (text == "external_api") return EmbedderBackend::ExternalApi;
  throw ConfigError("unknown embedder backend '" + std::string(text) + "'");
}

void EmbedderConfig::validate() const {
  if (dimension < 8) throw ConfigError("embedder dimension must be >= 8");
  if (backend == EmbedderBackend::ExternalApi && api_endpoint.empty()) {
    throw ConfigError("external_api embedder needs an endpoint (RAGMCP_EMBED_ENDPOINT)");
  }
}

EmbedderConfig EmbedderConfig::with_environment() const {
  EmbedderConfig out = *this;
  if (out.api_endpoint.empty()) {
    if (const char* v = std::getenv("RAGMCP_EMBED_ENDPOINT")) out.api_endpoint = v;
  }
  if (out.api_model.empty()) {
    if (const char* v = std::getenv("RAGMCP_EMBED_MODEL")) out.api_model = v;
  }
  return out;
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

HashedTfidfEmbedder::HashedTfidfEmbedder(
    std::size_t dimension, std::size_t document_count,
    std::map<std::string, std::size_t, std::less<>> document_frequency)
    : dimension_(dimension),
      document_count_(document_count),
      document_frequency_(std::move(document_frequency)) {
  if (dimension_ < 8) throw ConfigError("embedder dimension must be >= 8");
}

std::size_t HashedTfidfEmbedder::document_frequency(std::string_view token) const {
  const auto it = document_frequency_.find(token);
  return it == document_frequency_.end() ? 0 : it->second;
}

double HashedTfidfEmbedder::idf(std::string_view token) const {
  return std::log(1.0 + static_cast<double>(document_count_) /
                            (1.0 + static_cast<double>(document_frequency(token))));
}

EmbeddingVector HashedTfidfEmbedder::embed(std::string_view text) const {
  // Term frequencies keyed in sorted order, so collisions accumulate in the
  // same order regardless of token order in the text.
  std::map<std::string, std::size_t, std::less<>> tf;
  for (auto& token : tokenize(text)) ++tf[std::move(token)];
  std::vector<double> weights(dimension_, 0.0);
  for (const auto& [token, count] : tf) {
    weights[fnv1a64(token) % dimension_] += static_cast<double>(count) * idf(token);
  }
  return EmbeddingVector::normalized(weights);
}

ExternalApiEmbedder::ExternalApiEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  config_.validate();
}

EmbeddingVector ExternalApiEmbedder::embed(std::string_view text) const {
  const std::string one(text);
  return embed_batch(std::span<const std::string>(&one, 1)).front();
}

std::vector<EmbeddingVector> ExternalApiEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  using json = nlohmann::json;
  const json request = {{"model", config_.api_model},
                        {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto reply = detail::post_json(config_.api_endpoint, request.dump(), config_.timeout);
  if (reply.status < 200 || reply.status >= 300) {
    throw TransportError("embedding endpoint returned HTTP " + std::to_string(reply.status));
  }
  json body;
  try {
    body = json::parse(reply.body);
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what());
  }
  const auto rows = body.find("embeddings");
  if (rows == body.end() || !rows->is_array() || rows->size() != texts.size()) {
    throw TransportError("malformed embedding response: expected " +
                         std::to_string(texts.size()) + " embeddings");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& row : *rows) {
    if (!row.is_array() || row.size() != config_.dimension) {
      throw TransportError("malformed embedding response: expected dimension " +
                           std::to_string(config_.dimension));
    }
    std::vector<double> weights;
    weights.reserve(row.size());
    for (const auto& v : row) {
      if (!v.is_number()) throw TransportError("malformed embedding response: non-numeric value");
      weights.push_back(v.get<double>());
    }
    out.push_back(EmbeddingVector::normalized(weights));
  }
  return out;
}

std::shared_ptr<const Embedder> fit_corpus(std::span<const ToolDocument> documents,
                                           const EmbedderConfig& config) {
  config.validate();
  if (config.backend == EmbedderBackend::ExternalApi) {
    return std::make_shared<ExternalApiEmbedder>(config);
  }
  if (documents.empty()) throw EmptyCorpus();
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& doc : documents) {
    auto tokens = tokenize(doc.text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[std::move(t)];
  }
  return std::make_shared<HashedTfidfEmbedder>(config.dimension, documents.size(), std::move(df));
}

}  // namespace ragmcp
