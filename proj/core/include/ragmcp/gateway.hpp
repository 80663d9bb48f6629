#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragmcp/embedding.hpp"
#include "ragmcp/index.hpp"
#include "ragmcp/registry.hpp"
#include "ragmcp/selection.hpp"

namespace ragmcp {

struct RetrieveRequest {
  std::string query;
  std::size_t k = 1;
  StrategyKind strategy = StrategyKind::RagMcp;
  bool validate = true;  // schema-level only
};

// Throws std::invalid_argument on missing query, k < 1 or an unknown strategy.
RetrieveRequest retrieve_request_from_json(const nlohmann::json& body);
nlohmann::json to_json(const RetrieveRequest& request);

struct RetrieveCandidate {
  std::string schema_id;
  double score = 0.0;
  ValidationStatus validation = ValidationStatus::Skipped;

  friend bool operator==(const RetrieveCandidate&, const RetrieveCandidate&) = default;
};

struct RetrieveResponse {
  std::vector<RetrieveCandidate> candidates;  // score desc, id asc
  std::optional<std::string> chosen;
  std::string prompt_text;
  std::size_t prompt_tokens = 0;
};

nlohmann::json to_json(const RetrieveResponse& response);

// Immutable registry + fitted embedder + index. The embedder is fitted on the
// registry's own documents, so a catalog is a pure function of its registry
// and embedder config.
struct Catalog {
  Registry registry;
  std::shared_ptr<const Embedder> embedder;  // null when the registry is empty
  VectorIndex index;
};

std::shared_ptr<const Catalog> build_catalog(Registry registry, const EmbedderConfig& config);
// Reuses stored vectors instead of re-embedding the documents. Throws
// SnapshotError when the snapshot's ids or dimension disagree with the registry.
std::shared_ptr<const Catalog> build_catalog(Registry registry, const EmbedderConfig& config,
                                             VectorIndex stored);

// Library form of POST /retrieve: run_selection plus per-candidate cosine
// scores and validation status. Throws EmptyRegistry.
RetrieveResponse retrieve(const Catalog& catalog, const RetrieveRequest& request,
                          const Selector& selector);

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> registry_path;
  std::optional<std::filesystem::path> index_snapshot;
  EmbedderConfig embedder;
  bool persist_registry = false;
  std::size_t threads = 8;
  std::chrono::milliseconds validation_timeout{3000};
  std::optional<ChatSelectorConfig> chat_selector;
};

GatewayConfig gateway_config_from_json(const nlohmann::json& value,
                                       const std::filesystem::path& base_dir);
GatewayConfig load_gateway_config(const std::filesystem::path& path);

enum class Route { Health, ListServers, Register, Remove, Retrieve, Validate, Metrics };

// In-memory RAG-MCP service state. Reads take the current catalog snapshot and
// never wait for a writer; registrations and removals are serialised and
// publish a freshly built catalog before returning.
class Gateway {
 public:
  Gateway(Registry registry, EmbedderConfig embedder,
          std::unique_ptr<Selector> selector = std::make_unique<LexicalOverlapSelector>(),
          std::optional<VectorIndex> stored_index = std::nullopt);

  // Loads the registry (and optional index snapshot) named in the config.
  static std::unique_ptr<Gateway> from_config(const GatewayConfig& config);

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  std::shared_ptr<const Catalog> catalog() const;

  enum class RegisterStatus { Created, Replaced };

  // Throws RegistryError: InvalidField / EmptyTools for a bad schema,
  // DuplicateId when the id exists and replace is false.
  RegisterStatus register_server(McpSchema schema, bool replace = false);
  bool remove_server(std::string_view id);

  RetrieveResponse retrieve(const RetrieveRequest& request) const;
  std::optional<ValidationOutcome> validate(std::string_view id, bool live) const;

  // Mutations are written back to this registry file when set.
  void persist_to(std::filesystem::path path) { persist_path_ = std::move(path); }
  void set_validation_timeout(std::chrono::milliseconds timeout) { validation_timeout_ = timeout; }

  void count_request(Route route) const;
  void count_error() const { ++errors_; }
  nlohmann::json metrics() const;

 private:
  void publish(std::shared_ptr<const Catalog> next);

  EmbedderConfig embedder_config_;
  std::unique_ptr<Selector> selector_;
  std::chrono::milliseconds validation_timeout_{3000};
  std::optional<std::filesystem::path> persist_path_;

  std::mutex writer_;
  mutable std::mutex publish_;
  std::shared_ptr<const Catalog> current_;

  mutable std::atomic<std::uint64_t> requests_[7]{};
  mutable std::atomic<std::uint64_t> errors_{0};
  mutable std::atomic<std::uint64_t> retrieve_count_{0};
  mutable std::atomic<std::uint64_t> retrieve_micros_{0};
};

}  // namespace ragmcp
