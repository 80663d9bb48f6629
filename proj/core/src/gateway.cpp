#include "ragmcp/gateway.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "ragmcp/errors.hpp"
#include "ragmcp/stress.hpp"
#include "ragmcp/tokens.hpp"

namespace ragmcp {
namespace {

using json = nlohmann::json;

std::shared_ptr<const Catalog> assemble(Registry registry, const EmbedderConfig& config,
                                        std::optional<VectorIndex> stored) {
  auto catalog = std::make_shared<Catalog>();
  catalog->index = VectorIndex(config.dimension);
  if (!registry.empty()) {
    const auto documents = registry.documents();
    catalog->embedder = fit_corpus(documents, config);
    if (stored) {
      if (stored->dimension() != config.dimension) {
        throw SnapshotError("index snapshot dimension " + std::to_string(stored->dimension()) +
                            " does not match embedder dimension " +
                            std::to_string(config.dimension));
      }
      if (stored->size() != registry.size()) {
        throw SnapshotError("index snapshot has " + std::to_string(stored->size()) +
                            " entries, registry has " + std::to_string(registry.size()));
      }
      for (const auto& schema : registry) {
        if (!stored->contains(schema.id)) {
          throw SnapshotError("index snapshot is missing '" + schema.id + "'");
        }
      }
      catalog->index = std::move(*stored);
    } else {
      std::vector<std::string> texts;
      texts.reserve(documents.size());
      for (const auto& d : documents) texts.push_back(d.text);
      auto vectors = catalog->embedder->embed_batch(texts);
      for (std::size_t i = 0; i < documents.size(); ++i) {
        catalog->index.add(documents[i].schema_id, std::move(vectors[i]));
      }
    }
  }
  catalog->registry = std::move(registry);
  return catalog;
}

}  // namespace

RetrieveRequest retrieve_request_from_json(const json& body) {
  if (!body.is_object()) throw std::invalid_argument("request body must be a JSON object");
  RetrieveRequest req;
  const auto query = body.find("query");
  if (query == body.end() || !query->is_string()) {
    throw std::invalid_argument("\"query\" (string) is required");
  }
  req.query = query->get<std::string>();
  if (const auto it = body.find("k"); it != body.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1) {
      throw std::invalid_argument("\"k\" must be an integer >= 1");
    }
    req.k = it->get<std::size_t>();
  }
  if (const auto it = body.find("strategy"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) throw std::invalid_argument("\"strategy\" must be a string");
    try {
      req.strategy = parse_strategy_kind(it->get<std::string>());
    } catch (const ConfigError& e) {
      throw std::invalid_argument(e.what());
    }
  }
  if (const auto it = body.find("validate"); it != body.end() && !it->is_null()) {
    if (!it->is_boolean()) throw std::invalid_argument("\"validate\" must be a boolean");
    req.validate = it->get<bool>();
  }
  return req;
}

json to_json(const RetrieveRequest& request) {
  return {{"query", request.query},
          {"k", request.k},
          {"strategy", to_string(request.strategy)},
          {"validate", request.validate}};
}

json to_json(const RetrieveResponse& response) {
  json candidates = json::array();
  for (const auto& c : response.candidates) {
    candidates.push_back(
        {{"schema_id", c.schema_id}, {"score", c.score}, {"validation", to_string(c.validation)}});
  }
  return {{"candidates", std::move(candidates)},
          {"chosen", response.chosen ? json(*response.chosen) : json(nullptr)},
          {"prompt_text", response.prompt_text},
          {"prompt_tokens", response.prompt_tokens}};
}

std::shared_ptr<const Catalog> build_catalog(Registry registry, const EmbedderConfig& config) {
  return assemble(std::move(registry), config, std::nullopt);
}

std::shared_ptr<const Catalog> build_catalog(Registry registry, const EmbedderConfig& config,
                                             VectorIndex stored) {
  return assemble(std::move(registry), config, std::move(stored));
}

RetrieveResponse retrieve(const Catalog& catalog, const RetrieveRequest& request,
                          const Selector& selector) {
  if (catalog.registry.empty() || !catalog.embedder) throw EmptyRegistry();
  if (request.k == 0) throw std::invalid_argument("k must be >= 1");

  const Strategy strategy{request.strategy, request.k};
  auto selection = run_selection(strategy, request.query, catalog.registry, catalog.index,
                                 *catalog.embedder, selector);

  const auto query_vector = catalog.embedder->embed(request.query);
  RetrieveResponse response;
  response.candidates.reserve(selection.presented.size());
  for (const auto& id : selection.presented) {
    RetrieveCandidate c;
    c.schema_id = id;
    c.score = catalog.index.score(id, query_vector).value_or(0.0);
    if (request.validate) {
      c.validation = validate_candidate(*catalog.registry.find(id)).status;
    }
    response.candidates.push_back(std::move(c));
  }
  std::stable_sort(response.candidates.begin(), response.candidates.end(),
                   [](const RetrieveCandidate& a, const RetrieveCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.schema_id < b.schema_id;
                   });
  response.chosen = std::move(selection.chosen);
  response.prompt_text = std::move(selection.prompt_text);
  response.prompt_tokens = selection.prompt_tokens;
  return response;
}

GatewayConfig gateway_config_from_json(const json& value, const std::filesystem::path& base_dir) {
  if (!value.is_object()) throw ConfigError("gateway config must be an object");
  GatewayConfig config;
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path = p;
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    config.host = value.value("host", config.host);
    config.port = value.value("port", config.port);
    if (const auto it = value.find("registry"); it != value.end() && !it->is_null()) {
      config.registry_path = resolve(it->get<std::string>());
    }
    if (const auto it = value.find("index_snapshot"); it != value.end() && !it->is_null()) {
      config.index_snapshot = resolve(it->get<std::string>());
    }
    config.embedder = embedder_config_from_json(value.value("embedder", json()));
    config.persist_registry = value.value("persist_registry", false);
    config.threads = value.value("threads", config.threads);
    config.validation_timeout =
        std::chrono::milliseconds(value.value("validation_timeout_ms", std::int64_t{3000}));
    if (const auto it = value.find("selector"); it != value.end() && !it->is_null()) {
      if (it->value("kind", std::string("lexical")) == "chat") {
        ChatSelectorConfig chat;
        chat.endpoint = it->value("endpoint", std::string());
        chat.model = it->value("model", std::string());
        config.chat_selector = chat.with_environment();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("gateway config: ") + e.what());
  }
  if (config.port < 0 || config.port > 65535) throw ConfigError("port out of range");
  if (config.persist_registry && !config.registry_path) {
    throw ConfigError("persist_registry needs a registry path");
  }
  return config;
}

GatewayConfig load_gateway_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json value;
  try {
    value = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": parse error at byte " +
                      std::to_string(e.byte));
  }
  return gateway_config_from_json(value, path.parent_path());
}

Gateway::Gateway(Registry registry, EmbedderConfig embedder, std::unique_ptr<Selector> selector,
                 std::optional<VectorIndex> stored_index)
    : embedder_config_(std::move(embedder)), selector_(std::move(selector)) {
  current_ = assemble(std::move(registry), embedder_config_, std::move(stored_index));
}

std::unique_ptr<Gateway> Gateway::from_config(const GatewayConfig& config) {
  Registry registry;
  if (config.registry_path) {
    if (config.persist_registry && !std::filesystem::exists(*config.registry_path)) {
      registry = Registry({}, now_ms());
    } else {
      registry = load_registry_file(*config.registry_path);
    }
  }
  std::optional<VectorIndex> stored;
  if (config.index_snapshot) stored = load_snapshot_file(*config.index_snapshot);

  std::unique_ptr<Selector> selector;
  if (config.chat_selector) {
    selector = std::make_unique<ChatCompletionSelector>(*config.chat_selector);
  } else {
    selector = std::make_unique<LexicalOverlapSelector>();
  }
  auto gateway = std::make_unique<Gateway>(std::move(registry), config.embedder,
                                           std::move(selector), std::move(stored));
  gateway->set_validation_timeout(config.validation_timeout);
  if (config.persist_registry) gateway->persist_to(*config.registry_path);
  return gateway;
}

std::shared_ptr<const Catalog> Gateway::catalog() const {
  std::lock_guard lock(publish_);
  return current_;
}

void Gateway::publish(std::shared_ptr<const Catalog> next) {
  if (persist_path_) save_registry_file(next->registry, *persist_path_);
  std::lock_guard lock(publish_);
  current_ = std::move(next);
}

Gateway::RegisterStatus Gateway::register_server(McpSchema schema, bool replace) {
  validate_schema(schema);
  std::lock_guard writer(writer_);
  const auto base = catalog();
  std::vector<McpSchema> schemas = base->registry.schemas();
  RegisterStatus status = RegisterStatus::Created;
  const auto existing = std::find_if(schemas.begin(), schemas.end(),
                                     [&](const McpSchema& s) { return s.id == schema.id; });
  if (existing != schemas.end()) {
    if (!replace) {
      throw RegistryError(RegistryError::Kind::DuplicateId, "duplicate id: " + schema.id);
    }
    *existing = std::move(schema);
    status = RegisterStatus::Replaced;
  } else {
    schemas.push_back(std::move(schema));
  }
  publish(assemble(Registry(std::move(schemas), now_ms()), embedder_config_, std::nullopt));
  return status;
}

bool Gateway::remove_server(std::string_view id) {
  std::lock_guard writer(writer_);
  const auto base = catalog();
  if (!base->registry.contains(id)) return false;
  std::vector<McpSchema> schemas;
  schemas.reserve(base->registry.size());
  for (const auto& s : base->registry) {
    if (s.id != id) schemas.push_back(s);
  }
  publish(assemble(Registry(std::move(schemas), now_ms()), embedder_config_, std::nullopt));
  return true;
}

RetrieveResponse Gateway::retrieve(const RetrieveRequest& request) const {
  const auto start = std::chrono::steady_clock::now();
  const auto snapshot = catalog();
  auto response = ragmcp::retrieve(*snapshot, request, *selector_);
  retrieve_micros_ += static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start)
          .count());
  ++retrieve_count_;
  return response;
}

std::optional<ValidationOutcome> Gateway::validate(std::string_view id, bool live) const {
  const auto snapshot = catalog();
  const auto* schema = snapshot->registry.find(id);
  if (schema == nullptr) return std::nullopt;
  return validate_candidate(*schema, ValidationOptions{live, validation_timeout_});
}

void Gateway::count_request(Route route) const { ++requests_[static_cast<std::size_t>(route)]; }

json Gateway::metrics() const {
  constexpr const char* names[] = {"healthz", "list_servers", "register", "remove",
                                   "retrieve", "validate",     "metrics"};
  json requests = json::object();
  for (std::size_t i = 0; i < 7; ++i) requests[names[i]] = requests_[i].load();
  const auto count = retrieve_count_.load();
  const double avg_ms =
      count == 0 ? 0.0 : static_cast<double>(retrieve_micros_.load()) / 1000.0 / static_cast<double>(count);
  return {{"requests", requests},
          {"errors", errors_.load()},
          {"retrieve_count", count},
          {"retrieve_avg_latency_ms", avg_ms},
          {"servers", catalog()->registry.size()}};
}

}  // namespace ragmcp
