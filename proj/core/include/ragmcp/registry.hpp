#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ragmcp {

enum class ParamKind { String, Integer, Number, Boolean, Array, Object };

std::string_view to_string(ParamKind kind);
std::optional<ParamKind> parse_param_kind(std::string_view text);

struct ParamDef {
  std::string name;
  ParamKind kind = ParamKind::String;
  bool required = false;
  std::string description;

  friend bool operator==(const ParamDef&, const ParamDef&) = default;
};

struct ToolDef {
  std::string name;
  std::string description;
  std::vector<ParamDef> params;

  friend bool operator==(const ToolDef&, const ToolDef&) = default;
};

// One MCP server: identity, description and the tools it exposes.
struct McpSchema {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> tags;
  std::optional<std::string> endpoint;
  std::vector<ToolDef> tools;

  friend bool operator==(const McpSchema&, const McpSchema&) = default;
};

// Flat text rendering of a schema used for embedding and keyword matching.
struct ToolDocument {
  std::string schema_id;
  std::string text;

  friend bool operator==(const ToolDocument&, const ToolDocument&) = default;
};

// Throws RegistryError (InvalidField / EmptyTools) when a schema breaks an
// invariant: id must match [a-z0-9_-]{1,64}, at least one tool, unique tool
// names, unique parameter names within a tool.
void validate_schema(const McpSchema& schema);

// Lowercase newline join of name, description, tags, then per tool its name,
// description and parameter names. Empty fields are skipped so that every
// separator is a single newline. Ids, parameter kinds and endpoints are left
// out.
ToolDocument canonical_document(const McpSchema& schema);

using Timestamp = std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

Timestamp now_ms();

// Ordered, validated, immutable collection of schemas. Iteration follows
// insertion order.
class Registry {
 public:
  Registry() = default;
  // Validates every schema and rejects duplicate ids.
  explicit Registry(std::vector<McpSchema> schemas, Timestamp built_at = now_ms());

  const std::vector<McpSchema>& schemas() const noexcept { return schemas_; }
  std::size_t size() const noexcept { return schemas_.size(); }
  bool empty() const noexcept { return schemas_.empty(); }
  Timestamp built_at() const noexcept { return built_at_; }

  auto begin() const noexcept { return schemas_.begin(); }
  auto end() const noexcept { return schemas_.end(); }

  const McpSchema* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::vector<std::string> ids() const;
  std::vector<ToolDocument> documents() const;

  friend bool operator==(const Registry& a, const Registry& b) {
    return a.built_at_ == b.built_at_ && a.schemas_ == b.schemas_;
  }

 private:
  std::vector<McpSchema> schemas_;
  std::unordered_map<std::string, std::size_t> by_id_;
  Timestamp built_at_{};
};

nlohmann::json schema_to_json(const McpSchema& schema);
// `where` prefixes error messages, e.g. "servers[3]".
McpSchema schema_from_json(const nlohmann::json& value, const std::string& where = "server");

// Registry file: {"servers": [...]} plus an optional "built_at" in epoch
// milliseconds. Parse errors carry the byte offset.
Registry load_registry(std::istream& source);
Registry load_registry_file(const std::filesystem::path& path);
Registry registry_from_json(const nlohmann::json& document);

nlohmann::json registry_to_json(const Registry& registry);
std::string serialize_registry(const Registry& registry);
// Writes to a temporary sibling and renames it into place.
void save_registry_file(const Registry& registry, const std::filesystem::path& path);

}  // namespace ragmcp
