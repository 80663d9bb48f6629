#include "ragmcp/registry.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <iterator>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ragmcp/errors.hpp"
#include "ragmcp/tokens.hpp"

namespace ragmcp {
namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 6> kKindNames = {"string", "integer", "number",
                                                        "boolean", "array", "object"};

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

[[noreturn]] void invalid(const std::string& what) {
  throw RegistryError(RegistryError::Kind::InvalidField, what);
}

std::string string_field(const json& obj, const char* key, const std::string& where,
                         bool required) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) invalid(where + "." + key + ": missing");
    return {};
  }
  if (!it->is_string()) invalid(where + "." + key + ": expected string");
  return it->get<std::string>();
}

const json* array_field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  if (!it->is_array()) invalid(where + "." + key + ": expected array");
  return &*it;
}

ParamDef param_from_json(const json& value, const std::string& where) {
  if (!value.is_object()) invalid(where + ": expected object");
  ParamDef param;
  param.name = string_field(value, "name", where, true);
  const auto kind_text = string_field(value, "kind", where, false);
  if (!kind_text.empty()) {
    const auto kind = parse_param_kind(kind_text);
    if (!kind) invalid(where + ".kind: unknown kind '" + kind_text + "'");
    param.kind = *kind;
  }
  if (const auto it = value.find("required"); it != value.end() && !it->is_null()) {
    if (!it->is_boolean()) invalid(where + ".required: expected boolean");
    param.required = it->get<bool>();
  }
  param.description = string_field(value, "description", where, false);
  return param;
}

ToolDef tool_from_json(const json& value, const std::string& where) {
  if (!value.is_object()) invalid(where + ": expected object");
  ToolDef tool;
  tool.name = string_field(value, "name", where, true);
  tool.description = string_field(value, "description", where, false);
  if (const json* params = array_field(value, "params", where)) {
    for (std::size_t i = 0; i < params->size(); ++i) {
      tool.params.push_back(
          param_from_json((*params)[i], where + ".params[" + std::to_string(i) + "]"));
    }
  }
  return tool;
}

}  // namespace

std::string_view to_string(ParamKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ParamKind> parse_param_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<ParamKind>(i);
  }
  return std::nullopt;
}

void validate_schema(const McpSchema& schema) {
  if (!valid_id(schema.id)) {
    invalid("invalid id '" + schema.id + "': must match [a-z0-9_-]{1,64}");
  }
  if (schema.tools.empty()) {
    throw RegistryError(RegistryError::Kind::EmptyTools,
                        "schema '" + schema.id + "': empty tools");
  }
  std::unordered_set<std::string_view> tool_names;
  for (const auto& tool : schema.tools) {
    if (tool.name.empty()) invalid("schema '" + schema.id + "': tool with empty name");
    if (!tool_names.insert(tool.name).second) {
      invalid("schema '" + schema.id + "': duplicate tool name '" + tool.name + "'");
    }
    std::unordered_set<std::string_view> param_names;
    for (const auto& param : tool.params) {
      if (param.name.empty()) {
        invalid("schema '" + schema.id + "' tool '" + tool.name + "': parameter with empty name");
      }
      if (!param_names.insert(param.name).second) {
        invalid("schema '" + schema.id + "' tool '" + tool.name + "': duplicate parameter '" +
                param.name + "'");
      }
    }
  }
}

ToolDocument canonical_document(const McpSchema& schema) {
  std::string text;
  auto add = [&text](const std::string& field) {
    if (field.empty()) return;
    if (!text.empty()) text.push_back('\n');
    text += field;
  };
  add(schema.name);
  add(schema.description);
  for (const auto& tag : schema.tags) add(tag);
  for (const auto& tool : schema.tools) {
    add(tool.name);
    add(tool.description);
    for (const auto& param : tool.params) add(param.name);
  }
  return ToolDocument{schema.id, to_lower(text)};
}

Timestamp now_ms() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

Registry::Registry(std::vector<McpSchema> schemas, Timestamp built_at)
    : schemas_(std::move(schemas)), built_at_(built_at) {
  by_id_.reserve(schemas_.size());
  for (std::size_t i = 0; i < schemas_.size(); ++i) {
    validate_schema(schemas_[i]);
    if (!by_id_.emplace(schemas_[i].id, i).second) {
      throw RegistryError(RegistryError::Kind::DuplicateId, "duplicate id: " + schemas_[i].id);
    }
  }
}

const McpSchema* Registry::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &schemas_[it->second];
}

std::vector<std::string> Registry::ids() const {
  std::vector<std::string> out;
  out.reserve(schemas_.size());
  for (const auto& s : schemas_) out.push_back(s.id);
  return out;
}

std::vector<ToolDocument> Registry::documents() const {
  std::vector<ToolDocument> out;
  out.reserve(schemas_.size());
  for (const auto& s : schemas_) out.push_back(canonical_document(s));
  return out;
}

json schema_to_json(const McpSchema& schema) {
  json tools = json::array();
  for (const auto& tool : schema.tools) {
    json params = json::array();
    for (const auto& p : tool.params) {
      params.push_back({{"name", p.name},
                        {"kind", to_string(p.kind)},
                        {"required", p.required},
                        {"description", p.description}});
    }
    tools.push_back({{"name", tool.name}, {"description", tool.description}, {"params", params}});
  }
  json out = {{"id", schema.id},
              {"name", schema.name},
              {"description", schema.description},
              {"tags", schema.tags}};
  if (schema.endpoint) out["endpoint"] = *schema.endpoint;
  out["tools"] = std::move(tools);
  return out;
}

McpSchema schema_from_json(const json& value, const std::string& where) {
  if (!value.is_object()) invalid(where + ": expected object");
  McpSchema schema;
  schema.id = string_field(value, "id", where, true);
  schema.name = string_field(value, "name", where, false);
  schema.description = string_field(value, "description", where, false);
  if (const json* tags = array_field(value, "tags", where)) {
    for (std::size_t i = 0; i < tags->size(); ++i) {
      if (!(*tags)[i].is_string()) {
        invalid(where + ".tags[" + std::to_string(i) + "]: expected string");
      }
      schema.tags.push_back((*tags)[i].get<std::string>());
    }
  }
  if (auto endpoint = string_field(value, "endpoint", where, false); !endpoint.empty()) {
    schema.endpoint = std::move(endpoint);
  }
  if (const json* tools = array_field(value, "tools", where)) {
    for (std::size_t i = 0; i < tools->size(); ++i) {
      schema.tools.push_back(tool_from_json((*tools)[i], where + ".tools[" + std::to_string(i) + "]"));
    }
  }
  return schema;
}

Registry registry_from_json(const json& document) {
  if (!document.is_object()) invalid("registry: top level must be an object");
  const auto servers = document.find("servers");
  if (servers == document.end() || !servers->is_array()) {
    invalid("registry: missing \"servers\" array");
  }
  std::vector<McpSchema> schemas;
  schemas.reserve(servers->size());
  for (std::size_t i = 0; i < servers->size(); ++i) {
    schemas.push_back(schema_from_json((*servers)[i], "servers[" + std::to_string(i) + "]"));
  }
  Timestamp built_at = now_ms();
  if (const auto it = document.find("built_at"); it != document.end() && !it->is_null()) {
    if (!it->is_number_integer()) invalid("registry.built_at: expected integer milliseconds");
    built_at = Timestamp(std::chrono::milliseconds(it->get<std::int64_t>()));
  }
  return Registry(std::move(schemas), built_at);
}

Registry load_registry(std::istream& source) {
  json document;
  try {
    document = json::parse(source);
  } catch (const json::parse_error& e) {
    throw RegistryError(RegistryError::Kind::Parse,
                        "registry parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return registry_from_json(document);
}

Registry load_registry_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw RegistryError(RegistryError::Kind::Parse, "cannot open registry file " + path.string());
  }
  return load_registry(in);
}

json registry_to_json(const Registry& registry) {
  json servers = json::array();
  for (const auto& schema : registry) servers.push_back(schema_to_json(schema));
  return {{"built_at", registry.built_at().time_since_epoch().count()},
          {"servers", std::move(servers)}};
}

std::string serialize_registry(const Registry& registry) {
  return registry_to_json(registry).dump(2) + "\n";
}

void save_registry_file(const Registry& registry, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << serialize_registry(registry);
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ragmcp
