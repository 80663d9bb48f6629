#include "ragmcp/selection.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_set>

#include "http_client.hpp"
#include "ragmcp/errors.hpp"
#include "ragmcp/tokens.hpp"

namespace ragmcp {
namespace {

using json = nlohmann::json;
using TokenSet = std::unordered_set<std::string>;

TokenSet token_set(std::string_view text) {
  auto tokens = tokenize(text);
  return TokenSet(std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));
}

std::size_t overlap(const TokenSet& query, std::string_view text) {
  const TokenSet doc = token_set(text);
  std::size_t n = 0;
  for (const auto& t : query) n += doc.count(t);
  return n;
}

bool kind_matches(ParamKind kind, const json& value) {
  switch (kind) {
    case ParamKind::String: return value.is_string();
    case ParamKind::Integer: return value.is_number_integer();
    case ParamKind::Number: return value.is_number();
    case ParamKind::Boolean: return value.is_boolean();
    case ParamKind::Array: return value.is_array();
    case ParamKind::Object: return value.is_object();
  }
  return false;
}

json default_value(ParamKind kind) {
  switch (kind) {
    case ParamKind::String: return "example";
    case ParamKind::Integer: return 1;
    case ParamKind::Number: return 1.0;
    case ParamKind::Boolean: return true;
    case ParamKind::Array: return json::array();
    case ParamKind::Object: return json::object();
  }
  return nullptr;
}

std::vector<const McpSchema*> resolve(const Registry& registry, const std::vector<std::string>& ids) {
  std::vector<const McpSchema*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    if (const auto* s = registry.find(id)) out.push_back(s);
  }
  return out;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::BlankConditioning: return "blank_conditioning";
    case StrategyKind::ActualMatch: return "actual_match";
    case StrategyKind::RagMcp: return "rag_mcp";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(std::string_view text) {
  if (text == "blank_conditioning" || text == "blank") return StrategyKind::BlankConditioning;
  if (text == "actual_match") return StrategyKind::ActualMatch;
  if (text == "rag_mcp") return StrategyKind::RagMcp;
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(ValidationStatus status) {
  switch (status) {
    case ValidationStatus::Pass: return "pass";
    case ValidationStatus::Fail: return "fail";
    case ValidationStatus::Skipped: return "skipped";
  }
  return "unknown";
}

json to_json(const ValidationOutcome& outcome) {
  return {{"schema_id", outcome.schema_id},
          {"status", to_string(outcome.status)},
          {"detail", outcome.detail}};
}

json synthesize_invocation(const ToolDef& tool) {
  json args = json::object();
  for (const auto& p : tool.params) args[p.name] = default_value(p.kind);
  return args;
}

std::vector<std::string> check_invocation(const ToolDef& tool, const json& arguments) {
  std::vector<std::string> problems;
  if (!arguments.is_object()) {
    problems.push_back("arguments must be an object");
    return problems;
  }
  for (const auto& p : tool.params) {
    const auto it = arguments.find(p.name);
    if (it == arguments.end()) {
      if (p.required) problems.push_back("missing required parameter '" + p.name + "'");
      continue;
    }
    if (!kind_matches(p.kind, *it)) {
      problems.push_back("parameter '" + p.name + "' is not of kind " + std::string(to_string(p.kind)));
    }
  }
  for (const auto& [key, _] : arguments.items()) {
    const bool known = std::any_of(tool.params.begin(), tool.params.end(),
                                   [&](const ParamDef& p) { return p.name == key; });
    if (!known) problems.push_back("unknown parameter '" + key + "'");
  }
  return problems;
}

ValidationOutcome validate_candidate(const McpSchema& schema, const ValidationOptions& options) {
  ValidationOutcome outcome{schema.id, ValidationStatus::Pass, {}};
  if (schema.tools.empty()) {
    outcome.status = ValidationStatus::Fail;
    outcome.detail = "schema has no tools";
    return outcome;
  }
  const ToolDef& tool = schema.tools.front();
  const json args = synthesize_invocation(tool);
  if (const auto problems = check_invocation(tool, args); !problems.empty()) {
    outcome.status = ValidationStatus::Fail;
    outcome.detail = problems.front();
    return outcome;
  }
  outcome.detail = "schema check ok: " + tool.name + args.dump();
  if (!options.live) return outcome;
  if (!schema.endpoint) {
    outcome.detail += "; no endpoint, live probe not run";
    return outcome;
  }

  const json request = {{"jsonrpc", "2.0"},
                        {"id", 1},
                        {"method", "tools/call"},
                        {"params", {{"name", tool.name}, {"arguments", args}}}};
  try {
    const auto reply = detail::post_json(*schema.endpoint, request.dump(), options.timeout);
    if (reply.status < 200 || reply.status >= 300) {
      outcome.status = ValidationStatus::Fail;
      outcome.detail = "live probe: HTTP " + std::to_string(reply.status);
      return outcome;
    }
    if (!json::accept(reply.body)) {
      outcome.status = ValidationStatus::Fail;
      outcome.detail = "live probe: response is not JSON";
      return outcome;
    }
    outcome.detail = "live probe ok: HTTP " + std::to_string(reply.status);
  } catch (const TransportError& e) {
    outcome.status = ValidationStatus::Fail;
    outcome.detail = std::string("live probe transport error: ") + e.what();
  }
  return outcome;
}

std::size_t shared_token_count(std::string_view a, std::string_view b) {
  return overlap(token_set(a), b);
}

std::string build_prompt(std::string_view query, std::span<const McpSchema* const> schemas) {
  std::string out = "TASK: ";
  out += query;
  out += '\n';
  for (std::size_t i = 0; i < schemas.size(); ++i) {
    const McpSchema& s = *schemas[i];
    out += "TOOL " + std::to_string(i + 1) + ": " + s.name + '\n';
    out += "DESC: " + s.description + '\n';
    out += "PARAMS: ";
    for (std::size_t t = 0; t < s.tools.size(); ++t) {
      if (t > 0) out += "; ";
      out += s.tools[t].name;
      out += ':';
      const auto& params = s.tools[t].params;
      for (std::size_t p = 0; p < params.size(); ++p) {
        if (p > 0) out += ',';
        out += params[p].name;
        out += '(';
        out += to_string(params[p].kind);
        out += ')';
      }
    }
    out += '\n';
  }
  return out;
}

SelectorReply LexicalOverlapSelector::select(std::string_view query,
                                             std::span<const McpSchema* const> presented,
                                             std::string_view) const {
  const TokenSet q = token_set(query);
  const McpSchema* best = nullptr;
  std::size_t best_count = 0;
  for (const McpSchema* s : presented) {
    const auto n = overlap(q, canonical_document(*s).text);
    if (n == 0) continue;
    if (best == nullptr || n > best_count || (n == best_count && s->id < best->id)) {
      best = s;
      best_count = n;
    }
  }
  SelectorReply reply;
  if (best != nullptr) reply.chosen = best->id;
  return reply;
}

ChatSelectorConfig ChatSelectorConfig::with_environment() const {
  ChatSelectorConfig out = *this;
  if (out.endpoint.empty()) {
    if (const char* v = std::getenv("RAGMCP_SELECTOR_ENDPOINT")) out.endpoint = v;
  }
  return out;
}

ChatCompletionSelector::ChatCompletionSelector(ChatSelectorConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw ConfigError("chat selector needs an endpoint (RAGMCP_SELECTOR_ENDPOINT)");
  }
}

std::string ChatCompletionSelector::instructions(std::span<const McpSchema* const> presented) {
  std::string out =
      "Choose the single tool that can complete the task. Reply with exactly one id from the "
      "list below and nothing else.\nIDS:";
  for (std::size_t i = 0; i < presented.size(); ++i) {
    out += (i == 0 ? " " : ", ");
    out += "TOOL " + std::to_string(i + 1) + "=" + presented[i]->id;
  }
  return out;
}

SelectorReply ChatCompletionSelector::select(std::string_view,
                                             std::span<const McpSchema* const> presented,
                                             std::string_view prompt) const {
  SelectorReply reply;
  const json request = {
      {"model", config_.model},
      {"messages",
       json::array({{{"role", "system"}, {"content", instructions(presented)}},
                    {{"role", "user"}, {"content", std::string(prompt)}}})}};
  try {
    const auto http = detail::post_json(config_.endpoint, request.dump(), config_.timeout);
    if (http.status < 200 || http.status >= 300) {
      reply.error = "selector endpoint returned HTTP " + std::to_string(http.status);
      return reply;
    }
    const json body = json::parse(http.body);
    const json& content = body.at("choices").at(0).at("message").at("content");
    std::string text = content.get<std::string>();
    const auto first = text.find_first_not_of(" \t\r\n");
    const auto last = text.find_last_not_of(" \t\r\n");
    text = first == std::string::npos ? std::string() : text.substr(first, last - first + 1);

    reply.completion_tokens = count_tokens(text).value;
    if (const auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
      if (const auto ct = usage->find("completion_tokens");
          ct != usage->end() && ct->is_number_unsigned()) {
        reply.completion_tokens = ct->get<std::size_t>();
      }
    }
    for (const McpSchema* s : presented) {
      if (s->id == text) reply.chosen = s->id;
    }
  } catch (const TransportError& e) {
    reply.error = e.what();
  } catch (const json::exception& e) {
    reply.error = std::string("malformed selector response: ") + e.what();
  }
  return reply;
}

std::vector<std::string> select_candidates(const Strategy& strategy, std::string_view query,
                                           const Registry& registry, const VectorIndex& index,
                                           const Embedder& embedder) {
  switch (strategy.kind) {
    case StrategyKind::BlankConditioning:
      return registry.ids();

    case StrategyKind::ActualMatch: {
      const TokenSet q = token_set(query);
      std::vector<std::pair<std::size_t, const std::string*>> matches;
      for (const auto& s : registry) {
        if (const auto n = overlap(q, canonical_document(s).text); n > 0) {
          matches.emplace_back(n, &s.id);
        }
      }
      std::sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return *a.second < *b.second;
      });
      std::vector<std::string> out;
      out.reserve(matches.size());
      for (const auto& m : matches) out.push_back(*m.second);
      return out;
    }

    case StrategyKind::RagMcp: {
      if (strategy.k == 0) throw std::invalid_argument("k must be >= 1");
      std::vector<std::string> out;
      for (auto& c : index.search(embedder.embed(query), strategy.k)) {
        if (registry.contains(c.schema_id)) out.push_back(std::move(c.schema_id));
      }
      return out;
    }
  }
  return {};
}

SelectionResult run_selection(const Strategy& strategy, std::string_view query,
                              const Registry& registry, const VectorIndex& index,
                              const Embedder& embedder, const Selector& selector,
                              const SelectionOptions& options) {
  SelectionResult result;
  result.presented = select_candidates(strategy, query, registry, index, embedder);
  const auto schemas = resolve(registry, result.presented);
  result.prompt_text = build_prompt(query, schemas);
  result.prompt_tokens = count_tokens(result.prompt_text).value;

  if (strategy.kind == StrategyKind::RagMcp) {
    for (const McpSchema* s : schemas) {
      result.validation.push_back(validate_candidate(*s, options.validation));
    }
  }

  if (strategy.kind == StrategyKind::RagMcp && strategy.k == 1) {
    if (!result.presented.empty()) result.chosen = result.presented.front();
    return result;
  }
  if (schemas.empty()) return result;

  auto reply = selector.select(query, schemas, result.prompt_text);
  result.completion_tokens = reply.completion_tokens;
  result.error = std::move(reply.error);
  if (reply.chosen &&
      std::find(result.presented.begin(), result.presented.end(), *reply.chosen) !=
          result.presented.end()) {
    result.chosen = std::move(reply.chosen);
  }
  return result;
}

}  // namespace ragmcp
