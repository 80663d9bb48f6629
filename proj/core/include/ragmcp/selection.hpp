#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragmcp/embedding.hpp"
#include "ragmcp/index.hpp"
#include "ragmcp/registry.hpp"

namespace ragmcp {

enum class StrategyKind { BlankConditioning, ActualMatch, RagMcp };

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view text);

struct Strategy {
  StrategyKind kind = StrategyKind::RagMcp;
  std::size_t k = 1;  // rag_mcp only

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

enum class ValidationStatus { Pass, Fail, Skipped };

std::string_view to_string(ValidationStatus status);

struct ValidationOutcome {
  std::string schema_id;
  ValidationStatus status = ValidationStatus::Skipped;
  std::string detail;

  friend bool operator==(const ValidationOutcome&, const ValidationOutcome&) = default;
};

nlohmann::json to_json(const ValidationOutcome& outcome);

struct ValidationOptions {
  bool live = false;
  std::chrono::milliseconds timeout{3000};
};

// Example argument object for a tool: every parameter gets its kind's default
// (string "example", integer 1, number 1.0, boolean true, array [], object {}).
nlohmann::json synthesize_invocation(const ToolDef& tool);

// Problems with `arguments` against the tool definition: missing required
// parameters, unknown parameters, kind mismatches. Empty means valid.
std::vector<std::string> check_invocation(const ToolDef& tool, const nlohmann::json& arguments);

// Synthesises an invocation of the first tool and checks it against the tool
// definition. With options.live and an endpoint, also POSTs a JSON-RPC
// tools/call request and requires a 2xx reply with a JSON body. Never throws
// for a bad server; failures come back as status Fail with a detail string.
ValidationOutcome validate_candidate(const McpSchema& schema, const ValidationOptions& options = {});

// Number of distinct tokens shared by the two texts.
std::size_t shared_token_count(std::string_view a, std::string_view b);

// TASK: <query>
// TOOL <i>: <name>
// DESC: <description>
// PARAMS: <tool>:<param>(<kind>),...; <tool>:...
std::string build_prompt(std::string_view query, std::span<const McpSchema* const> schemas);

struct SelectorReply {
  std::optional<std::string> chosen;
  std::size_t completion_tokens = 0;
  std::optional<std::string> error;  // transport failure, reported as a failed selection
};

// Stand-in for the LLM that picks one schema among those presented.
class Selector {
 public:
  virtual ~Selector() = default;
  virtual SelectorReply select(std::string_view query, std::span<const McpSchema* const> presented,
                               std::string_view prompt) const = 0;
};

// Picks the presented schema whose canonical document shares the most distinct
// tokens with the query, ties to the smallest id. Picks nothing when no
// schema shares a token. Completion tokens are always 0.
class LexicalOverlapSelector final : public Selector {
 public:
  SelectorReply select(std::string_view query, std::span<const McpSchema* const> presented,
                       std::string_view prompt) const override;
};

struct ChatSelectorConfig {
  std::string endpoint;
  std::string model;
  std::chrono::milliseconds timeout{60000};

  // endpoint from RAGMCP_SELECTOR_ENDPOINT when unset.
  ChatSelectorConfig with_environment() const;
};

// Chat-completion client: POST {"model", "messages": [{"role","content"}...]}.
// The reply's content must be exactly one presented schema id; anything else
// leaves `chosen` empty. Completion tokens come from usage.completion_tokens,
// or count_tokens(reply) when the provider omits it.
class ChatCompletionSelector final : public Selector {
 public:
  explicit ChatCompletionSelector(ChatSelectorConfig config);

  SelectorReply select(std::string_view query, std::span<const McpSchema* const> presented,
                       std::string_view prompt) const override;

  static std::string instructions(std::span<const McpSchema* const> presented);

 private:
  ChatSelectorConfig config_;
};

// Ordered ids handed to the selector:
//   blank_conditioning: every schema, registry order
//   actual_match: schemas sharing >= 1 token with the query, by shared count
//                 desc then id asc
//   rag_mcp: index top-k
std::vector<std::string> select_candidates(const Strategy& strategy, std::string_view query,
                                           const Registry& registry, const VectorIndex& index,
                                           const Embedder& embedder);

struct SelectionResult {
  std::vector<std::string> presented;
  std::optional<std::string> chosen;
  std::string prompt_text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::vector<ValidationOutcome> validation;
  std::optional<std::string> error;
};

struct SelectionOptions {
  ValidationOptions validation;
};

// Candidates -> prompt -> pick. rag_mcp with k == 1 takes the single retrieved
// candidate without consulting the selector; validation is run for rag_mcp
// candidates only.
SelectionResult run_selection(const Strategy& strategy, std::string_view query,
                              const Registry& registry, const VectorIndex& index,
                              const Embedder& embedder, const Selector& selector,
                              const SelectionOptions& options = {});

}  // namespace ragmcp
