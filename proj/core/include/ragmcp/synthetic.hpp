#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ragmcp/harness.hpp"
#include "ragmcp/registry.hpp"

namespace ragmcp {

// Synthetic stand-in for a public MCP registry: twenty web-search tasks, each
// with one ground-truth server, plus generated distractor servers.
struct SyntheticBankOptions {
  // Generated distractors (confusers not included).
  std::size_t distractors = 4400;
  // Probability that each filler word from the task queries ("find", "latest",
  // "web", ...) is mixed into a distractor's description. 0 keeps distractors
  // token-disjoint from every task.
  double query_overlap = 0.25;
  // Near-duplicates of each ground truth (same text minus tags). They always
  // outrank the ground truth under tf-idf cosine, so the chance that one lands
  // in a pool grows with pool size.
  std::size_t confusers_per_task = 0;
  // Use the ground truth's canonical document as the task query.
  bool verbatim_queries = false;
  std::uint64_t seed = 2025;

  friend bool operator==(const SyntheticBankOptions&, const SyntheticBankOptions&) = default;
};

struct Benchmark {
  Registry bank;  // ground truths first, then distractors, then confusers
  std::vector<Task> tasks;
};

Benchmark make_websearch_benchmark(const SyntheticBankOptions& options);

// Shipped fixtures.
SyntheticBankOptions default_bank_options();
// No overlap, no confusers, verbatim queries.
SyntheticBankOptions token_disjoint_bank_options();
// No filler overlap; confusers supply overlap that grows with pool size.
SyntheticBankOptions degradation_bank_options();

std::vector<McpSchema> websearch_ground_truths();
std::vector<Task> websearch_tasks();
// Filler words that the queries share with each other.
const std::vector<std::string>& query_filler_words();

SyntheticBankOptions synthetic_options_from_json(const nlohmann::json& value);

}  // namespace ragmcp
