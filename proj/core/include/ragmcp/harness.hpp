#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragmcp/embedding.hpp"
#include "ragmcp/registry.hpp"
#include "ragmcp/selection.hpp"

namespace ragmcp {

struct Task {
  std::string id;
  std::string query;
  std::string ground_truth_id;

  friend bool operator==(const Task&, const Task&) = default;
};

struct TrialSpec {
  Task task;
  std::size_t pool_size = 1;
  std::size_t ground_truth_position = 0;
  std::uint64_t seed = 0;
  Strategy strategy;
  std::size_t trial = 0;
  // Never drawn as distractors (typically the other tasks' ground truths).
  std::vector<std::string> reserved_ids;
};

struct TrialOutcome {
  TrialSpec spec;
  bool success = false;
  std::optional<std::string> chosen;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
  std::string detail;
};

struct PositionRule {
  enum class Mode { All, Stride, Spread };

  Mode mode = Mode::All;
  std::size_t value = 1;  // stride, or number of evenly spread positions

  // Ground-truth positions sampled for a pool of `pool_size`:
  //   All: 0..N-1;  Stride s: 0, s, 2s, ... < N;
  //   Spread c: round(i * (N-1) / (c-1)) for i < c, deduplicated.
  std::vector<std::size_t> positions(std::size_t pool_size) const;

  friend bool operator==(const PositionRule&, const PositionRule&) = default;
};

struct SweepConfig {
  std::vector<std::size_t> pool_sizes;
  PositionRule positions;
  std::vector<Task> tasks;
  std::size_t trials_per_cell = 1;
  std::uint64_t seed = 0;
  Strategy strategy;
  // Wall-clock latency makes the grid non-reproducible; off by default, in
  // which case latency_ms is written as 0.
  bool record_latency = false;
  // 0 = hardware concurrency.
  std::size_t threads = 0;

  // Throws ConfigError.
  void validate() const;
};

// Seed of one (task, trial) cell. Independent of pool size and position, so
// larger pools extend smaller ones.
std::uint64_t trial_seed(std::uint64_t sweep_seed, std::size_t task_index, std::size_t trial);

// Exactly spec.pool_size schemas: N-1 distractors drawn without replacement
// from `bank` (excluding the ground truth and reserved ids) with a seeded
// partial Fisher-Yates shuffle, and the ground truth inserted at
// spec.ground_truth_position. The draw for N is a prefix of the draw for any
// larger N. Throws InsufficientDistractors, or std::invalid_argument when the
// ground truth is not in the bank or the position is out of range.
Registry build_pool(const TrialSpec& spec, const Registry& bank);

// Builds the pool, fits the embedder and index on it, runs the selection and
// scores it against the ground truth. Selector transport errors become
// success = false with the error in `detail`.
TrialOutcome run_trial(const TrialSpec& spec, const Registry& bank, const EmbedderConfig& embedder,
                       const Selector& selector, bool record_latency = true);

// One outcome per (task, pool size, position, trial), in that nesting order.
std::vector<TrialOutcome> run_sweep(const SweepConfig& config, const Registry& bank,
                                    const EmbedderConfig& embedder, const Selector& selector);

struct StrategyMetrics {
  StrategyKind strategy = StrategyKind::RagMcp;
  double accuracy_pct = 0.0;
  double avg_prompt_tokens = 0.0;
  double avg_completion_tokens = 0.0;
  std::size_t trial_count = 0;

  friend bool operator==(const StrategyMetrics&, const StrategyMetrics&) = default;
};

// One row per strategy present, in rag_mcp, actual_match, blank_conditioning
// order. Values are rounded to two decimals.
struct MetricsReport {
  std::vector<StrategyMetrics> rows;

  const StrategyMetrics* find(StrategyKind kind) const;
};

// Throws std::invalid_argument for an empty input.
MetricsReport aggregate_metrics(std::span<const TrialOutcome> outcomes);

nlohmann::json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& value);
// Fixed-width table with the columns Baseline, Accuracy (%), Avg Prompt
// Tokens, Avg Completion Tokens.
std::string metrics_table(const MetricsReport& report);

inline constexpr std::string_view kGridHeader =
    "task_id,pool_size,position,trial,strategy,success,prompt_tokens,completion_tokens,latency_ms";

// Rows sorted by (task_id, pool_size, position, trial, strategy).
std::string grid_csv(std::span<const TrialOutcome> outcomes);
// Inverse of grid_csv for the columns it carries. Throws std::runtime_error
// with the offending line number.
std::vector<TrialOutcome> parse_grid_csv(std::istream& in);

}  // namespace ragmcp
