#pragma once

#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragmcp/embedding.hpp"
#include "ragmcp/harness.hpp"
#include "ragmcp/selection.hpp"
#include "ragmcp/synthetic.hpp"

namespace ragmcp {

// Everything `stress run` needs: the sweep, the strategies to compare, where
// the distractor bank comes from and which embedder/selector to use.
struct StressConfig {
  SweepConfig sweep;
  std::vector<Strategy> strategies;
  EmbedderConfig embedder;
  std::variant<SyntheticBankOptions, std::filesystem::path> bank;
  std::optional<ChatSelectorConfig> chat_selector;  // lexical selector when empty
};

EmbedderConfig embedder_config_from_json(const nlohmann::json& value);
Strategy strategy_from_json(const nlohmann::json& value);
nlohmann::json strategy_to_json(const Strategy& strategy);

// JSON object mirroring SweepConfig. "positions" is "all", {"stride": s} or
// {"spread": c}; "strategy" is a kind string or {"kind", "k"}.
SweepConfig sweep_config_from_json(const nlohmann::json& value);
nlohmann::json sweep_config_to_json(const SweepConfig& config);

// Adds "strategies", "bank" ({"synthetic": {...}} or {"registry": path}),
// "embedder" and "selector" ({"kind": "lexical"} or {"kind": "chat", ...}) on
// top of the sweep fields. Relative paths resolve against base_dir. When the
// bank is synthetic and no tasks are given, the benchmark's tasks are used.
StressConfig stress_config_from_json(const nlohmann::json& value,
                                     const std::filesystem::path& base_dir);
StressConfig load_stress_config(const std::filesystem::path& path);

// Desk-scale defaults: N in {1,3,10,30,100,300,1000,3000}, five spread
// positions, one trial per cell, rag_mcp with k = 1 on the default synthetic
// bank.
StressConfig default_stress_config();

struct StressResult {
  std::vector<TrialOutcome> outcomes;
  MetricsReport metrics;
  std::string grid_csv;
  std::string metrics_json;
  std::string metrics_table;
};

// Runs the sweep once per strategy. When out_dir is non-empty, writes
// grid.csv, metrics.json and metrics.txt there (creating the directory).
StressResult run_stress(const StressConfig& config, const std::filesystem::path& out_dir = {});

}  // namespace ragmcp
