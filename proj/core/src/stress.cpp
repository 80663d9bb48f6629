#include "ragmcp/stress.hpp"

#include <fstream>
#include <memory>

#include "ragmcp/errors.hpp"

namespace ragmcp {
namespace {

using json = nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

EmbedderConfig embedder_config_from_json(const json& value) {
  EmbedderConfig config;
  if (value.is_null()) return config;
  if (!value.is_object()) throw ConfigError("embedder config must be an object");
  config.backend = parse_embedder_backend(get_or<std::string>(value, "backend", "hashed_tfidf"));
  config.dimension = get_or<std::size_t>(value, "dimension", config.dimension);
  config.api_endpoint = get_or<std::string>(value, "api_endpoint", "");
  config.api_model = get_or<std::string>(value, "api_model", "");
  config.timeout = std::chrono::milliseconds(get_or<std::int64_t>(value, "timeout_ms", 10000));
  config = config.with_environment();
  config.validate();
  return config;
}

Strategy strategy_from_json(const json& value) {
  Strategy s;
  if (value.is_string()) {
    s.kind = parse_strategy_kind(value.get<std::string>());
    return s;
  }
  if (!value.is_object()) throw ConfigError("strategy must be a string or an object");
  s.kind = parse_strategy_kind(get_or<std::string>(value, "kind", "rag_mcp"));
  s.k = get_or<std::size_t>(value, "k", 1);
  if (s.k == 0) throw ConfigError("strategy k must be >= 1");
  return s;
}

json strategy_to_json(const Strategy& strategy) {
  return {{"kind", to_string(strategy.kind)}, {"k", strategy.k}};
}

SweepConfig sweep_config_from_json(const json& value) {
  if (!value.is_object()) throw ConfigError("sweep config must be an object");
  SweepConfig config;
  config.pool_sizes = get_or<std::vector<std::size_t>>(value, "pool_sizes", {});

  if (const auto it = value.find("positions"); it != value.end() && !it->is_null()) {
    if (it->is_string() && it->get<std::string>() == "all") {
      config.positions = {PositionRule::Mode::All, 1};
    } else if (it->is_object() && it->contains("stride")) {
      config.positions = {PositionRule::Mode::Stride, it->at("stride").get<std::size_t>()};
    } else if (it->is_object() && it->contains("spread")) {
      config.positions = {PositionRule::Mode::Spread, it->at("spread").get<std::size_t>()};
    } else {
      throw ConfigError("positions must be \"all\", {\"stride\": s} or {\"spread\": c}");
    }
  }

  if (const auto it = value.find("tasks"); it != value.end() && !it->is_null()) {
    if (!it->is_array()) throw ConfigError("tasks must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& t = (*it)[i];
      Task task;
      char fallback[24];
      std::snprintf(fallback, sizeof fallback, "task_%02zu", i);
      task.id = get_or<std::string>(t, "id", fallback);
      task.query = get_or<std::string>(t, "query", "");
      task.ground_truth_id = get_or<std::string>(t, "ground_truth_id", "");
      if (task.query.empty() || task.ground_truth_id.empty()) {
        throw ConfigError("tasks[" + std::to_string(i) + "] needs query and ground_truth_id");
      }
      config.tasks.push_back(std::move(task));
    }
  }
  config.trials_per_cell = get_or<std::size_t>(value, "trials_per_cell", 1);
  config.seed = get_or<std::uint64_t>(value, "seed", 0);
  if (const auto it = value.find("strategy"); it != value.end() && !it->is_null()) {
    config.strategy = strategy_from_json(*it);
  }
  config.record_latency = get_or<bool>(value, "record_latency", false);
  config.threads = get_or<std::size_t>(value, "threads", 0);
  return config;
}

json sweep_config_to_json(const SweepConfig& config) {
  json positions;
  switch (config.positions.mode) {
    case PositionRule::Mode::All: positions = "all"; break;
    case PositionRule::Mode::Stride: positions = {{"stride", config.positions.value}}; break;
    case PositionRule::Mode::Spread: positions = {{"spread", config.positions.value}}; break;
  }
  json tasks = json::array();
  for (const auto& t : config.tasks) {
    tasks.push_back({{"id", t.id}, {"query", t.query}, {"ground_truth_id", t.ground_truth_id}});
  }
  return {{"pool_sizes", config.pool_sizes},
          {"positions", positions},
          {"tasks", tasks},
          {"trials_per_cell", config.trials_per_cell},
          {"seed", config.seed},
          {"strategy", strategy_to_json(config.strategy)},
          {"record_latency", config.record_latency},
          {"threads", config.threads}};
}

StressConfig stress_config_from_json(const json& value, const std::filesystem::path& base_dir) {
  StressConfig config;
  config.sweep = sweep_config_from_json(value);

  if (const auto it = value.find("strategies"); it != value.end() && !it->is_null()) {
    if (!it->is_array() || it->empty()) throw ConfigError("strategies must be a non-empty array");
    for (const auto& s : *it) config.strategies.push_back(strategy_from_json(s));
  } else {
    config.strategies.push_back(config.sweep.strategy);
  }

  config.embedder = embedder_config_from_json(value.value("embedder", json()));

  const json bank = value.value("bank", json{{"synthetic", "default"}});
  if (bank.contains("registry")) {
    std::filesystem::path path = bank.at("registry").get<std::string>();
    config.bank = path.is_absolute() ? path : base_dir / path;
  } else if (bank.contains("synthetic")) {
    config.bank = synthetic_options_from_json(bank.at("synthetic"));
  } else {
    throw ConfigError("bank must be {\"registry\": path} or {\"synthetic\": ...}");
  }

  if (const auto it = value.find("selector"); it != value.end() && !it->is_null()) {
    const auto kind = get_or<std::string>(*it, "kind", "lexical");
    if (kind == "chat") {
      ChatSelectorConfig chat;
      chat.endpoint = get_or<std::string>(*it, "endpoint", "");
      chat.model = get_or<std::string>(*it, "model", "");
      chat.timeout = std::chrono::milliseconds(get_or<std::int64_t>(*it, "timeout_ms", 60000));
      config.chat_selector = chat.with_environment();
    } else if (kind != "lexical") {
      throw ConfigError("selector kind must be \"lexical\" or \"chat\"");
    }
  }

  if (config.sweep.tasks.empty()) {
    if (const auto* synthetic = std::get_if<SyntheticBankOptions>(&config.bank)) {
      config.sweep.tasks = make_websearch_benchmark(*synthetic).tasks;
    }
  }
  config.sweep.validate();
  return config;
}

StressConfig load_stress_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json value;
  try {
    value = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": parse error at byte " +
                      std::to_string(e.byte));
  }
  return stress_config_from_json(value, path.parent_path());
}

StressConfig default_stress_config() {
  StressConfig config;
  config.bank = default_bank_options();
  config.sweep.pool_sizes = {1, 3, 10, 30, 100, 300, 1000, 3000};
  config.sweep.positions = {PositionRule::Mode::Spread, 5};
  config.sweep.tasks = make_websearch_benchmark(default_bank_options()).tasks;
  config.sweep.trials_per_cell = 1;
  config.sweep.seed = 2025;
  config.strategies = {Strategy{StrategyKind::RagMcp, 1}};
  config.sweep.strategy = config.strategies.front();
  return config;
}

StressResult run_stress(const StressConfig& config, const std::filesystem::path& out_dir) {
  const Registry bank = std::visit(
      [](const auto& source) -> Registry {
        using T = std::decay_t<decltype(source)>;
        if constexpr (std::is_same_v<T, SyntheticBankOptions>) {
          return make_websearch_benchmark(source).bank;
        } else {
          return load_registry_file(source);
        }
      },
      config.bank);

  std::unique_ptr<Selector> selector;
  if (config.chat_selector) {
    selector = std::make_unique<ChatCompletionSelector>(*config.chat_selector);
  } else {
    selector = std::make_unique<LexicalOverlapSelector>();
  }

  StressResult result;
  for (const auto& strategy : config.strategies) {
    SweepConfig sweep = config.sweep;
    sweep.strategy = strategy;
    auto outcomes = run_sweep(sweep, bank, config.embedder, *selector);
    result.outcomes.insert(result.outcomes.end(), std::make_move_iterator(outcomes.begin()),
                           std::make_move_iterator(outcomes.end()));
  }
  result.metrics = aggregate_metrics(result.outcomes);
  result.grid_csv = grid_csv(result.outcomes);
  result.metrics_json = metrics_to_json(result.metrics).dump(2) + "\n";
  result.metrics_table = metrics_table(result.metrics);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "grid.csv", result.grid_csv);
    write_file(out_dir / "metrics.json", result.metrics_json);
    write_file(out_dir / "metrics.txt", result.metrics_table);
  }
  return result;
}

}  // namespace ragmcp
