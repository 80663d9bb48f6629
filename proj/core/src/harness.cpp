#include "ragmcp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "ragmcp/errors.hpp"
#include "ragmcp/index.hpp"
#include "rng.hpp"

namespace ragmcp {
namespace {

double round2(double x) { return std::round(x * 100.0) / 100.0; }

int strategy_rank(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::RagMcp: return 0;
    case StrategyKind::ActualMatch: return 1;
    case StrategyKind::BlankConditioning: return 2;
  }
  return 3;
}

std::string_view display_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::RagMcp: return "RAG-MCP";
    case StrategyKind::ActualMatch: return "Actual Match";
    case StrategyKind::BlankConditioning: return "Blank Conditioning";
  }
  return "?";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<std::size_t> PositionRule::positions(std::size_t pool_size) const {
  std::vector<std::size_t> out;
  if (pool_size == 0) return out;
  switch (mode) {
    case Mode::All:
      for (std::size_t p = 0; p < pool_size; ++p) out.push_back(p);
      break;
    case Mode::Stride:
      for (std::size_t p = 0; p < pool_size; p += std::max<std::size_t>(value, 1)) out.push_back(p);
      break;
    case Mode::Spread: {
      const std::size_t count = std::max<std::size_t>(value, 1);
      if (count == 1) {
        out.push_back(0);
        break;
      }
      for (std::size_t i = 0; i < count; ++i) {
        // Integer rounding of i * (N-1) / (count-1).
        const std::size_t num = i * (pool_size - 1);
        const std::size_t den = count - 1;
        const std::size_t p = (2 * num + den) / (2 * den);
        if (out.empty() || out.back() != p) out.push_back(p);
      }
      break;
    }
  }
  return out;
}

void SweepConfig::validate() const {
  if (pool_sizes.empty()) throw ConfigError("sweep needs at least one pool size");
  for (std::size_t i = 0; i < pool_sizes.size(); ++i) {
    if (pool_sizes[i] == 0) throw ConfigError("pool sizes must be positive");
    if (i > 0 && pool_sizes[i] <= pool_sizes[i - 1]) {
      throw ConfigError("pool sizes must be strictly ascending");
    }
  }
  if (positions.mode != PositionRule::Mode::All && positions.value == 0) {
    throw ConfigError("position stride/spread must be >= 1");
  }
  if (tasks.empty()) throw ConfigError("sweep needs at least one task");
  if (trials_per_cell == 0) throw ConfigError("trials_per_cell must be >= 1");
  if (strategy.k == 0) throw ConfigError("strategy k must be >= 1");
}

std::uint64_t trial_seed(std::uint64_t sweep_seed, std::size_t task_index, std::size_t trial) {
  std::uint64_t s = detail::splitmix64(sweep_seed);
  s = detail::splitmix64(s ^ (static_cast<std::uint64_t>(task_index) + 1));
  s = detail::splitmix64(s ^ ((static_cast<std::uint64_t>(trial) + 1) << 32));
  return s;
}

Registry build_pool(const TrialSpec& spec, const Registry& bank) {
  if (spec.pool_size == 0) throw std::invalid_argument("pool size must be >= 1");
  if (spec.ground_truth_position >= spec.pool_size) {
    throw std::invalid_argument("ground truth position " + std::to_string(spec.ground_truth_position) +
                                " outside pool of " + std::to_string(spec.pool_size));
  }
  const McpSchema* truth = bank.find(spec.task.ground_truth_id);
  if (truth == nullptr) {
    throw std::invalid_argument("ground truth '" + spec.task.ground_truth_id + "' not in bank");
  }

  const std::unordered_set<std::string_view> reserved(spec.reserved_ids.begin(),
                                                      spec.reserved_ids.end());
  std::vector<const McpSchema*> candidates;
  candidates.reserve(bank.size());
  for (const auto& s : bank) {
    if (s.id != truth->id && !reserved.count(s.id)) candidates.push_back(&s);
  }
  const std::size_t wanted = spec.pool_size - 1;
  if (candidates.size() < wanted) {
    throw InsufficientDistractors("pool of " + std::to_string(spec.pool_size) + " needs " +
                                  std::to_string(wanted) + " distractors, bank has " +
                                  std::to_string(candidates.size()));
  }

  detail::Rng rng(spec.seed);
  for (std::size_t i = 0; i < wanted; ++i) {
    const std::size_t j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }

  std::vector<McpSchema> pool;
  pool.reserve(spec.pool_size);
  for (std::size_t i = 0; i < wanted; ++i) pool.push_back(*candidates[i]);
  pool.insert(pool.begin() + static_cast<std::ptrdiff_t>(spec.ground_truth_position), *truth);
  return Registry(std::move(pool), bank.built_at());
}

TrialOutcome run_trial(const TrialSpec& spec, const Registry& bank, const EmbedderConfig& embedder,
                       const Selector& selector, bool record_latency) {
  const auto start = std::chrono::steady_clock::now();
  TrialOutcome outcome;
  outcome.spec = spec;

  const Registry pool = build_pool(spec, bank);
  const auto documents = pool.documents();
  try {
    const auto fitted = fit_corpus(documents, embedder);
    VectorIndex index(fitted->dimension());
    const auto vectors = fitted->embed_batch([&] {
      std::vector<std::string> texts;
      texts.reserve(documents.size());
      for (const auto& d : documents) texts.push_back(d.text);
      return texts;
    }());
    for (std::size_t i = 0; i < documents.size(); ++i) index.add(documents[i].schema_id, vectors[i]);

    auto result = run_selection(spec.strategy, spec.task.query, pool, index, *fitted, selector);
    outcome.chosen = std::move(result.chosen);
    outcome.prompt_tokens = result.prompt_tokens;
    outcome.completion_tokens = result.completion_tokens;
    if (result.error) outcome.detail = *result.error;
  } catch (const TransportError& e) {
    outcome.detail = e.what();
  }
  outcome.success = outcome.chosen.has_value() && *outcome.chosen == spec.task.ground_truth_id;

  if (record_latency) {
    outcome.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  }
  return outcome;
}

std::vector<TrialOutcome> run_sweep(const SweepConfig& config, const Registry& bank,
                                    const EmbedderConfig& embedder, const Selector& selector) {
  config.validate();
  std::vector<std::string> reserved;
  for (const auto& t : config.tasks) reserved.push_back(t.ground_truth_id);

  std::vector<TrialSpec> specs;
  for (std::size_t t = 0; t < config.tasks.size(); ++t) {
    for (const std::size_t n : config.pool_sizes) {
      for (const std::size_t position : config.positions.positions(n)) {
        for (std::size_t trial = 0; trial < config.trials_per_cell; ++trial) {
          TrialSpec spec;
          spec.task = config.tasks[t];
          spec.pool_size = n;
          spec.ground_truth_position = position;
          spec.seed = trial_seed(config.seed, t, trial);
          spec.strategy = config.strategy;
          spec.trial = trial;
          spec.reserved_ids = reserved;
          specs.push_back(std::move(spec));
        }
      }
    }
  }

  std::vector<TrialOutcome> outcomes(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        outcomes[i] = run_trial(specs[i], bank, embedder, selector, config.record_latency);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = specs.size();
      }
    }
  };

  std::size_t threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(specs.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

const StrategyMetrics* MetricsReport::find(StrategyKind kind) const {
  for (const auto& row : rows) {
    if (row.strategy == kind) return &row;
  }
  return nullptr;
}

MetricsReport aggregate_metrics(std::span<const TrialOutcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("cannot aggregate zero outcomes");
  struct Sums {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double prompt = 0.0;
    double completion = 0.0;
  };
  Sums sums[3];
  for (const auto& o : outcomes) {
    auto& s = sums[strategy_rank(o.spec.strategy.kind)];
    ++s.trials;
    s.successes += o.success ? 1 : 0;
    s.prompt += static_cast<double>(o.prompt_tokens);
    s.completion += static_cast<double>(o.completion_tokens);
  }
  MetricsReport report;
  constexpr StrategyKind order[] = {StrategyKind::RagMcp, StrategyKind::ActualMatch,
                                    StrategyKind::BlankConditioning};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = sums[i];
    if (s.trials == 0) continue;
    const auto n = static_cast<double>(s.trials);
    report.rows.push_back({order[i], round2(100.0 * static_cast<double>(s.successes) / n),
                           round2(s.prompt / n), round2(s.completion / n), s.trials});
  }
  return report;
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"strategy", to_string(r.strategy)},
                    {"accuracy_pct", r.accuracy_pct},
                    {"avg_prompt_tokens", r.avg_prompt_tokens},
                    {"avg_completion_tokens", r.avg_completion_tokens},
                    {"trial_count", r.trial_count}});
  }
  return {{"strategies", std::move(rows)}};
}

MetricsReport metrics_from_json(const nlohmann::json& value) {
  MetricsReport report;
  for (const auto& row : value.at("strategies")) {
    report.rows.push_back({parse_strategy_kind(row.at("strategy").get<std::string>()),
                           row.at("accuracy_pct").get<double>(),
                           row.at("avg_prompt_tokens").get<double>(),
                           row.at("avg_completion_tokens").get<double>(),
                           row.at("trial_count").get<std::size_t>()});
  }
  return report;
}

std::string metrics_table(const MetricsReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s  %12s  %17s  %21s\n", "Baseline", "Accuracy (%)",
                "Avg Prompt Tokens", "Avg Completion Tokens");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-18s  %12.2f  %17.2f  %21.2f\n",
                  std::string(display_name(r.strategy)).c_str(), r.accuracy_pct,
                  r.avg_prompt_tokens, r.avg_completion_tokens);
    out += line;
  }
  return out;
}

std::string grid_csv(std::span<const TrialOutcome> outcomes) {
  std::vector<const TrialOutcome*> rows;
  rows.reserve(outcomes.size());
  for (const auto& o : outcomes) rows.push_back(&o);
  std::stable_sort(rows.begin(), rows.end(), [](const TrialOutcome* a, const TrialOutcome* b) {
    const auto key = [](const TrialOutcome* o) {
      return std::tie(o->spec.task.id, o->spec.pool_size, o->spec.ground_truth_position,
                      o->spec.trial);
    };
    if (key(a) != key(b)) return key(a) < key(b);
    return strategy_rank(a->spec.strategy.kind) < strategy_rank(b->spec.strategy.kind);
  });

  std::string out(kGridHeader);
  out += '\n';
  for (const auto* o : rows) {
    out += csv_field(o->spec.task.id);
    out += ',' + std::to_string(o->spec.pool_size);
    out += ',' + std::to_string(o->spec.ground_truth_position);
    out += ',' + std::to_string(o->spec.trial);
    out += ',';
    out += to_string(o->spec.strategy.kind);
    out += o->success ? ",1" : ",0";
    out += ',' + std::to_string(o->prompt_tokens);
    out += ',' + std::to_string(o->completion_tokens);
    out += ',' + std::to_string(o->latency_ms);
    out += '\n';
  }
  return out;
}

std::vector<TrialOutcome> parse_grid_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw std::runtime_error("grid csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kGridHeader) throw std::runtime_error("grid csv line 1: unexpected header");

  const auto number = [&](const std::string& text, const char* column) -> std::uint64_t {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != text.size() || text.empty() || text[0] == '-') {
      throw std::runtime_error("grid csv line " + std::to_string(line_no) + ": bad " + column +
                               " '" + text + "'");
    }
    return v;
  };

  std::vector<TrialOutcome> outcomes;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) {
      throw std::runtime_error("grid csv line " + std::to_string(line_no) + ": expected 9 fields");
    }
    TrialOutcome o;
    o.spec.task.id = f[0];
    o.spec.pool_size = number(f[1], "pool_size");
    o.spec.ground_truth_position = number(f[2], "position");
    o.spec.trial = number(f[3], "trial");
    try {
      o.spec.strategy.kind = parse_strategy_kind(f[4]);
    } catch (const ConfigError& e) {
      throw std::runtime_error("grid csv line " + std::to_string(line_no) + ": " + e.what());
    }
    if (f[5] != "0" && f[5] != "1") {
      throw std::runtime_error("grid csv line " + std::to_string(line_no) + ": success must be 0 or 1");
    }
    o.success = f[5] == "1";
    o.prompt_tokens = number(f[6], "prompt_tokens");
    o.completion_tokens = number(f[7], "completion_tokens");
    o.latency_ms = static_cast<std::int64_t>(number(f[8], "latency_ms"));
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

}  // namespace ragmcp
