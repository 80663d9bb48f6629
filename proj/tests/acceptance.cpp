// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ragmcp/gateway.hpp"
#include "ragmcp/harness.hpp"
#include "ragmcp/stress.hpp"
#include "ragmcp/synthetic.hpp"
#include "ragmcp/tokens.hpp"
#include "support.hpp"

namespace {

using namespace ragmcp;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Result {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Result oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  std::size_t comparisons = 0;
  for (int r = 0; r < 200; ++r) {
    const std::size_t n = 1 + rng() % 1000;
    const std::size_t vocab = 5 + rng() % 400;
    const std::size_t dim = std::size_t{8} << (rng() % 8);
    std::vector<McpSchema> schemas;
    for (std::size_t i = 0; i < n; ++i) schemas.push_back(test::random_schema(rng, i, vocab));
    EmbedderConfig config;
    config.dimension = dim;
    const auto catalog = build_catalog(Registry(std::move(schemas)), config);
    for (int q = 0; q < 5; ++q) {
      const auto query = catalog->embedder->embed(test::random_schema(rng, 0, vocab).description);
      for (std::size_t k : {1u, 5u, 10u}) {
        const auto got = catalog->index.search(query, k);
        const auto want = test::brute_force_search(catalog->index, query, k);
        ++comparisons;
        if (got.size() != want.size()) return {false, fmt("registry %d: size differs", r)};
        for (std::size_t i = 0; i < got.size(); ++i) {
          if (got[i].schema_id != want[i].schema_id ||
              std::abs(got[i].score - want[i].score) > 1e-9) {
            return {false, fmt("registry %d k=%zu rank %zu: %s vs %s", r, k, i,
                               got[i].schema_id.c_str(), want[i].schema_id.c_str())};
          }
        }
      }
    }
  }
  const double secs = seconds_since(start);
  return {secs < 60.0, fmt("200 registries, %zu searches identical to brute force in %.1fs (limit 60s)",
                           comparisons, secs)};
}

Result prompt_reduction() {
  const auto bench = make_websearch_benchmark(default_bank_options());
  SweepConfig sweep;
  sweep.pool_sizes = {2, 3, 10, 20, 30, 100, 300, 1000};
  sweep.positions = {PositionRule::Mode::Spread, 5};
  sweep.tasks = bench.tasks;
  sweep.seed = 2025;
  const LexicalOverlapSelector sel;
  sweep.strategy = {StrategyKind::RagMcp, 1};
  const auto rag = run_sweep(sweep, bench.bank, EmbedderConfig{}, sel);
  sweep.strategy = {StrategyKind::BlankConditioning, 1};
  const auto blank = run_sweep(sweep, bench.bank, EmbedderConfig{}, sel);

  double rag20 = 0;
  double blank20 = 0;
  for (std::size_t i = 0; i < rag.size(); ++i) {
    if (rag[i].prompt_tokens >= blank[i].prompt_tokens) {
      return {false, fmt("%s N=%zu pos=%zu: rag %zu >= blank %zu", rag[i].spec.task.id.c_str(),
                         rag[i].spec.pool_size, rag[i].spec.ground_truth_position,
                         rag[i].prompt_tokens, blank[i].prompt_tokens)};
    }
    if (rag[i].spec.pool_size == 20) {
      rag20 += double(rag[i].prompt_tokens);
      blank20 += double(blank[i].prompt_tokens);
    }
  }
  const double ratio = rag20 / blank20;
  return {ratio <= 0.5, fmt("rag < blank on all %zu pools with N>=2; N=20 token ratio %.3f (limit 0.5)",
                            rag.size(), ratio)};
}

Result accuracy_ordering() {
  const auto config = load_stress_config(test::source_dir() / "configs/baselines.json");
  const auto result = run_stress(config);
  const auto* rag = result.metrics.find(StrategyKind::RagMcp);
  const auto* actual = result.metrics.find(StrategyKind::ActualMatch);
  const auto* blank = result.metrics.find(StrategyKind::BlankConditioning);
  if (!rag || !actual || !blank) return {false, "missing strategy rows"};
  const bool ok = config.sweep.pool_sizes == std::vector<std::size_t>{100} &&
                  config.sweep.tasks.size() == 20 && rag->accuracy_pct > actual->accuracy_pct &&
                  actual->accuracy_pct >= blank->accuracy_pct;
  return {ok, fmt("N=100, 20 tasks: rag_mcp %.2f%% > actual_match %.2f%% >= blank %.2f%%",
                  rag->accuracy_pct, actual->accuracy_pct, blank->accuracy_pct)};
}

std::map<std::size_t, double> accuracy_by_pool_size(const std::vector<TrialOutcome>& outcomes) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& o : outcomes) {
    auto& c = counts[o.spec.pool_size];
    c.first += o.success ? 1 : 0;
    ++c.second;
  }
  std::map<std::size_t, double> out;
  for (const auto& [n, c] : counts) out[n] = 100.0 * double(c.first) / double(c.second);
  return out;
}

std::string describe(const std::map<std::size_t, double>& acc) {
  std::string s;
  for (const auto& [n, a] : acc) s += fmt("%sN=%zu:%.0f%%", s.empty() ? "" : " ", n, a);
  return s;
}

Result stress_shape() {
  const auto degr =
      accuracy_by_pool_size(run_stress(load_stress_config(test::source_dir() / "configs/degradation.json")).outcomes);
  const auto disjoint = accuracy_by_pool_size(
      run_stress(load_stress_config(test::source_dir() / "configs/token_disjoint.json")).outcomes);
  const std::vector<std::size_t> expected_sizes = {1, 10, 100, 1000};

  bool ok = degr.size() == 4 && disjoint.size() == 4 && degr.at(1) == 100.0;
  double previous = 100.0;
  for (auto n : expected_sizes) {
    ok = ok && degr.count(n) && degr.at(n) <= previous && disjoint.count(n) && disjoint.at(n) == 100.0;
    if (degr.count(n)) previous = degr.at(n);
  }
  return {ok, "degradation " + describe(degr) + "; token-disjoint " + describe(disjoint)};
}

Result determinism() {
  const test::TempDir dir;
  const auto config = default_stress_config();
  const auto a = run_stress(config, dir.path() / "a");
  const auto b = run_stress(config, dir.path() / "b");
  const bool ok = a.grid_csv == b.grid_csv && a.metrics_json == b.metrics_json &&
                  test::read_file(dir.path() / "a/grid.csv") == test::read_file(dir.path() / "b/grid.csv") &&
                  test::read_file(dir.path() / "a/metrics.json") ==
                      test::read_file(dir.path() / "b/metrics.json");
  return {ok, fmt("default sweep twice: %zu rows, grid.csv and metrics.json %s", a.outcomes.size(),
                  ok ? "byte-identical" : "differ")};
}

Result tokenizer_goldens() {
  const auto golden =
      json::parse(test::read_file(test::source_dir() / "tests/golden/token_counts.json"));
  std::size_t matched = 0;
  std::string first_bad;
  for (const auto& entry : golden) {
    const std::string text =
        entry.contains("file")
            ? test::read_file(test::source_dir() / "tests/golden" / entry["file"].get<std::string>())
            : entry["text"].get<std::string>();
    if (count_tokens(text).value == entry["count"].get<std::size_t>()) {
      ++matched;
    } else if (first_bad.empty()) {
      first_bad = entry["name"].get<std::string>();
    }
  }
  // The prompt fixture must also be what build_prompt renders.
  McpSchema sky = test::schema(
      "skycast", "SkyCast Weather", "Forecasts and current conditions",
      {{"get_forecast", "", {test::param("city"), test::param("days", ParamKind::Integer)}},
       {"get_conditions", "", {test::param("city")}}});
  McpSchema web = test::schema(
      "web_search", "WebSearch", "Search the web",
      {{"search", "", {test::param("query"), test::param("count", ParamKind::Integer)}}});
  const McpSchema* both[] = {&sky, &web};
  const bool prompt_ok = build_prompt("What's the weather in Lisbon this weekend?", both) ==
                         test::read_file(test::source_dir() / "tests/golden/two_schema_prompt.txt");
  const bool ok = golden.size() == 25 && matched == 25 && prompt_ok;
  return {ok, fmt("%zu/%zu pinned counts match%s%s", matched, golden.size(),
                  prompt_ok ? ", prompt fixture renders exactly" : ", prompt fixture differs",
                  first_bad.empty() ? "" : (", first mismatch " + first_bad).c_str())};
}

Result gateway_round_trip() {
#ifndef RAGMCP_CLI
  return {false, "ragmcp CLI not built"};
#else
  const auto start = Clock::now();
  const test::TempDir dir;
  {
    std::ofstream(dir.path() / "serve.json") << R"({"host": "127.0.0.1", "port": 0, "threads": 8})";
  }
  test::Child child({RAGMCP_CLI, "serve", "--config", (dir.path() / "serve.json").string()});
  const auto banner = child.read_line();
  const int port = test::parse_listen_port(banner);
  if (port <= 0) return {false, "no listening banner: '" + banner + "' " + child.read_stderr()};

  httplib::Client client("127.0.0.1", port);
  const auto bench = make_websearch_benchmark(default_bank_options());
  std::vector<McpSchema> schemas;
  // Ground truths plus distractors, so the tasks have their targets.
  for (std::size_t i = 0; i < 50; ++i) schemas.push_back(bench.bank.schemas()[i]);

  for (std::size_t i = 0; i < schemas.size(); ++i) {
    const auto res = client.Post("/servers", schema_to_json(schemas[i]).dump(), "application/json");
    if (!res || res->status != 201) return {false, fmt("registration %zu failed", i)};
    const json req = {{"query", canonical_document(schemas[i]).text}, {"k", 1}};
    const auto got = client.Post("/retrieve", req.dump(), "application/json");
    if (!got || got->status != 200) return {false, fmt("retrieve after registration %zu failed", i)};
    const auto top = json::parse(got->body)["candidates"][0]["schema_id"].get<std::string>();
    if (top != schemas[i].id) {
      return {false, fmt("read-your-writes: after registering %s top hit was %s",
                         schemas[i].id.c_str(), top.c_str())};
    }
  }

  const auto catalog = build_catalog(Registry(schemas), EmbedderConfig{});
  const LexicalOverlapSelector selector;
  std::vector<RetrieveRequest> requests;
  for (std::size_t i = 0; i < 100; ++i) {
    RetrieveRequest r;
    r.query = bench.tasks[i % bench.tasks.size()].query;
    r.k = 1 + i % 5;
    r.strategy = static_cast<StrategyKind>(i % 3);
    r.validate = i % 4 != 0;
    requests.push_back(r);
  }
  std::vector<json> bodies(requests.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> transport_ok{true};
  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < 10; ++w) {
      workers.emplace_back([&] {
        httplib::Client c("127.0.0.1", port);
        for (std::size_t i = next++; i < requests.size(); i = next++) {
          const auto res = c.Post("/retrieve", to_json(requests[i]).dump(), "application/json");
          if (!res || res->status != 200) {
            transport_ok = false;
            continue;
          }
          bodies[i] = json::parse(res->body);
        }
      });
    }
  }
  if (!transport_ok) return {false, "a concurrent retrieve failed"};
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (bodies[i] != to_json(retrieve(*catalog, requests[i], selector))) {
      return {false, fmt("response %zu differs from library output", i)};
    }
  }
  child.signal(SIGTERM);
  const int status = child.wait();
  const double secs = seconds_since(start);
  return {status == 0 && secs < 30.0,
          fmt("50 registrations read back, 100 concurrent retrieves equal library output, "
              "clean exit %d, %.1fs (limit 30s)",
              status, secs)};
#endif
}

Result persistence() {
  const test::TempDir dir;
  const auto bench = make_websearch_benchmark(default_bank_options());
  std::vector<McpSchema> schemas(bench.bank.schemas().begin(), bench.bank.schemas().begin() + 800);
  save_registry_file(Registry(schemas), dir.path() / "registry.json");

  const auto loaded = load_registry_file(dir.path() / "registry.json");
  const auto original = build_catalog(loaded, EmbedderConfig{});
  save_snapshot_file(original->index, dir.path() / "index.bin");

  const auto restored = build_catalog(load_registry_file(dir.path() / "registry.json"), EmbedderConfig{},
                                      load_snapshot_file(dir.path() / "index.bin"));
  const LexicalOverlapSelector selector;
  std::mt19937_64 rng(8);
  std::size_t same = 0;
  for (int q = 0; q < 50; ++q) {
    RetrieveRequest r;
    const auto& task = bench.tasks[rng() % bench.tasks.size()];
    const auto& other = schemas[rng() % schemas.size()];
    r.query = q % 2 == 0 ? task.query : other.description + " " + other.name;
    r.k = 1 + rng() % 10;
    r.strategy = static_cast<StrategyKind>(rng() % 3);
    if (to_json(retrieve(*original, r, selector)).dump() ==
        to_json(retrieve(*restored, r, selector)).dump()) {
      ++same;
    }
  }
  const bool ok = same == 50 && restored->index == original->index;
  return {ok, fmt("%zu/50 random queries identical after registry + snapshot reload", same)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
      {"1 index matches brute-force oracle", oracle_equivalence},
      {"2 prompt-token reduction", prompt_reduction},
      {"3 accuracy ordering", accuracy_ordering},
      {"4 stress-test shape", stress_shape},
      {"5 sweep determinism", determinism},
      {"6 tokenizer goldens", tokenizer_goldens},
      {"7 gateway round-trip", gateway_round_trip},
      {"8 registry/index persistence", persistence},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-36s %s\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str());
    std::fflush(stdout);
    failures += r.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
