#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ragmcp/errors.hpp"
#include "ragmcp/harness.hpp"
#include "ragmcp/stress.hpp"
#include "ragmcp/synthetic.hpp"
#include "ragmcp/tokens.hpp"
#include "support.hpp"

namespace ragmcp {
namespace {

using Positions = std::vector<std::size_t>;

const Benchmark& default_benchmark() {
  static const Benchmark b = make_websearch_benchmark(default_bank_options());
  return b;
}

std::vector<std::string> all_truths() {
  std::vector<std::string> ids;
  for (const auto& t : default_benchmark().tasks) ids.push_back(t.ground_truth_id);
  return ids;
}

TrialSpec spec_for(std::size_t task, std::size_t n, std::size_t position, std::uint64_t seed,
                   StrategyKind kind = StrategyKind::RagMcp) {
  TrialSpec s;
  s.task = default_benchmark().tasks.at(task);
  s.pool_size = n;
  s.ground_truth_position = position;
  s.seed = seed;
  s.strategy = {kind, 1};
  s.reserved_ids = all_truths();
  return s;
}

EmbedderConfig embedder() { return EmbedderConfig{}; }

TEST(PositionRule, Modes) {
  EXPECT_EQ((PositionRule{PositionRule::Mode::All, 1}.positions(4)), (Positions{0, 1, 2, 3}));
  EXPECT_EQ((PositionRule{PositionRule::Mode::Stride, 3}.positions(10)), (Positions{0, 3, 6, 9}));
  EXPECT_EQ((PositionRule{PositionRule::Mode::Spread, 5}.positions(100)),
            (Positions{0, 25, 50, 74, 99}));
  EXPECT_EQ((PositionRule{PositionRule::Mode::Spread, 5}.positions(3)), (Positions{0, 1, 2}));
  EXPECT_EQ((PositionRule{PositionRule::Mode::Spread, 5}.positions(1)), (Positions{0}));
}

TEST(BuildPool, SizeOneIsGroundTruthOnly) {
  const auto pool = build_pool(spec_for(3, 1, 0, 1), default_benchmark().bank);
  ASSERT_EQ(pool.size(), 1u);
  EXPECT_EQ(pool.schemas()[0].id, "flight_finder");
}

TEST(BuildPool, MembershipOracle) {
  const auto& bank = default_benchmark().bank;
  const auto spec = spec_for(0, 50, 17, 7);
  const auto pool = build_pool(spec, bank);
  ASSERT_EQ(pool.size(), 50u);
  EXPECT_EQ(pool.schemas()[17].id, spec.task.ground_truth_id);
  const auto reserved = all_truths();
  std::set<std::string> distractors;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i == 17) continue;
    const auto& s = pool.schemas()[i];
    distractors.insert(s.id);
    const auto* original = bank.find(s.id);
    ASSERT_NE(original, nullptr) << s.id;
    EXPECT_EQ(*original, s);
    EXPECT_EQ(std::count(reserved.begin(), reserved.end(), s.id), 0) << s.id;
  }
  EXPECT_EQ(distractors.size(), 49u);
}

TEST(BuildPool, DeterministicAndPrefixNested) {
  const auto& bank = default_benchmark().bank;
  const auto a = build_pool(spec_for(2, 100, 40, 99), bank);
  EXPECT_EQ(a, build_pool(spec_for(2, 100, 40, 99), bank));
  EXPECT_NE(a, build_pool(spec_for(2, 100, 40, 98), bank));

  const auto distractors = [](const Registry& pool, const std::string& truth) {
    std::vector<std::string> ids;
    for (const auto& s : pool) {
      if (s.id != truth) ids.push_back(s.id);
    }
    return ids;
  };
  const auto truth = default_benchmark().tasks[2].ground_truth_id;
  const auto big = distractors(build_pool(spec_for(2, 1000, 0, 5), bank), truth);
  for (std::size_t n : {2u, 10u, 100u}) {
    const auto small = distractors(build_pool(spec_for(2, n, n - 1, 5), bank), truth);
    EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin())) << n;
  }
}

TEST(BuildPool, Errors) {
  const auto& bank = default_benchmark().bank;
  EXPECT_THROW(build_pool(spec_for(0, bank.size(), 0, 1), bank), InsufficientDistractors);
  EXPECT_THROW(build_pool(spec_for(0, 10, 10, 1), bank), std::invalid_argument);
  auto missing = spec_for(0, 10, 0, 1);
  missing.task.ground_truth_id = "nope";
  EXPECT_THROW(build_pool(missing, bank), std::invalid_argument);
}

TEST(RunTrial, RagWithSinglePoolAlwaysSucceeds) {
  const LexicalOverlapSelector sel;
  for (std::size_t t = 0; t < 20; ++t) {
    const auto o = run_trial(spec_for(t, 1, 0, t), default_benchmark().bank, embedder(), sel);
    EXPECT_TRUE(o.success) << t;
    EXPECT_EQ(o.chosen, o.spec.task.ground_truth_id);
    EXPECT_EQ(o.completion_tokens, 0u);
  }
}

TEST(RunTrial, VerbatimQueryTokenDisjointAlwaysSucceeds) {
  const auto bench = make_websearch_benchmark(token_disjoint_bank_options());
  const LexicalOverlapSelector sel;
  for (std::size_t t = 0; t < 20; t += 3) {
    for (std::size_t n : {2u, 50u, 500u}) {
      TrialSpec s;
      s.task = bench.tasks[t];
      s.pool_size = n;
      s.ground_truth_position = n / 2;
      s.seed = 100 + t;
      for (const auto& task : bench.tasks) s.reserved_ids.push_back(task.ground_truth_id);
      EXPECT_TRUE(run_trial(s, bench.bank, embedder(), sel).success) << t << " " << n;
    }
  }
}

TEST(RunTrial, BlankConditioningRerunIsIdentical) {
  const LexicalOverlapSelector sel;
  const auto spec = spec_for(4, 100, 33, 2025, StrategyKind::BlankConditioning);
  const std::vector<TrialOutcome> a = {run_trial(spec, default_benchmark().bank, embedder(), sel, false)};
  const std::vector<TrialOutcome> b = {run_trial(spec, default_benchmark().bank, embedder(), sel, false)};
  EXPECT_EQ(grid_csv(a), grid_csv(b));
  EXPECT_EQ(metrics_to_json(aggregate_metrics(a)), metrics_to_json(aggregate_metrics(b)));
}

TEST(RunTrial, SelectorTransportErrorIsRecorded) {
  const ChatCompletionSelector dead({"http://127.0.0.1:1/chat", "m", std::chrono::milliseconds(300)});
  auto spec = spec_for(0, 10, 0, 1, StrategyKind::BlankConditioning);
  const auto o = run_trial(spec, default_benchmark().bank, embedder(), dead);
  EXPECT_FALSE(o.success);
  EXPECT_FALSE(o.detail.empty());
}

SweepConfig small_sweep(std::vector<std::size_t> sizes, StrategyKind kind) {
  SweepConfig c;
  c.pool_sizes = std::move(sizes);
  c.positions = {PositionRule::Mode::Spread, 3};
  c.tasks = default_benchmark().tasks;
  c.seed = 2025;
  c.strategy = {kind, 1};
  return c;
}

TEST(RunSweep, SizeOneGrid) {
  const LexicalOverlapSelector sel;
  const auto out = run_sweep(small_sweep({1}, StrategyKind::RagMcp), default_benchmark().bank,
                             embedder(), sel);
  ASSERT_EQ(out.size(), 20u);
  for (const auto& o : out) {
    EXPECT_EQ(o.spec.pool_size, 1u);
    EXPECT_TRUE(o.success);
  }
}

TEST(RunSweep, ThreadCountDoesNotChangeOutput) {
  const LexicalOverlapSelector sel;
  auto config = small_sweep({1, 10, 100}, StrategyKind::ActualMatch);
  config.threads = 1;
  const auto one = run_sweep(config, default_benchmark().bank, embedder(), sel);
  config.threads = 4;
  const auto four = run_sweep(config, default_benchmark().bank, embedder(), sel);
  EXPECT_EQ(grid_csv(one), grid_csv(four));
  // Nesting order is task, pool size, position, trial.
  EXPECT_EQ(one[0].spec.task.id, "task_00");
  EXPECT_EQ(one[1].spec.ground_truth_position, 0u);
  EXPECT_EQ(one[1].spec.pool_size, 10u);
}

TEST(SweepProperty, InvariantsOverStrategies) {
  const LexicalOverlapSelector sel;
  const auto& bank = default_benchmark().bank;
  const std::vector<std::size_t> sizes = {1, 5, 20, 80};

  const auto blank = run_sweep(small_sweep(sizes, StrategyKind::BlankConditioning), bank,
                               embedder(), sel);
  const auto rag = run_sweep(small_sweep(sizes, StrategyKind::RagMcp), bank, embedder(), sel);

  // Blank prompts grow strictly with N.
  double previous = -1.0;
  for (auto n : sizes) {
    std::vector<TrialOutcome> at_n;
    std::copy_if(blank.begin(), blank.end(), std::back_inserter(at_n),
                 [&](const TrialOutcome& o) { return o.spec.pool_size == n; });
    const double avg = aggregate_metrics(at_n).rows[0].avg_prompt_tokens;
    EXPECT_GT(avg, previous) << n;
    previous = avg;
  }

  // rag_mcp k=1 prompts never exceed the largest single-schema prompt.
  std::size_t max_single = 0;
  for (const auto& task : default_benchmark().tasks) {
    for (const auto& s : bank) {
      const McpSchema* one[] = {&s};
      max_single = std::max(max_single, count_tokens(build_prompt(task.query, one)).value);
    }
  }
  for (const auto& o : rag) EXPECT_LE(o.prompt_tokens, max_single);

  for (const auto* grid : {&blank, &rag}) {
    for (const auto& o : *grid) {
      if (o.success) EXPECT_EQ(o.chosen, o.spec.task.ground_truth_id);
    }
  }
}

TrialOutcome outcome(StrategyKind kind, bool success, std::size_t prompt, std::size_t completion) {
  TrialOutcome o;
  o.spec.strategy.kind = kind;
  o.success = success;
  o.prompt_tokens = prompt;
  o.completion_tokens = completion;
  return o;
}

TEST(AggregateMetrics, Arithmetic) {
  std::vector<TrialOutcome> v;
  for (int i = 0; i < 20; ++i) v.push_back(outcome(StrategyKind::RagMcp, i < 9, 10 + i, 1));
  auto r = aggregate_metrics(v);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].accuracy_pct, 45.0);
  EXPECT_EQ(r.rows[0].avg_prompt_tokens, 19.5);
  EXPECT_EQ(r.rows[0].trial_count, 20u);

  v.assign(3, outcome(StrategyKind::BlankConditioning, true, 1, 0));
  v[2].prompt_tokens = 2;
  r = aggregate_metrics(v);
  EXPECT_EQ(r.rows[0].accuracy_pct, 100.0);
  EXPECT_EQ(r.rows[0].avg_prompt_tokens, 1.33);
  EXPECT_THROW(aggregate_metrics({}), std::invalid_argument);
}

TEST(AggregateMetrics, RowOrderIsRagActualBlank) {
  const std::vector<TrialOutcome> v = {outcome(StrategyKind::BlankConditioning, true, 1, 0),
                                       outcome(StrategyKind::RagMcp, true, 1, 0),
                                       outcome(StrategyKind::ActualMatch, true, 1, 0)};
  const auto r = aggregate_metrics(v);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].strategy, StrategyKind::RagMcp);
  EXPECT_EQ(r.rows[1].strategy, StrategyKind::ActualMatch);
  EXPECT_EQ(r.rows[2].strategy, StrategyKind::BlankConditioning);
}

// Table 1 values injected into the report types; only the rendering is under test.
MetricsReport table1_fixture() {
  return MetricsReport{{{StrategyKind::RagMcp, 43.13, 1084.00, 78.14, 0},
                        {StrategyKind::ActualMatch, 18.20, 1646.00, 23.60, 0},
                        {StrategyKind::BlankConditioning, 13.62, 2133.84, 162.25, 0}}};
}

TEST(MetricsReport, TableGolden) {
  EXPECT_EQ(metrics_table(table1_fixture()),
            test::read_file(test::source_dir() / "tests/golden/table1_report.txt"));
}

TEST(MetricsReport, JsonRoundTrip) {
  const auto report = table1_fixture();
  const auto j = metrics_to_json(report);
  EXPECT_EQ(j["strategies"][0]["strategy"], "rag_mcp");
  EXPECT_EQ(j["strategies"][0]["accuracy_pct"], 43.13);
  EXPECT_EQ(j["strategies"][2]["avg_prompt_tokens"], 2133.84);
  EXPECT_EQ(metrics_from_json(j).rows, report.rows);
}

TEST(GridCsv, SortedAndRoundTrips) {
  std::vector<TrialOutcome> v;
  for (const char* id : {"task_01", "task_00"}) {
    for (std::size_t n : {10u, 3u}) {
      auto o = outcome(StrategyKind::RagMcp, n == 3, n * 7, 0);
      o.spec.task.id = id;
      o.spec.pool_size = n;
      o.spec.ground_truth_position = n - 1;
      v.push_back(o);
    }
  }
  const auto csv = grid_csv(v);
  EXPECT_EQ(csv,
            std::string(kGridHeader) + "\n"
            "task_00,3,2,0,rag_mcp,1,21,0,0\n"
            "task_00,10,9,0,rag_mcp,0,70,0,0\n"
            "task_01,3,2,0,rag_mcp,1,21,0,0\n"
            "task_01,10,9,0,rag_mcp,0,70,0,0\n");
  std::istringstream in(csv);
  const auto parsed = parse_grid_csv(in);
  EXPECT_EQ(grid_csv(parsed), csv);
}

TEST(GridCsv, ParseErrorsNameTheLine) {
  const auto error = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_grid_csv(in);
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string header = std::string(kGridHeader) + "\n";
  EXPECT_NE(error("a,b\n").find("line 1"), std::string::npos);
  EXPECT_NE(error(header + "t,1,0,0,rag_mcp,1,5,0,0\nt,1,0,0,rag_mcp,2,5,0,0\n").find("line 3"),
            std::string::npos);
  EXPECT_NE(error(header + "t,x,0,0,rag_mcp,1,5,0,0\n").find("line 2"), std::string::npos);
  EXPECT_NE(error(header + "t,1,0,0,magic,1,5,0,0\n").find("line 2"), std::string::npos);
  EXPECT_NE(error(header + "t,1,0\n").find("line 2"), std::string::npos);
}

TEST(SweepConfigJson, RoundTripAndValidation) {
  auto config = small_sweep({1, 10}, StrategyKind::ActualMatch);
  config.trials_per_cell = 2;
  const auto parsed = sweep_config_from_json(sweep_config_to_json(config));
  EXPECT_EQ(parsed.pool_sizes, config.pool_sizes);
  EXPECT_EQ(parsed.positions, config.positions);
  EXPECT_EQ(parsed.tasks, config.tasks);
  EXPECT_EQ(parsed.strategy, config.strategy);
  EXPECT_EQ(parsed.trials_per_cell, 2u);

  config.pool_sizes = {10, 10};
  EXPECT_THROW(config.validate(), ConfigError);
  config.pool_sizes = {1};
  config.positions = {PositionRule::Mode::Stride, 0};
  EXPECT_THROW(config.validate(), ConfigError);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json{{"positions", "some"}}), ConfigError);
}

TEST(StressConfig, ShippedConfigsLoad) {
  for (const char* name : {"default_sweep", "baselines", "degradation", "token_disjoint"}) {
    const auto c = load_stress_config(test::source_dir() / "configs" / (std::string(name) + ".json"));
    EXPECT_EQ(c.sweep.tasks.size(), 20u) << name;
    EXPECT_FALSE(c.strategies.empty()) << name;
  }
  const auto d = default_stress_config();
  EXPECT_EQ(d.sweep.pool_sizes, (std::vector<std::size_t>{1, 3, 10, 30, 100, 300, 1000, 3000}));
}

TEST(SyntheticBank, Shape) {
  const auto& b = default_benchmark();
  EXPECT_EQ(b.tasks.size(), 20u);
  EXPECT_EQ(b.bank.size(), 20u + default_bank_options().distractors);
  const auto degr = make_websearch_benchmark(degradation_bank_options());
  EXPECT_EQ(degr.bank.size(), 20u + 1100u + 60u);
  EXPECT_NE(degr.bank.find("arxiv_scholar-mirror-3"), nullptr);
  EXPECT_EQ(make_websearch_benchmark(default_bank_options()).bank, b.bank);
}

}  // namespace
}  // namespace ragmcp
