// ragmcp: command line front end for the RAG-MCP gateway and stress harness.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ragmcp/errors.hpp"
#include "ragmcp/gateway.hpp"
#include "ragmcp/harness.hpp"
#include "ragmcp/http_server.hpp"
#include "ragmcp/index.hpp"
#include "ragmcp/registry.hpp"
#include "ragmcp/stress.hpp"
#include "ragmcp/synthetic.hpp"

namespace {

using json = nlohmann::json;

int run_serve(const std::string& config_path) {
  // Handle SIGINT/SIGTERM on a dedicated thread so the server can be stopped
  // outside of signal context.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const auto config = ragmcp::load_gateway_config(config_path);
  auto gateway = ragmcp::Gateway::from_config(config);
  ragmcp::HttpServer server(*gateway, config.threads);
  const int port = server.bind(config.host, config.port);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  std::cout << "listening on http://" << config.host << ":" << port << " with "
            << gateway->catalog()->registry.size() << " servers" << std::endl;
  server.listen();

  // listen() also returns if the socket fails; wake the waiter in that case.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

int run_index_build(const std::string& registry_path, const std::string& out,
                    std::size_t dimension) {
  ragmcp::EmbedderConfig embedder;
  embedder.dimension = dimension;
  const auto catalog =
      ragmcp::build_catalog(ragmcp::load_registry_file(registry_path), embedder);
  ragmcp::save_snapshot_file(catalog->index, out);
  std::cout << "wrote " << catalog->index.size() << " vectors (dimension " << dimension
            << ") to " << out << "\n";
  return 0;
}

int run_retrieve(const std::string& registry_path, const std::string& index_path,
                 const ragmcp::RetrieveRequest& request, std::size_t dimension) {
  ragmcp::EmbedderConfig embedder;
  embedder.dimension = dimension;
  auto registry = ragmcp::load_registry_file(registry_path);
  const auto catalog =
      index_path.empty()
          ? ragmcp::build_catalog(std::move(registry), embedder)
          : ragmcp::build_catalog(std::move(registry), embedder,
                                  ragmcp::load_snapshot_file(index_path));
  const ragmcp::LexicalOverlapSelector selector;
  std::cout << ragmcp::to_json(ragmcp::retrieve(*catalog, request, selector)).dump(2) << "\n";
  return 0;
}

int run_stress(const std::string& config_path, const std::string& out_dir) {
  const auto config =
      config_path.empty() ? ragmcp::default_stress_config() : ragmcp::load_stress_config(config_path);
  const auto result = ragmcp::run_stress(config, out_dir);
  std::cout << result.metrics_table;
  std::cout << result.outcomes.size() << " trials written to " << out_dir << "\n";
  return 0;
}

int run_report(const std::string& grid_path, bool as_json) {
  std::ifstream in(grid_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + grid_path);
  const auto outcomes = ragmcp::parse_grid_csv(in);
  const auto report = ragmcp::aggregate_metrics(outcomes);
  if (as_json) {
    std::cout << ragmcp::metrics_to_json(report).dump(2) << "\n";
  } else {
    std::cout << ragmcp::metrics_table(report);
  }
  return 0;
}

int run_bank_export(const std::string& preset, const std::string& out) {
  const auto options = ragmcp::synthetic_options_from_json(json(preset));
  const auto benchmark = ragmcp::make_websearch_benchmark(options);
  ragmcp::save_registry_file(benchmark.bank, out);
  json tasks = json::array();
  for (const auto& t : benchmark.tasks) {
    tasks.push_back({{"id", t.id}, {"query", t.query}, {"ground_truth_id", t.ground_truth_id}});
  }
  std::cout << json{{"tasks", tasks}}.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAG-MCP tool retrieval gateway and prompt-bloat stress harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  serve->add_option("--config", config_path, "Gateway config (JSON)")->required();

  std::string registry_path;
  std::string out_path;
  std::size_t dimension = 1024;
  auto* index = app.add_subcommand("index", "Index snapshot operations");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Embed a registry and write an index snapshot");
  index_build->add_option("--registry", registry_path, "Registry file")->required();
  index_build->add_option("--out", out_path, "Snapshot path")->required();
  index_build->add_option("--dimension", dimension, "Embedding dimension")->check(CLI::Range(8, 1 << 20));

  ragmcp::RetrieveRequest request;
  std::string strategy = "rag_mcp";
  std::string index_path;
  bool no_validate = false;
  auto* retrieve = app.add_subcommand("retrieve", "Retrieve candidate servers for a task");
  retrieve->add_option("--query", request.query, "Task description")->required();
  retrieve->add_option("--k", request.k, "Candidates to retrieve (rag_mcp)")->check(CLI::PositiveNumber);
  retrieve->add_option("--strategy", strategy, "rag_mcp | actual_match | blank_conditioning");
  retrieve->add_option("--registry", registry_path, "Registry file")->required();
  retrieve->add_option("--index", index_path, "Index snapshot built from the same registry");
  retrieve->add_option("--dimension", dimension, "Embedding dimension")->check(CLI::Range(8, 1 << 20));
  retrieve->add_flag("--no-validate", no_validate, "Skip schema-level validation");

  auto* stress = app.add_subcommand("stress", "Prompt-bloat stress test");
  stress->require_subcommand(1);
  auto* stress_run = stress->add_subcommand("run", "Run a sweep and write grid.csv / metrics");
  stress_run->add_option("--config", config_path, "Sweep config (JSON); defaults to the desk-scale sweep");
  stress_run->add_option("--out", out_path, "Output directory")->required();

  std::string grid_path;
  bool report_json = false;
  auto* report = app.add_subcommand("report", "Summarise a grid CSV as a metrics table");
  report->add_option("--grid", grid_path, "grid.csv from `stress run`")->required();
  report->add_flag("--json", report_json, "Emit JSON instead of the text table");

  std::string preset = "default";
  auto* bank = app.add_subcommand("bank", "Synthetic benchmark bank");
  bank->require_subcommand(1);
  auto* bank_export = bank->add_subcommand("export", "Write a synthetic bank as a registry file");
  bank_export->add_option("--preset", preset, "default | token_disjoint | degradation");
  bank_export->add_option("--out", out_path, "Registry file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(config_path);
    if (*index_build) return run_index_build(registry_path, out_path, dimension);
    if (*retrieve) {
      request.strategy = ragmcp::parse_strategy_kind(strategy);
      request.validate = !no_validate;
      return run_retrieve(registry_path, index_path, request, dimension);
    }
    if (*stress_run) return run_stress(config_path, out_path);
    if (*report) return run_report(grid_path, report_json);
    if (*bank_export) return run_bank_export(preset, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
