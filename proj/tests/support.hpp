#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <csignal>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include "ragmcp/index.hpp"
#include "ragmcp/registry.hpp"

namespace ragmcp::test {

inline std::filesystem::path source_dir() { return RAGMCP_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ParamDef param(std::string name, ParamKind kind = ParamKind::String, bool required = false) {
  return ParamDef{std::move(name), kind, required, {}};
}

inline McpSchema schema(std::string id, std::string name, std::string description,
                        std::vector<ToolDef> tools, std::vector<std::string> tags = {}) {
  McpSchema s;
  s.id = std::move(id);
  s.name = std::move(name);
  s.description = std::move(description);
  s.tags = std::move(tags);
  s.tools = std::move(tools);
  return s;
}

// Small random schema with words drawn from a vocabulary of `vocab` made-up
// words ("w0", "w1", ...). Used to fuzz the index and the registry.
inline McpSchema random_schema(std::mt19937_64& rng, std::size_t index, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::uniform_int_distribution<int> len(1, 8);
  const auto words = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) {
      if (i > 0) s += ' ';
      s += "w" + std::to_string(word(rng));
    }
    return s;
  };
  McpSchema s;
  s.id = "s" + std::to_string(index);
  s.name = words(1 + len(rng) % 2);
  s.description = words(len(rng));
  ToolDef tool{"tool_" + std::to_string(word(rng)), words(len(rng) / 2), {}};
  const int params = len(rng) % 3;
  for (int p = 0; p < params; ++p) {
    tool.params.push_back(param("p" + std::to_string(p) + "_w" + std::to_string(word(rng))));
  }
  s.tools.push_back(std::move(tool));
  return s;
}

// Reference ranking: full sort of every entry by a from-scratch double
// precision dot product.
inline std::vector<RankedCandidate> brute_force_search(const VectorIndex& index,
                                                       const EmbeddingVector& query,
                                                       std::size_t k) {
  std::vector<RankedCandidate> all;
  const auto q = query.values();
  for (const auto& [id, v] : index.entries()) {
    double dot = 0.0;
    const auto x = v.values();
    for (std::size_t i = 0; i < x.size(); ++i) dot += double(x[i]) * double(q[i]);
    all.push_back({id, std::clamp(dot, -1.0, 1.0)});
  }
  std::sort(all.begin(), all.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    return a.score != b.score ? a.score > b.score : a.schema_id < b.schema_id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

// httplib server on an ephemeral loopback port, served from a background thread.
class StubServer {
 public:
  httplib::Server server;

  int start() {
    port_ = server.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    return port_;
  }
  std::string url(const std::string& path = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  ~StubServer() {
    server.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  int port_ = 0;
  std::thread thread_;
};

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("ragmcp-test-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Child process with stdout and stderr captured through pipes.
class Child {
 public:
  explicit Child(const std::vector<std::string>& argv) {
    int out[2];
    int err[2];
    if (pipe(out) != 0 || pipe(err) != 0) throw std::runtime_error("pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      dup2(out[1], STDOUT_FILENO);
      dup2(err[1], STDERR_FILENO);
      close(out[0]);
      close(out[1]);
      close(err[0]);
      close(err[1]);
      std::vector<char*> args;
      for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      execv(args[0], args.data());
      _exit(127);
    }
    close(out[1]);
    close(err[1]);
    out_ = out[0];
    err_ = err[0];
  }
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;
  ~Child() {
    if (pid_ > 0 && !reaped_) {
      kill(pid_, SIGKILL);
      wait();
    }
    close(out_);
    close(err_);
  }

  // One line of stdout, without the newline; empty at end of stream.
  std::string read_line() {
    std::string line;
    char c = 0;
    while (::read(out_, &c, 1) == 1 && c != '\n') line += c;
    return line;
  }
  std::string read_stderr() {
    std::string all;
    char buf[512];
    for (ssize_t n; (n = ::read(err_, buf, sizeof buf)) > 0;) all.append(buf, std::size_t(n));
    return all;
  }
  void signal(int sig) { kill(pid_, sig); }
  // Exit status, or 128 + signal number.
  int wait() {
    int status = 0;
    waitpid(pid_, &status, 0);
    reaped_ = true;
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  }

 private:
  pid_t pid_ = -1;
  int out_ = -1;
  int err_ = -1;
  bool reaped_ = false;
};

// Port from the "listening on http://host:port ..." banner printed by `ragmcp serve`.
inline int parse_listen_port(const std::string& banner) {
  const auto colon = banner.rfind(':', banner.find(" with "));
  if (banner.rfind("listening on", 0) != 0 || colon == std::string::npos) return -1;
  return std::stoi(banner.substr(colon + 1));
}

}  // namespace ragmcp::test
