#pragma once

#include <stdexcept>
#include <string>

namespace ragmcp {

// Registry file could not be parsed or a schema broke an invariant.
class RegistryError : public std::runtime_error {
 public:
  enum class Kind { Parse, DuplicateId, EmptyTools, InvalidField };

  RegistryError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class EmptyCorpus : public std::invalid_argument {
 public:
  EmptyCorpus() : std::invalid_argument("empty corpus: hashed_tfidf needs at least one document") {}
};

// Network failure or unusable reply from an external embedder, selector or MCP endpoint.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDistractors : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyRegistry : public std::runtime_error {
 public:
  EmptyRegistry() : std::runtime_error("registry is empty: register a server first") {}
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ragmcp
