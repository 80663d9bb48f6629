#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "ragmcp/gateway.hpp"

namespace ragmcp {

// HTTP/JSON front end for a Gateway:
//   GET  /healthz                 {"status":"ok","servers":n}
//   GET  /servers                 {"servers":[id...]}
//   POST /servers[?replace=true]  schema body -> 201 / 409 / 400
//   DELETE /servers/{id}          200 / 404
//   POST /retrieve                RetrieveRequest -> RetrieveResponse
//   POST /validate/{id}[?live=true]
//   GET  /metrics
class HttpServer {
 public:
  explicit HttpServer(Gateway& gateway, std::size_t threads = 8);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws std::runtime_error.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // bind + listen on a background thread; returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ragmcp
