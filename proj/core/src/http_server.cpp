#include "ragmcp/http_server.hpp"

#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "ragmcp/errors.hpp"

namespace ragmcp {
namespace {

using json = nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error(const Gateway& gateway, httplib::Response& res, int status, const std::string& what) {
  gateway.count_error();
  reply(res, status, {{"error", what}});
}

bool query_flag(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return false;
  const auto v = req.get_param_value(name);
  return v == "true" || v == "1";
}

}  // namespace

struct HttpServer::Impl {
  Gateway& gateway;
  httplib::Server server;
  std::thread thread;

  Impl(Gateway& g, std::size_t threads) : gateway(g) {
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    routes();
  }

  void routes() {
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      gateway.count_request(Route::Health);
      reply(res, 200, {{"status", "ok"}, {"servers", gateway.catalog()->registry.size()}});
    });

    server.Get("/servers", [this](const httplib::Request&, httplib::Response& res) {
      gateway.count_request(Route::ListServers);
      reply(res, 200, {{"servers", gateway.catalog()->registry.ids()}});
    });

    server.Post("/servers", [this](const httplib::Request& req, httplib::Response& res) {
      gateway.count_request(Route::Register);
      try {
        auto schema = schema_from_json(json::parse(req.body));
        const auto id = schema.id;
        const auto status = gateway.register_server(std::move(schema), query_flag(req, "replace"));
        const bool created = status == Gateway::RegisterStatus::Created;
        reply(res, created ? 201 : 200,
              {{"id", id},
               {"status", created ? "created" : "replaced"},
               {"servers", gateway.catalog()->registry.size()}});
      } catch (const json::parse_error& e) {
        error(gateway, res, 400, "parse error at byte " + std::to_string(e.byte));
      } catch (const RegistryError& e) {
        error(gateway, res, e.kind() == RegistryError::Kind::DuplicateId ? 409 : 400, e.what());
      }
    });

    server.Delete(R"(/servers/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      gateway.count_request(Route::Remove);
      const std::string id = req.matches[1];
      if (!gateway.remove_server(id)) {
        error(gateway, res, 404, "unknown server '" + id + "'");
        return;
      }
      reply(res, 200, {{"removed", id}, {"servers", gateway.catalog()->registry.size()}});
    });

    server.Post("/retrieve", [this](const httplib::Request& req, httplib::Response& res) {
      gateway.count_request(Route::Retrieve);
      try {
        const auto request = retrieve_request_from_json(json::parse(req.body));
        reply(res, 200, to_json(gateway.retrieve(request)));
      } catch (const json::parse_error& e) {
        error(gateway, res, 400, "parse error at byte " + std::to_string(e.byte));
      } catch (const EmptyRegistry& e) {
        error(gateway, res, 409, e.what());
      } catch (const std::invalid_argument& e) {
        error(gateway, res, 400, e.what());
      } catch (const TransportError& e) {
        error(gateway, res, 502, e.what());
      }
    });

    server.Post(R"(/validate/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      gateway.count_request(Route::Validate);
      const std::string id = req.matches[1];
      const auto outcome = gateway.validate(id, query_flag(req, "live"));
      if (!outcome) {
        error(gateway, res, 404, "unknown server '" + id + "'");
        return;
      }
      reply(res, 200, to_json(*outcome));
    });

    server.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
      gateway.count_request(Route::Metrics);
      reply(res, 200, gateway.metrics());
    });

    server.set_exception_handler(
        [this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string what = "internal error";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            what = e.what();
          } catch (...) {
          }
          error(gateway, res, 500, what);
        });
  }
};

HttpServer::HttpServer(Gateway& gateway, std::size_t threads)
    : impl_(std::make_unique<Impl>(gateway, threads == 0 ? 1 : threads)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ragmcp
