#include "http_client.hpp"

#include <charconv>

#include <httplib.h>

#include "ragmcp/errors.hpp"

namespace ragmcp::detail {

std::optional<Url> parse_url(std::string_view text) {
  Url url;
  const auto scheme_end = text.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  url.scheme = std::string(text.substr(0, scheme_end));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;
  text.remove_prefix(scheme_end + 3);

  const auto path_start = text.find('/');
  std::string_view authority = text.substr(0, path_start);
  url.path = path_start == std::string_view::npos ? "/" : std::string(text.substr(path_start));

  url.port = url.scheme == "https" ? 443 : 80;
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos &&
                                               authority.find(']') == std::string_view::npos) {
    const auto digits = authority.substr(colon + 1);
    int port = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || port <= 0 || port > 65535) {
      return std::nullopt;
    }
    url.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  url.host = std::string(authority);
  return url;
}

HttpReply post_json(const std::string& url_text, const std::string& body,
                    std::chrono::milliseconds timeout) {
  const auto url = parse_url(url_text);
  if (!url) throw TransportError("invalid endpoint URL '" + url_text + "'");

  const auto run = [&](auto& client) -> HttpReply {
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(url->path, body, "application/json");
    if (!res) {
      throw TransportError("POST " + url_text + " failed: " + httplib::to_string(res.error()));
    }
    return HttpReply{res->status, res->body};
  };

  if (url->scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient client(url->host, url->port);
    return run(client);
#else
    throw TransportError("https endpoints need a TLS-enabled build: " + url_text);
#endif
  }
  httplib::Client client(url->host, url->port);
  return run(client);
}

}  // namespace ragmcp::detail
