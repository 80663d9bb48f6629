#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ragmcp::detail {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // always starts with '/'
};

std::optional<Url> parse_url(std::string_view text);

struct HttpReply {
  int status = 0;
  std::string body;
};

// POSTs a JSON body. Throws TransportError when the URL is unusable or no
// response arrives within `timeout`; any HTTP status is returned to the caller.
HttpReply post_json(const std::string& url, const std::string& body,
                    std::chrono::milliseconds timeout);

}  // namespace ragmcp::detail
