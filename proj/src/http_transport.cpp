// Copyright 2026 The clipcurate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "httplib.h"

#include <cmath>

#include "clipcurate/errors.hpp"
#include "clipcurate/tool_gateway.hpp"

namespace clipcurate {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("bad URL: " + url);
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport : public Transport {
 public:
  HttpResponse post_json(const ToolEndpointConfig& endpoint, const std::string& body,
                         const std::optional<std::string>& bearer_token) override {
    const SplitUrl url = split_url(endpoint.base_url);
    httplib::Client client(url.origin);
    const auto secs = static_cast<time_t>(endpoint.timeout_s);
    const auto usecs = static_cast<time_t>((endpoint.timeout_s - std::floor(endpoint.timeout_s)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (bearer_token) headers.emplace("Authorization", "Bearer " + *bearer_token);
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      throw ToolError(std::string(to_string(endpoint.tool)) + ": " +
                      httplib::to_string(res.error()) + " (" + endpoint.base_url + ")");
    }
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttpTransport>(); }

}  // namespace clipcurate
