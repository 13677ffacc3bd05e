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

#include "clipcurate/errors.hpp"
#include "clipcurate/review_service.hpp"

namespace clipcurate {

struct ReviewServer::Impl {
  ReviewService& service;
  ReviewServerOptions options;
  httplib::Server server;
  int port = -1;

  Impl(ReviewService& s, ReviewServerOptions o) : service(s), options(std::move(o)) {}

  static void reply(httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body.dump(), "application/json");
  }

  bool authorized(const httplib::Request& req) const {
    if (!options.auth_token) return true;
    return req.get_header_value("Authorization") == "Bearer " + *options.auth_token;
  }

  void install() {
    server.set_default_headers({
        {"Access-Control-Allow-Origin", options.cors_origin},
        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type, Authorization"},
    });
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (req.method == "OPTIONS" || authorized(req)) return httplib::Server::HandlerResponse::Unhandled;
      reply(res, {401, Json{{"error", "missing or wrong bearer token"}}});
      return httplib::Server::HandlerResponse::Handled;
    });
    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string message = "internal error";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            message = e.what();
          } catch (...) {
          }
          reply(res, {500, Json{{"error", message}}});
        });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> limit;
      if (req.has_param("limit")) limit = req.get_param_value("limit");
      reply(res, service.queue(limit));
    });
    server.Post("/api/review", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string f = req.get_param_value("force");
      reply(res, service.submit(req.body, f == "1" || f == "true"));
    });
    server.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, service.stats());
    });
    server.Get(R"(/api/samples/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.sample(req.matches[1]));
    });
  }
};

ReviewServer::ReviewServer(ReviewService& service, ReviewServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->install();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind() {
  auto& i = *impl_;
  i.port = i.options.port == 0 ? i.server.bind_to_any_port(i.options.host)
                               : (i.server.bind_to_port(i.options.host, i.options.port)
                                      ? i.options.port
                                      : -1);
  if (i.port < 0) {
    throw IoError("cannot bind " + i.options.host + ":" + std::to_string(i.options.port));
  }
  return i.port;
}

void ReviewServer::serve() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace clipcurate
