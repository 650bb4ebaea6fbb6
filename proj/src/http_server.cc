/*
 * Copyright 2026 The RetainEX Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Eigen must precede httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "retainex/http_server.h"

#include <map>
#include <string>

#include "httplib.h"
#include "retainex/error.h"

namespace retainex {

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(WorkbenchService& service) : impl_(std::make_unique<Impl>()) {
  const auto dispatch = [&service](const httplib::Request& request,
                                   httplib::Response& response) {
    std::map<std::string, std::string> query;
    for (const auto& [key, value] : request.params) query[key] = value;
    const ApiResponse result =
        service.Handle(request.method, request.path, query, request.body);
    response.status = result.status;
    response.set_content(result.body.dump(), "application/json");
  };
  const char* kAny = R"(/.*)";
  impl_->server.Get(kAny, dispatch);
  impl_->server.Post(kAny, dispatch);
  impl_->server.Put(kAny, dispatch);
  impl_->server.Delete(kAny, dispatch);
}

HttpServer::~HttpServer() = default;

int HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::Listen() { impl_->server.listen_after_bind(); }

void HttpServer::Stop() { impl_->server.stop(); }

void RunHttpServer(WorkbenchService& service, const std::string& host, int port) {
  HttpServer server(service);
  server.Bind(host, port);
  server.Listen();
}

}  // namespace retainex
