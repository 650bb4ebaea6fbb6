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

#ifndef RETAINEX_HTTP_SERVER_H_
#define RETAINEX_HTTP_SERVER_H_

#include <memory>
#include <string>

#include "retainex/service.h"

namespace retainex {

// HTTP binding of a WorkbenchService. Every request is routed through
// WorkbenchService::Handle and answered with its JSON body.
class HttpServer {
 public:
  explicit HttpServer(WorkbenchService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; IoError on failure.
  int Bind(const std::string& host, int port);
  // Serves until Stop() is called from another thread.
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace retainex

#endif  // RETAINEX_HTTP_SERVER_H_
