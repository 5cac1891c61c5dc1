/*
 * Copyright 2026 The Bytelite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BYTELITE_HTTP_H_
#define BYTELITE_HTTP_H_

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "bytelite/bytes.h"
#include "bytelite/page_model.h"

namespace bytelite {

struct HttpResponse {
  int status = 0;
  HeaderMap headers;  // lower-cased names
  Bytes body;

  std::string Header(const std::string& name) const;
};

// Minimal GET transport.  Failures to reach the server throw
// Error(kNetworkError) or Error(kTimeout); any HTTP status is returned.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse Get(const std::string& url, const HeaderMap& request_headers) = 0;
};

// Bounds concurrent requests per host.
class HostLimiter {
 public:
  explicit HostLimiter(int per_host) : per_host_(per_host < 1 ? 1 : per_host) {}

  class Slot {
   public:
    Slot(HostLimiter* owner, std::string host);
    ~Slot();
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    HostLimiter* owner_;
    std::string host_;
  };

  // Count of requests currently holding a slot for `host`.
  int InFlight(const std::string& host);
  int per_host() const { return per_host_; }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, int> active_;
  const int per_host_;
};

struct TransportOptions {
  int per_host_limit = 6;
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds read_timeout{15000};
  std::string user_agent = "bytelite/0.1";
};

std::unique_ptr<HttpTransport> MakeHttpTransport(const TransportOptions& options = {});

}  // namespace bytelite

#endif  // BYTELITE_HTTP_H_
