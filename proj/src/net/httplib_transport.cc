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

#include <algorithm>
#include <cctype>

#include "bytelite/error.h"
#include "bytelite/http.h"
#include "bytelite/url.h"
#include "httplib.h"

namespace bytelite {

namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(const TransportOptions& options)
      : options_(options), limiter_(options.per_host_limit) {}

  HttpResponse Get(const std::string& url, const HeaderMap& request_headers) override {
    std::optional<Url> parsed = ParseUrl(url);
    if (!parsed) throw Error(ErrorCode::kInvalidArgument, "not an absolute http(s) url: " + url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (parsed->scheme == "https") {
      throw Error(ErrorCode::kNetworkError, "https is not supported by this build");
    }
#endif
    httplib::Headers headers;
    for (const auto& [name, value] : request_headers) headers.emplace(name, value);
    headers.emplace("User-Agent", options_.user_agent);

    HostLimiter::Slot slot(&limiter_, parsed->Origin());
    httplib::Client client(parsed->Origin());
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    client.set_follow_location(true);
    client.set_url_encode(false);  // URLs are sent as given
    const auto start = std::chrono::steady_clock::now();
    httplib::Result result = client.Get(parsed->target, headers);
    if (!result) {
      const httplib::Error err = result.error();
      const auto elapsed = std::chrono::steady_clock::now() - start;
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= options_.read_timeout)) {
        throw Error(ErrorCode::kTimeout, "timed out fetching " + url);
      }
      throw Error(ErrorCode::kNetworkError,
                  "fetching " + url + ": " + httplib::to_string(err));
    }
    HttpResponse response;
    response.status = result->status;
    for (const auto& [name, value] : result->headers) {
      std::string key = Lower(name);
      auto [it, inserted] = response.headers.emplace(key, value);
      if (!inserted) it->second += ", " + value;
    }
    response.body.assign(result->body.begin(), result->body.end());
    return response;
  }

 private:
  TransportOptions options_;
  HostLimiter limiter_;
};

}  // namespace

std::unique_ptr<HttpTransport> MakeHttpTransport(const TransportOptions& options) {
  return std::make_unique<HttplibTransport>(options);
}

}  // namespace bytelite
