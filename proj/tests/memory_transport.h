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

#ifndef BYTELITE_TESTS_MEMORY_TRANSPORT_H_
#define BYTELITE_TESTS_MEMORY_TRANSPORT_H_

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "bytelite/error.h"
#include "bytelite/http.h"

namespace bytelite::testing {

// In-process transport over a map of objects, for protocol edge cases the
// real fixture origin does not produce.
class MemoryTransport : public HttpTransport {
 public:
  struct Object {
    Bytes body;
    bool ranges = true;
    std::string etag;              // "" for none
    std::string content_range;     // forced Content-Range value when set
    bool ignore_if_range = false;  // pretend the object changed: 200 on If-Range
    int status = 0;                // forced status when nonzero
  };
  struct Request {
    std::string url;
    HeaderMap headers;
  };

  void Put(const std::string& url, Object object) { objects_[url] = std::move(object); }
  Object& Mutable(const std::string& url) { return objects_.at(url); }
  void FailWith(ErrorCode code) { fail_ = true, fail_code_ = code; }

  HttpResponse Get(const std::string& url, const HeaderMap& headers) override {
    std::lock_guard<std::mutex> lock(mu_);
    requests_.push_back({url, headers});
    if (fail_) throw Error(fail_code_, "injected failure");
    HttpResponse res;
    auto it = objects_.find(url);
    if (it == objects_.end()) {
      res.status = 404;
      return res;
    }
    const Object& obj = it->second;
    if (obj.status) {
      res.status = obj.status;
      return res;
    }
    if (!obj.etag.empty()) res.headers["etag"] = obj.etag;
    auto range = headers.find("range");
    const bool if_range_fails = headers.count("if-range") && obj.ignore_if_range;
    if (!obj.ranges || range == headers.end() || if_range_fails) {
      res.status = 200;
      res.body = obj.body;
      return res;
    }
    long long first = 0, last = 0;
    sscanf(range->second.c_str(), "bytes=%lld-%lld", &first, &last);
    const long long total = static_cast<long long>(obj.body.size());
    last = std::min(last, total - 1);
    res.status = 206;
    res.body.assign(obj.body.begin() + first, obj.body.begin() + last + 1);
    res.headers["content-range"] = obj.content_range.empty()
                                       ? "bytes " + std::to_string(first) + "-" +
                                             std::to_string(last) + "/" + std::to_string(total)
                                       : obj.content_range;
    return res;
  }

  const std::vector<Request>& requests() const { return requests_; }
  void ClearRequests() { requests_.clear(); }

 private:
  std::mutex mu_;
  std::map<std::string, Object> objects_;
  std::vector<Request> requests_;
  bool fail_ = false;
  ErrorCode fail_code_ = ErrorCode::kNetworkError;
};

}  // namespace bytelite::testing

#endif  // BYTELITE_TESTS_MEMORY_TRANSPORT_H_
