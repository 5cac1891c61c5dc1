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

#ifndef BYTELITE_FIXTURE_ORIGIN_H_
#define BYTELITE_FIXTURE_ORIGIN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bytelite/bytes.h"
#include "bytelite/page_model.h"

namespace httplib {
class Server;
}

namespace bytelite {

// An object an origin can serve.
struct OriginObject {
  Bytes body;
  std::string content_type;
};

// Maps a request target (path plus query) to an object; nullopt is a 404.
using OriginResolver = std::function<std::optional<OriginObject>(const std::string& target)>;

struct OriginOptions {
  bool ranges = true;         // false: always 200 with the full body
  bool etag = true;           // strong ETag derived from the body
  bool last_modified = true;  // fixed Last-Modified
  HeaderMap extra_headers;    // added to every successful reply
};

// Local HTTP origin for tests: single-range support, If-Range, and an
// access log recording the body bytes sent for every request.
class FixtureOrigin {
 public:
  struct Access {
    std::string target;
    std::string range;     // request Range header, "" when absent
    std::string if_range;  // request If-Range header
    int status = 0;
    int64_t body_bytes = 0;
  };

  FixtureOrigin(OriginResolver resolver, OriginOptions options = {});
  ~FixtureOrigin();
  FixtureOrigin(const FixtureOrigin&) = delete;
  FixtureOrigin& operator=(const FixtureOrigin&) = delete;

  // Binds 127.0.0.1 (port 0 picks a free port) and serves on a thread.
  void Start(int port = 0);
  void Stop();
  int port() const { return port_; }
  std::string BaseUrl() const;  // http://127.0.0.1:<port>

  // Serves `body` at `target` instead of the resolver's answer.
  void Override(const std::string& target, OriginObject object);

  std::vector<Access> AccessLog() const;
  void ClearLog();
  int64_t BodyBytes() const;  // sum over the log

 private:
  std::optional<OriginObject> Resolve(const std::string& target);

  OriginResolver resolver_;
  OriginOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, OriginObject> overrides_;
  std::vector<Access> log_;
};

std::string ContentTypeForPath(std::string_view path);

// Serves files below `root` by URL path (query ignored).
OriginResolver DirectoryResolver(const std::filesystem::path& root);

// Parameterized image CDN used to exercise URL rewriting:
//   /media/<src>/v1/fill/w_W,h_H,...,q_Q/<name>.<ext>  resized and re-encoded
//   /imgsvc/<src>?w=&h=&q=&fm= (or width=, height=, quality=)
//   /static/...  only the exact paths in `static_paths`, from `images_dir`
//   /fixed/.../<name>  the source file whatever the tokens
//   /plain/<name>  files from `images_dir`
// Variants are generated on first use and memoized.
OriginResolver MockCdnResolver(const std::filesystem::path& sources_dir,
                               const std::filesystem::path& images_dir,
                               std::vector<std::string> static_paths);

}  // namespace bytelite

#endif  // BYTELITE_FIXTURE_ORIGIN_H_
