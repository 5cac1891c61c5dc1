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

#include "bytelite/fixture_origin.h"

#include <algorithm>
#include <charconv>
#include <regex>
#include <set>

#include "bytelite/codecs.h"
#include "bytelite/error.h"
#include "bytelite/raster.h"
#include "bytelite/url.h"
#include "httplib.h"

namespace bytelite {

namespace {

constexpr char kLastModified[] = "Mon, 01 Jan 2024 00:00:00 GMT";

std::string StrongEtag(ByteView body) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (uint8_t b : body) h = (h ^ b) * 1099511628211ull;
  char buf[32];
  snprintf(buf, sizeof(buf), "\"%016llx-%zx\"", static_cast<unsigned long long>(h), body.size());
  return buf;
}

bool ParseUint(std::string_view s, int64_t* out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

enum class RangeParse { kNone, kOk, kUnsatisfiable };

// Single "bytes=a-b", "bytes=a-" or "bytes=-n".  Anything else is ignored,
// as a server may do.
RangeParse ParseRangeHeader(const std::string& value, int64_t total, int64_t* first,
                            int64_t* last) {
  std::string_view s(value);
  if (s.rfind("bytes=", 0) != 0) return RangeParse::kNone;
  s.remove_prefix(6);
  if (s.find(',') != std::string_view::npos) return RangeParse::kNone;
  size_t dash = s.find('-');
  if (dash == std::string_view::npos) return RangeParse::kNone;
  std::string_view a = s.substr(0, dash), b = s.substr(dash + 1);
  int64_t x = 0, y = 0;
  if (a.empty()) {
    if (!ParseUint(b, &y) || y == 0) return RangeParse::kUnsatisfiable;
    *first = std::max<int64_t>(0, total - y);
    *last = total - 1;
  } else {
    if (!ParseUint(a, &x)) return RangeParse::kNone;
    if (b.empty()) {
      y = total - 1;
    } else if (!ParseUint(b, &y) || y < x) {
      return RangeParse::kNone;
    }
    if (x >= total) return RangeParse::kUnsatisfiable;
    *first = x;
    *last = std::min(y, total - 1);
  }
  return total > 0 ? RangeParse::kOk : RangeParse::kUnsatisfiable;
}

std::string Extension(std::string_view path) {
  size_t dot = path.rfind('.');
  size_t slash = path.rfind('/');
  if (dot == std::string_view::npos || (slash != std::string_view::npos && dot < slash)) return "";
  std::string ext(path.substr(dot + 1));
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext;
}

std::string PathOnly(const std::string& target) { return target.substr(0, target.find('?')); }

std::optional<OriginObject> ReadObject(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  return OriginObject{ReadFile(path), ContentTypeForPath(path.string())};
}

bool SafeSegment(std::string_view s) {
  return !s.empty() && s != "." && s != ".." && s.find('/') == std::string_view::npos;
}

std::optional<OriginObject> EncodeVariant(const Raster& src, int w, int h, int q,
                                          const std::string& ext) {
  if (w <= 0 || h <= 0 || q <= 0 || q > 100) return std::nullopt;
  Raster scaled = ResizeArea(src, w, h);
  if (ext == "jpg" || ext == "jpeg") return OriginObject{codec::EncodeJpeg(scaled, q), "image/jpeg"};
  if (ext == "png") return OriginObject{codec::EncodePng(scaled), "image/png"};
  if (ext == "webp") return OriginObject{codec::EncodeWebp(scaled, q), "image/webp"};
  return std::nullopt;
}

class MockCdn {
 public:
  MockCdn(std::filesystem::path sources, std::filesystem::path images,
          std::vector<std::string> static_paths)
      : sources_(std::move(sources)),
        images_(std::move(images)),
        static_paths_(static_paths.begin(), static_paths.end()) {}

  std::optional<OriginObject> operator()(const std::string& target) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(target);
      if (it != memo_.end()) return it->second;
    }
    std::optional<OriginObject> obj;
    try {
      obj = Generate(target);
    } catch (const Error&) {
      obj.reset();
    }
    std::lock_guard<std::mutex> lock(mu_);
    memo_[target] = obj;
    return obj;
  }

 private:
  static std::vector<std::string> Split(const std::string& path) {
    std::vector<std::string> parts;
    size_t pos = 0;
    while (pos <= path.size()) {
      size_t next = path.find('/', pos);
      if (next == std::string::npos) next = path.size();
      parts.push_back(path.substr(pos, next - pos));
      pos = next + 1;
    }
    return parts;
  }

  std::optional<Raster> Source(const std::string& name) {
    if (!SafeSegment(name)) return std::nullopt;
    std::optional<OriginObject> file = ReadObject(sources_ / name);
    if (!file) return std::nullopt;
    return Decode(file->body);
  }

  std::optional<OriginObject> Generate(const std::string& target) {
    const std::string path = PathOnly(target);
    const std::vector<std::string> parts = Split(path);  // "", route, ...
    if (parts.size() < 3) return std::nullopt;
    const std::string& route = parts[1];
    if (route == "plain" && parts.size() == 3 && SafeSegment(parts[2])) {
      return ReadObject(images_ / parts[2]);
    }
    if (route == "static") {
      if (!static_paths_.count(path) || !SafeSegment(parts.back())) return std::nullopt;
      return ReadObject(images_ / parts.back());
    }
    if (route == "fixed") {
      if (!SafeSegment(parts.back())) return std::nullopt;
      return ReadObject(sources_ / parts.back());
    }
    if (route == "media") {
      // /media/<src>/v1/fill/<tokens>/<name>.<ext>
      if (parts.size() != 7 || parts[3] != "v1" || parts[4] != "fill") return std::nullopt;
      static const std::regex kDims(R"(\bw_(\d+),h_(\d+)\b)");
      static const std::regex kQuality(R"(\bq_(\d+)\b)");
      std::smatch dims, quality;
      if (!std::regex_search(parts[5], dims, kDims)) return std::nullopt;
      int q = std::regex_search(parts[5], quality, kQuality) ? std::stoi(quality[1]) : 90;
      std::optional<Raster> src = Source(parts[2]);
      if (!src) return std::nullopt;
      return EncodeVariant(*src, std::stoi(dims[1]), std::stoi(dims[2]), q,
                           Extension(parts[6]));
    }
    if (route == "imgsvc" && parts.size() == 3) {
      std::optional<Raster> src = Source(parts[2]);
      if (!src) return std::nullopt;
      std::map<std::string, std::string> params;
      size_t qpos = target.find('?');
      if (qpos != std::string::npos) {
        std::string_view query(target);
        query.remove_prefix(qpos + 1);
        while (!query.empty()) {
          size_t amp = query.find('&');
          std::string_view kv = query.substr(0, amp);
          size_t eq = kv.find('=');
          if (eq != std::string_view::npos) {
            params.emplace(PercentDecode(kv.substr(0, eq)), PercentDecode(kv.substr(eq + 1)));
          }
          if (amp == std::string_view::npos) break;
          query.remove_prefix(amp + 1);
        }
      }
      auto num = [&](const char* a, const char* b) {
        auto it = params.find(a);
        if (it == params.end()) it = params.find(b);
        int64_t v = 0;
        return it != params.end() && ParseUint(it->second, &v) ? static_cast<int>(v) : 0;
      };
      int w = num("w", "width"), h = num("h", "height"), q = num("q", "quality");
      if (q == 0) q = 90;
      const int sw = src->width, sh = src->height;
      if (w && !h) {
        h = static_cast<int>(static_cast<double>(sh) * w / sw + 0.5);
      } else if (h && !w) {
        w = static_cast<int>(static_cast<double>(sw) * h / sh + 0.5);
      } else if (!w && !h) {
        w = sw;
        h = sh;
      }
      auto fm = params.find("fm");
      return EncodeVariant(*src, w, h, q, fm != params.end() ? fm->second : Extension(parts[2]));
    }
    return std::nullopt;
  }

  const std::filesystem::path sources_;
  const std::filesystem::path images_;
  const std::set<std::string> static_paths_;
  std::mutex mu_;
  std::map<std::string, std::optional<OriginObject>> memo_;
};

}  // namespace

std::string ContentTypeForPath(std::string_view path) {
  const std::string ext = Extension(path);
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "png") return "image/png";
  if (ext == "gif") return "image/gif";
  if (ext == "webp") return "image/webp";
  if (ext == "bmp") return "image/bmp";
  if (ext == "tif" || ext == "tiff") return "image/tiff";
  if (ext == "json") return "application/json";
  if (ext == "html" || ext == "htm") return "text/html";
  return "application/octet-stream";
}

OriginResolver DirectoryResolver(const std::filesystem::path& root) {
  return [root](const std::string& target) -> std::optional<OriginObject> {
    const std::string path = PercentDecode(PathOnly(target));
    std::filesystem::path rel = std::filesystem::path(path).relative_path().lexically_normal();
    if (rel.empty() || *rel.begin() == "..") return std::nullopt;
    return ReadObject(root / rel);
  };
}

OriginResolver MockCdnResolver(const std::filesystem::path& sources_dir,
                               const std::filesystem::path& images_dir,
                               std::vector<std::string> static_paths) {
  auto cdn = std::make_shared<MockCdn>(sources_dir, images_dir, std::move(static_paths));
  return [cdn](const std::string& target) { return (*cdn)(target); };
}

FixtureOrigin::FixtureOrigin(OriginResolver resolver, OriginOptions options)
    : resolver_(std::move(resolver)), options_(std::move(options)) {}

FixtureOrigin::~FixtureOrigin() { Stop(); }

std::optional<OriginObject> FixtureOrigin::Resolve(const std::string& target) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = overrides_.find(target);
    if (it != overrides_.end()) return it->second;
  }
  return resolver_(target);
}

void FixtureOrigin::Start(int port) {
  server_ = std::make_unique<httplib::Server>();
  server_->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
    // Ranges are answered here, not by the library's automatic slicing.
    const_cast<httplib::Request&>(req).ranges.clear();
    Access access;
    access.target = req.target;
    access.range = req.get_header_value("Range");
    access.if_range = req.get_header_value("If-Range");
    std::optional<OriginObject> obj = Resolve(req.target);
    if (!obj) {
      res.status = 404;
      res.set_content("not found", "text/plain");
    } else {
      const int64_t total = static_cast<int64_t>(obj->body.size());
      const std::string etag = StrongEtag(obj->body);
      if (options_.etag) res.set_header("ETag", etag);
      if (options_.last_modified) res.set_header("Last-Modified", kLastModified);
      for (const auto& [k, v] : options_.extra_headers) res.set_header(k, v);
      int64_t first = 0, last = total - 1;
      RangeParse range = RangeParse::kNone;
      if (options_.ranges && !access.range.empty()) {
        const bool validator_ok = access.if_range.empty() ||
                                  (options_.etag && access.if_range == etag) ||
                                  (options_.last_modified && access.if_range == kLastModified);
        if (validator_ok) range = ParseRangeHeader(access.range, total, &first, &last);
      }
      if (options_.ranges) res.set_header("Accept-Ranges", "bytes");
      if (range == RangeParse::kUnsatisfiable) {
        res.status = 416;
        res.set_header("Content-Range", "bytes */" + std::to_string(total));
      } else if (range == RangeParse::kOk) {
        res.status = 206;
        res.set_header("Content-Range", "bytes " + std::to_string(first) + "-" +
                                            std::to_string(last) + "/" + std::to_string(total));
        res.body.assign(reinterpret_cast<const char*>(obj->body.data()) + first,
                        static_cast<size_t>(last - first + 1));
        res.set_header("Content-Type", obj->content_type);
      } else {
        res.status = 200;
        res.body.assign(obj->body.begin(), obj->body.end());
        res.set_header("Content-Type", obj->content_type);
      }
    }
    access.status = res.status;
    access.body_bytes = static_cast<int64_t>(res.body.size());
    std::lock_guard<std::mutex> lock(mu_);
    log_.push_back(std::move(access));
  });
  if (port == 0) {
    port_ = server_->bind_to_any_port("127.0.0.1");
  } else {
    port_ = server_->bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ <= 0) throw Error(ErrorCode::kNetworkError, "fixture origin could not bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void FixtureOrigin::Stop() {
  if (!server_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

std::string FixtureOrigin::BaseUrl() const { return "http://127.0.0.1:" + std::to_string(port_); }

void FixtureOrigin::Override(const std::string& target, OriginObject object) {
  std::lock_guard<std::mutex> lock(mu_);
  overrides_[target] = std::move(object);
}

std::vector<FixtureOrigin::Access> FixtureOrigin::AccessLog() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

void FixtureOrigin::ClearLog() {
  std::lock_guard<std::mutex> lock(mu_);
  log_.clear();
}

int64_t FixtureOrigin::BodyBytes() const {
  std::lock_guard<std::mutex> lock(mu_);
  int64_t n = 0;
  for (const Access& a : log_) n += a.body_bytes;
  return n;
}

}  // namespace bytelite
