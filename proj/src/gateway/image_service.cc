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

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <system_error>

#include "bytelite/codecs.h"
#include "bytelite/error.h"
#include "bytelite/gateway.h"
#include "bytelite/raster.h"
#include "bytelite/url.h"
#include "json.hpp"

namespace bytelite {

namespace {

constexpr int kMaxDimension = 16383;

Error BadParam(const std::string& what) {
  return Error(ErrorCode::kInvalidArgument, "invalid parameter: " + what);
}

double ParseFraction(const std::string& name, const std::string& text) {
  double v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v) || v <= 0 || v > 1) {
    throw BadParam(name + " must be a number in (0, 1]");
  }
  return v;
}

int ParseDimension(const std::string& name, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0 || v > kMaxDimension) {
    throw BadParam(name + " must be an integer in [0, " + std::to_string(kMaxDimension) + "]");
  }
  return v;
}

int StatusFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kTimeout: return 504;
    default: return 502;
  }
}

ImageResponse ErrorResponse(int status, std::string_view code, std::string_view message,
                            int upstream_status = 0) {
  ImageResponse r;
  r.status = status;
  r.content_type = "application/json";
  const std::string body = ErrorJson(code, message, upstream_status);
  r.body.assign(body.begin(), body.end());
  return r;
}

std::string ContentTypeOr(const HeaderMap& headers, std::string_view fallback) {
  auto it = headers.find("content-type");
  return it == headers.end() || it->second.empty() ? std::string(fallback) : it->second;
}

}  // namespace

std::string ErrorJson(std::string_view code, std::string_view message, int status) {
  nlohmann::json j = {{"error", code}, {"message", message}};
  if (status != 0) j["status"] = status;
  return j.dump();
}

std::string_view GatewayModeName(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::kAuto: return "auto";
    case GatewayMode::kRewriteOnly: return "rewrite_only";
    case GatewayMode::kRangeOnly: return "range_only";
    case GatewayMode::kOff: return "off";
  }
  return "auto";
}

std::optional<GatewayMode> GatewayModeFromName(std::string_view name) {
  if (name == "auto") return GatewayMode::kAuto;
  if (name == "rewrite_only") return GatewayMode::kRewriteOnly;
  if (name == "range_only") return GatewayMode::kRangeOnly;
  if (name == "off") return GatewayMode::kOff;
  return std::nullopt;
}

void GatewayConfig::Validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
  if (proxy_port < 0 || proxy_port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "proxy_port out of range");
  }
  if (per_host_limit < 1) throw Error(ErrorCode::kInvalidArgument, "per_host_limit must be >= 1");
  budget.Validate();
  reflection.Validate();
}

GatewayConfig GatewayConfig::FromJson(std::string_view text) {
  GatewayConfig c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "bind") {
        c.bind = value.get<std::string>();
      } else if (key == "port") {
        c.port = value.get<int>();
      } else if (key == "proxy") {
        c.forward_proxy = value.get<bool>();
      } else if (key == "proxy_port") {
        c.proxy_port = value.get<int>();
      } else if (key == "rules") {
        c.ruleset_path = value.get<std::string>();
      } else if (key == "per_host_limit") {
        c.per_host_limit = value.get<int>();
      } else if (key == "range_cache") {
        c.range_cache = value.get<bool>();
      } else if (key == "mode") {
        auto m = GatewayModeFromName(value.get<std::string>());
        if (!m) throw Error(ErrorCode::kParseError, "unknown mode");
        c.mode = *m;
      } else if (key == "reencode") {
        auto k = EncodeKindFromName(value.get<std::string>());
        if (!k) throw Error(ErrorCode::kParseError, "unknown reencode policy");
        c.reencode = *k;
      } else if (key == "budget") {
        for (const auto& [bkey, bvalue] : value.items()) {
          if (bkey == "baseline") {
            c.budget.baseline_fraction = bvalue.get<double>();
          } else if (bkey == "progressive") {
            c.budget.progressive_fraction = bvalue.get<double>();
          } else if (bkey == "probe_bytes") {
            c.budget.probe_bytes = bvalue.get<int64_t>();
          } else if (bkey == "header_extension_cap") {
            c.budget.header_extension_cap = bvalue.get<int64_t>();
          } else {
            throw Error(ErrorCode::kParseError, "unknown budget key: " + bkey);
          }
        }
      } else {
        throw Error(ErrorCode::kParseError, "unknown config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  try {
    c.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  return c;
}

GatewayConfig GatewayConfig::Load(const std::filesystem::path& path) {
  const Bytes b = ReadFile(path);
  return FromJson(AsChars(b));
}

void GatewayConfig::ApplyEnvironment() {
  if (const char* rules = std::getenv("BL_RULES"); rules && *rules) ruleset_path = rules;
}

struct ImageService::Request {
  std::string url;
  GatewayMode mode = GatewayMode::kAuto;
  FetchBudget budget;
  bool passthrough = false;
  int width = 0;
  int height = 0;
  std::string site;
  bool proxied = false;
};

ImageService::ImageService(GatewayConfig config, HttpTransport* transport, const RuleSet* rules,
                           RewriteStats* stats)
    : config_(std::move(config)), transport_(transport), rules_(rules), stats_(stats) {
  config_.Validate();
}

ImageResponse ImageService::Handle(const std::map<std::string, std::string>& params) {
  Request req;
  try {
    auto get = [&](const char* name) -> const std::string* {
      auto it = params.find(name);
      return it == params.end() ? nullptr : &it->second;
    };
    const std::string* url = get("url");
    if (!url || url->empty()) throw BadParam("url is required");
    if (!ParseUrl(*url)) throw BadParam("url must be an absolute http(s) URL");
    req.url = *url;
    req.mode = config_.mode;
    if (const std::string* m = get("mode")) {
      auto mode = GatewayModeFromName(*m);
      if (!mode) throw BadParam("mode must be auto, rewrite_only, range_only or off");
      // A gateway configured off stays a pure passthrough.
      if (config_.mode != GatewayMode::kOff) req.mode = *mode;
    }
    req.budget = config_.budget;
    if (const std::string* b = get("budget")) {
      req.budget.baseline_fraction = ParseFraction("budget", *b);
      req.passthrough = req.budget.baseline_fraction == 1.0;
    }
    if (const std::string* b = get("pbudget")) {
      req.budget.progressive_fraction = ParseFraction("pbudget", *b);
    }
    if (const std::string* w = get("w")) req.width = ParseDimension("w", *w);
    if (const std::string* h = get("h")) req.height = ParseDimension("h", *h);
    if (const std::string* s = get("site")) req.site = *s;
    if (req.mode == GatewayMode::kOff) req.passthrough = true;
  } catch (const Error& e) {
    return ErrorResponse(400, ErrorCodeName(e.code()), e.what());
  }
  return Run(req);
}

ImageResponse ImageService::HandleProxied(const std::string& url) {
  Request req;
  req.url = url;
  req.mode = config_.mode;
  req.budget = config_.budget;
  req.passthrough = req.mode == GatewayMode::kOff;
  req.proxied = true;
  ImageResponse r = Run(req);
  if (r.status == 200) return r;
  // Relay whatever the origin said when the pipeline could not run.
  try {
    HttpResponse up = transport_->Get(url, {});
    ImageResponse relay;
    relay.status = up.status;
    relay.content_type = ContentTypeOr(up.headers, "application/octet-stream");
    relay.body = std::move(up.body);
    relay.headers["X-BL-Mode"] = "relay";
    return relay;
  } catch (const Error&) {
    return r;
  }
}

ImageResponse ImageService::Run(const Request& req) {
  ImageResponse out;
  try {
    if (req.passthrough) {
      HttpResponse up = transport_->Get(req.url, {});
      if (up.status != 200) {
        return ErrorResponse(502, ErrorCodeName(ErrorCode::kHttpStatus),
                             "upstream returned status " + std::to_string(up.status), up.status);
      }
      const std::string size = std::to_string(up.body.size());
      out.content_type = ContentTypeOr(up.headers, "application/octet-stream");
      out.headers = {{"X-BL-Mode", "passthrough"},
                     {"X-BL-Original-Size", size},
                     {"X-BL-Fetched-Bytes", size},
                     {"X-BL-Rewritten", "0"}};
      out.body = std::move(up.body);
      return out;
    }

    FetchOptions options;
    if (config_.range_cache) {
      options.cache = &cache_;
      options.cache_key = req.site.empty() ? std::string() : SiteKey(req.site);
    }
    FetchBudget budget = req.budget;
    if (req.mode == GatewayMode::kRewriteOnly) {
      budget.baseline_fraction = 1.0;
      budget.progressive_fraction = 1.0;
    }

    FetchOutcome o;
    bool rewritten = false;
    int64_t original_size = 0;
    const bool try_rewrite = rules_ && (req.mode == GatewayMode::kAuto ||
                                        req.mode == GatewayMode::kRewriteOnly);
    if (try_rewrite) {
      RewriteTargets targets;
      targets.css_width = req.width;
      targets.css_height = req.height;
      RewriteAttempt a =
          RewriteAndValidate(*transport_, *rules_, req.url, targets, stats_, budget.probe_bytes);
      const ProbeResult& orig = a.original_probe;
      original_size = orig.total_bytes.value_or(static_cast<int64_t>(orig.prefix.size()));
      rewritten = a.accepted.has_value();
      ProbeResult probe = a.probe();
      o = FetchFromProbe(*transport_, a.rewritten_url, budget, std::move(probe), std::move(a.log),
                         options);
    } else {
      o = FetchWithBudget(*transport_, req.url, budget, options);
      original_size = o.total_bytes;
    }

    out.headers = {{"X-BL-Mode", std::string(FetchModeName(o.mode))},
                   {"X-BL-Original-Size", std::to_string(original_size)},
                   {"X-BL-Fetched-Bytes", std::to_string(o.transferred_bytes)},
                   {"X-BL-Rewritten", rewritten ? "1" : "0"}};

    const bool complete = o.fetched_bytes == o.total_bytes;
    if (!o.meta.header_complete) {
      if (req.proxied && complete) {
        out.content_type = ContentTypeOr(o.headers, "application/octet-stream");
        out.body = std::move(o.payload);
        return out;
      }
      return ErrorResponse(502, ErrorCodeName(ErrorCode::kUnsupportedFormat),
                           "upstream object is not a supported image");
    }

    int w = req.width, h = req.height;
    ClampTargetDims(o.meta.width, o.meta.height, &w, &h);
    if (complete && w == o.meta.width && h == o.meta.height) {
      // Nothing to reconstruct or resize: the upstream bytes are already final.
      out.content_type = ContentTypeOr(o.headers, MimeType(o.meta.format));
      out.body = std::move(o.payload);
      return out;
    }
    const Raster raster =
        complete ? Decode(o.payload) : Reconstruct(o.payload, o.meta, config_.reflection);
    const EncodeKind kind = raster.HasAlpha() ? EncodeKind::kPng : config_.reencode;
    out.body = Finalize(raster, w, h, kind);
    out.content_type = std::string(EncodeKindMime(kind));
    return out;
  } catch (const Error& e) {
    return ErrorResponse(StatusFor(e), ErrorCodeName(e.code()), e.what(), e.status());
  } catch (const std::exception& e) {
    return ErrorResponse(500, "internal", e.what());
  }
}

}  // namespace bytelite
