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

#ifndef BYTELITE_GATEWAY_H_
#define BYTELITE_GATEWAY_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "bytelite/http.h"
#include "bytelite/partial_fetch.h"
#include "bytelite/reconstruct.h"
#include "bytelite/url_rewrite.h"

namespace httplib {
class Server;
}

namespace bytelite {

enum class GatewayMode { kAuto, kRewriteOnly, kRangeOnly, kOff };

std::string_view GatewayModeName(GatewayMode mode);
std::optional<GatewayMode> GatewayModeFromName(std::string_view name);

struct GatewayConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  bool forward_proxy = false;
  int proxy_port = 0;  // 0 picks a free port
  FetchBudget budget;
  std::string ruleset_path;  // "" : no rewriting
  GatewayMode mode = GatewayMode::kAuto;
  int per_host_limit = 6;
  EncodeKind reencode = EncodeKind::kWebpQ85;  // png is used when alpha is present
  bool range_cache = true;
  ReflectionParams reflection;

  // Throws Error(kInvalidArgument).
  void Validate() const;

  // Keys mirror the fields: bind, port, proxy, proxy_port, budget{baseline, progressive,
  // probe_bytes, header_extension_cap}, rules, mode, per_host_limit, reencode,
  // range_cache.  Unknown keys are rejected.  Throws Error(kParseError).
  static GatewayConfig FromJson(std::string_view text);
  static GatewayConfig Load(const std::filesystem::path& path);

  // BL_RULES, when set, replaces ruleset_path.
  void ApplyEnvironment();
};

struct ImageResponse {
  int status = 200;
  std::string content_type;
  HeaderMap headers;  // X-BL-* accounting headers
  Bytes body;
};

// The /img pipeline without any server around it: rewrite, budgeted fetch,
// reconstruction and re-encoding.  Thread-safe; holds no per-request state.
class ImageService {
 public:
  // `rules` may be null (no rewriting).  `stats` may be null.
  ImageService(GatewayConfig config, HttpTransport* transport, const RuleSet* rules,
               RewriteStats* stats);

  // Query parameters: url (required), budget, pbudget, mode, w, h, site.
  // Never throws: failures become 400 / 502 / 504 with a JSON error body.
  ImageResponse Handle(const std::map<std::string, std::string>& params);

  // Proxy entry point: optimizes image responses with the configured
  // defaults; anything that is not a decodable image is relayed verbatim.
  ImageResponse HandleProxied(const std::string& url);

  const GatewayConfig& config() const { return config_; }

 private:
  struct Request;
  ImageResponse Run(const Request& request);

  GatewayConfig config_;
  HttpTransport* transport_;
  const RuleSet* rules_;
  RewriteStats* stats_;
  RangeCache cache_;
};

// Error body shared by the gateway and the command-line tool:
// {"error": "<code name>", "message": "...", "status": N}
std::string ErrorJson(std::string_view code, std::string_view message, int status = 0);

// Local HTTP service: GET /img, GET /stats, GET /healthz.  With
// config.forward_proxy set a forward proxy is started as well; it relays
// plain-HTTP GETs through the image service and tunnels CONNECT untouched.
class Gateway {
 public:
  // Loads the ruleset named by the config and builds an HTTP transport.
  explicit Gateway(GatewayConfig config);
  // Uses the given transport (not owned) and ruleset.
  Gateway(GatewayConfig config, HttpTransport* transport, std::optional<RuleSet> rules);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds both listeners; a configured port of 0 picks a free one.
  void Start();
  void Stop();

  int port() const { return port_; }
  int proxy_port() const { return proxy_port_; }
  std::string BaseUrl() const;
  RewriteStats& stats() { return stats_; }

 private:
  class Proxy;

  GatewayConfig config_;
  std::unique_ptr<HttpTransport> owned_transport_;
  HttpTransport* transport_;
  std::optional<RuleSet> rules_;
  RewriteStats stats_;
  std::unique_ptr<ImageService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<Proxy> proxy_;
  std::thread thread_;
  int port_ = 0;
  int proxy_port_ = 0;
};

}  // namespace bytelite

#endif  // BYTELITE_GATEWAY_H_
