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

// Command-line driver for every module.  Errors are reported as one JSON
// object on stderr with a nonzero exit status (1 runtime, 2 usage).

#include <signal.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bytelite/error.h"
#include "bytelite/fixture_origin.h"
#include "bytelite/gateway.h"
#include "bytelite/http.h"
#include "bytelite/oracle_pipeline.h"
#include "bytelite/page_model.h"
#include "bytelite/partial_fetch.h"
#include "bytelite/report.h"
#include "bytelite/url_rewrite.h"
#include "json.hpp"

namespace bytelite {
namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

// Raised for problems the user can fix by changing the invocation.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string RulesPath(const std::string& flag) {
  if (const char* env = std::getenv("BL_RULES"); env && *env) return env;
  return flag;
}

PageManifest LoadAnyManifest(const std::string& path) {
  const bool har = std::filesystem::path(path).extension() == ".har";
  return LoadManifest(path, har ? ManifestFormat::kHar : ManifestFormat::kNativeJson);
}

void WaitForSignal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void BlockSignals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

struct ProbeArgs {
  std::string url;
  int64_t probe_bytes = 2048;
};

int RunProbe(const ProbeArgs& a) {
  auto transport = MakeHttpTransport();
  FetchBudget budget;
  // The smallest positive fraction reduces the fetch to the header probes.
  budget.baseline_fraction = budget.progressive_fraction = 1e-12;
  budget.probe_bytes = a.probe_bytes;
  budget.header_extension_cap = std::max(budget.header_extension_cap, a.probe_bytes);
  const FetchOutcome o = FetchWithBudget(*transport, a.url, budget);
  if (!o.meta.header_complete) {
    throw Error(ErrorCode::kUnsupportedFormat, "no image header could be parsed");
  }
  nlohmann::ordered_json j;
  j["url"] = a.url;
  j["format"] = FormatName(o.meta.format);
  j["width"] = o.meta.width;
  j["height"] = o.meta.height;
  j["progressive"] = o.meta.progressive;
  j["header_bytes"] = o.meta.header_bytes;
  j["total_bytes"] = o.total_bytes;
  j["range_supported"] = o.mode != FetchMode::kFullFallback200;
  j["probes"] = o.probes;
  j["transferred_bytes"] = o.transferred_bytes;
  std::cout << j.dump(1) << "\n";
  return 0;
}

struct FetchArgs {
  std::string url;
  std::string output;
  std::optional<std::string> budget, pbudget, mode;
  int width = 0, height = 0;
  std::string rules;
};

int RunFetch(const FetchArgs& a) {
  auto transport = MakeHttpTransport();
  std::optional<RuleSet> rules;
  if (const std::string path = RulesPath(a.rules); !path.empty()) rules = RuleSet::Load(path);
  RewriteStats stats;
  ImageService service({}, transport.get(), rules ? &*rules : nullptr, &stats);
  std::map<std::string, std::string> params{{"url", a.url}};
  if (a.budget) params["budget"] = *a.budget;
  if (a.pbudget) params["pbudget"] = *a.pbudget;
  if (a.mode) params["mode"] = *a.mode;
  if (a.width) params["w"] = std::to_string(a.width);
  if (a.height) params["h"] = std::to_string(a.height);
  const ImageResponse r = service.Handle(params);
  if (r.status != 200) {
    std::cerr << std::string(r.body.begin(), r.body.end()) << "\n";
    return r.status == 400 ? kUsageError : kRuntimeError;
  }
  WriteFile(a.output, r.body);
  nlohmann::ordered_json j;
  j["url"] = a.url;
  j["output"] = a.output;
  j["content_type"] = r.content_type;
  j["mode"] = r.headers.at("X-BL-Mode");
  j["original_bytes"] = std::stoll(r.headers.at("X-BL-Original-Size"));
  j["fetched_bytes"] = std::stoll(r.headers.at("X-BL-Fetched-Bytes"));
  j["rewritten"] = r.headers.at("X-BL-Rewritten") == "1";
  j["output_bytes"] = r.body.size();
  std::cout << j.dump(1) << "\n";
  return 0;
}

struct RewriteArgs {
  std::string url;
  std::string rules;
  int width = 0, height = 0;
};

int RunRewrite(const RewriteArgs& a) {
  const std::string path = RulesPath(a.rules);
  if (path.empty()) throw UsageError("--rules (or BL_RULES) is required");
  const RuleSet rules = RuleSet::Load(path);
  auto transport = MakeHttpTransport();
  RewriteTargets targets;
  targets.css_width = a.width;
  targets.css_height = a.height;
  RewriteStats stats;
  const RewriteAttempt r = RewriteAndValidate(*transport, rules, a.url, targets, &stats);
  nlohmann::ordered_json j;
  j["original_url"] = r.original_url;
  j["rewritten_url"] = r.rewritten_url;
  j["matched"] = r.matched;
  j["changed"] = r.changed;
  nlohmann::json classes = nlohmann::json::array();
  for (RuleClass c : r.classes) classes.push_back(RuleClassName(c));
  j["classes"] = classes;
  j["outcome"] = r.outcome ? nlohmann::json(RewriteOutcomeName(*r.outcome)) : nlohmann::json();
  j["original_bytes"] = r.original_probe.total_bytes.value_or(r.original_probe.prefix.size());
  if (r.accepted) j["rewritten_bytes"] = r.accepted->total_bytes.value_or(0);
  j["probe_bytes"] = [&] {
    int64_t n = 0;
    for (const RequestRecord& rec : r.log) n += rec.body_bytes;
    return n;
  }();
  std::cout << j.dump(1) << "\n";
  return 0;
}

struct EstimateArgs {
  std::string manifest;
  std::string mode = "standard";
  std::string landing;
  std::string format = "json";
  int workers = 0;
};

int RunEstimate(const EstimateArgs& a) {
  const PageManifest page = LoadAnyManifest(a.manifest);
  std::optional<PageManifest> landing;
  if (!a.landing.empty()) landing = LoadAnyManifest(a.landing);
  EstimateOptions options;
  options.landing = landing ? &*landing : nullptr;
  options.workers = a.workers;
  std::vector<PageEstimate> out;
  for (const char* m : {"standard", "extreme"}) {
    if (a.mode == m || a.mode == "both") {
      out.push_back(EstimatePage(page, PipelineMode::FromName(m), options));
    }
  }
  std::cout << (a.format == "csv" ? EstimateCsv(out) : EstimateJson(out) + "\n");
  return 0;
}

struct ReportArgs {
  std::string dir;
  bool warm = false;
  bool quality = false;
  std::string format = "json";
  double budget = 0.5, pbudget = 0.15;
};

int RunReport(const ReportArgs& a) {
  ReportOptions options;
  options.warm = a.warm;
  options.quality = a.quality;
  options.budget.baseline_fraction = a.budget;
  options.budget.progressive_fraction = a.pbudget;
  options.budget.Validate();
  const auto reports = ReportCorpus(LoadCorpus(a.dir), options);
  if (a.format == "csv") {
    std::cout << ReportCsv(reports);
  } else if (a.format == "cdf") {
    std::cout << ReportCdfCsv(reports);
  } else {
    std::cout << ReportJson(reports) << "\n";
  }
  return 0;
}

struct ServeArgs {
  std::string config;
  std::optional<int> port, proxy_port, per_host;
  std::optional<std::string> bind, rules, mode;
  std::optional<double> budget, pbudget;
  bool proxy = false;
};

int RunServe(const ServeArgs& a) {
  GatewayConfig c = a.config.empty() ? GatewayConfig() : GatewayConfig::Load(a.config);
  if (a.port) c.port = *a.port;
  if (a.bind) c.bind = *a.bind;
  if (a.rules) c.ruleset_path = *a.rules;
  if (a.budget) c.budget.baseline_fraction = *a.budget;
  if (a.pbudget) c.budget.progressive_fraction = *a.pbudget;
  if (a.per_host) c.per_host_limit = *a.per_host;
  if (a.proxy) c.forward_proxy = true;
  if (a.proxy_port) c.proxy_port = *a.proxy_port;
  if (a.mode) {
    auto m = GatewayModeFromName(*a.mode);
    if (!m) throw UsageError("--mode must be auto, rewrite_only, range_only or off");
    c.mode = *m;
  }
  c.ApplyEnvironment();
  BlockSignals();
  Gateway gateway(c);
  gateway.Start();
  nlohmann::ordered_json j;
  j["listening"] = gateway.BaseUrl();
  j["mode"] = GatewayModeName(c.mode);
  j["rules"] = c.ruleset_path;
  if (c.forward_proxy) j["proxy_port"] = gateway.proxy_port();
  std::cout << j.dump() << std::endl;
  WaitForSignal();
  gateway.Stop();
  return 0;
}

struct OriginArgs {
  std::string dir;
  int port = 0;
  bool no_ranges = false;
};

int RunOrigin(const OriginArgs& a) {
  OriginOptions options;
  options.ranges = !a.no_ranges;
  BlockSignals();
  FixtureOrigin origin(DirectoryResolver(a.dir), options);
  origin.Start(a.port);
  nlohmann::ordered_json j;
  j["listening"] = origin.BaseUrl();
  j["ranges"] = options.ranges;
  std::cout << j.dump() << std::endl;
  WaitForSignal();
  origin.Stop();
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"bytelite: budgeted image fetching, rewriting and reconstruction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bytelite 0.1.0");

  ProbeArgs probe;
  auto* probe_cmd = app.add_subcommand("probe", "Print image metadata and total size as JSON");
  probe_cmd->add_option("url", probe.url, "Image URL")->required();
  probe_cmd->add_option("--probe-bytes", probe.probe_bytes, "Probe size")->check(CLI::Range(512, 1 << 20));

  FetchArgs fetch;
  auto* fetch_cmd = app.add_subcommand("fetch", "Fetch within a byte budget and write the finalized image");
  fetch_cmd->add_option("url", fetch.url, "Image URL")->required();
  fetch_cmd->add_option("-o,--output", fetch.output, "Output file")->required();
  fetch_cmd->add_option("--budget", fetch.budget, "Baseline fraction in (0, 1]; 1.0 passes through");
  fetch_cmd->add_option("--pbudget", fetch.pbudget, "Progressive fraction in (0, 1]");
  fetch_cmd->add_option("--mode", fetch.mode, "auto, rewrite_only, range_only or off");
  fetch_cmd->add_option("--width", fetch.width, "Rendered width (0: native)");
  fetch_cmd->add_option("--height", fetch.height, "Rendered height (0: native)");
  fetch_cmd->add_option("--rules", fetch.rules, "Rewrite ruleset (BL_RULES overrides)");

  RewriteArgs rewrite;
  auto* rewrite_cmd = app.add_subcommand("rewrite", "Rewrite a CDN URL and validate the result");
  rewrite_cmd->add_option("url", rewrite.url, "Image URL")->required();
  rewrite_cmd->add_option("--rules", rewrite.rules, "Rewrite ruleset (BL_RULES overrides)");
  rewrite_cmd->add_option("--width", rewrite.width, "Rendered CSS width");
  rewrite_cmd->add_option("--height", rewrite.height, "Rendered CSS height");

  EstimateArgs estimate;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate oracle-pipeline savings for a page");
  estimate_cmd->add_option("manifest", estimate.manifest, "Page manifest (.json or .har)")
      ->required()->check(CLI::ExistingFile);
  estimate_cmd->add_option("--mode", estimate.mode, "standard, extreme or both")
      ->check(CLI::IsMember({"standard", "extreme", "both"}));
  estimate_cmd->add_option("--landing", estimate.landing, "Landing-page manifest for warm savings")
      ->check(CLI::ExistingFile);
  estimate_cmd->add_option("--format", estimate.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  estimate_cmd->add_option("--workers", estimate.workers, "Worker threads (0: hardware)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Savings report over a corpus of manifests");
  report_cmd->add_option("corpus", report.dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_flag("--warm", report.warm, "Warm-cache accounting against landing pages");
  report_cmd->add_flag("--quality", report.quality, "Add fetch mode, SSIM, VC and page VC");
  report_cmd->add_option("--format", report.format, "json, csv or cdf")
      ->check(CLI::IsMember({"json", "csv", "cdf"}));
  report_cmd->add_option("--budget", report.budget, "Baseline fraction");
  report_cmd->add_option("--pbudget", report.pbudget, "Progressive fraction");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the local image gateway");
  serve_cmd->add_option("--config", serve.config, "Gateway config JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "Listen port (0: any)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--bind", serve.bind, "Listen address");
  serve_cmd->add_option("--rules", serve.rules, "Rewrite ruleset (BL_RULES overrides)");
  serve_cmd->add_option("--budget", serve.budget, "Default baseline fraction");
  serve_cmd->add_option("--pbudget", serve.pbudget, "Default progressive fraction");
  serve_cmd->add_option("--mode", serve.mode, "auto, rewrite_only, range_only or off");
  serve_cmd->add_option("--per-host", serve.per_host, "Upstream connections per host");
  serve_cmd->add_flag("--proxy", serve.proxy, "Also run the forward proxy");
  serve_cmd->add_option("--proxy-port", serve.proxy_port, "Forward proxy port (0: any)")
      ->check(CLI::Range(0, 65535));

  OriginArgs origin;
  auto* origin_cmd = app.add_subcommand("origin", "Serve a directory as a range-capable origin");
  origin_cmd->add_option("dir", origin.dir, "Directory")->required()->check(CLI::ExistingDirectory);
  origin_cmd->add_option("--port", origin.port, "Listen port (0: any)")->check(CLI::Range(0, 65535));
  origin_cmd->add_flag("--no-ranges", origin.no_ranges, "Ignore Range headers (always 200)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ErrorJson("usage", e.what()) << "\n";
    return kUsageError;
  }

  try {
    if (*probe_cmd) return RunProbe(probe);
    if (*fetch_cmd) return RunFetch(fetch);
    if (*rewrite_cmd) return RunRewrite(rewrite);
    if (*estimate_cmd) return RunEstimate(estimate);
    if (*report_cmd) return RunReport(report);
    if (*serve_cmd) return RunServe(serve);
    if (*origin_cmd) return RunOrigin(origin);
  } catch (const UsageError& e) {
    std::cerr << ErrorJson("usage", e.what()) << "\n";
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << ErrorJson(ErrorCodeName(e.code()), e.what(), e.status()) << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kUsageError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << ErrorJson("internal", e.what()) << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace
}  // namespace bytelite

int main(int argc, char** argv) { return bytelite::Main(argc, argv); }
