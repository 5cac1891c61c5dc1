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

#include "bytelite/report.h"

#include <algorithm>
#include <cstdio>

#include "bytelite/codecs.h"
#include "bytelite/error.h"

namespace bytelite {

void StaticTransport::Put(const std::string& url, Bytes body, std::string content_type) {
  std::lock_guard<std::mutex> lock(mu_);
  objects_[url] = {std::move(body), std::move(content_type)};
}

HttpResponse StaticTransport::Get(const std::string& url, const HeaderMap& request_headers) {
  std::lock_guard<std::mutex> lock(mu_);
  HttpResponse res;
  auto it = objects_.find(url);
  if (it == objects_.end()) {
    res.status = 404;
    return res;
  }
  const Bytes& body = it->second.body;
  if (!it->second.content_type.empty()) res.headers["content-type"] = it->second.content_type;
  const long long total = static_cast<long long>(body.size());
  auto range = request_headers.find("range");
  long long first = 0, last = -1;
  char tail = 0;
  if (range == request_headers.end() ||
      std::sscanf(range->second.c_str(), "bytes=%lld-%lld%c", &first, &last, &tail) != 2 ||
      first < 0 || last < first) {
    res.status = 200;
    res.body = body;
    return res;
  }
  if (first >= total) {
    res.status = 416;
    res.headers["content-range"] = "bytes */" + std::to_string(total);
    return res;
  }
  last = std::min(last, total - 1);
  res.status = 206;
  res.body.assign(body.begin() + first, body.begin() + last + 1);
  res.headers["content-range"] =
      "bytes " + std::to_string(first) + "-" + std::to_string(last) + "/" + std::to_string(total);
  return res;
}

std::vector<CorpusPage> LoadCorpus(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kParseError, "not a directory: " + dir.string());
  }
  std::vector<CorpusPage> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".json" && ext != ".har") continue;
    const ManifestFormat format = ext == ".har" ? ManifestFormat::kHar : ManifestFormat::kNativeJson;
    out.push_back({entry.path().filename().string(), LoadManifest(entry.path(), format)});
  }
  std::sort(out.begin(), out.end(),
            [](const CorpusPage& a, const CorpusPage& b) { return a.name < b.name; });
  return out;
}

QualityReport ReportPage(const PageManifest& page, const PageManifest* landing,
                         const ReportOptions& options) {
  StaticTransport transport;
  std::vector<ImageResult> results;
  std::map<std::string, Raster> reconstructed, reference;
  for (const ImageEntry& e : page.entries) {
    ImageResult r{e.url, e.transfer_bytes, e.transfer_bytes};
    std::optional<Bytes> body = LoadBody(page, e);
    if (!body) {
      if (options.quality) r.mode = "missing_body";
      results.push_back(std::move(r));
      continue;
    }
    transport.Put(e.url, *body);
    const FetchOutcome o = FetchWithBudget(transport, e.url, options.budget);
    r.fetched_bytes = o.transferred_bytes;
    if (options.quality) {
      r.mode = std::string(FetchModeName(o.mode));
      try {
        const Raster full = Decode(*body);
        const Raster recon = o.fetched_bytes == o.total_bytes
                                 ? full
                                 : Reconstruct(o.payload, o.meta, options.reflection);
        r.ssim = Ssim(recon, full);
        r.vc = VisualCompleteness(recon, full);
        reconstructed[e.url] = recon;
        reference[e.url] = full;
      } catch (const Error&) {
        r.mode = "decode_error";
      }
    }
    results.push_back(std::move(r));
  }
  QualityReport report = ComputeSavings(page, std::move(results), landing);
  // A landing page is the first visit of its site: nothing is warm yet.
  if (options.warm && !landing) report.page.warm_page_weight = page.total_page_bytes;
  if (options.quality && !reference.empty()) {
    report.page.page_vc =
        VisualCompleteness(ComposePage(page, reconstructed), ComposePage(page, reference));
  }
  return report;
}

std::vector<QualityReport> ReportCorpus(const std::vector<CorpusPage>& corpus,
                                        const ReportOptions& options) {
  std::map<std::string, const PageManifest*> by_url;
  for (const CorpusPage& p : corpus) by_url[p.manifest.page_url] = &p.manifest;
  std::vector<QualityReport> out;
  for (const CorpusPage& p : corpus) {
    const PageManifest* landing = nullptr;
    if (options.warm && p.manifest.kind == PageKind::kInternal && p.manifest.parent_landing_url) {
      auto it = by_url.find(*p.manifest.parent_landing_url);
      if (it != by_url.end()) landing = it->second;
    }
    QualityReport r = ReportPage(p.manifest, landing, options);
    r.manifest = p.name;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bytelite
