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

#include "bytelite/oracle_pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "bytelite/codecs.h"
#include "bytelite/error.h"
#include "bytelite/metrics.h"
#include "bytelite/raster.h"
#include "json.hpp"

namespace bytelite {

PipelineMode PipelineMode::FromName(std::string_view name) {
  if (name == "standard") return Standard();
  if (name == "extreme") return Extreme();
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(name) + "'");
}

bool IsAnimatedGif(ByteView d) {
  if (d.size() < 13 || AsChars(d.first(3)) != "GIF") return false;
  size_t i = 13;
  if (d[10] & 0x80) i += 3u << ((d[10] & 7) + 1);
  int images = 0;
  auto skip_sub_blocks = [&]() {
    while (i < d.size() && d[i] != 0) i += d[i] + 1u;
    ++i;
  };
  while (i < d.size()) {
    if (d[i] == 0x3B) break;
    if (d[i] == 0x21) {
      i += 2;
      skip_sub_blocks();
    } else if (d[i] == 0x2C) {
      if (++images > 1) return true;
      if (i + 10 > d.size()) break;
      const uint8_t flags = d[i + 9];
      i += 10;
      if (flags & 0x80) i += 3u << ((flags & 7) + 1);
      ++i;  // LZW minimum code size
      skip_sub_blocks();
    } else {
      break;
    }
  }
  return false;
}

OptimizeResult Optimize(const ImageEntry& entry, ByteView body, const PipelineMode& mode) {
  const Raster src = Decode(body);
  OptimizeResult out;
  out.animated = IsAnimatedGif(body);
  int display_w = entry.css_width, display_h = entry.css_height;
  if (display_w <= 0 || display_h <= 0) display_w = display_h = 0;  // unknown geometry: no resize
  ClampTargetDims(src.width, src.height, &display_w, &display_h);
  int w = display_w, h = display_h;
  if (mode.half_css && entry.css_width > 0 && entry.css_height > 0) {
    w = std::max(1, entry.css_width / 2);
    h = std::max(1, entry.css_height / 2);
    ClampTargetDims(src.width, src.height, &w, &h);
  }
  const Raster scaled = (w == src.width && h == src.height) ? src : ResizeArea(src, w, h);
  Bytes encoded = codec::EncodeWebp(scaled, mode.webp_quality);
  out.width = scaled.width;
  out.height = scaled.height;
  const int64_t original = static_cast<int64_t>(body.size());
  if (static_cast<int64_t>(encoded.size()) >= original) {
    out.kept_original = true;
    out.width = src.width;
    out.height = src.height;
    out.ssim = 1.0;
    return out;
  }
  out.saved_bytes = original - static_cast<int64_t>(encoded.size());
  // Quality as displayed: both sides at the rendered size, so a half-size
  // output is judged after being stretched back into its box.
  auto at_display = [&](const Raster& r) {
    return r.width == display_w && r.height == display_h ? r : ResizeArea(r, display_w, display_h);
  };
  out.ssim = Ssim(at_display(src), at_display(Decode(encoded)));
  out.optimized = std::move(encoded);
  return out;
}

Optimizer RatioOptimizer(double standard_ratio, double extreme_ratio) {
  return [=](const ImageEntry& entry, ByteView, const PipelineMode& mode) {
    const double ratio = mode.half_css ? extreme_ratio : standard_ratio;
    OptimizeResult r;
    r.saved_bytes = static_cast<int64_t>(std::floor(static_cast<double>(entry.transfer_bytes) * ratio));
    return r;
  };
}

PageEstimate EstimatePage(const PageManifest& manifest, const PipelineMode& mode,
                          const EstimateOptions& options) {
  const Optimizer optimizer = options.optimizer ? options.optimizer : Optimizer(Optimize);
  PageEstimate page;
  page.page_url = manifest.page_url;
  page.mode = mode.name;
  page.entries.resize(manifest.entries.size());

  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next++; i < manifest.entries.size(); i = next++) {
      const ImageEntry& e = manifest.entries[i];
      EntryEstimate& est = page.entries[i];
      est.url = e.url;
      if (!e.crop_rects.empty()) {
        try {
          est.saved_bytes = SpriteSavings(e);
          est.method = "sprite";
        } catch (const Error&) {
          est.method = "missing_geometry";
        }
        continue;
      }
      std::optional<Bytes> body = LoadBody(manifest, e);
      if (!body) {
        est.method = "missing_body";
        continue;
      }
      try {
        OptimizeResult r = optimizer(e, *body, mode);
        est.saved_bytes = std::max<int64_t>(0, r.saved_bytes);
        est.ssim = r.ssim;
        est.animated = r.animated;
        est.method = "optimize";
      } catch (const Error&) {
        est.method = "decode_error";
      }
    }
  };
  int workers = options.workers > 0 ? options.workers
                                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, std::max<int>(1, static_cast<int>(manifest.entries.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  std::set<std::string> excluded;
  std::optional<WarmWeight> warm;
  if (options.landing) {
    warm = WarmPageWeight(manifest, *options.landing);
    excluded.insert(warm->excluded_urls.begin(), warm->excluded_urls.end());
  }
  int64_t warm_saved = 0;
  for (EntryEstimate& est : page.entries) {
    page.saved_bytes += est.saved_bytes;
    est.cache_excluded = excluded.count(est.url) > 0;
    if (!est.cache_excluded) warm_saved += est.saved_bytes;
  }
  page.cold_fraction = manifest.total_page_bytes > 0
                           ? static_cast<double>(page.saved_bytes) / manifest.total_page_bytes
                           : 0.0;
  if (warm) {
    page.warm_saved_bytes = warm_saved;
    page.warm_fraction =
        warm->weight_bytes > 0 ? static_cast<double>(warm_saved) / warm->weight_bytes : 0.0;
  }
  return page;
}

std::string EstimateJson(const std::vector<PageEstimate>& estimates, int indent) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const PageEstimate& p : estimates) {
    nlohmann::ordered_json j;
    j["page_url"] = p.page_url;
    j["mode"] = p.mode;
    j["saved_bytes"] = p.saved_bytes;
    j["cold_fraction"] = p.cold_fraction;
    if (p.warm_saved_bytes) j["warm_saved_bytes"] = *p.warm_saved_bytes;
    if (p.warm_fraction) j["warm_fraction"] = *p.warm_fraction;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const EntryEstimate& e : p.entries) {
      nlohmann::ordered_json je;
      je["url"] = e.url;
      je["saved_bytes"] = e.saved_bytes;
      je["method"] = e.method;
      if (e.ssim) je["ssim"] = *e.ssim;
      if (e.animated) je["animated_first_frame_only"] = true;
      if (e.cache_excluded) je["cache_excluded"] = true;
      entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    doc.push_back(std::move(j));
  }
  return doc.dump(indent);
}

std::string EstimateCsv(const std::vector<PageEstimate>& estimates) {
  std::string out = "page_url,mode,url,saved_bytes,method,ssim\n";
  for (const PageEstimate& p : estimates) {
    for (const EntryEstimate& e : p.entries) {
      char ssim[32] = "";
      if (e.ssim) snprintf(ssim, sizeof(ssim), "%.6f", *e.ssim);
      out += p.page_url + "," + p.mode + "," + e.url + "," + std::to_string(e.saved_bytes) + "," +
             e.method + "," + ssim + "\n";
    }
  }
  return out;
}

}  // namespace bytelite
