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

#include "bytelite/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "bytelite/error.h"
#include "json.hpp"

namespace bytelite {

namespace {

constexpr int kRadius = 5;  // 11x11 window
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
constexpr double kC2 = (0.03 * 255) * (0.03 * 255);

void CheckSameDims(const Raster& a, const Raster& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "raster dims differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                    " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

std::array<double, 2 * kRadius + 1> Window() {
  std::array<double, 2 * kRadius + 1> k{};
  double sum = 0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    k[i + kRadius] = std::exp(-0.5 * i * i / (kSigma * kSigma));
    sum += k[i + kRadius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable weighted mean over every valid window position.
std::vector<double> WindowMeans(const std::vector<double>& img, int w, int h) {
  static const std::array<double, 2 * kRadius + 1> k = Window();
  const int ow = w - 2 * kRadius, oh = h - 2 * kRadius;
  std::vector<double> rows(static_cast<size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i <= 2 * kRadius; ++i) acc += k[i] * img[static_cast<size_t>(y) * w + x + i];
      rows[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i <= 2 * kRadius; ++i) acc += k[i] * rows[static_cast<size_t>(y + i) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double SsimTerm(double ux, double uy, double vx, double vy, double vxy) {
  return ((2 * ux * uy + kC1) * (2 * vxy + kC2)) / ((ux * ux + uy * uy + kC1) * (vx + vy + kC2));
}

std::string FormatDouble(double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Quotes a CSV field when it needs it.
std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<double> Luma(const Raster& raster) {
  std::vector<double> out(static_cast<size_t>(raster.width) * raster.height);
  for (size_t i = 0; i < out.size(); ++i) {
    const uint8_t* p = &raster.pixels[i * 4];
    out[i] = std::floor(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2] + 0.5);
  }
  return out;
}

double Ssim(const Raster& a, const Raster& b) {
  CheckSameDims(a, b);
  if (a.empty()) throw Error(ErrorCode::kDimensionMismatch, "empty rasters");
  const std::vector<double> x = Luma(a), y = Luma(b);
  const int w = a.width, h = a.height;
  double mean = 0;
  if (w <= 2 * kRadius || h <= 2 * kRadius) {
    const double n = static_cast<double>(x.size());
    double ux = 0, uy = 0;
    for (size_t i = 0; i < x.size(); ++i) ux += x[i], uy += y[i];
    ux /= n, uy /= n;
    double vx = 0, vy = 0, vxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      vx += (x[i] - ux) * (x[i] - ux);
      vy += (y[i] - uy) * (y[i] - uy);
      vxy += (x[i] - ux) * (y[i] - uy);
    }
    mean = SsimTerm(ux, uy, vx / n, vy / n, vxy / n);
  } else {
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const std::vector<double> ux = WindowMeans(x, w, h), uy = WindowMeans(y, w, h),
                              uxx = WindowMeans(xx, w, h), uyy = WindowMeans(yy, w, h),
                              uxy = WindowMeans(xy, w, h);
    for (size_t i = 0; i < ux.size(); ++i) {
      mean += SsimTerm(ux[i], uy[i], uxx[i] - ux[i] * ux[i], uyy[i] - uy[i] * uy[i],
                       uxy[i] - ux[i] * uy[i]);
    }
    mean /= static_cast<double>(ux.size());
  }
  return std::clamp(mean, 0.0, 1.0);
}

double VisualCompleteness(const Raster& candidate, const Raster& reference) {
  CheckSameDims(candidate, reference);
  const size_t n = static_cast<size_t>(candidate.width) * candidate.height;
  if (n == 0) return 1.0;
  double total = 0;
  for (int c = 0; c < 3; ++c) {
    std::array<int64_t, 256> hc{}, hr{};
    for (size_t i = 0; i < n; ++i) {
      ++hc[candidate.pixels[i * 4 + c]];
      ++hr[reference.pixels[i * 4 + c]];
    }
    int64_t inter = 0;
    for (int b = 0; b < 256; ++b) inter += std::min(hc[b], hr[b]);
    total += static_cast<double>(inter) / static_cast<double>(n);
  }
  return total / 3.0;
}

Raster ComposePage(const PageManifest& manifest, const std::map<std::string, Raster>& rasters) {
  struct Placed {
    const ImageEntry* entry;
    int64_t x, y;
  };
  std::vector<Placed> placed;
  int64_t bottom = 0;
  for (const ImageEntry& e : manifest.entries) {
    if (e.css_width <= 0 || e.css_height <= 0) continue;
    int64_t x = 0, y = bottom;
    if (e.position) x = e.position->first, y = e.position->second;
    placed.push_back({&e, x, y});
    bottom = std::max(bottom, y + e.css_height);
  }
  const int width = std::max(1, manifest.viewport_width);
  const int height = static_cast<int>(std::clamp<int64_t>(
      bottom, 0, 5 * static_cast<int64_t>(std::max(1, manifest.viewport_height))));
  Raster canvas = SolidRaster(width, height, 255, 255, 255);
  for (const Placed& p : placed) {
    auto it = rasters.find(p.entry->url);
    if (it == rasters.end() || it->second.empty()) continue;
    const Raster layer = ResizeArea(it->second, p.entry->css_width, p.entry->css_height);
    const int64_t x0 = std::max<int64_t>(0, p.x), y0 = std::max<int64_t>(0, p.y);
    const int64_t x1 = std::min<int64_t>(width, p.x + layer.width);
    const int64_t y1 = std::min<int64_t>(height, p.y + layer.height);
    for (int64_t y = y0; y < y1; ++y) {
      for (int64_t x = x0; x < x1; ++x) {
        const uint8_t* s = layer.At(static_cast<int>(x - p.x), static_cast<int>(y - p.y));
        uint8_t* d = canvas.At(static_cast<int>(x), static_cast<int>(y));
        const int a = s[3];
        for (int c = 0; c < 3; ++c) {
          // floor(n / 255 + 1/2) in integers.
          const int n = s[c] * a + d[c] * (255 - a);
          d[c] = static_cast<uint8_t>((2 * n + 255) / 510);
        }
      }
    }
  }
  return canvas;
}

QualityReport ComputeSavings(const PageManifest& page, std::vector<ImageResult> results,
                             const PageManifest* landing) {
  QualityReport report;
  report.page_url = page.page_url;
  int64_t saved = 0;
  for (const ImageResult& r : results) saved += r.original_bytes - r.fetched_bytes;
  report.page.cold_savings_fraction =
      page.total_page_bytes > 0 ? static_cast<double>(saved) / page.total_page_bytes : 0.0;
  if (landing) {
    const WarmWeight warm = WarmPageWeight(page, *landing);
    const std::set<std::string> excluded(warm.excluded_urls.begin(), warm.excluded_urls.end());
    int64_t saved_warm = 0;
    for (const ImageResult& r : results) {
      if (!excluded.count(r.url)) saved_warm += r.original_bytes - r.fetched_bytes;
    }
    report.page.excluded_urls = warm.excluded_urls;
    report.page.warm_page_weight = warm.weight_bytes;
    report.page.warm_savings_fraction =
        warm.weight_bytes > 0 ? static_cast<double>(saved_warm) / warm.weight_bytes : 0.0;
  }
  report.per_image = std::move(results);
  return report;
}

std::string ReportJson(const std::vector<QualityReport>& reports, int indent) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const QualityReport& r : reports) {
    nlohmann::ordered_json page;
    if (!r.manifest.empty()) page["manifest"] = r.manifest;
    page["page_url"] = r.page_url;
    nlohmann::ordered_json images = nlohmann::ordered_json::array();
    for (const ImageResult& i : r.per_image) {
      nlohmann::ordered_json img;
      img["url"] = i.url;
      img["original_bytes"] = i.original_bytes;
      img["fetched_bytes"] = i.fetched_bytes;
      if (!i.mode.empty()) img["mode"] = i.mode;
      if (i.ssim) img["ssim"] = *i.ssim;
      if (i.vc) img["vc"] = *i.vc;
      images.push_back(std::move(img));
    }
    page["images"] = std::move(images);
    page["cold_savings_fraction"] = r.page.cold_savings_fraction;
    page["excluded_urls"] = r.page.excluded_urls;
    if (r.page.warm_page_weight) page["warm_page_weight"] = *r.page.warm_page_weight;
    if (r.page.warm_savings_fraction) page["warm_savings_fraction"] = *r.page.warm_savings_fraction;
    if (r.page.page_vc) page["page_vc"] = *r.page.page_vc;
    doc.push_back(std::move(page));
  }
  return doc.dump(indent);
}

std::string ReportCsv(const std::vector<QualityReport>& reports) {
  std::string out = "page_url,url,original_bytes,fetched_bytes,ssim,vc,mode\n";
  for (const QualityReport& r : reports) {
    for (const ImageResult& i : r.per_image) {
      out += CsvField(r.page_url) + "," + CsvField(i.url) + "," + std::to_string(i.original_bytes) +
             "," + std::to_string(i.fetched_bytes) + "," + (i.ssim ? FormatDouble(*i.ssim) : "") +
             "," + (i.vc ? FormatDouble(*i.vc) : "") + "," + CsvField(i.mode) + "\n";
    }
  }
  return out;
}

std::string ReportCdfCsv(const std::vector<QualityReport>& reports) {
  std::map<std::string, std::vector<double>> series;
  for (const QualityReport& r : reports) {
    series["cold_savings_fraction"].push_back(r.page.cold_savings_fraction);
    if (r.page.warm_savings_fraction) {
      series["warm_savings_fraction"].push_back(*r.page.warm_savings_fraction);
    }
    for (const ImageResult& i : r.per_image) {
      if (i.original_bytes > 0) {
        series["fetched_ratio"].push_back(static_cast<double>(i.fetched_bytes) / i.original_bytes);
      }
    }
  }
  std::string out = "metric,value,cdf\n";
  for (auto& [name, values] : series) {
    std::sort(values.begin(), values.end());
    for (size_t i = 0; i < values.size(); ++i) {
      out += name + "," + FormatDouble(values[i]) + "," +
             FormatDouble(static_cast<double>(i + 1) / values.size()) + "\n";
    }
  }
  return out;
}

}  // namespace bytelite
