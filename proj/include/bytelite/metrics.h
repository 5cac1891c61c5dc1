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

#ifndef BYTELITE_METRICS_H_
#define BYTELITE_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bytelite/page_model.h"
#include "bytelite/raster.h"

namespace bytelite {

// 8-bit luma, floor(0.299 R + 0.587 G + 0.114 B + 0.5); alpha ignored.
std::vector<double> Luma(const Raster& raster);

// Mean SSIM over valid 11x11 Gaussian (sigma 1.5) windows of the luma,
// C1 = (0.01*255)^2, C2 = (0.03*255)^2, clamped to [0, 1].  Images smaller
// than a window use one global window.  Throws Error(kDimensionMismatch).
double Ssim(const Raster& a, const Raster& b);

// Mean over R, G, B of the 256-bin histogram intersection divided by the
// pixel count.  Throws Error(kDimensionMismatch).
double VisualCompleteness(const Raster& candidate, const Raster& reference);

// Paints every entry's raster, area-resampled to its CSS box, over a white
// canvas of viewport width and height min(max entry bottom, 5 * viewport
// height), in manifest order with source-over alpha.  Entries without a
// position are stacked below the furthest bottom so far; entries without
// geometry or raster are skipped.  The result is opaque.
Raster ComposePage(const PageManifest& manifest, const std::map<std::string, Raster>& rasters);

struct ImageResult {
  std::string url;
  int64_t original_bytes = 0;
  int64_t fetched_bytes = 0;
  std::optional<double> ssim;
  std::optional<double> vc;
  std::string mode;
};

struct PageSavings {
  double cold_savings_fraction = 0;
  std::optional<double> warm_savings_fraction;
  std::optional<int64_t> warm_page_weight;
  std::vector<std::string> excluded_urls;
  std::optional<double> page_vc;
};

struct QualityReport {
  std::string page_url;
  std::string manifest;  // source file name, "" when not from a file
  std::vector<ImageResult> per_image;
  PageSavings page;
};

// cold = sum(original - fetched) / total_page_bytes.  With `landing`, warm
// divides by the warm page weight and drops cache-excluded URLs from the
// numerator.
QualityReport ComputeSavings(const PageManifest& page, std::vector<ImageResult> results,
                             const PageManifest* landing = nullptr);

std::string ReportJson(const std::vector<QualityReport>& reports, int indent = 1);

// Columns: page_url, url, original_bytes, fetched_bytes, ssim, vc, mode.
std::string ReportCsv(const std::vector<QualityReport>& reports);

// Empirical CDF points ("metric,value,cdf") of per-page cold and warm
// savings fractions and per-image fetched/original ratios.
std::string ReportCdfCsv(const std::vector<QualityReport>& reports);

}  // namespace bytelite

#endif  // BYTELITE_METRICS_H_
