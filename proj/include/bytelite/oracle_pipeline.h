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

// Upper-bound compression oracle: resize to rendered dims and transcode to
// WebP at standard or extreme settings.

#ifndef BYTELITE_ORACLE_PIPELINE_H_
#define BYTELITE_ORACLE_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bytelite/bytes.h"
#include "bytelite/page_model.h"

namespace bytelite {

struct PipelineMode {
  std::string name;
  bool half_css = false;  // resize target is half the CSS box
  int webp_quality = 85;

  static PipelineMode Standard() { return {"standard", false, 85}; }
  static PipelineMode Extreme() { return {"extreme", true, 10}; }
  // "standard" or "extreme"; Error(kInvalidArgument) otherwise.
  static PipelineMode FromName(std::string_view name);
};

struct OptimizeResult {
  Bytes optimized;  // empty when the original is kept
  int64_t saved_bytes = 0;
  std::optional<double> ssim;
  int width = 0, height = 0;  // output dims
  bool kept_original = false;
  bool animated = false;  // GIF with several frames; first frame used
};

// Decode, downscale to the mode's target (never upscale; skipped when CSS
// dims are unknown), WebP-encode, and keep the original when that is not
// smaller.  ssim compares the original with the decoded result, both
// area-resampled to the display size (CSS dims clamped to native; native
// when unknown), which upsamples half-size outputs.  Throws Error(kDecodeError).
OptimizeResult Optimize(const ImageEntry& entry, ByteView body, const PipelineMode& mode);

// True for a GIF carrying more than one image.
bool IsAnimatedGif(ByteView body);

using Optimizer =
    std::function<OptimizeResult(const ImageEntry&, ByteView body, const PipelineMode&)>;

// Saves floor(transfer_bytes * ratio) without touching the body; used where
// savings must not depend on the encoder build.
Optimizer RatioOptimizer(double standard_ratio, double extreme_ratio);

struct EntryEstimate {
  std::string url;
  int64_t saved_bytes = 0;
  std::string method;  // sprite, optimize, missing_body, decode_error, missing_geometry
  std::optional<double> ssim;
  bool animated = false;
  bool cache_excluded = false;
};

struct PageEstimate {
  std::string page_url;
  std::string mode;
  int64_t saved_bytes = 0;
  double cold_fraction = 0;
  std::optional<int64_t> warm_saved_bytes;
  std::optional<double> warm_fraction;
  std::vector<EntryEstimate> entries;
};

struct EstimateOptions {
  const PageManifest* landing = nullptr;  // enables the warm estimate
  Optimizer optimizer;                    // default: Optimize
  int workers = 0;                        // 0: hardware concurrency
};

// Sprite entries use the area method, the rest the optimizer, in parallel.
PageEstimate EstimatePage(const PageManifest& manifest, const PipelineMode& mode,
                          const EstimateOptions& options = {});

std::string EstimateJson(const std::vector<PageEstimate>& estimates, int indent = 1);
// Columns: page_url, mode, url, saved_bytes, method, ssim.
std::string EstimateCsv(const std::vector<PageEstimate>& estimates);

}  // namespace bytelite

#endif  // BYTELITE_ORACLE_PIPELINE_H_
