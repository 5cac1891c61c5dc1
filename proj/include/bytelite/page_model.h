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

#ifndef BYTELITE_PAGE_MODEL_H_
#define BYTELITE_PAGE_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bytelite/bytes.h"

namespace bytelite {

struct Rect {
  int64_t x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Rect&) const = default;
};

// Lower-cased header name -> value.
using HeaderMap = std::map<std::string, std::string>;

struct ImageEntry {
  std::string url;
  int64_t transfer_bytes = 0;
  // Path of the stored response body, relative to the manifest directory.
  // Empty when the body was not captured.
  std::string body_ref;
  // Body captured inline (HAR content.text); serialized as base64.
  Bytes inline_body;
  HeaderMap headers;
  int css_width = 0;
  int css_height = 0;
  // Set when the source carried no rendered geometry (css stays 0x0).
  bool geometry_missing = false;
  bool is_background = false;
  std::vector<Rect> crop_rects;
  std::optional<int> native_width;
  std::optional<int> native_height;
  // Top-left of the rendered box in page CSS px; absent for HAR sources.
  std::optional<std::pair<int, int>> position;

  bool operator==(const ImageEntry&) const = default;
};

enum class RankBucket { kTop100, kApr50k, kApr100k, kOther };
enum class PageKind { kLanding, kInternal };

struct PageManifest {
  std::string page_url;
  RankBucket rank_bucket = RankBucket::kOther;
  PageKind kind = PageKind::kLanding;
  std::optional<std::string> parent_landing_url;
  std::vector<ImageEntry> entries;
  int64_t total_page_bytes = 0;
  int viewport_width = 411;
  int viewport_height = 731;
  // Directory body_ref paths are resolved against (not serialized).
  std::filesystem::path base_dir;

  int64_t ImageBytes() const;
  bool operator==(const PageManifest& o) const;
};

enum class ManifestFormat { kHar, kNativeJson };

// Throws Error(kParseError) on malformed input and Error(kUnsupportedFormat)
// for an unknown manifest version.  Image responses in HARs are recognised
// by MIME type (image/*) or, failing that, by URL extension.
PageManifest LoadManifest(const std::filesystem::path& source, ManifestFormat format);
PageManifest ParseNativeManifest(std::string_view json_text,
                                 const std::filesystem::path& base_dir = {});
PageManifest ParseHar(std::string_view json_text,
                      const std::filesystem::path& base_dir = {});
// Inline body, else the body file resolved against base_dir; nullopt when
// neither is available or the file cannot be read.
std::optional<Bytes> LoadBody(const PageManifest& manifest, const ImageEntry& entry);

std::string SerializeManifest(const PageManifest& manifest);
void SaveManifest(const PageManifest& manifest, const std::filesystem::path& dest);

enum class CacheReason {
  kNoStore,
  kNoCache,
  kMaxAgePositive,
  kExpiresFuture,
  kValidatorOnlyHeuristic,
  kNoSignal,
};

struct CacheDecision {
  bool cacheable = false;
  CacheReason reason = CacheReason::kNoSignal;
  bool operator==(const CacheDecision&) const = default;
};

std::string_view CacheReasonName(CacheReason reason);
std::string_view RankBucketName(RankBucket bucket);
std::string_view PageKindName(PageKind kind);

// `now` is Unix seconds; defaults to the wall clock.
CacheDecision ClassifyCacheable(const HeaderMap& headers,
                                std::optional<int64_t> now = std::nullopt);

// Parses an IMF-fixdate / RFC 850 / asctime HTTP date to Unix seconds.
std::optional<int64_t> ParseHttpDate(std::string_view text);

struct WarmWeight {
  int64_t weight_bytes = 0;
  std::vector<std::string> excluded_urls;  // sorted, unique
};

// Double-keyed warm-cache weight of an internal page given its landing page.
// Throws Error(kMismatchedSite) when the pages are under different sites and
// Error(kInvalidArgument) when the kinds are wrong.
WarmWeight WarmPageWeight(const PageManifest& internal, const PageManifest& landing);

// Area of the union of rectangles; zero-area rects are ignored.
int64_t UnionArea(const std::vector<Rect>& rects);

// transfer_bytes * (1 - used/total), floored and clamped to
// [0, transfer_bytes].  Throws Error(kMissingGeometry) when native dims are
// unknown.
int64_t SpriteSavings(const ImageEntry& entry);

}  // namespace bytelite

#endif  // BYTELITE_PAGE_MODEL_H_
