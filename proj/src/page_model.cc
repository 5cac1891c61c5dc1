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

#include "bytelite/page_model.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "bytelite/error.h"
#include "bytelite/url.h"
#include "json.hpp"

namespace bytelite {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kParseError, "malformed manifest: " + what);
}

RankBucket ParseBucket(const std::string& s) {
  if (s == "top100") return RankBucket::kTop100;
  if (s == "apr50k") return RankBucket::kApr50k;
  if (s == "apr100k") return RankBucket::kApr100k;
  if (s == "other") return RankBucket::kOther;
  Malformed("rank_bucket '" + s + "'");
}

PageKind ParseKind(const std::string& s) {
  if (s == "landing") return PageKind::kLanding;
  if (s == "internal") return PageKind::kInternal;
  Malformed("kind '" + s + "'");
}

std::string ReadText(const std::filesystem::path& path) {
  const Bytes data = ReadFile(path);
  return std::string(AsChars(data));
}

void CheckInvariants(const PageManifest& m) {
  if (m.kind == PageKind::kInternal && !m.parent_landing_url) {
    Malformed("internal page without parent_landing_url");
  }
  if (m.total_page_bytes < m.ImageBytes()) Malformed("total_page_bytes below image bytes");
  for (const auto& e : m.entries) {
    if (e.transfer_bytes < 0) Malformed("negative transfer_bytes");
    if (e.css_width < 0 || e.css_height < 0) Malformed("negative css size");
  }
}

bool LooksLikeImageUrl(std::string_view url) {
  const auto q = url.find_first_of("?#");
  std::string path = Lower(url.substr(0, q));
  for (std::string_view ext : {".jpg", ".jpeg", ".png", ".gif", ".webp", ".bmp", ".tif", ".tiff",
                               ".svg", ".ico", ".avif"}) {
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
      return true;
    }
  }
  return false;
}

int64_t DaysFromCivil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

int MonthIndex(std::string_view s) {
  static constexpr std::string_view kMonths[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                                 "jul", "aug", "sep", "oct", "nov", "dec"};
  const std::string l = Lower(s.substr(0, 3));
  for (int i = 0; i < 12; ++i) {
    if (kMonths[i] == l) return i + 1;
  }
  return 0;
}

bool ParseInt(std::string_view s, int64_t* out) {
  s = Trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

int64_t PageManifest::ImageBytes() const {
  int64_t sum = 0;
  for (const auto& e : entries) sum += e.transfer_bytes;
  return sum;
}

bool PageManifest::operator==(const PageManifest& o) const {
  return page_url == o.page_url && rank_bucket == o.rank_bucket && kind == o.kind &&
         parent_landing_url == o.parent_landing_url && entries == o.entries &&
         total_page_bytes == o.total_page_bytes && viewport_width == o.viewport_width &&
         viewport_height == o.viewport_height;
}

std::string_view RankBucketName(RankBucket bucket) {
  switch (bucket) {
    case RankBucket::kTop100: return "top100";
    case RankBucket::kApr50k: return "apr50k";
    case RankBucket::kApr100k: return "apr100k";
    case RankBucket::kOther: return "other";
  }
  return "other";
}

std::string_view PageKindName(PageKind kind) {
  return kind == PageKind::kLanding ? "landing" : "internal";
}

std::string_view CacheReasonName(CacheReason reason) {
  switch (reason) {
    case CacheReason::kNoStore: return "no_store";
    case CacheReason::kNoCache: return "no_cache";
    case CacheReason::kMaxAgePositive: return "max_age_positive";
    case CacheReason::kExpiresFuture: return "expires_future";
    case CacheReason::kValidatorOnlyHeuristic: return "validator_only_heuristic";
    case CacheReason::kNoSignal: return "no_signal";
  }
  return "no_signal";
}

PageManifest ParseNativeManifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("manifest is not JSON: ") + e.what());
  }
  if (!doc.is_object()) Malformed("top level is not an object");
  if (!doc.contains("version") || !doc["version"].is_number_integer()) Malformed("missing version");
  if (doc["version"].get<int>() != 1) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "unsupported manifest version " + doc["version"].dump());
  }
  PageManifest m;
  m.base_dir = base_dir;
  try {
    m.page_url = doc.at("page_url").get<std::string>();
    m.rank_bucket = ParseBucket(doc.value("rank_bucket", std::string("other")));
    m.kind = ParseKind(doc.value("kind", std::string("landing")));
    if (doc.contains("parent_landing_url") && !doc["parent_landing_url"].is_null()) {
      m.parent_landing_url = doc["parent_landing_url"].get<std::string>();
    }
    if (doc.contains("viewport")) {
      m.viewport_width = doc["viewport"].at(0).get<int>();
      m.viewport_height = doc["viewport"].at(1).get<int>();
    }
    m.total_page_bytes = doc.at("total_page_bytes").get<int64_t>();
    for (const auto& je : doc.at("entries")) {
      ImageEntry e;
      e.url = je.at("url").get<std::string>();
      e.transfer_bytes = je.at("transfer_bytes").get<int64_t>();
      if (je.contains("headers")) {
        for (const auto& [k, v] : je["headers"].items()) e.headers[Lower(k)] = v.get<std::string>();
      }
      if (je.contains("css")) {
        e.css_width = je["css"].at(0).get<int>();
        e.css_height = je["css"].at(1).get<int>();
      } else {
        e.geometry_missing = true;
      }
      e.is_background = je.value("is_background", false);
      if (je.contains("crop_rects")) {
        for (const auto& r : je["crop_rects"]) {
          e.crop_rects.push_back({r.at(0).get<int64_t>(), r.at(1).get<int64_t>(),
                                  r.at(2).get<int64_t>(), r.at(3).get<int64_t>()});
        }
      }
      if (je.contains("native")) {
        e.native_width = je["native"].at(0).get<int>();
        e.native_height = je["native"].at(1).get<int>();
      }
      if (je.contains("position")) {
        e.position = std::make_pair(je["position"].at(0).get<int>(), je["position"].at(1).get<int>());
      }
      e.body_ref = je.value("body_file", std::string());
      if (je.contains("body_base64")) e.inline_body = Base64Decode(je["body_base64"].get<std::string>());
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    Malformed(e.what());
  }
  CheckInvariants(m);
  return m;
}

PageManifest ParseHar(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("HAR is not JSON: ") + e.what());
  }
  PageManifest m;
  m.base_dir = base_dir;
  try {
    const json& log = doc.at("log");
    const json& entries = log.at("entries");
    if (log.contains("pages") && !log["pages"].empty()) {
      const auto title = log["pages"][0].value("title", std::string());
      if (ParseUrl(title)) m.page_url = title;
    }
    for (const auto& he : entries) {
      const json& req = he.at("request");
      const json& resp = he.at("response");
      const std::string url = req.at("url").get<std::string>();
      if (m.page_url.empty()) m.page_url = url;
      int64_t transfer = resp.value("_transferSize", int64_t{-1});
      if (transfer < 0) transfer = resp.value("bodySize", int64_t{-1});
      const json content = resp.value("content", json::object());
      if (transfer < 0) transfer = content.value("size", int64_t{0});
      if (transfer < 0) transfer = 0;
      m.total_page_bytes += transfer;
      const std::string mime = Lower(content.value("mimeType", std::string()));
      const bool image = mime.rfind("image/", 0) == 0 || (mime.empty() && LooksLikeImageUrl(url));
      if (!image) continue;
      ImageEntry e;
      e.url = url;
      e.transfer_bytes = transfer;
      e.geometry_missing = true;
      for (const auto& h : resp.value("headers", json::array())) {
        e.headers[Lower(h.at("name").get<std::string>())] = h.at("value").get<std::string>();
      }
      if (content.contains("text")) {
        const auto text = content["text"].get<std::string>();
        if (content.value("encoding", std::string()) == "base64") {
          e.inline_body = Base64Decode(text);
        } else {
          const auto b = AsBytes(text);
          e.inline_body.assign(b.begin(), b.end());
        }
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed HAR: ") + e.what());
  }
  CheckInvariants(m);
  return m;
}

PageManifest LoadManifest(const std::filesystem::path& source, ManifestFormat format) {
  const std::string text = ReadText(source);
  const auto dir = source.parent_path();
  return format == ManifestFormat::kHar ? ParseHar(text, dir) : ParseNativeManifest(text, dir);
}

std::optional<Bytes> LoadBody(const PageManifest& manifest, const ImageEntry& entry) {
  if (!entry.inline_body.empty()) return entry.inline_body;
  if (entry.body_ref.empty()) return std::nullopt;
  try {
    return ReadFile(manifest.base_dir / entry.body_ref);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string SerializeManifest(const PageManifest& m) {
  ordered_json doc;
  doc["version"] = 1;
  doc["page_url"] = m.page_url;
  doc["rank_bucket"] = RankBucketName(m.rank_bucket);
  doc["kind"] = PageKindName(m.kind);
  if (m.parent_landing_url) doc["parent_landing_url"] = *m.parent_landing_url;
  doc["viewport"] = {m.viewport_width, m.viewport_height};
  doc["total_page_bytes"] = m.total_page_bytes;
  doc["entries"] = ordered_json::array();
  for (const auto& e : m.entries) {
    ordered_json je;
    je["url"] = e.url;
    je["transfer_bytes"] = e.transfer_bytes;
    je["headers"] = ordered_json::object();
    for (const auto& [k, v] : e.headers) je["headers"][k] = v;
    if (!e.geometry_missing) je["css"] = {e.css_width, e.css_height};
    if (e.position) je["position"] = {e.position->first, e.position->second};
    je["is_background"] = e.is_background;
    je["crop_rects"] = ordered_json::array();
    for (const auto& r : e.crop_rects) je["crop_rects"].push_back({r.x, r.y, r.w, r.h});
    if (e.native_width && e.native_height) je["native"] = {*e.native_width, *e.native_height};
    if (!e.body_ref.empty()) je["body_file"] = e.body_ref;
    if (!e.inline_body.empty()) je["body_base64"] = Base64Encode(e.inline_body);
    doc["entries"].push_back(std::move(je));
  }
  return doc.dump(1) + "\n";
}

void SaveManifest(const PageManifest& manifest, const std::filesystem::path& dest) {
  WriteFile(dest, AsBytes(SerializeManifest(manifest)));
}

std::optional<int64_t> ParseHttpDate(std::string_view text) {
  // Split on spaces, commas, dashes and colons; the forms differ only in
  // token order.
  std::vector<std::string_view> tok;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::string_view(" ,-:").find(text[i]) != std::string_view::npos) ++i;
    size_t j = i;
    while (j < text.size() && std::string_view(" ,-:").find(text[j]) == std::string_view::npos) ++j;
    if (j > i) tok.push_back(text.substr(i, j - i));
    i = j;
  }
  int64_t day = 0, year = 0, hh = 0, mm = 0, ss = 0;
  int month = 0;
  if (tok.size() >= 8 && MonthIndex(tok[2]) && ParseInt(tok[1], &day)) {
    // IMF-fixdate / RFC 850: Wkd, DD Mon YYYY HH:MM:SS GMT
    month = MonthIndex(tok[2]);
    if (!ParseInt(tok[3], &year) || !ParseInt(tok[4], &hh) || !ParseInt(tok[5], &mm) ||
        !ParseInt(tok[6], &ss)) {
      return std::nullopt;
    }
    if (year < 100) year += year < 70 ? 2000 : 1900;
  } else if (tok.size() >= 7 && MonthIndex(tok[1])) {
    // asctime: Wkd Mon D HH:MM:SS YYYY
    month = MonthIndex(tok[1]);
    if (!ParseInt(tok[2], &day) || !ParseInt(tok[3], &hh) || !ParseInt(tok[4], &mm) ||
        !ParseInt(tok[5], &ss) || !ParseInt(tok[6], &year)) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  if (day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  return DaysFromCivil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
         hh * 3600 + mm * 60 + ss;
}

CacheDecision ClassifyCacheable(const HeaderMap& headers, std::optional<int64_t> now) {
  std::map<std::string, std::string> directives;
  if (auto it = headers.find("cache-control"); it != headers.end()) {
    std::string_view cc = it->second;
    size_t pos = 0;
    while (pos <= cc.size()) {
      const size_t comma = std::min(cc.find(',', pos), cc.size());
      std::string_view part = Trim(cc.substr(pos, comma - pos));
      pos = comma + 1;
      if (part.empty()) continue;
      const auto eq = part.find('=');
      std::string key = Lower(Trim(part.substr(0, eq)));
      std::string_view value;
      if (eq != std::string_view::npos) value = Trim(part.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      directives.emplace(std::move(key), std::string(value));
    }
  }
  if (directives.count("no-store")) return {false, CacheReason::kNoStore};
  if (directives.count("no-cache")) return {false, CacheReason::kNoCache};
  if (auto it = directives.find("max-age"); it != directives.end()) {
    int64_t age = 0;
    if (ParseInt(it->second, &age) && age > 0) return {true, CacheReason::kMaxAgePositive};
  }
  if (auto it = headers.find("expires"); it != headers.end()) {
    if (const auto t = ParseHttpDate(it->second)) {
      const int64_t clock = now ? *now
                                : std::chrono::duration_cast<std::chrono::seconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count();
      if (*t > clock) return {true, CacheReason::kExpiresFuture};
    }
  }
  if (headers.count("last-modified") || headers.count("etag")) {
    return {true, CacheReason::kValidatorOnlyHeuristic};
  }
  return {false, CacheReason::kNoSignal};
}

WarmWeight WarmPageWeight(const PageManifest& internal, const PageManifest& landing) {
  if (internal.kind != PageKind::kInternal || landing.kind != PageKind::kLanding) {
    throw Error(ErrorCode::kInvalidArgument, "warm weight needs an internal and a landing page");
  }
  const std::string site = SiteKey(internal.page_url);
  if (site.empty() || site != SiteKey(landing.page_url)) {
    throw Error(ErrorCode::kMismatchedSite,
                internal.page_url + " and " + landing.page_url + " are different sites");
  }
  std::set<std::string> on_landing;
  for (const auto& e : landing.entries) on_landing.insert(e.url);
  std::set<std::string> excluded;
  for (const auto& e : internal.entries) {
    if (on_landing.count(e.url) && ClassifyCacheable(e.headers).cacheable) excluded.insert(e.url);
  }
  WarmWeight out;
  out.weight_bytes = internal.total_page_bytes;
  for (const auto& e : internal.entries) {
    if (excluded.count(e.url)) out.weight_bytes -= e.transfer_bytes;
  }
  out.excluded_urls.assign(excluded.begin(), excluded.end());
  return out;
}

int64_t UnionArea(const std::vector<Rect>& rects) {
  std::vector<int64_t> xs;
  for (const auto& r : rects) {
    if (r.w <= 0 || r.h <= 0) continue;
    xs.push_back(r.x);
    xs.push_back(r.x + r.w);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  int64_t area = 0;
  std::vector<std::pair<int64_t, int64_t>> spans;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const int64_t x0 = xs[i], x1 = xs[i + 1];
    spans.clear();
    for (const auto& r : rects) {
      if (r.w > 0 && r.h > 0 && r.x <= x0 && r.x + r.w >= x1) spans.emplace_back(r.y, r.y + r.h);
    }
    std::sort(spans.begin(), spans.end());
    int64_t covered = 0;
    int64_t end = INT64_MIN;
    for (const auto& [lo, hi] : spans) {
      if (lo >= end) {
        covered += hi - lo;
        end = hi;
      } else if (hi > end) {
        covered += hi - end;
        end = hi;
      }
    }
    area += covered * (x1 - x0);
  }
  return area;
}

int64_t SpriteSavings(const ImageEntry& entry) {
  if (!entry.native_width || !entry.native_height || *entry.native_width <= 0 ||
      *entry.native_height <= 0) {
    throw Error(ErrorCode::kMissingGeometry, "sprite " + entry.url + " has no native dimensions");
  }
  const int64_t w = *entry.native_width, h = *entry.native_height;
  std::vector<Rect> clipped;
  for (const auto& r : entry.crop_rects) {
    const int64_t x0 = std::clamp<int64_t>(r.x, 0, w), x1 = std::clamp<int64_t>(r.x + r.w, 0, w);
    const int64_t y0 = std::clamp<int64_t>(r.y, 0, h), y1 = std::clamp<int64_t>(r.y + r.h, 0, h);
    clipped.push_back({x0, y0, x1 - x0, y1 - y0});
  }
  const int64_t total = w * h;
  const int64_t used = std::min(UnionArea(clipped), total);
  const __int128 saved = static_cast<__int128>(entry.transfer_bytes) * (total - used) / total;
  return std::clamp<int64_t>(static_cast<int64_t>(saved), 0, entry.transfer_bytes);
}

}  // namespace bytelite
