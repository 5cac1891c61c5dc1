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

#include "bytelite/partial_fetch.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <utility>

#include "bytelite/error.h"
#include "json.hpp"

namespace bytelite {

namespace {

bool ParseInt(std::string_view s, int64_t* out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() && *out >= 0;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Strong ETag, else Last-Modified; weak ETags cannot guard a range.
std::string RangeValidator(const HeaderMap& headers) {
  auto etag = headers.find("etag");
  if (etag != headers.end() && !etag->second.empty() && etag->second.rfind("W/", 0) != 0) {
    return etag->second;
  }
  auto lm = headers.find("last-modified");
  return lm == headers.end() ? std::string() : lm->second;
}

int64_t CeilFraction(double fraction, int64_t total) {
  return static_cast<int64_t>(std::ceil(fraction * static_cast<double>(total)));
}

ImageMeta BestEffortMeta(ByteView data) {
  try {
    MetaResult r = ParseMeta(data);
    if (auto* m = std::get_if<ImageMeta>(&r)) return *m;
  } catch (const Error&) {
  }
  ImageMeta meta;
  meta.format = SniffFormat(data);
  return meta;
}

int64_t NetworkBytes(const std::vector<RequestRecord>& log) {
  int64_t n = 0;
  for (const RequestRecord& r : log) {
    if (!r.from_cache) n += r.body_bytes;
  }
  return n;
}

class Fetcher {
 public:
  Fetcher(HttpTransport& transport, const std::string& url, const FetchBudget& budget,
          const FetchOptions& options, std::vector<RequestRecord> log)
      : transport_(transport), url_(url), budget_(budget), options_(options) {
    out_.request_log = std::move(log);
  }

  FetchOutcome FromCache(RangeCache::Object object) {
    cached_ = std::move(object);
    total_ = cached_->total;
    validator_ = cached_->validator;
    out_.headers = cached_->headers;
    if (ReadRange(0, std::min(budget_.probe_bytes, total_) - 1)) Continue();
    return Finish();
  }

  FetchOutcome FromProbe(ProbeResult probe) {
    out_.headers = probe.headers;
    if (!probe.range_supported) {
      payload_ = std::move(probe.prefix);
      total_ = static_cast<int64_t>(payload_.size());
      mode_ = FetchMode::kFullFallback200;
      StoreInCache(0, payload_);
      return Finish();
    }
    total_ = *probe.total_bytes;
    validator_ = RangeValidator(probe.headers);
    payload_ = std::move(probe.prefix);
    StoreInCache(0, payload_);
    Continue();
    return Finish();
  }

 private:
  int64_t size() const { return static_cast<int64_t>(payload_.size()); }

  void Continue() {
    out_.probes = 1;
    if (total_ <= size()) {
      mode_ = FetchMode::kFullSmall;
      return;
    }
    bool fallback = false;
    while (true) {
      try {
        MetaResult r = ParseMeta(payload_);
        if (std::holds_alternative<ImageMeta>(r)) break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kCorruptHeader && e.code() != ErrorCode::kUnsupportedFormat) {
          throw;
        }
        fallback = true;
        break;
      }
      // HeaderTooLarge: stop extending and take the whole object.
      if (size() >= total_ || size() + budget_.probe_bytes > budget_.header_extension_cap) {
        fallback = true;
        break;
      }
      if (!ReadRange(size(), std::min(size() + budget_.probe_bytes, total_) - 1)) return;
      ++out_.probes;
    }
    if (fallback) {
      if (size() < total_ && !ReadRange(size(), total_ - 1)) return;
      mode_ = FetchMode::kFullFallbackHeader;
      return;
    }
    const ImageMeta meta = std::get<ImageMeta>(ParseMeta(payload_));
    const double fraction = budget_.FractionFor(meta.progressive);
    std::optional<ByteRange> second = PlanSecondRange(total_, fraction, size());
    if (second) {
      if (!ReadRange(second->first, second->last)) return;
      mode_ = FetchMode::kRanged;
    } else if (size() < total_ && std::max(size(), CeilFraction(fraction, total_)) >= total_) {
      if (!ReadRange(size(), total_ - 1)) return;
      mode_ = FetchMode::kFullRange;
    } else {
      mode_ = size() < total_ ? FetchMode::kRanged : FetchMode::kFullRange;
    }
  }

  // Appends [first, last] to the payload, taking cached pieces where held.
  // Returns false when the origin answered with a full body instead, which
  // then replaces the payload (mode full_fallback_200).
  bool ReadRange(int64_t first, int64_t last) {
    std::vector<ByteRange> missing;
    if (cached_) {
      missing = PlanCachedRange(cached_->state, {first, last});
    } else {
      missing.push_back({first, last});
    }
    int64_t pos = first;
    for (const ByteRange& m : missing) {
      CopyFromCache(pos, m.first);
      if (!FetchMissing(m)) return false;
      pos = m.last + 1;
    }
    CopyFromCache(pos, last + 1);
    return true;
  }

  void CopyFromCache(int64_t lo, int64_t hi) {
    if (lo >= hi) return;
    payload_.insert(payload_.end(), cached_->data.begin() + lo, cached_->data.begin() + hi);
    out_.request_log.push_back({url_, ByteRange{lo, hi - 1}, 206, hi - lo, true});
  }

  bool FetchMissing(ByteRange want) {
    while (want.first <= want.last) {
      HeaderMap headers{{"range", want.ToHeader()}};
      if (!validator_.empty()) headers["if-range"] = validator_;
      HttpResponse res = transport_.Get(url_, headers);
      out_.request_log.push_back(
          {url_, want, res.status, static_cast<int64_t>(res.body.size()), false});
      if (res.status == 200) {
        payload_ = std::move(res.body);
        total_ = size();
        mode_ = FetchMode::kFullFallback200;
        if (options_.cache) options_.cache->Invalidate(options_.cache_key, url_);
        cached_.reset();
        validator_ = RangeValidator(res.headers);
        StoreInCache(0, payload_);
        return false;
      }
      if (res.status != 206) {
        throw Error(ErrorCode::kHttpStatus, "range request failed with status " +
                                                std::to_string(res.status),
                    res.status);
      }
      ContentRange cr = ParseContentRange(res.Header("content-range"));
      if (cr.first != want.first || cr.total != total_ ||
          static_cast<int64_t>(res.body.size()) != cr.last - cr.first + 1) {
        throw Error(ErrorCode::kMalformedContentRange, "content-range does not match request");
      }
      const int64_t take = std::min(cr.last, want.last) - cr.first + 1;
      ByteView body(res.body.data(), static_cast<size_t>(take));
      payload_.insert(payload_.end(), body.begin(), body.end());
      StoreInCache(cr.first, body);
      want.first += take;
    }
    return true;
  }

  void StoreInCache(int64_t offset, ByteView bytes) {
    if (!options_.cache || bytes.empty()) return;
    options_.cache->Store(options_.cache_key, url_, total_, validator_, out_.headers, offset, bytes);
  }

  FetchOutcome Finish() {
    out_.transferred_bytes = NetworkBytes(out_.request_log);
    out_.total_bytes = total_;
    out_.fetched_bytes = size();
    out_.mode = mode_;
    if (out_.transferred_bytes == 0 && !out_.request_log.empty()) out_.mode = FetchMode::kCacheHit;
    out_.meta = BestEffortMeta(payload_);
    out_.payload = std::move(payload_);
    return std::move(out_);
  }

  HttpTransport& transport_;
  const std::string& url_;
  const FetchBudget& budget_;
  const FetchOptions& options_;
  std::optional<RangeCache::Object> cached_;
  int64_t total_ = 0;
  std::string validator_;
  Bytes payload_;
  FetchMode mode_ = FetchMode::kError;
  FetchOutcome out_;
};

}  // namespace

void FetchBudget::Validate() const {
  if (!(baseline_fraction > 0 && baseline_fraction <= 1) ||
      !(progressive_fraction > 0 && progressive_fraction <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "budget fractions must lie in (0, 1]");
  }
  if (probe_bytes < 512) throw Error(ErrorCode::kInvalidArgument, "probe_bytes must be >= 512");
  if (header_extension_cap < probe_bytes) {
    throw Error(ErrorCode::kInvalidArgument, "header_extension_cap must be >= probe_bytes");
  }
}

std::string ByteRange::ToHeader() const {
  return "bytes=" + std::to_string(first) + "-" + std::to_string(last);
}

std::string_view FetchModeName(FetchMode mode) {
  switch (mode) {
    case FetchMode::kRanged: return "ranged";
    case FetchMode::kFullFallback200: return "full_fallback_200";
    case FetchMode::kFullFallbackHeader: return "full_fallback_header";
    case FetchMode::kFullRange: return "full_range";
    case FetchMode::kFullSmall: return "full_small";
    case FetchMode::kCacheHit: return "cache_hit";
    case FetchMode::kError: return "error";
  }
  return "error";
}

std::string RequestLogJsonLines(const std::vector<RequestRecord>& log) {
  std::string out;
  for (const RequestRecord& r : log) {
    nlohmann::ordered_json line;
    line["url"] = r.url;
    if (r.range) {
      line["range"] = {r.range->first, r.range->last};
    } else {
      line["range"] = nullptr;
    }
    line["status"] = r.status;
    line["bytes"] = r.body_bytes;
    line["cache"] = r.from_cache;
    out += line.dump();
    out += '\n';
  }
  return out;
}

ContentRange ParseContentRange(std::string_view value) {
  auto fail = [&]() {
    return Error(ErrorCode::kMalformedContentRange,
                 "unusable content-range '" + std::string(value) + "'");
  };
  std::string_view s = Trim(value);
  if (s.rfind("bytes ", 0) != 0) throw fail();
  s = Trim(s.substr(6));
  size_t dash = s.find('-');
  size_t slash = s.find('/');
  if (dash == std::string_view::npos || slash == std::string_view::npos || dash > slash) {
    throw fail();
  }
  ContentRange cr;
  if (!ParseInt(s.substr(0, dash), &cr.first) ||
      !ParseInt(s.substr(dash + 1, slash - dash - 1), &cr.last) ||
      !ParseInt(s.substr(slash + 1), &cr.total)) {
    throw fail();
  }
  if (cr.last < cr.first || cr.last >= cr.total) throw fail();
  return cr;
}

ProbeResult Probe(HttpTransport& transport, const std::string& url, int64_t probe_bytes,
                  std::vector<RequestRecord>* log) {
  const ByteRange range{0, probe_bytes - 1};
  HttpResponse res = transport.Get(url, {{"range", range.ToHeader()}});
  if (log) log->push_back({url, range, res.status, static_cast<int64_t>(res.body.size()), false});
  ProbeResult probe;
  probe.status = res.status;
  probe.headers = std::move(res.headers);
  if (res.status == 200) {
    probe.total_bytes = static_cast<int64_t>(res.body.size());
    probe.prefix = std::move(res.body);
    return probe;
  }
  if (res.status != 206) {
    throw Error(ErrorCode::kHttpStatus, "probe failed with status " + std::to_string(res.status),
                res.status);
  }
  auto it = probe.headers.find("content-range");
  ContentRange cr = ParseContentRange(it == probe.headers.end() ? "" : it->second);
  if (cr.first != 0 || cr.last > range.last ||
      static_cast<int64_t>(res.body.size()) != cr.last + 1) {
    throw Error(ErrorCode::kMalformedContentRange, "content-range inconsistent with probe");
  }
  probe.range_supported = true;
  probe.total_bytes = cr.total;
  probe.prefix = std::move(res.body);
  return probe;
}

std::optional<ByteRange> PlanSecondRange(int64_t total, double fraction, int64_t already) {
  if (total <= already) return std::nullopt;
  const int64_t target = std::max(already, CeilFraction(fraction, total));
  if (target >= total || target <= already) return std::nullopt;
  return ByteRange{already, target - 1};
}

CacheState::CacheState(std::vector<std::pair<int64_t, int64_t>> pieces) {
  for (const auto& [lo, hi] : pieces) Add(lo, hi);
}

void CacheState::Add(int64_t lo, int64_t hi) {
  if (lo >= hi) return;
  std::vector<std::pair<int64_t, int64_t>> merged;
  merged.reserve(pieces_.size() + 1);
  bool placed = false;
  for (const auto& p : pieces_) {
    if (p.second < lo) {
      merged.push_back(p);
    } else if (p.first > hi) {
      if (!placed) merged.emplace_back(lo, hi), placed = true;
      merged.push_back(p);
    } else {
      lo = std::min(lo, p.first);
      hi = std::max(hi, p.second);
    }
  }
  if (!placed) merged.emplace_back(lo, hi);
  pieces_ = std::move(merged);
}

bool CacheState::Covers(int64_t lo, int64_t hi) const {
  for (const auto& p : pieces_) {
    if (p.first <= lo && hi <= p.second) return true;
  }
  return lo >= hi;
}

std::vector<ByteRange> PlanCachedRange(const CacheState& cache, ByteRange want) {
  std::vector<ByteRange> out;
  int64_t pos = want.first;
  const int64_t end = want.last + 1;
  for (const auto& [lo, hi] : cache.pieces()) {
    if (hi <= pos) continue;
    if (lo >= end) break;
    if (lo > pos) out.push_back({pos, lo - 1});
    pos = std::max(pos, hi);
    if (pos >= end) break;
  }
  if (pos < end) out.push_back({pos, end - 1});
  return out;
}

std::optional<RangeCache::Object> RangeCache::Lookup(const std::string& key,
                                                     const std::string& url) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = objects_.find({key, url});
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

void RangeCache::Store(const std::string& key, const std::string& url, int64_t total,
                       const std::string& validator, const HeaderMap& headers, int64_t offset,
                       ByteView bytes) {
  if (offset < 0 || offset + static_cast<int64_t>(bytes.size()) > total) return;
  std::lock_guard<std::mutex> lock(mu_);
  Object& obj = objects_[{key, url}];
  if (obj.total != total || obj.validator != validator) {
    obj = Object{};
    obj.total = total;
    obj.validator = validator;
    obj.headers = headers;
    obj.data.resize(static_cast<size_t>(total));
  }
  std::copy(bytes.begin(), bytes.end(), obj.data.begin() + offset);
  obj.state.Add(offset, offset + static_cast<int64_t>(bytes.size()));
}

void RangeCache::Invalidate(const std::string& key, const std::string& url) {
  std::lock_guard<std::mutex> lock(mu_);
  objects_.erase({key, url});
}

FetchOutcome FetchWithBudget(HttpTransport& transport, const std::string& url,
                             const FetchBudget& budget, const FetchOptions& options) {
  budget.Validate();
  if (options.cache) {
    if (auto object = options.cache->Lookup(options.cache_key, url); object && object->total > 0) {
      return Fetcher(transport, url, budget, options, {}).FromCache(std::move(*object));
    }
  }
  std::vector<RequestRecord> log;
  ProbeResult probe = Probe(transport, url, budget.probe_bytes, &log);
  return FetchFromProbe(transport, url, budget, std::move(probe), std::move(log), options);
}

FetchOutcome FetchFromProbe(HttpTransport& transport, const std::string& url,
                            const FetchBudget& budget, ProbeResult probe,
                            std::vector<RequestRecord> log, const FetchOptions& options) {
  budget.Validate();
  return Fetcher(transport, url, budget, options, std::move(log)).FromProbe(std::move(probe));
}

}  // namespace bytelite
