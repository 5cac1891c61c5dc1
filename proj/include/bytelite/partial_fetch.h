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

#ifndef BYTELITE_PARTIAL_FETCH_H_
#define BYTELITE_PARTIAL_FETCH_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bytelite/bytes.h"
#include "bytelite/http.h"
#include "bytelite/image_meta.h"

namespace bytelite {

struct FetchBudget {
  double baseline_fraction = 0.5;
  double progressive_fraction = 0.15;
  int64_t probe_bytes = 2048;
  int64_t header_extension_cap = 16384;

  // Throws Error(kInvalidArgument) when an invariant is violated.
  void Validate() const;
  double FractionFor(bool progressive) const {
    return progressive ? progressive_fraction : baseline_fraction;
  }
};

// Inclusive byte range, as in a Range header.
struct ByteRange {
  int64_t first = 0;
  int64_t last = 0;
  int64_t size() const { return last - first + 1; }
  std::string ToHeader() const;  // "bytes=first-last"
  bool operator==(const ByteRange&) const = default;
};

enum class FetchMode {
  kRanged,              // budgeted prefix; fetched < total
  kFullFallback200,     // origin ignored Range; whole body taken from that response
  kFullFallbackHeader,  // header unusable or too large; remainder fetched
  kFullRange,           // budget reached the total; remainder fetched as a range
  kFullSmall,           // object no larger than the probe
  kCacheHit,            // every byte came from the range cache
  kError,
};

std::string_view FetchModeName(FetchMode mode);

struct RequestRecord {
  std::string url;
  std::optional<ByteRange> range;  // nullopt: no Range header
  int status = 0;
  int64_t body_bytes = 0;
  bool from_cache = false;
};

// One JSON object per line.
std::string RequestLogJsonLines(const std::vector<RequestRecord>& log);

struct FetchOutcome {
  FetchMode mode = FetchMode::kError;
  int64_t total_bytes = 0;
  int64_t fetched_bytes = 0;      // payload length
  int64_t transferred_bytes = 0;  // body bytes that crossed the network
  int probes = 0;                 // probe-sized requests used for the header
  Bytes payload;
  ImageMeta meta;                 // header_complete=false when unparseable
  HeaderMap headers;              // headers of the first response
  std::vector<RequestRecord> request_log;
  std::string error;              // set for kError
};

struct ProbeResult {
  int status = 0;
  std::optional<int64_t> total_bytes;
  bool range_supported = false;  // false: 200 reply, prefix is the whole body
  Bytes prefix;
  HeaderMap headers;
};

// Parses "bytes first-last/total".  Throws Error(kMalformedContentRange).
struct ContentRange {
  int64_t first = 0, last = 0, total = 0;
};
ContentRange ParseContentRange(std::string_view value);

// Issues Range: bytes=0-(probe_bytes-1).  Throws Error(kHttpStatus) with
// the status for anything but 200/206, Error(kMalformedContentRange) for
// unusable Content-Range, and transport errors as is.
ProbeResult Probe(HttpTransport& transport, const std::string& url, int64_t probe_bytes = 2048,
                  std::vector<RequestRecord>* log = nullptr);

// target = max(already, ceil(fraction * total)).  Returns [already,
// target-1] when already < target < total; nullopt otherwise (the caller
// fetches the rest when target >= total > already).
std::optional<ByteRange> PlanSecondRange(int64_t total, double fraction, int64_t already);

// Disjoint, sorted, coalesced [lo, hi) intervals held for one object.
class CacheState {
 public:
  CacheState() = default;
  explicit CacheState(std::vector<std::pair<int64_t, int64_t>> pieces);

  void Add(int64_t lo, int64_t hi);
  bool Covers(int64_t lo, int64_t hi) const;
  const std::vector<std::pair<int64_t, int64_t>>& pieces() const { return pieces_; }

 private:
  std::vector<std::pair<int64_t, int64_t>> pieces_;
};

// want \ cache as minimal inclusive ranges; empty means a full cache hit.
std::vector<ByteRange> PlanCachedRange(const CacheState& cache, ByteRange want);

// In-memory partial-object cache keyed by (top-level site, url).  Holds the
// bytes of every piece so later fetches can be served without the network.
class RangeCache {
 public:
  struct Object {
    int64_t total = 0;
    std::string validator;  // ETag or Last-Modified, "" when none
    HeaderMap headers;
    CacheState state;
    Bytes data;  // sized to total; only ranges in `state` are meaningful
  };

  std::optional<Object> Lookup(const std::string& key, const std::string& url);
  void Store(const std::string& key, const std::string& url, int64_t total,
             const std::string& validator, const HeaderMap& headers, int64_t offset, ByteView bytes);
  void Invalidate(const std::string& key, const std::string& url);

 private:
  std::mutex mu_;
  std::map<std::pair<std::string, std::string>, Object> objects_;
};

struct FetchOptions {
  RangeCache* cache = nullptr;
  std::string cache_key;  // top-level site; "" is a valid partition
};

// Probe, header extension, progressive-aware budget, second range,
// concatenation and fallbacks.  Transport and HTTP errors propagate.
FetchOutcome FetchWithBudget(HttpTransport& transport, const std::string& url,
                             const FetchBudget& budget, const FetchOptions& options = {});

// Continues a fetch from an existing probe (used when a probe was already
// spent on validation, so its bytes are not requested twice).
FetchOutcome FetchFromProbe(HttpTransport& transport, const std::string& url,
                            const FetchBudget& budget, ProbeResult probe,
                            std::vector<RequestRecord> log, const FetchOptions& options = {});

}  // namespace bytelite

#endif  // BYTELITE_PARTIAL_FETCH_H_
