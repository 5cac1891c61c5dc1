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

#ifndef BYTELITE_URL_REWRITE_H_
#define BYTELITE_URL_REWRITE_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "bytelite/http.h"
#include "bytelite/image_meta.h"
#include "bytelite/partial_fetch.h"

namespace bytelite {

enum class RuleClass { kWidth, kHeight, kQuality, kFormat };

std::string_view RuleClassName(RuleClass klass);

struct RewriteRule {
  std::string id;
  std::string scope;  // "" matches every URL
  RuleClass klass = RuleClass::kWidth;
  std::string token_pattern;  // exactly one capture group
  std::string template_text;  // exactly one "{value}"

  std::regex scope_re;
  std::regex token_re;
};

// Immutable after load.
class RuleSet {
 public:
  // JSON array of {id, scope?, class, token_pattern, template}.  Throws
  // Error(kParseError) with the offending rule id on any violation.
  static RuleSet Parse(std::string_view json_text);
  static RuleSet Load(const std::filesystem::path& path);

  const std::vector<RewriteRule>& rules() const { return rules_; }

 private:
  std::vector<RewriteRule> rules_;
};

struct RuleMatch {
  const RewriteRule* rule = nullptr;
  std::string value;  // captured text
  size_t begin = 0;   // span of the whole token in the URL
  size_t end = 0;
};

// Width/height rules match only when the captured number equals the native
// dimension and format rules only when the captured extension names the
// native format (both need meta.header_complete); quality rules match on the
// pattern alone.
std::vector<RuleMatch> Discover(const RuleSet& rules, std::string_view url, const ImageMeta& meta);

struct RewriteTargets {
  int css_width = 0;   // 0: unknown, width left unchanged
  int css_height = 0;  // 0: derived from the width change
  int quality = 85;
  std::string format = "webp";
};

// Applies every match through its template.  Never upscales and never
// raises quality.  Returns `url` unchanged when the targets equal the current
// values.  Throws Error(kNothingToRewrite) when `matches` is empty.
std::string Rewrite(std::string_view url, const std::vector<RuleMatch>& matches,
                    const ImageMeta& meta, const RewriteTargets& targets);

enum class RewriteOutcome { kAccept, kRevert404, kRevertNoSavings, kRevertError };

std::string_view RewriteOutcomeName(RewriteOutcome outcome);

struct Validation {
  RewriteOutcome outcome = RewriteOutcome::kRevertError;
  std::optional<ProbeResult> probe;  // the rewritten probe, reusable on accept
  std::string detail;
};

// One probe of the rewritten URL decides: 404 → revert_404; any other
// failure → revert_error; total >= original_total → revert_no_savings;
// otherwise accept.
Validation Validate(HttpTransport& transport, const std::string& rewritten_url,
                    int64_t original_total, int64_t probe_bytes = 2048,
                    std::vector<RequestRecord>* log = nullptr);

// Thread-safe counters.
class RewriteStats {
 public:
  struct Snapshot {
    int64_t attempted = 0, matched = 0, accepted = 0, reverted_404 = 0, reverted_no_savings = 0,
            reverted_error = 0, savings_bytes = 0;
    bool operator==(const Snapshot&) const = default;
  };

  void CountAttempt() { ++attempted_; }
  void CountMatch() { ++matched_; }
  void Count(RewriteOutcome outcome, int64_t savings_bytes = 0);
  Snapshot Get() const;
  std::string ToJson() const;

 private:
  std::atomic<int64_t> attempted_{0}, matched_{0}, accepted_{0}, reverted_404_{0},
      reverted_no_savings_{0}, reverted_error_{0}, savings_bytes_{0};
};

// The complete rewrite step for one image.
struct RewriteAttempt {
  std::string original_url;
  std::string rewritten_url;  // == original_url unless accepted
  bool matched = false;
  bool changed = false;  // a distinct rewritten URL was validated
  std::optional<RewriteOutcome> outcome;
  std::vector<RuleClass> classes;
  ProbeResult original_probe;           // always issued
  std::optional<ProbeResult> accepted;  // rewritten probe when accepted
  std::vector<RequestRecord> log;

  // The probe to continue fetching from, and its URL.
  const ProbeResult& probe() const { return accepted ? *accepted : original_probe; }
};

// Probes the original (the probe is reused by the eventual fetch), discovers,
// rewrites and validates.  Probe errors of the original URL propagate.
RewriteAttempt RewriteAndValidate(HttpTransport& transport, const RuleSet& rules,
                                  const std::string& url, const RewriteTargets& targets,
                                  RewriteStats* stats, int64_t probe_bytes = 2048);

}  // namespace bytelite

#endif  // BYTELITE_URL_REWRITE_H_
