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

#include "bytelite/url_rewrite.h"

#include <algorithm>
#include <charconv>
#include <set>

#include "bytelite/error.h"
#include "json.hpp"

namespace bytelite {

namespace {

Error RuleError(const std::string& id, const std::string& what) {
  return Error(ErrorCode::kParseError, "rule '" + id + "': " + what);
}

std::optional<RuleClass> ClassFromName(std::string_view name) {
  if (name == "width") return RuleClass::kWidth;
  if (name == "height") return RuleClass::kHeight;
  if (name == "quality") return RuleClass::kQuality;
  if (name == "format") return RuleClass::kFormat;
  return std::nullopt;
}

std::optional<int64_t> ToInt(std::string_view s) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

size_t CountOccurrences(std::string_view hay, std::string_view needle) {
  size_t n = 0;
  for (size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::string_view RuleClassName(RuleClass klass) {
  switch (klass) {
    case RuleClass::kWidth: return "width";
    case RuleClass::kHeight: return "height";
    case RuleClass::kQuality: return "quality";
    case RuleClass::kFormat: return "format";
  }
  return "width";
}

std::string_view RewriteOutcomeName(RewriteOutcome outcome) {
  switch (outcome) {
    case RewriteOutcome::kAccept: return "accept";
    case RewriteOutcome::kRevert404: return "revert_404";
    case RewriteOutcome::kRevertNoSavings: return "revert_no_savings";
    case RewriteOutcome::kRevertError: return "revert_error";
  }
  return "revert_error";
}

RuleSet RuleSet::Parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("ruleset is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::kParseError, "ruleset must be a JSON array");
  RuleSet set;
  std::set<std::string> ids;
  for (size_t i = 0; i < doc.size(); ++i) {
    const nlohmann::json& r = doc[i];
    std::string id = "#" + std::to_string(i);
    if (!r.is_object()) throw RuleError(id, "not an object");
    if (r.contains("id") && r["id"].is_string()) id = r["id"];
    for (const char* field : {"id", "class", "token_pattern", "template"}) {
      if (!r.contains(field) || !r[field].is_string()) {
        throw RuleError(id, std::string("missing string field '") + field + "'");
      }
    }
    if (!ids.insert(id).second) throw RuleError(id, "duplicate id");
    RewriteRule rule;
    rule.id = id;
    std::optional<RuleClass> klass = ClassFromName(r["class"].get<std::string>());
    if (!klass) throw RuleError(id, "unknown class '" + r["class"].get<std::string>() + "'");
    rule.klass = *klass;
    rule.token_pattern = r["token_pattern"];
    rule.template_text = r["template"];
    if (r.contains("scope")) {
      if (!r["scope"].is_string()) throw RuleError(id, "scope must be a string");
      rule.scope = r["scope"];
    }
    try {
      rule.token_re = std::regex(rule.token_pattern, std::regex::ECMAScript);
      rule.scope_re = std::regex(rule.scope.empty() ? std::string("") : rule.scope,
                                 std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw RuleError(id, std::string("bad regular expression: ") + e.what());
    }
    if (rule.token_re.mark_count() != 1) throw RuleError(id, "token_pattern needs one group");
    if (CountOccurrences(rule.template_text, "{value}") != 1) {
      throw RuleError(id, "template needs exactly one {value}");
    }
    set.rules_.push_back(std::move(rule));
  }
  return set;
}

RuleSet RuleSet::Load(const std::filesystem::path& path) {
  const Bytes text = ReadFile(path);
  return Parse(AsChars(text));
}

std::vector<RuleMatch> Discover(const RuleSet& rules, std::string_view url,
                                const ImageMeta& meta) {
  std::vector<RuleMatch> out;
  const std::string s(url);
  // Tokens are only looked for after the authority, so scheme and host are
  // never rewritten.
  size_t target = 0;
  if (size_t scheme = s.find("://"); scheme != std::string::npos) {
    target = s.find('/', scheme + 3);
    if (target == std::string::npos) return out;
  }
  const auto target_begin = s.begin() + static_cast<std::ptrdiff_t>(target);
  for (const RewriteRule& rule : rules.rules()) {
    if (!rule.scope.empty() && !std::regex_search(s, rule.scope_re)) continue;
    std::smatch m;
    if (!std::regex_search(target_begin, s.end(), m, rule.token_re) || !m[1].matched) continue;
    const std::string value = m[1];
    switch (rule.klass) {
      case RuleClass::kWidth:
      case RuleClass::kHeight: {
        if (!meta.header_complete) continue;
        const int native = rule.klass == RuleClass::kWidth ? meta.width : meta.height;
        std::optional<int64_t> v = ToInt(value);
        if (!v || *v != native) continue;
        break;
      }
      case RuleClass::kFormat: {
        if (!meta.header_complete) continue;
        std::optional<ImageFormat> f = FormatFromName(value);
        if (!f || *f != meta.format) continue;
        break;
      }
      case RuleClass::kQuality:
        if (!ToInt(value)) continue;
        break;
    }
    const size_t begin = target + static_cast<size_t>(m.position(0));
    out.push_back({&rule, value, begin, begin + static_cast<size_t>(m.length(0))});
  }
  return out;
}

std::string Rewrite(std::string_view url, const std::vector<RuleMatch>& matches,
                    const ImageMeta& meta, const RewriteTargets& targets) {
  if (matches.empty()) throw Error(ErrorCode::kNothingToRewrite, "no rewritable parameters");
  const int nw = meta.width, nh = meta.height;
  const int new_w = targets.css_width > 0 ? std::min(nw, targets.css_width) : nw;
  int new_h = nh;
  if (targets.css_height > 0) {
    new_h = std::min(nh, targets.css_height);
  } else if (new_w != nw && nw > 0) {
    new_h = static_cast<int>(static_cast<double>(nh) * new_w / nw + 0.5);
  }

  struct Edit {
    size_t begin, end;
    std::string text;
  };
  std::vector<Edit> edits;
  for (const RuleMatch& m : matches) {
    std::string value;
    switch (m.rule->klass) {
      case RuleClass::kWidth: value = std::to_string(new_w); break;
      case RuleClass::kHeight: value = std::to_string(new_h); break;
      case RuleClass::kQuality:
        value = std::to_string(std::min<int64_t>(ToInt(m.value).value_or(targets.quality),
                                                 targets.quality));
        break;
      case RuleClass::kFormat: value = targets.format; break;
    }
    std::string text = m.rule->template_text;
    text.replace(text.find("{value}"), 7, value);
    edits.push_back({m.begin, m.end, std::move(text)});
  }
  // Later spans first so earlier offsets stay valid; overlapping spans
  // (two rules claiming the same token) keep the first rule's edit.
  std::stable_sort(edits.begin(), edits.end(),
                   [](const Edit& a, const Edit& b) { return a.begin > b.begin; });
  std::string out(url);
  size_t floor = std::string::npos;
  for (const Edit& e : edits) {
    if (floor != std::string::npos && e.end > floor) continue;
    out.replace(e.begin, e.end - e.begin, e.text);
    floor = e.begin;
  }
  return out;
}

Validation Validate(HttpTransport& transport, const std::string& rewritten_url,
                    int64_t original_total, int64_t probe_bytes, std::vector<RequestRecord>* log) {
  Validation v;
  try {
    ProbeResult p = Probe(transport, rewritten_url, probe_bytes, log);
    const int64_t total = p.total_bytes.value_or(0);
    if (total <= 0 || total >= original_total) {
      v.outcome = RewriteOutcome::kRevertNoSavings;
      v.detail = "variant is " + std::to_string(total) + " bytes";
    } else {
      v.outcome = RewriteOutcome::kAccept;
      v.probe = std::move(p);
    }
  } catch (const Error& e) {
    const bool not_found = e.code() == ErrorCode::kHttpStatus && e.status() == 404;
    v.outcome = not_found ? RewriteOutcome::kRevert404 : RewriteOutcome::kRevertError;
    v.detail = e.what();
  }
  return v;
}

void RewriteStats::Count(RewriteOutcome outcome, int64_t savings_bytes) {
  switch (outcome) {
    case RewriteOutcome::kAccept:
      ++accepted_;
      savings_bytes_ += savings_bytes;
      break;
    case RewriteOutcome::kRevert404: ++reverted_404_; break;
    case RewriteOutcome::kRevertNoSavings: ++reverted_no_savings_; break;
    case RewriteOutcome::kRevertError: ++reverted_error_; break;
  }
}

RewriteStats::Snapshot RewriteStats::Get() const {
  return {attempted_.load(),    matched_.load(),         accepted_.load(),
          reverted_404_.load(), reverted_no_savings_.load(), reverted_error_.load(),
          savings_bytes_.load()};
}

std::string RewriteStats::ToJson() const {
  const Snapshot s = Get();
  nlohmann::ordered_json j;
  j["attempted"] = s.attempted;
  j["matched"] = s.matched;
  j["accepted"] = s.accepted;
  j["reverted_404"] = s.reverted_404;
  j["reverted_no_savings"] = s.reverted_no_savings;
  j["reverted_error"] = s.reverted_error;
  j["savings_bytes"] = s.savings_bytes;
  return j.dump();
}

RewriteAttempt RewriteAndValidate(HttpTransport& transport, const RuleSet& rules,
                                  const std::string& url, const RewriteTargets& targets,
                                  RewriteStats* stats, int64_t probe_bytes) {
  RewriteAttempt a;
  a.original_url = url;
  a.rewritten_url = url;
  if (stats) stats->CountAttempt();
  a.original_probe = Probe(transport, url, probe_bytes, &a.log);
  ImageMeta meta;
  try {
    MetaResult r = ParseMeta(a.original_probe.prefix);
    if (auto* m = std::get_if<ImageMeta>(&r)) meta = *m;
  } catch (const Error&) {
  }
  std::vector<RuleMatch> matches = Discover(rules, url, meta);
  if (matches.empty()) return a;
  a.matched = true;
  if (stats) stats->CountMatch();
  for (const RuleMatch& m : matches) {
    if (std::find(a.classes.begin(), a.classes.end(), m.rule->klass) == a.classes.end()) {
      a.classes.push_back(m.rule->klass);
    }
  }
  std::sort(a.classes.begin(), a.classes.end());
  const std::string rewritten = Rewrite(url, matches, meta, targets);
  // Without range support the original body is already in hand.
  if (rewritten == url || !a.original_probe.range_supported) return a;
  a.changed = true;
  const int64_t original_total = a.original_probe.total_bytes.value_or(0);
  Validation v = Validate(transport, rewritten, original_total, probe_bytes, &a.log);
  a.outcome = v.outcome;
  if (v.outcome == RewriteOutcome::kAccept) {
    a.rewritten_url = rewritten;
    a.accepted = std::move(v.probe);
  }
  if (stats) {
    stats->Count(v.outcome,
                 a.accepted ? original_total - a.accepted->total_bytes.value_or(0) : 0);
  }
  return a;
}

}  // namespace bytelite
