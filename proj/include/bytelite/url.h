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

#ifndef BYTELITE_URL_H_
#define BYTELITE_URL_H_

#include <optional>
#include <string>
#include <string_view>

namespace bytelite {

struct Url {
  std::string scheme;  // lower-cased, "http" or "https"
  std::string host;    // lower-cased
  int port = 0;        // explicit or scheme default
  std::string target;  // path + query, at least "/"

  // scheme://host[:port]
  std::string Origin() const;
  std::string ToString() const;
};

// Parses absolute http(s) URLs only.
std::optional<Url> ParseUrl(std::string_view text);

// eTLD+1 approximation: the last two labels, or three when the last two form
// a known two-level public suffix (co.uk, com.au, ...).  IP literals and
// single-label hosts are returned unchanged.
std::string RegistrableDomain(std::string_view host);

// Top-level cache partition key of a page URL ("" when unparseable).
std::string SiteKey(std::string_view page_url);

std::string PercentDecode(std::string_view s);
// Encodes everything outside the RFC 3986 unreserved set (query components).
std::string PercentEncode(std::string_view s);

}  // namespace bytelite

#endif  // BYTELITE_URL_H_
