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

#ifndef BYTELITE_REPORT_H_
#define BYTELITE_REPORT_H_

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "bytelite/http.h"
#include "bytelite/metrics.h"
#include "bytelite/page_model.h"
#include "bytelite/partial_fetch.h"
#include "bytelite/reconstruct.h"

namespace bytelite {

// In-process origin over stored bodies: honours single "bytes=a-b" ranges
// and answers 404 for unknown URLs.  Thread-safe.
class StaticTransport : public HttpTransport {
 public:
  void Put(const std::string& url, Bytes body, std::string content_type = {});
  HttpResponse Get(const std::string& url, const HeaderMap& request_headers) override;

 private:
  struct Object {
    Bytes body;
    std::string content_type;
  };
  std::mutex mu_;
  std::map<std::string, Object> objects_;
};

struct CorpusPage {
  std::string name;  // file name within the corpus directory
  PageManifest manifest;
};

// Every *.json (native) and *.har manifest directly inside `dir`, sorted by
// file name.  Throws Error(kParseError) when `dir` is not a directory.
std::vector<CorpusPage> LoadCorpus(const std::filesystem::path& dir);

struct ReportOptions {
  FetchBudget budget;
  // Pair internal pages with their landing page for warm-cache accounting.
  bool warm = false;
  // Reconstruct every image and record fetch mode, SSIM, VC and page VC.
  bool quality = false;
  ReflectionParams reflection;
};

// Budgeted fetch of every captured body through a StaticTransport.  Images
// without a body count as fully fetched (mode "missing_body").
QualityReport ReportPage(const PageManifest& page, const PageManifest* landing,
                         const ReportOptions& options);

std::vector<QualityReport> ReportCorpus(const std::vector<CorpusPage>& corpus,
                                        const ReportOptions& options);

}  // namespace bytelite

#endif  // BYTELITE_REPORT_H_
