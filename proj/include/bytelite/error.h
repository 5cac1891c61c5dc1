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

#ifndef BYTELITE_ERROR_H_
#define BYTELITE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bytelite {

enum class ErrorCode {
  kParseError,
  kUnsupportedFormat,
  kMismatchedSite,
  kMissingGeometry,
  kCorruptHeader,
  kNotBaseline,
  kCorruptPayload,
  kNetworkError,
  kMalformedContentRange,
  kHttpStatus,
  kHeaderTooLarge,
  kNothingToRewrite,
  kNothingToFill,
  kEncodeError,
  kDecodeError,
  kDimensionMismatch,
  kInvalidArgument,
  kTimeout,
};

// Stable snake_case name, used in machine-readable error output.
std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures surface as Error.  For kHttpStatus the upstream
// status is carried in status().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int status = 0)
      : std::runtime_error(message), code_(code), status_(status) {}

  ErrorCode code() const { return code_; }
  int status() const { return status_; }

 private:
  ErrorCode code_;
  int status_;
};

}  // namespace bytelite

#endif  // BYTELITE_ERROR_H_
