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

#ifndef BYTELITE_IMAGE_META_H_
#define BYTELITE_IMAGE_META_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include "bytelite/bytes.h"

namespace bytelite {

enum class ImageFormat { kJpeg, kPng, kGif, kWebp, kBmp, kTiff, kUnknown };

std::string_view FormatName(ImageFormat format);
std::optional<ImageFormat> FormatFromName(std::string_view name);
std::string_view MimeType(ImageFormat format);

struct ImageMeta {
  ImageFormat format = ImageFormat::kUnknown;
  int width = 0;
  int height = 0;
  bool progressive = false;
  bool header_complete = false;
  // Shortest prefix from which the fields above can be read.
  int64_t header_bytes = 0;

  bool operator==(const ImageMeta&) const = default;
};

struct NeedMoreBytes {
  int64_t n = 0;  // minimal additional bytes before parsing can proceed
  bool operator==(const NeedMoreBytes&) const = default;
};

using MetaResult = std::variant<ImageMeta, NeedMoreBytes>;

ImageFormat SniffFormat(ByteView prefix);

// Throws Error(kCorruptHeader) when a signature matches but the structure
// does not, Error(kUnsupportedFormat) when no signature can match.
MetaResult ParseMeta(ByteView prefix);

// Convenience: ParseMeta that throws kCorruptHeader on NeedMoreBytes.
ImageMeta ParseMetaOrThrow(ByteView data);

// Number of topmost rows fully reconstructable from `payload` (a prefix of
// the encoded file).  Throws Error(kNotBaseline) for progressive images and
// Error(kCorruptPayload) when the payload cannot be decoded at all.
int CompleteRows(const ImageMeta& meta, ByteView payload);

}  // namespace bytelite

#endif  // BYTELITE_IMAGE_META_H_
