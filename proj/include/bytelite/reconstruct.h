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

// Turning partial payloads into displayable rasters and delivery bytes.

#ifndef BYTELITE_RECONSTRUCT_H_
#define BYTELITE_RECONSTRUCT_H_

#include <optional>
#include <string_view>

#include "bytelite/bytes.h"
#include "bytelite/image_meta.h"
#include "bytelite/raster.h"

namespace bytelite {

struct ReflectionParams {
  double blur_sigma = 4.0;
  int blend_rows = 12;
  int max_mirror_repeats = 8;

  // Throws Error(kInvalidArgument).
  void Validate() const;
};

struct RenderedPrefix {
  Raster raster;
  // Progressive: height.  Baseline: rows [0, valid_rows) are decoded, the
  // rest is allocated but undefined.
  int valid_rows = 0;
};

// Throws Error(kCorruptPayload) when nothing is decodable.
RenderedPrefix RenderPrefix(ByteView payload, const ImageMeta& meta);

// Fills rows [valid_rows, height) by mirroring about the boundary (direction
// alternating per segment, clamped after max_mirror_repeats segments), blurs
// the fill and blends blend_rows rows above the seam toward it.  Rows
// [0, valid_rows - blend_rows) are untouched.  Throws Error(kNothingToFill)
// unless 0 < valid_rows < height.
Raster ReflectFill(const Raster& raster, int valid_rows, const ReflectionParams& params = {});

// The naive alternative: undecoded rows made fully transparent.
Raster BlankFill(const Raster& raster, int valid_rows);

// RenderPrefix followed by ReflectFill when rows are missing.
Raster Reconstruct(ByteView payload, const ImageMeta& meta, const ReflectionParams& params = {});

enum class EncodeKind { kPng, kJpegQ85, kWebpQ85 };

std::string_view EncodeKindName(EncodeKind kind);
std::optional<EncodeKind> EncodeKindFromName(std::string_view name);
std::string_view EncodeKindMime(EncodeKind kind);

// Area-downscales to the rendered dims ((0, 0) keeps native, never upscales)
// and encodes.  Throws Error(kEncodeError) or Error(kInvalidArgument) for
// negative dims.
Bytes Finalize(const Raster& raster, int rendered_w, int rendered_h, EncodeKind kind);

}  // namespace bytelite

#endif  // BYTELITE_RECONSTRUCT_H_
