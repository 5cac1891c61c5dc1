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

#ifndef BYTELITE_RASTER_H_
#define BYTELITE_RASTER_H_

#include <cstdint>
#include <vector>

namespace bytelite {

// 8-bit RGBA, row-major, no padding.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  Raster() = default;
  Raster(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h * 4, fill) {}

  uint8_t* Row(int y) { return pixels.data() + static_cast<size_t>(y) * width * 4; }
  const uint8_t* Row(int y) const { return pixels.data() + static_cast<size_t>(y) * width * 4; }
  uint8_t* At(int x, int y) { return Row(y) + static_cast<size_t>(x) * 4; }
  const uint8_t* At(int x, int y) const { return Row(y) + static_cast<size_t>(x) * 4; }
  bool empty() const { return width == 0 || height == 0; }
  bool HasAlpha() const;  // any alpha < 255

  bool operator==(const Raster&) const = default;
};

Raster SolidRaster(int w, int h, uint8_t r, uint8_t g, uint8_t b, uint8_t a = 255);

// Area-averaging resample (box filter, two separable passes with 8-bit
// intermediate, 22-bit fixed-point weights).  Same-size axes are copied.
Raster ResizeArea(const Raster& src, int w, int h);

// Clamps a target size componentwise to the native size (never upscales).
// (0, 0) keeps native dims; a single zero component is derived from the
// other preserving aspect ratio.
void ClampTargetDims(int native_w, int native_h, int* w, int* h);

}  // namespace bytelite

#endif  // BYTELITE_RASTER_H_
