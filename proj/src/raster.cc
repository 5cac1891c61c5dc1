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

#include "bytelite/raster.h"

#include <algorithm>
#include <cmath>

namespace bytelite {
namespace {

constexpr int kPrecisionBits = 32 - 8 - 2;

struct Coeffs {
  int ksize = 0;
  std::vector<int> bounds;  // (xmin, count) per output pixel
  std::vector<int32_t> k;   // ksize weights per output pixel
};

// Box-filter coefficients for resampling in_size -> out_size.
Coeffs BoxCoeffs(int in_size, int out_size) {
  const double scale = static_cast<double>(in_size) / out_size;
  const double filterscale = std::max(scale, 1.0);
  const double support = 0.5 * filterscale;
  Coeffs c;
  c.ksize = static_cast<int>(std::ceil(support)) * 2 + 1;
  c.bounds.resize(static_cast<size_t>(out_size) * 2);
  c.k.assign(static_cast<size_t>(out_size) * c.ksize, 0);
  std::vector<double> w(c.ksize);
  for (int xx = 0; xx < out_size; ++xx) {
    const double center = (xx + 0.5) * scale;
    const double ss = 1.0 / filterscale;
    int xmin = static_cast<int>(center - support + 0.5);
    if (xmin < 0) xmin = 0;
    int xmax = static_cast<int>(center + support + 0.5);
    if (xmax > in_size) xmax = in_size;
    xmax -= xmin;
    double ww = 0.0;
    for (int x = 0; x < xmax; ++x) {
      const double t = (x + xmin - center + 0.5) * ss;
      w[x] = (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
      ww += w[x];
    }
    for (int x = 0; x < xmax; ++x) {
      const double v = ww != 0.0 ? w[x] / ww : w[x];
      c.k[static_cast<size_t>(xx) * c.ksize + x] =
          static_cast<int32_t>(v < 0 ? -0.5 + v * (1 << kPrecisionBits)
                                     : 0.5 + v * (1 << kPrecisionBits));
    }
    c.bounds[xx * 2] = xmin;
    c.bounds[xx * 2 + 1] = xmax;
  }
  return c;
}

inline uint8_t Clip8(int64_t v) {
  v >>= kPrecisionBits;
  return static_cast<uint8_t>(v < 0 ? 0 : v > 255 ? 255 : v);
}

Raster Horizontal(const Raster& src, int out_w) {
  const Coeffs c = BoxCoeffs(src.width, out_w);
  Raster out(out_w, src.height);
  for (int y = 0; y < src.height; ++y) {
    const uint8_t* in = src.Row(y);
    uint8_t* o = out.Row(y);
    for (int xx = 0; xx < out_w; ++xx) {
      const int xmin = c.bounds[xx * 2], n = c.bounds[xx * 2 + 1];
      const int32_t* k = &c.k[static_cast<size_t>(xx) * c.ksize];
      for (int ch = 0; ch < 4; ++ch) {
        int64_t ss = 1 << (kPrecisionBits - 1);
        for (int x = 0; x < n; ++x) ss += static_cast<int64_t>(in[(x + xmin) * 4 + ch]) * k[x];
        o[xx * 4 + ch] = Clip8(ss);
      }
    }
  }
  return out;
}

Raster Vertical(const Raster& src, int out_h) {
  const Coeffs c = BoxCoeffs(src.height, out_h);
  Raster out(src.width, out_h);
  const size_t stride = static_cast<size_t>(src.width) * 4;
  for (int yy = 0; yy < out_h; ++yy) {
    const int ymin = c.bounds[yy * 2], n = c.bounds[yy * 2 + 1];
    const int32_t* k = &c.k[static_cast<size_t>(yy) * c.ksize];
    uint8_t* o = out.Row(yy);
    for (size_t i = 0; i < stride; ++i) {
      int64_t ss = 1 << (kPrecisionBits - 1);
      for (int y = 0; y < n; ++y) ss += static_cast<int64_t>(src.Row(y + ymin)[i]) * k[y];
      o[i] = Clip8(ss);
    }
  }
  return out;
}

}  // namespace

bool Raster::HasAlpha() const {
  for (size_t i = 3; i < pixels.size(); i += 4) {
    if (pixels[i] != 255) return true;
  }
  return false;
}

Raster SolidRaster(int w, int h, uint8_t r, uint8_t g, uint8_t b, uint8_t a) {
  Raster out(w, h);
  for (size_t i = 0; i < out.pixels.size(); i += 4) {
    out.pixels[i] = r;
    out.pixels[i + 1] = g;
    out.pixels[i + 2] = b;
    out.pixels[i + 3] = a;
  }
  return out;
}

Raster ResizeArea(const Raster& src, int w, int h) {
  if (w <= 0 || h <= 0 || src.empty()) return Raster(std::max(w, 0), std::max(h, 0));
  Raster out = w != src.width ? Horizontal(src, w) : src;
  if (h != src.height) out = Vertical(out, h);
  return out;
}

void ClampTargetDims(int native_w, int native_h, int* w, int* h) {
  if (*w <= 0 && *h <= 0) {
    *w = native_w;
    *h = native_h;
    return;
  }
  if (*w <= 0) *w = std::max(1, static_cast<int>(std::floor(static_cast<double>(native_w) * *h / native_h + 0.5)));
  if (*h <= 0) *h = std::max(1, static_cast<int>(std::floor(static_cast<double>(native_h) * *w / native_w + 0.5)));
  *w = std::min(*w, native_w);
  *h = std::min(*h, native_h);
}

}  // namespace bytelite
