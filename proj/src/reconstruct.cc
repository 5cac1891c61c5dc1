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

#include "bytelite/reconstruct.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bytelite/codecs.h"
#include "bytelite/error.h"

namespace bytelite {

namespace {

// Source row of fill row r + k.
int MirrorSource(int k, int r, int max_repeats) {
  const int seg = k / r, off = k % r;
  if (seg >= max_repeats) return (max_repeats - 1) % 2 == 0 ? 0 : r - 1;
  return seg % 2 == 0 ? r - 1 - off : off;
}

// Normalised Gaussian taps, radius int(3 sigma + 0.5).
std::vector<double> GaussianKernel(double sigma) {
  const int radius = static_cast<int>(3.0 * sigma + 0.5);
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 / (sigma * sigma) * i * i);
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

uint8_t Round8(double v) {
  return static_cast<uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

void ReflectionParams::Validate() const {
  if (!(blur_sigma >= 0) || blend_rows < 0 || max_mirror_repeats < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "reflection needs blur_sigma >= 0, blend_rows >= 0, max_mirror_repeats >= 1");
  }
}

RenderedPrefix RenderPrefix(ByteView payload, const ImageMeta& meta) {
  PartialDecode d = DecodePartial(meta, payload);
  if (d.valid_rows <= 0 || d.raster.empty()) {
    throw Error(ErrorCode::kCorruptPayload, "no decodable rows in payload");
  }
  RenderedPrefix out;
  out.valid_rows = std::min(d.valid_rows, d.raster.height);
  out.raster = std::move(d.raster);
  return out;
}

Raster ReflectFill(const Raster& raster, int valid_rows, const ReflectionParams& params) {
  params.Validate();
  const int w = raster.width, h = raster.height, r = valid_rows;
  if (r <= 0 || r >= h) throw Error(ErrorCode::kNothingToFill, "no rows to fill");
  const size_t stride = static_cast<size_t>(w) * 4;
  const int start = std::max(0, r - params.blend_rows);

  // Mirrored canvas in double precision.
  std::vector<double> canvas(stride * h);
  for (int y = 0; y < h; ++y) {
    const uint8_t* src = raster.Row(y < r ? y : MirrorSource(y - r, r, params.max_mirror_repeats));
    std::copy(src, src + stride, canvas.begin() + static_cast<ptrdiff_t>(stride * y));
  }

  std::vector<double> blurred = canvas;
  if (params.blur_sigma > 0) {
    const std::vector<double> k = GaussianKernel(params.blur_sigma);
    const int radius = static_cast<int>(k.size() / 2);
    // Only rows that can influence [start, h) are blurred horizontally.
    const int hstart = std::max(0, start - radius);
    std::vector<double> tmp(stride * h, 0.0);
    for (int y = hstart; y < h; ++y) {
      const double* row = canvas.data() + stride * y;
      double* out = tmp.data() + stride * y;
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 4; ++c) {
          double acc = 0;
          for (int i = -radius; i <= radius; ++i) {
            const int xx = std::clamp(x + i, 0, w - 1);
            acc += k[i + radius] * row[xx * 4 + c];
          }
          out[x * 4 + c] = acc;
        }
      }
    }
    for (int y = start; y < h; ++y) {
      double* out = blurred.data() + stride * y;
      for (size_t i = 0; i < stride; ++i) {
        double acc = 0;
        for (int j = -radius; j <= radius; ++j) {
          const int yy = std::clamp(y + j, 0, h - 1);
          // Rows above hstart are outside every tap reaching [start, h).
          acc += k[j + radius] * tmp[stride * yy + i];
        }
        out[i] = acc;
      }
    }
  }

  Raster out = raster;
  for (int y = start; y < h; ++y) {
    uint8_t* dst = out.Row(y);
    const double* b = blurred.data() + stride * y;
    if (y >= r) {
      for (size_t i = 0; i < stride; ++i) dst[i] = Round8(b[i]);
    } else {
      const double wt =
          static_cast<double>(y - (r - params.blend_rows) + 1) / (params.blend_rows + 1);
      const uint8_t* src = raster.Row(y);
      for (size_t i = 0; i < stride; ++i) dst[i] = Round8((1 - wt) * src[i] + wt * b[i]);
    }
  }
  return out;
}

Raster BlankFill(const Raster& raster, int valid_rows) {
  Raster out = raster;
  for (int y = std::max(0, valid_rows); y < out.height; ++y) {
    std::fill(out.Row(y), out.Row(y) + static_cast<size_t>(out.width) * 4, 0);
  }
  return out;
}

Raster Reconstruct(ByteView payload, const ImageMeta& meta, const ReflectionParams& params) {
  RenderedPrefix p = RenderPrefix(payload, meta);
  if (p.valid_rows >= p.raster.height) return std::move(p.raster);
  return ReflectFill(p.raster, p.valid_rows, params);
}

std::string_view EncodeKindName(EncodeKind kind) {
  switch (kind) {
    case EncodeKind::kPng: return "png";
    case EncodeKind::kJpegQ85: return "jpeg_q85";
    case EncodeKind::kWebpQ85: return "webp_q85";
  }
  return "png";
}

std::optional<EncodeKind> EncodeKindFromName(std::string_view name) {
  if (name == "png") return EncodeKind::kPng;
  if (name == "jpeg_q85") return EncodeKind::kJpegQ85;
  if (name == "webp_q85") return EncodeKind::kWebpQ85;
  return std::nullopt;
}

std::string_view EncodeKindMime(EncodeKind kind) {
  switch (kind) {
    case EncodeKind::kPng: return "image/png";
    case EncodeKind::kJpegQ85: return "image/jpeg";
    case EncodeKind::kWebpQ85: return "image/webp";
  }
  return "application/octet-stream";
}

Bytes Finalize(const Raster& raster, int rendered_w, int rendered_h, EncodeKind kind) {
  if (rendered_w < 0 || rendered_h < 0) {
    throw Error(ErrorCode::kInvalidArgument, "rendered dims must be non-negative");
  }
  if (raster.empty()) throw Error(ErrorCode::kEncodeError, "empty raster");
  int w = rendered_w, h = rendered_h;
  ClampTargetDims(raster.width, raster.height, &w, &h);
  const Raster scaled =
      (w == raster.width && h == raster.height) ? raster : ResizeArea(raster, w, h);
  switch (kind) {
    case EncodeKind::kPng: return codec::EncodePng(scaled);
    case EncodeKind::kJpegQ85: return codec::EncodeJpeg(scaled, 85);
    case EncodeKind::kWebpQ85: return codec::EncodeWebp(scaled, 85);
  }
  throw Error(ErrorCode::kEncodeError, "unknown encoding");
}

}  // namespace bytelite
