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

// WebP via libwebp's simple and incremental APIs.

#include <cstring>
#include <memory>

#include "bytelite/codecs.h"
#include "bytelite/error.h"
#include "webp/decode.h"
#include "webp/encode.h"

namespace bytelite {
namespace codec {

PartialDecode DecodeWebp(ByteView data) {
  std::unique_ptr<WebPIDecoder, void (*)(WebPIDecoder*)> idec(
      WebPINewRGB(MODE_RGBA, nullptr, 0, 0), WebPIDelete);
  if (!idec) throw Error(ErrorCode::kDecodeError, "webp: out of memory");
  const VP8StatusCode status = WebPIAppend(idec.get(), data.data(), data.size());
  if (status != VP8_STATUS_OK && status != VP8_STATUS_SUSPENDED) {
    throw Error(ErrorCode::kCorruptPayload, "webp: bitstream error " + std::to_string(status));
  }
  PartialDecode out;
  out.truncated = status == VP8_STATUS_SUSPENDED;
  int last_y = 0, w = 0, h = 0, stride = 0;
  const uint8_t* rgba = WebPIDecGetRGB(idec.get(), &last_y, &w, &h, &stride);
  if (!rgba) {
    // Headers not complete yet; nothing decoded.
    int iw = 0, ih = 0;
    if (WebPGetInfo(data.data(), data.size(), &iw, &ih)) out.raster = Raster(iw, ih);
    return out;
  }
  out.raster = Raster(w, h);
  for (int y = 0; y < h; ++y) {
    std::memcpy(out.raster.Row(y), rgba + static_cast<size_t>(y) * stride, static_cast<size_t>(w) * 4);
  }
  out.valid_rows = out.truncated ? last_y : h;
  return out;
}

Bytes EncodeWebp(const Raster& raster, int quality) {
  if (raster.empty()) throw Error(ErrorCode::kEncodeError, "webp: empty raster");
  uint8_t* buf = nullptr;
  const size_t n = WebPEncodeRGBA(raster.pixels.data(), raster.width, raster.height,
                                  raster.width * 4, static_cast<float>(quality), &buf);
  if (n == 0 || !buf) throw Error(ErrorCode::kEncodeError, "webp: encoder failed");
  Bytes out(buf, buf + n);
  WebPFree(buf);
  return out;
}

}  // namespace codec
}  // namespace bytelite
