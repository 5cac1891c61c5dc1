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

// Format codecs.  Decoders accept truncated input and report how much of the
// frame is backed by real data.

#ifndef BYTELITE_CODECS_H_
#define BYTELITE_CODECS_H_

#include "bytelite/bytes.h"
#include "bytelite/image_meta.h"
#include "bytelite/raster.h"

namespace bytelite {

struct PartialDecode {
  Raster raster;
  // Baseline: topmost rows backed by real data.  Progressive: height once the
  // first pass/scan has contributed anything.
  int valid_rows = 0;
  // Data ended before the encoded frame did.
  bool truncated = false;
};

// Throws Error(kCorruptPayload) when nothing can be decoded and
// Error(kUnsupportedFormat) for formats without a decoder.
PartialDecode DecodePartial(const ImageMeta& meta, ByteView payload);

// Complete decode; throws Error(kDecodeError) on any truncation or damage.
Raster Decode(ByteView data);

namespace codec {

PartialDecode DecodeJpeg(ByteView data);
PartialDecode DecodePng(ByteView data);
PartialDecode DecodeGif(ByteView data);
PartialDecode DecodeWebp(ByteView data);
PartialDecode DecodeBmp(ByteView data);
PartialDecode DecodeTiff(ByteView data);

// Alpha is discarded (composited over white) for JPEG.
Bytes EncodeJpeg(const Raster& raster, int quality, bool progressive = false);
// Writes RGB when the raster is fully opaque, RGBA otherwise.
Bytes EncodePng(const Raster& raster);
Bytes EncodeWebp(const Raster& raster, int quality);

}  // namespace codec
}  // namespace bytelite

#endif  // BYTELITE_CODECS_H_
