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

// Uncompressed BMP and TIFF.  Row accounting is plain stride arithmetic;
// compressed variants decode nothing and report zero rows.

#include <algorithm>
#include <cstring>

#include "bytelite/codecs.h"
#include "bytelite/error.h"

namespace bytelite {
namespace codec {
namespace {

uint16_t Le16(ByteView d, size_t i) { return static_cast<uint16_t>(d[i] | d[i + 1] << 8); }
uint32_t Le32(ByteView d, size_t i) {
  return d[i] | d[i + 1] << 8 | d[i + 2] << 16 | static_cast<uint32_t>(d[i + 3]) << 24;
}
uint16_t Be16(ByteView d, size_t i) { return static_cast<uint16_t>(d[i] << 8 | d[i + 1]); }
uint32_t Be32(ByteView d, size_t i) {
  return static_cast<uint32_t>(d[i]) << 24 | d[i + 1] << 16 | d[i + 2] << 8 | d[i + 3];
}

int MaskShift(uint32_t mask) {
  if (!mask) return 0;
  int s = 0;
  while (!(mask & 1)) {
    mask >>= 1;
    ++s;
  }
  return s;
}

uint8_t MaskValue(uint32_t pixel, uint32_t mask) {
  if (!mask) return 255;
  const int s = MaskShift(mask);
  const uint32_t max = mask >> s;
  return static_cast<uint8_t>(((pixel & mask) >> s) * 255 / max);
}

[[noreturn]] void Corrupt(const char* what) {
  throw Error(ErrorCode::kCorruptPayload, what);
}

}  // namespace

PartialDecode DecodeBmp(ByteView d) {
  if (d.size() < 26 || d[0] != 'B' || d[1] != 'M') Corrupt("bmp: bad header");
  const uint32_t offset = Le32(d, 10);
  const uint32_t dib = Le32(d, 14);
  if (d.size() < 14 + dib) Corrupt("bmp: truncated DIB header");
  int width, height;
  int bpp;
  uint32_t compression = 0;
  if (dib == 12) {
    width = Le16(d, 18);
    height = static_cast<int16_t>(Le16(d, 20));
    bpp = Le16(d, 24);
  } else {
    width = static_cast<int32_t>(Le32(d, 18));
    height = static_cast<int32_t>(Le32(d, 22));
    bpp = Le16(d, 28);
    compression = Le32(d, 30);
  }
  const bool top_down = height < 0;
  height = std::abs(height);
  PartialDecode out;
  out.raster = Raster(width, height);
  uint32_t rm = 0x00FF0000, gm = 0x0000FF00, bm = 0x000000FF, am = 0;
  if (compression == 3 && dib >= 52) {
    rm = Le32(d, 54);
    gm = Le32(d, 58);
    bm = Le32(d, 62);
    if (dib >= 56) am = Le32(d, 66);
  } else if (compression == 3 && d.size() >= 14 + dib + 12) {
    rm = Le32(d, 14 + dib);
    gm = Le32(d, 18 + dib);
    bm = Le32(d, 22 + dib);
  } else if (bpp == 32 && dib >= 56) {
    am = Le32(d, 66);
  }
  if ((compression != 0 && compression != 3) || (bpp != 8 && bpp != 24 && bpp != 32)) {
    out.truncated = true;  // unsupported encoding: nothing decoded
    return out;
  }
  const size_t palette_at = 14 + dib;
  const size_t entry = dib == 12 ? 3 : 4;
  const size_t stride = (static_cast<size_t>(width) * bpp + 31) / 32 * 4;
  const size_t avail = d.size() > offset ? d.size() - offset : 0;
  const int stored = static_cast<int>(std::min<size_t>(height, avail / stride));
  for (int s = 0; s < stored; ++s) {
    const int y = top_down ? s : height - 1 - s;
    const uint8_t* in = d.data() + offset + static_cast<size_t>(s) * stride;
    uint8_t* o = out.raster.Row(y);
    for (int x = 0; x < width; ++x) {
      if (bpp == 8) {
        const size_t p = palette_at + in[x] * entry;
        if (p + 3 > d.size()) Corrupt("bmp: palette");
        o[x * 4] = d[p + 2];
        o[x * 4 + 1] = d[p + 1];
        o[x * 4 + 2] = d[p];
        o[x * 4 + 3] = 255;
      } else if (bpp == 24) {
        o[x * 4] = in[x * 3 + 2];
        o[x * 4 + 1] = in[x * 3 + 1];
        o[x * 4 + 2] = in[x * 3];
        o[x * 4 + 3] = 255;
      } else {
        const uint32_t px = Le32(ByteView(in, stride), static_cast<size_t>(x) * 4);
        o[x * 4] = MaskValue(px, rm);
        o[x * 4 + 1] = MaskValue(px, gm);
        o[x * 4 + 2] = MaskValue(px, bm);
        o[x * 4 + 3] = MaskValue(px, am);
      }
    }
  }
  out.truncated = stored < height;
  out.valid_rows = top_down ? stored : (stored == height ? height : 0);
  return out;
}

PartialDecode DecodeTiff(ByteView d) {
  if (d.size() < 8) Corrupt("tiff: bad header");
  const bool le = d[0] == 'I';
  auto u16 = [&](size_t i) { return le ? Le16(d, i) : Be16(d, i); };
  auto u32 = [&](size_t i) { return le ? Le32(d, i) : Be32(d, i); };
  const uint32_t ifd = u32(4);
  if (d.size() < ifd + 2u) Corrupt("tiff: truncated IFD");
  const uint16_t count = u16(ifd);
  if (d.size() < ifd + 2u + 12u * count) Corrupt("tiff: truncated IFD");
  int width = 0, height = 0, spp = 1, bits = 1, compression = 1, planar = 1;
  int64_t rows_per_strip = -1;
  std::vector<uint32_t> offsets, counts;
  auto values = [&](size_t e) {
    const uint16_t type = u16(e + 2);
    const uint32_t n = u32(e + 4);
    const size_t size = type == 3 ? 2 : 4;
    const size_t at = n * size <= 4 ? e + 8 : u32(e + 8);
    std::vector<uint32_t> v;
    for (uint32_t k = 0; k < n; ++k) {
      const size_t p = at + k * size;
      if (p + size > d.size()) break;
      v.push_back(size == 2 ? u16(p) : u32(p));
    }
    return v;
  };
  for (uint16_t k = 0; k < count; ++k) {
    const size_t e = ifd + 2u + 12u * k;
    const uint16_t tag = u16(e);
    const auto v = values(e);
    if (v.empty()) continue;
    switch (tag) {
      case 256: width = static_cast<int>(v[0]); break;
      case 257: height = static_cast<int>(v[0]); break;
      case 258: bits = static_cast<int>(v[0]); break;
      case 259: compression = static_cast<int>(v[0]); break;
      case 273: offsets = v; break;
      case 277: spp = static_cast<int>(v[0]); break;
      case 278: rows_per_strip = v[0]; break;
      case 279: counts = v; break;
      case 284: planar = static_cast<int>(v[0]); break;
      default: break;
    }
  }
  if (width <= 0 || height <= 0) Corrupt("tiff: dimensions");
  PartialDecode out;
  out.raster = Raster(width, height);
  out.truncated = true;
  if (compression != 1 || bits != 8 || planar != 1 || (spp != 1 && spp != 3 && spp != 4) ||
      offsets.empty()) {
    return out;
  }
  if (rows_per_strip <= 0 || rows_per_strip > height) rows_per_strip = height;
  const size_t stride = static_cast<size_t>(width) * spp;
  int y = 0;
  for (size_t s = 0; s < offsets.size() && y < height; ++s) {
    const int rows = static_cast<int>(std::min<int64_t>(rows_per_strip, height - y));
    const size_t need = stride * rows;
    if (offsets[s] + need > d.size()) {
      // Trailing partial strip: count only whole rows.
      const size_t have = d.size() > offsets[s] ? d.size() - offsets[s] : 0;
      const int partial = static_cast<int>(have / stride);
      for (int r = 0; r < partial; ++r) {
        const uint8_t* in = d.data() + offsets[s] + r * stride;
        uint8_t* o = out.raster.Row(y + r);
        for (int x = 0; x < width; ++x) {
          const uint8_t* p = in + static_cast<size_t>(x) * spp;
          o[x * 4] = p[0];
          o[x * 4 + 1] = spp >= 3 ? p[1] : p[0];
          o[x * 4 + 2] = spp >= 3 ? p[2] : p[0];
          o[x * 4 + 3] = spp == 4 ? p[3] : 255;
        }
      }
      y += partial;
      break;
    }
    for (int r = 0; r < rows; ++r) {
      const uint8_t* in = d.data() + offsets[s] + r * stride;
      uint8_t* o = out.raster.Row(y + r);
      for (int x = 0; x < width; ++x) {
        const uint8_t* p = in + static_cast<size_t>(x) * spp;
        o[x * 4] = p[0];
        o[x * 4 + 1] = spp >= 3 ? p[1] : p[0];
        o[x * 4 + 2] = spp >= 3 ? p[2] : p[0];
        o[x * 4 + 3] = spp == 4 ? p[3] : 255;
      }
    }
    y += rows;
  }
  (void)counts;
  out.valid_rows = y;
  out.truncated = y < height;
  return out;
}

}  // namespace codec

PartialDecode DecodePartial(const ImageMeta& meta, ByteView payload) {
  PartialDecode out;
  switch (meta.format) {
    case ImageFormat::kJpeg: out = codec::DecodeJpeg(payload); break;
    case ImageFormat::kPng: out = codec::DecodePng(payload); break;
    case ImageFormat::kGif: out = codec::DecodeGif(payload); break;
    case ImageFormat::kWebp: out = codec::DecodeWebp(payload); break;
    case ImageFormat::kBmp: out = codec::DecodeBmp(payload); break;
    case ImageFormat::kTiff: out = codec::DecodeTiff(payload); break;
    case ImageFormat::kUnknown:
      throw Error(ErrorCode::kUnsupportedFormat, "no decoder for unknown format");
  }
  if (out.raster.empty() && meta.width > 0 && meta.height > 0) {
    out.raster = Raster(meta.width, meta.height);
    out.valid_rows = 0;
    out.truncated = true;
  }
  return out;
}

Raster Decode(ByteView data) {
  try {
    const ImageMeta meta = ParseMetaOrThrow(data);
    PartialDecode d = DecodePartial(meta, data);
    if (d.truncated || d.valid_rows < d.raster.height) {
      throw Error(ErrorCode::kDecodeError, std::string(FormatName(meta.format)) +
                                               ": image data is incomplete");
    }
    return std::move(d.raster);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDecodeError) throw;
    throw Error(ErrorCode::kDecodeError, e.what());
  }
}

}  // namespace bytelite
