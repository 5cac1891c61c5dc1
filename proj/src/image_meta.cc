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

#include "bytelite/image_meta.h"

#include <algorithm>
#include <array>
#include <cstring>

#include "bytelite/codecs.h"
#include "bytelite/error.h"

namespace bytelite {
namespace {

constexpr uint8_t kPngSig[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

uint16_t Be16(ByteView d, size_t i) { return static_cast<uint16_t>(d[i] << 8 | d[i + 1]); }
uint32_t Be32(ByteView d, size_t i) {
  return static_cast<uint32_t>(d[i]) << 24 | d[i + 1] << 16 | d[i + 2] << 8 | d[i + 3];
}
uint16_t Le16(ByteView d, size_t i) { return static_cast<uint16_t>(d[i] | d[i + 1] << 8); }
uint32_t Le32(ByteView d, size_t i) {
  return d[i] | d[i + 1] << 8 | d[i + 2] << 16 | static_cast<uint32_t>(d[i + 3]) << 24;
}

[[noreturn]] void Corrupt(const char* what) {
  throw Error(ErrorCode::kCorruptHeader, std::string("corrupt header: ") + what);
}

bool StartsWith(ByteView d, const void* sig, size_t n) {
  return d.size() >= n && std::memcmp(d.data(), sig, n) == 0;
}

// Minimum total size when `d` is a proper prefix of a known signature,
// 0 otherwise.
size_t SignaturePrefixMinimum(ByteView d) {
  struct Sig {
    std::string_view magic;
    size_t minimum;
  };
  static const std::array<Sig, 8> kSigs = {{
      {std::string_view("\xFF\xD8\xFF", 3), 12},
      {std::string_view("\x89PNG\r\n\x1A\n", 8), 29},
      {"GIF87a", 13},
      {"GIF89a", 13},
      {"RIFF", 16},
      {"BM", 18},
      {std::string_view("II*\0", 4), 8},
      {std::string_view("MM\0*", 4), 8},
  }};
  for (const auto& sig : kSigs) {
    if (d.size() < sig.magic.size() && std::memcmp(d.data(), sig.magic.data(), d.size()) == 0) {
      return sig.minimum;
    }
  }
  // A RIFF container whose form type has not arrived yet.
  if (d.size() < 12 && StartsWith(d, "RIFF", 4)) return 16;
  return 0;
}

MetaResult Need(ByteView d, size_t want) { return NeedMoreBytes{static_cast<int64_t>(want - d.size())}; }

bool IsSof(uint8_t m) { return m >= 0xC0 && m <= 0xCF && m != 0xC4 && m != 0xC8 && m != 0xCC; }

MetaResult ParseJpeg(ByteView d) {
  size_t i = 2;
  for (;;) {
    if (i >= d.size()) return Need(d, i + 1);
    if (d[i] != 0xFF) Corrupt("jpeg marker expected");
    while (i < d.size() && d[i] == 0xFF) ++i;
    if (i >= d.size()) return Need(d, i + 1);
    const uint8_t m = d[i++];
    if (m == 0x01 || (m >= 0xD0 && m <= 0xD7)) continue;
    if (m == 0xD8 || m == 0xD9 || m == 0xDA) Corrupt("jpeg scan or EOI before frame header");
    if (i + 2 > d.size()) return Need(d, i + 2);
    const size_t len = Be16(d, i);
    if (len < 2) Corrupt("jpeg segment length");
    if (IsSof(m)) {
      if (len < 8) Corrupt("jpeg SOF length");
      if (i + len > d.size()) return Need(d, i + len);
      ImageMeta meta;
      meta.format = ImageFormat::kJpeg;
      meta.height = Be16(d, i + 3);
      meta.width = Be16(d, i + 5);
      if (meta.width == 0 || meta.height == 0) Corrupt("jpeg zero dimension");
      meta.progressive = m == 0xC2 || m == 0xC6 || m == 0xCA || m == 0xCE;
      meta.header_complete = true;
      meta.header_bytes = static_cast<int64_t>(i + len);
      return meta;
    }
    i += len;
  }
}

MetaResult ParsePng(ByteView d) {
  if (d.size() < 29) return Need(d, 29);
  if (Be32(d, 8) != 13 || std::memcmp(d.data() + 12, "IHDR", 4) != 0) Corrupt("png IHDR");
  ImageMeta meta;
  meta.format = ImageFormat::kPng;
  const uint32_t w = Be32(d, 16), h = Be32(d, 20);
  if (w == 0 || h == 0 || w > 0x7FFFFFFF || h > 0x7FFFFFFF) Corrupt("png dimensions");
  meta.width = static_cast<int>(w);
  meta.height = static_cast<int>(h);
  if (d[28] > 1) Corrupt("png interlace method");
  meta.progressive = d[28] == 1;
  meta.header_complete = true;
  meta.header_bytes = 29;
  return meta;
}

MetaResult ParseGif(ByteView d) {
  if (d.size() < 13) return Need(d, 13);
  ImageMeta meta;
  meta.format = ImageFormat::kGif;
  meta.width = Le16(d, 6);
  meta.height = Le16(d, 8);
  size_t i = 13;
  if (d[10] & 0x80) i += 3 * (2u << (d[10] & 7));
  for (;;) {
    if (i >= d.size()) return Need(d, i + 1);
    const uint8_t b = d[i];
    if (b == 0x2C) {
      if (i + 10 > d.size()) return Need(d, i + 10);
      if (meta.width == 0 || meta.height == 0) {
        // Some encoders leave the screen size zero; fall back to the frame.
        meta.width = Le16(d, i + 5);
        meta.height = Le16(d, i + 7);
      }
      if (meta.width == 0 || meta.height == 0) Corrupt("gif zero dimension");
      meta.progressive = (d[i + 9] & 0x40) != 0;
      meta.header_complete = true;
      meta.header_bytes = static_cast<int64_t>(i + 10);
      return meta;
    }
    if (b != 0x21) Corrupt("gif block type");
    i += 2;
    for (;;) {
      if (i >= d.size()) return Need(d, i + 1);
      if (d[i] == 0) break;
      i += d[i] + 1u;
    }
    ++i;
  }
}

MetaResult ParseWebp(ByteView d) {
  if (d.size() < 16) return Need(d, 16);
  if (std::memcmp(d.data() + 8, "WEBP", 4) != 0) Corrupt("webp RIFF form type");
  ImageMeta meta;
  meta.format = ImageFormat::kWebp;
  meta.header_complete = true;
  if (std::memcmp(d.data() + 12, "VP8 ", 4) == 0) {
    if (d.size() < 30) return Need(d, 30);
    if (d[23] != 0x9D || d[24] != 0x01 || d[25] != 0x2A) Corrupt("vp8 start code");
    meta.width = Le16(d, 26) & 0x3FFF;
    meta.height = Le16(d, 28) & 0x3FFF;
    meta.header_bytes = 30;
  } else if (std::memcmp(d.data() + 12, "VP8L", 4) == 0) {
    if (d.size() < 25) return Need(d, 25);
    if (d[20] != 0x2F) Corrupt("vp8l signature");
    const uint32_t bits = Le32(d, 21);
    meta.width = static_cast<int>((bits & 0x3FFF) + 1);
    meta.height = static_cast<int>(((bits >> 14) & 0x3FFF) + 1);
    meta.header_bytes = 25;
  } else if (std::memcmp(d.data() + 12, "VP8X", 4) == 0) {
    if (d.size() < 30) return Need(d, 30);
    meta.width = static_cast<int>((d[24] | d[25] << 8 | d[26] << 16) + 1);
    meta.height = static_cast<int>((d[27] | d[28] << 8 | d[29] << 16) + 1);
    meta.header_bytes = 30;
  } else {
    Corrupt("webp chunk");
  }
  if (meta.width == 0 || meta.height == 0) Corrupt("webp zero dimension");
  return meta;
}

MetaResult ParseBmp(ByteView d) {
  if (d.size() < 18) return Need(d, 18);
  const uint32_t dib = Le32(d, 14);
  if (dib < 12 || dib > 1024) Corrupt("bmp DIB header size");
  if (d.size() < 14 + dib) return Need(d, 14 + dib);
  ImageMeta meta;
  meta.format = ImageFormat::kBmp;
  if (dib == 12) {
    meta.width = Le16(d, 18);
    meta.height = Le16(d, 20);
  } else {
    const int32_t w = static_cast<int32_t>(Le32(d, 18));
    const int32_t h = static_cast<int32_t>(Le32(d, 22));
    if (w <= 0 || h == 0 || h == INT32_MIN) Corrupt("bmp dimensions");
    meta.width = w;
    meta.height = h < 0 ? -h : h;
  }
  if (meta.width == 0 || meta.height == 0) Corrupt("bmp zero dimension");
  meta.header_complete = true;
  meta.header_bytes = 14 + dib;
  return meta;
}

MetaResult ParseTiff(ByteView d) {
  if (d.size() < 8) return Need(d, 8);
  const bool le = d[0] == 'I';
  auto u16 = [&](size_t i) { return le ? Le16(d, i) : Be16(d, i); };
  auto u32 = [&](size_t i) { return le ? Le32(d, i) : Be32(d, i); };
  const uint32_t ifd = u32(4);
  if (ifd < 8) Corrupt("tiff IFD offset");
  if (d.size() < ifd + 2u) return Need(d, ifd + 2u);
  const uint16_t count = u16(ifd);
  const size_t end = ifd + 2u + 12u * count;
  if (d.size() < end) return Need(d, end);
  ImageMeta meta;
  meta.format = ImageFormat::kTiff;
  for (uint16_t k = 0; k < count; ++k) {
    const size_t e = ifd + 2u + 12u * k;
    const uint16_t tag = u16(e), type = u16(e + 2);
    const uint32_t value = type == 3 ? u16(e + 8) : u32(e + 8);
    if (tag == 256) meta.width = static_cast<int>(value);
    if (tag == 257) meta.height = static_cast<int>(value);
  }
  if (meta.width <= 0 || meta.height <= 0) Corrupt("tiff dimensions");
  meta.header_complete = true;
  meta.header_bytes = static_cast<int64_t>(end);
  return meta;
}

}  // namespace

std::string_view FormatName(ImageFormat format) {
  switch (format) {
    case ImageFormat::kJpeg: return "jpeg";
    case ImageFormat::kPng: return "png";
    case ImageFormat::kGif: return "gif";
    case ImageFormat::kWebp: return "webp";
    case ImageFormat::kBmp: return "bmp";
    case ImageFormat::kTiff: return "tiff";
    case ImageFormat::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<ImageFormat> FormatFromName(std::string_view name) {
  if (name == "jpeg" || name == "jpg") return ImageFormat::kJpeg;
  if (name == "png") return ImageFormat::kPng;
  if (name == "gif") return ImageFormat::kGif;
  if (name == "webp") return ImageFormat::kWebp;
  if (name == "bmp") return ImageFormat::kBmp;
  if (name == "tiff" || name == "tif") return ImageFormat::kTiff;
  return std::nullopt;
}

std::string_view MimeType(ImageFormat format) {
  switch (format) {
    case ImageFormat::kJpeg: return "image/jpeg";
    case ImageFormat::kPng: return "image/png";
    case ImageFormat::kGif: return "image/gif";
    case ImageFormat::kWebp: return "image/webp";
    case ImageFormat::kBmp: return "image/bmp";
    case ImageFormat::kTiff: return "image/tiff";
    case ImageFormat::kUnknown: break;
  }
  return "application/octet-stream";
}

ImageFormat SniffFormat(ByteView d) {
  if (StartsWith(d, "\xFF\xD8\xFF", 3)) return ImageFormat::kJpeg;
  if (StartsWith(d, kPngSig, 8)) return ImageFormat::kPng;
  if (StartsWith(d, "GIF87a", 6) || StartsWith(d, "GIF89a", 6)) return ImageFormat::kGif;
  if (d.size() >= 12 && StartsWith(d, "RIFF", 4) && std::memcmp(d.data() + 8, "WEBP", 4) == 0) {
    return ImageFormat::kWebp;
  }
  if (StartsWith(d, "BM", 2)) return ImageFormat::kBmp;
  if (StartsWith(d, "II*\0", 4) || StartsWith(d, "MM\0*", 4)) return ImageFormat::kTiff;
  return ImageFormat::kUnknown;
}

MetaResult ParseMeta(ByteView d) {
  switch (SniffFormat(d)) {
    case ImageFormat::kJpeg: return ParseJpeg(d);
    case ImageFormat::kPng: return ParsePng(d);
    case ImageFormat::kGif: return ParseGif(d);
    case ImageFormat::kWebp: return ParseWebp(d);
    case ImageFormat::kBmp: return ParseBmp(d);
    case ImageFormat::kTiff: return ParseTiff(d);
    case ImageFormat::kUnknown: break;
  }
  if (d.empty()) return NeedMoreBytes{1};
  if (const size_t minimum = SignaturePrefixMinimum(d)) return Need(d, minimum);
  throw Error(ErrorCode::kUnsupportedFormat, "unrecognised image signature");
}

ImageMeta ParseMetaOrThrow(ByteView data) {
  auto r = ParseMeta(data);
  if (auto* m = std::get_if<ImageMeta>(&r)) return *m;
  throw Error(ErrorCode::kCorruptHeader, "image header is truncated");
}

int CompleteRows(const ImageMeta& meta, ByteView payload) {
  if (meta.progressive) throw Error(ErrorCode::kNotBaseline, "image is progressive");
  if (static_cast<int64_t>(payload.size()) < meta.header_bytes) {
    throw Error(ErrorCode::kCorruptPayload, "payload shorter than the image header");
  }
  const PartialDecode d = DecodePartial(meta, payload);
  return std::clamp(d.valid_rows, 0, meta.height);
}

}  // namespace bytelite
