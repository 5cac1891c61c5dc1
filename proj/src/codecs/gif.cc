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

// First-frame GIF decoder.  A partially received sub-block still carries
// usable LZW bits, so truncated streams decode as far as the data goes.

#include <algorithm>
#include <array>
#include <cstring>

#include "bytelite/codecs.h"
#include "bytelite/error.h"

namespace bytelite {
namespace codec {
namespace {

constexpr int kMaxCodes = 4096;

uint16_t Le16(ByteView d, size_t i) { return static_cast<uint16_t>(d[i] | d[i + 1] << 8); }

struct LzwOutput {
  std::vector<uint8_t> indices;
  bool saw_end = false;
};

// Decodes up to `limit` indices from the concatenated sub-block payload.
LzwOutput Lzw(const std::vector<uint8_t>& data, int min_code, size_t limit) {
  LzwOutput out;
  out.indices.reserve(limit);
  const int clear = 1 << min_code;
  const int eoi = clear + 1;
  std::array<uint16_t, kMaxCodes> prefix{};
  std::array<uint8_t, kMaxCodes> suffix{};
  std::array<uint16_t, kMaxCodes> length{};
  for (int i = 0; i < clear; ++i) {
    suffix[i] = static_cast<uint8_t>(i);
    length[i] = 1;
  }
  int next = clear + 2;
  int size = min_code + 1;
  int prev = -1;
  std::vector<uint8_t> stack(kMaxCodes);
  const size_t total_bits = data.size() * 8;
  size_t bitpos = 0;
  while (bitpos + size <= total_bits && out.indices.size() < limit) {
    int code = 0;
    for (int b = 0; b < size; ++b) {
      const size_t p = bitpos + b;
      code |= ((data[p >> 3] >> (p & 7)) & 1) << b;
    }
    bitpos += size;
    if (code == clear) {
      next = clear + 2;
      size = min_code + 1;
      prev = -1;
      continue;
    }
    if (code == eoi) {
      out.saw_end = true;
      break;
    }
    int emit;
    if (prev < 0) {
      if (code >= clear) break;  // corrupt: first code after clear must be literal
      emit = code;
    } else if (code < next) {
      emit = code;
      if (next < kMaxCodes) {
        int first = code;
        while (length[first] > 1) first = prefix[first];
        prefix[next] = static_cast<uint16_t>(prev);
        suffix[next] = suffix[first];
        length[next] = static_cast<uint16_t>(length[prev] + 1);
        ++next;
      }
    } else if (code == next && next < kMaxCodes) {
      int first = prev;
      while (length[first] > 1) first = prefix[first];
      prefix[next] = static_cast<uint16_t>(prev);
      suffix[next] = suffix[first];
      length[next] = static_cast<uint16_t>(length[prev] + 1);
      emit = next++;
    } else {
      break;  // corrupt code
    }
    const int n = length[emit];
    int c = emit;
    for (int i = n - 1; i >= 0; --i) {
      stack[i] = suffix[c];
      c = prefix[c];
    }
    for (int i = 0; i < n && out.indices.size() < limit; ++i) out.indices.push_back(stack[i]);
    prev = emit;
    if (next == (1 << size) && size < 12) ++size;
  }
  return out;
}

[[noreturn]] void Corrupt(const char* what) {
  throw Error(ErrorCode::kCorruptPayload, std::string("gif: ") + what);
}

}  // namespace

PartialDecode DecodeGif(ByteView d) {
  if (d.size() < 13 || (std::memcmp(d.data(), "GIF87a", 6) != 0 &&
                        std::memcmp(d.data(), "GIF89a", 6) != 0)) {
    Corrupt("bad signature");
  }
  int sw = Le16(d, 6), sh = Le16(d, 8);
  size_t i = 13;
  std::array<uint8_t, 768> global{};
  int global_n = 0;
  if (d[10] & 0x80) {
    global_n = 2 << (d[10] & 7);
    if (i + 3u * global_n > d.size()) Corrupt("truncated palette");
    std::memcpy(global.data(), d.data() + i, 3u * global_n);
    i += 3u * global_n;
  }
  int transparent = -1;
  for (;;) {
    if (i >= d.size()) Corrupt("no image descriptor");
    if (d[i] == 0x2C) break;
    if (d[i] != 0x21 || i + 1 >= d.size()) Corrupt("bad block");
    const uint8_t label = d[i + 1];
    i += 2;
    if (label == 0xF9 && i + 5 <= d.size() && d[i] >= 4) {
      if (d[i + 1] & 1) transparent = d[i + 4];
    }
    for (;;) {
      if (i >= d.size()) Corrupt("truncated extension");
      if (d[i] == 0) break;
      i += d[i] + 1u;
    }
    ++i;
  }
  if (i + 10 > d.size()) Corrupt("truncated image descriptor");
  const int left = Le16(d, i + 1), top = Le16(d, i + 3);
  const int iw = Le16(d, i + 5), ih = Le16(d, i + 7);
  const uint8_t flags = d[i + 9];
  const bool interlaced = flags & 0x40;
  i += 10;
  if (sw == 0 || sh == 0) {
    sw = iw;
    sh = ih;
  }
  std::array<uint8_t, 768> palette = global;
  int palette_n = global_n;
  if (flags & 0x80) {
    palette_n = 2 << (flags & 7);
    if (i + 3u * palette_n > d.size()) Corrupt("truncated local palette");
    std::memcpy(palette.data(), d.data() + i, 3u * palette_n);
    i += 3u * palette_n;
  }
  if (palette_n == 0) {
    palette_n = 256;
    for (int k = 0; k < 256; ++k) palette[k * 3] = palette[k * 3 + 1] = palette[k * 3 + 2] = static_cast<uint8_t>(k);
  }

  PartialDecode out;
  out.raster = Raster(sw, sh);
  if (iw == 0 || ih == 0) {
    out.valid_rows = sh;
    return out;
  }
  if (i >= d.size()) {
    out.truncated = true;
    return out;
  }
  const int min_code = d[i++];
  if (min_code < 2 || min_code > 11) Corrupt("bad LZW code size");
  std::vector<uint8_t> data;
  bool complete_blocks = false;
  while (i < d.size()) {
    const size_t n = d[i];
    if (n == 0) {
      complete_blocks = true;
      break;
    }
    if (i + 1 + n > d.size()) {
      data.insert(data.end(), d.begin() + static_cast<std::ptrdiff_t>(i + 1), d.end());
      break;
    }
    data.insert(data.end(), d.begin() + static_cast<std::ptrdiff_t>(i + 1),
                d.begin() + static_cast<std::ptrdiff_t>(i + 1 + n));
    i += 1 + n;
  }
  const size_t want = static_cast<size_t>(iw) * ih;
  const LzwOutput lzw = Lzw(data, min_code, want);
  const size_t got = lzw.indices.size();
  const int full_rows = static_cast<int>(got / iw);

  std::vector<int> row_of(ih);
  std::vector<int> rep(ih, 1);
  if (interlaced) {
    static constexpr int kStart[4] = {0, 4, 2, 1}, kStep[4] = {8, 8, 4, 2};
    int j = 0;
    for (int p = 0; p < 4; ++p) {
      for (int y = kStart[p]; y < ih; y += kStep[p]) {
        row_of[j] = y;
        rep[j++] = p == 0 ? 8 : kStep[p] / 2;
      }
    }
  } else {
    for (int j = 0; j < ih; ++j) row_of[j] = j;
  }
  for (size_t k = 0; k < got; ++k) {
    const int j = static_cast<int>(k / iw), x = static_cast<int>(k % iw);
    const int sx = left + x;
    if (sx >= sw) continue;
    const uint8_t idx = lzw.indices[k];
    uint8_t px[4] = {palette[idx * 3], palette[idx * 3 + 1], palette[idx * 3 + 2], 255};
    if (idx == transparent) px[0] = px[1] = px[2] = px[3] = 0;
    const int y0 = top + row_of[j];
    const int y1 = std::min({y0 + rep[j], top + ih, sh});
    for (int y = y0; y < y1; ++y) std::memcpy(out.raster.At(sx, y), px, 4);
  }
  out.truncated = got < want || !complete_blocks;
  if (got >= want) {
    out.valid_rows = sh;
  } else if (interlaced) {
    out.valid_rows = got > 0 ? sh : 0;
  } else {
    out.valid_rows = std::min(sh, top + full_rows);
    if (full_rows == 0) out.valid_rows = 0;
  }
  return out;
}

}  // namespace codec
}  // namespace bytelite
