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

// PNG via the libpng progressive reader.  Interlace handling is left to us:
// each Adam7 pass row is painted as blocks so that a partial stream still
// covers the full frame.

#include <algorithm>
#include <csetjmp>
#include <cstring>
#include <memory>
#include <string>

#include <png.h>

#include "bytelite/codecs.h"
#include "bytelite/error.h"

namespace bytelite {
namespace codec {
namespace {

struct Adam7Pass {
  int x0, y0, dx, dy, bw, bh;
};
constexpr Adam7Pass kPasses[7] = {
    {0, 0, 8, 8, 8, 8}, {4, 0, 8, 8, 4, 8}, {0, 4, 4, 8, 4, 4}, {2, 0, 4, 4, 2, 4},
    {0, 2, 2, 4, 2, 2}, {1, 0, 2, 2, 1, 2}, {0, 1, 1, 2, 1, 1},
};

struct ReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ByteView data;
  PartialDecode out;
  bool interlaced = false;
  bool have_info = false;
  bool have_end = false;
  int rows_done = 0;
  std::string message;
};

void OnError(png_structp png, png_const_charp msg) {
  auto* st = static_cast<ReadState*>(png_get_error_ptr(png));
  if (st) st->message = msg ? msg : "png error";
  png_longjmp(png, 1);
}

void OnWarning(png_structp, png_const_charp) {}

void OnInfo(png_structp png, png_infop info) {
  auto* st = static_cast<ReadState*>(png_get_progressive_ptr(png));
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  const bool trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  if (trns) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (!(color & PNG_COLOR_MASK_ALPHA) && !trns) png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != static_cast<size_t>(w) * 4) {
    png_error(png, "unexpected row layout after transforms");
  }
  st->interlaced = png_get_interlace_type(png, info) == PNG_INTERLACE_ADAM7;
  st->out.raster = Raster(static_cast<int>(w), static_cast<int>(h));
  st->have_info = true;
}

void OnRow(png_structp png, png_bytep row, png_uint_32 row_num, int pass) {
  auto* st = static_cast<ReadState*>(png_get_progressive_ptr(png));
  if (!row) return;
  Raster& r = st->out.raster;
  if (!st->interlaced) {
    std::memcpy(r.Row(static_cast<int>(row_num)), row, static_cast<size_t>(r.width) * 4);
    st->rows_done = static_cast<int>(row_num) + 1;
    return;
  }
  const Adam7Pass& p = kPasses[pass];
  const int y = p.y0 + static_cast<int>(row_num) * p.dy;
  if (y >= r.height) return;
  const int y_end = std::min(y + p.bh, r.height);
  int i = 0;
  for (int x = p.x0; x < r.width; x += p.dx, ++i) {
    const int x_end = std::min(x + p.bw, r.width);
    for (int yy = y; yy < y_end; ++yy) {
      uint8_t* o = r.At(0, yy);
      for (int xx = x; xx < x_end; ++xx) std::memcpy(o + xx * 4, row + i * 4, 4);
    }
  }
  if (pass == 0) st->rows_done = r.height;
}

void OnEnd(png_structp png, png_infop) {
  static_cast<ReadState*>(png_get_progressive_ptr(png))->have_end = true;
}

bool RunRead(ReadState* st) {
  if (setjmp(png_jmpbuf(st->png))) return false;
  png_set_progressive_read_fn(st->png, st, OnInfo, OnRow, OnEnd);
  png_process_data(st->png, st->info, const_cast<png_bytep>(st->data.data()), st->data.size());
  return true;
}

struct WriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  const Raster* raster = nullptr;
  Bytes out;
  std::vector<uint8_t> row;
  std::string message;
};

void OnWriteError(png_structp png, png_const_charp msg) {
  auto* st = static_cast<WriteState*>(png_get_error_ptr(png));
  if (st) st->message = msg ? msg : "png error";
  png_longjmp(png, 1);
}

void OnWrite(png_structp png, png_bytep data, png_size_t n) {
  auto* st = static_cast<WriteState*>(png_get_io_ptr(png));
  st->out.insert(st->out.end(), data, data + n);
}

void OnFlush(png_structp) {}

bool RunWrite(WriteState* st) {
  if (setjmp(png_jmpbuf(st->png))) return false;
  const Raster& r = *st->raster;
  const bool alpha = r.HasAlpha();
  png_set_write_fn(st->png, st, OnWrite, OnFlush);
  png_set_IHDR(st->png, st->info, static_cast<png_uint_32>(r.width),
               static_cast<png_uint_32>(r.height), 8,
               alpha ? PNG_COLOR_TYPE_RGB_ALPHA : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(st->png, st->info);
  for (int y = 0; y < r.height; ++y) {
    const uint8_t* in = r.Row(y);
    if (alpha) {
      std::memcpy(st->row.data(), in, static_cast<size_t>(r.width) * 4);
    } else {
      for (int x = 0; x < r.width; ++x) std::memcpy(&st->row[x * 3], in + x * 4, 3);
    }
    png_write_row(st->png, st->row.data());
  }
  png_write_end(st->png, nullptr);
  return true;
}

}  // namespace

PartialDecode DecodePng(ByteView data) {
  auto st = std::make_unique<ReadState>();
  st->data = data;
  st->png = png_create_read_struct(PNG_LIBPNG_VER_STRING, st.get(), OnError, OnWarning);
  if (!st->png) throw Error(ErrorCode::kDecodeError, "png: out of memory");
  st->info = png_create_info_struct(st->png);
  const bool ok = st->info && RunRead(st.get());
  png_destroy_read_struct(&st->png, &st->info, nullptr);
  // Truncation never raises in the progressive reader, so any error means
  // damaged data (bad CRC, bad zlib stream) and decoded rows are suspect.
  if (!ok) {
    throw Error(ErrorCode::kCorruptPayload, "png: " + st->message);
  }
  PartialDecode out = std::move(st->out);
  out.valid_rows = st->rows_done;
  out.truncated = !st->have_end;
  return out;
}

Bytes EncodePng(const Raster& raster) {
  if (raster.empty()) throw Error(ErrorCode::kEncodeError, "png: empty raster");
  auto st = std::make_unique<WriteState>();
  st->raster = &raster;
  st->row.resize(static_cast<size_t>(raster.width) * 4);
  st->png = png_create_write_struct(PNG_LIBPNG_VER_STRING, st.get(), OnWriteError, OnWarning);
  if (!st->png) throw Error(ErrorCode::kEncodeError, "png: out of memory");
  st->info = png_create_info_struct(st->png);
  const bool ok = st->info && RunWrite(st.get());
  png_destroy_write_struct(&st->png, &st->info);
  if (!ok) throw Error(ErrorCode::kEncodeError, "png: " + st->message);
  return std::move(st->out);
}

}  // namespace codec
}  // namespace bytelite
