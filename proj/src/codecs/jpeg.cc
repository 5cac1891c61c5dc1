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

// JPEG via libjpeg(-turbo).  Truncated streams are completed with a
// synthetic EOI marker; the first "hit marker" warning from the entropy
// decoder pins the iMCU row at which real data ran out.

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>

#include <jpeglib.h>
#include <jerror.h>

#include "bytelite/codecs.h"
#include "bytelite/error.h"

namespace bytelite {
namespace codec {
namespace {

const JOCTET kFakeEoi[2] = {0xFF, JPEG_EOI};

struct Source {
  jpeg_source_mgr pub;
  bool eof_inserted = false;
};

void InitSource(j_decompress_ptr) {}
void TermSource(j_decompress_ptr) {}

boolean FillInput(j_decompress_ptr cinfo) {
  auto* src = reinterpret_cast<Source*>(cinfo->src);
  src->eof_inserted = true;
  src->pub.next_input_byte = kFakeEoi;
  src->pub.bytes_in_buffer = 2;
  return TRUE;
}

void SkipInput(j_decompress_ptr cinfo, long n) {
  auto* src = reinterpret_cast<Source*>(cinfo->src);
  while (n > static_cast<long>(src->pub.bytes_in_buffer)) {
    n -= static_cast<long>(src->pub.bytes_in_buffer);
    FillInput(cinfo);
  }
  src->pub.next_input_byte += n;
  src->pub.bytes_in_buffer -= static_cast<size_t>(n);
}

struct ErrorMgr {
  jpeg_error_mgr pub;
  jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
  int hit_row = -1;   // input iMCU row at the first premature marker
  int hit_scan = 0;   // scan number at that point
  bool extraneous = false;  // bytes skipped while looking for a marker
};

void ErrorExit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<ErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  longjmp(err->jump, 1);
}

void EmitMessage(j_common_ptr cinfo, int level) {
  if (level >= 0 || cinfo->is_decompressor == FALSE) return;
  auto* err = reinterpret_cast<ErrorMgr*>(cinfo->err);
  if (cinfo->err->msg_code == JWRN_HIT_MARKER && err->hit_row < 0) {
    auto* d = reinterpret_cast<j_decompress_ptr>(cinfo);
    err->hit_row = static_cast<int>(d->input_iMCU_row);
    err->hit_scan = d->input_scan_number;
  }
  if (cinfo->err->msg_code == JWRN_EXTRANEOUS_DATA) err->extraneous = true;
  cinfo->err->num_warnings++;
}

struct DecodeState {
  ByteView data;
  Source src;
  ErrorMgr err;
  jpeg_decompress_struct cinfo;
  PartialDecode out;
  std::vector<uint8_t> row;
  bool cmyk = false;
  bool started = false;
  bool progressive = false;
  int mcu_height = 8;
  JDIMENSION scanlines = 0;
};

// All libjpeg calls live here so that longjmp never skips a C++ destructor.
bool RunDecode(DecodeState* st) {
  if (setjmp(st->err.jump)) return false;
  jpeg_create_decompress(&st->cinfo);
  st->cinfo.src = &st->src.pub;
  jpeg_read_header(&st->cinfo, TRUE);
  st->progressive = jpeg_has_multiple_scans(&st->cinfo);
  if (st->cinfo.jpeg_color_space == JCS_CMYK || st->cinfo.jpeg_color_space == JCS_YCCK) {
    st->cmyk = true;
    st->cinfo.out_color_space = JCS_CMYK;
  } else {
    st->cinfo.out_color_space = JCS_EXT_RGBA;
  }
  jpeg_start_decompress(&st->cinfo);
  st->started = true;
  st->mcu_height = st->cinfo.max_v_samp_factor * DCTSIZE;
  if (st->cinfo.comps_in_scan == 1 && !st->progressive) st->mcu_height = DCTSIZE;
  st->out.raster = Raster(static_cast<int>(st->cinfo.output_width),
                          static_cast<int>(st->cinfo.output_height));
  while (st->cinfo.output_scanline < st->cinfo.output_height) {
    JSAMPROW rowptr;
    const JDIMENSION y = st->cinfo.output_scanline;
    if (st->cmyk) {
      rowptr = st->row.data();
    } else {
      rowptr = st->out.raster.Row(static_cast<int>(y));
    }
    jpeg_read_scanlines(&st->cinfo, &rowptr, 1);
    if (st->cmyk) {
      uint8_t* o = st->out.raster.Row(static_cast<int>(y));
      for (JDIMENSION x = 0; x < st->cinfo.output_width; ++x) {
        // Adobe writes inverted CMYK.
        const int c = st->row[x * 4], m = st->row[x * 4 + 1], ye = st->row[x * 4 + 2],
                  k = st->row[x * 4 + 3];
        o[x * 4] = static_cast<uint8_t>(c * k / 255);
        o[x * 4 + 1] = static_cast<uint8_t>(m * k / 255);
        o[x * 4 + 2] = static_cast<uint8_t>(ye * k / 255);
        o[x * 4 + 3] = 255;
      }
    }
    st->scanlines = st->cinfo.output_scanline;
  }
  jpeg_finish_decompress(&st->cinfo);
  return true;
}

void MemDest(j_compress_ptr cinfo, unsigned char** buf, unsigned long* size) {
  jpeg_mem_dest(cinfo, buf, size);
}

struct EncodeState {
  const Raster* raster;
  int quality;
  bool progressive;
  ErrorMgr err;
  jpeg_compress_struct cinfo;
  std::vector<uint8_t> row;
  unsigned char* buf = nullptr;
  unsigned long size = 0;
};

bool RunEncode(EncodeState* st) {
  if (setjmp(st->err.jump)) return false;
  jpeg_create_compress(&st->cinfo);
  MemDest(&st->cinfo, &st->buf, &st->size);
  st->cinfo.image_width = static_cast<JDIMENSION>(st->raster->width);
  st->cinfo.image_height = static_cast<JDIMENSION>(st->raster->height);
  st->cinfo.input_components = 3;
  st->cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&st->cinfo);
  jpeg_set_quality(&st->cinfo, st->quality, TRUE);
  if (st->progressive) jpeg_simple_progression(&st->cinfo);
  jpeg_start_compress(&st->cinfo, TRUE);
  while (st->cinfo.next_scanline < st->cinfo.image_height) {
    const uint8_t* in = st->raster->Row(static_cast<int>(st->cinfo.next_scanline));
    for (int x = 0; x < st->raster->width; ++x) {
      const int a = in[x * 4 + 3];
      for (int c = 0; c < 3; ++c) {
        st->row[x * 3 + c] = static_cast<uint8_t>((in[x * 4 + c] * a + 255 * (255 - a) + 127) / 255);
      }
    }
    JSAMPROW rowptr = st->row.data();
    jpeg_write_scanlines(&st->cinfo, &rowptr, 1);
  }
  jpeg_finish_compress(&st->cinfo);
  return true;
}

}  // namespace

PartialDecode DecodeJpeg(ByteView data) {
  auto st = std::make_unique<DecodeState>();
  st->data = data;
  std::memset(&st->cinfo, 0, sizeof(st->cinfo));
  st->cinfo.err = jpeg_std_error(&st->err.pub);
  st->err.pub.error_exit = ErrorExit;
  st->err.pub.emit_message = EmitMessage;
  st->src.pub.init_source = InitSource;
  st->src.pub.fill_input_buffer = FillInput;
  st->src.pub.skip_input_data = SkipInput;
  st->src.pub.resync_to_restart = jpeg_resync_to_restart;
  st->src.pub.term_source = TermSource;
  st->src.pub.next_input_byte = data.data();
  st->src.pub.bytes_in_buffer = data.size();
  st->row.resize(65536 * 4);

  const bool ok = RunDecode(st.get());
  jpeg_destroy_decompress(&st->cinfo);
  PartialDecode out = std::move(st->out);
  const int height = out.raster.height;
  if (!ok) {
    if (!st->src.eof_inserted) {
      throw Error(ErrorCode::kCorruptPayload, std::string("jpeg: ") + st->err.message);
    }
    // Ran out of data before the first scan could start.  Skipped garbage on
    // the way means the header area was damaged, not merely cut short.
    if (!st->started && st->err.extraneous) {
      throw Error(ErrorCode::kCorruptPayload, "jpeg: damaged header segments");
    }
    if (!st->started) {
      out.valid_rows = 0;
      out.truncated = true;
      return out;
    }
  }
  out.truncated = st->src.eof_inserted || !ok;
  if (st->err.hit_row < 0 && ok) {
    out.valid_rows = height;
  } else if (st->progressive) {
    out.valid_rows = (st->err.hit_scan <= 1 && st->err.hit_row <= 0) ? 0 : height;
  } else {
    const int rows = std::max(st->err.hit_row, 0) * st->mcu_height;
    out.valid_rows = std::min({rows, height, static_cast<int>(st->scanlines)});
  }
  return out;
}

Bytes EncodeJpeg(const Raster& raster, int quality, bool progressive) {
  if (raster.empty()) throw Error(ErrorCode::kEncodeError, "jpeg: empty raster");
  auto st = std::make_unique<EncodeState>();
  st->raster = &raster;
  st->quality = quality;
  st->progressive = progressive;
  std::memset(&st->cinfo, 0, sizeof(st->cinfo));
  st->cinfo.err = jpeg_std_error(&st->err.pub);
  st->err.pub.error_exit = ErrorExit;
  st->row.resize(static_cast<size_t>(raster.width) * 3);
  const bool ok = RunEncode(st.get());
  Bytes out;
  if (ok && st->buf) out.assign(st->buf, st->buf + st->size);
  jpeg_destroy_compress(&st->cinfo);
  if (st->buf) std::free(st->buf);
  if (!ok) throw Error(ErrorCode::kEncodeError, std::string("jpeg: ") + st->err.message);
  return out;
}

}  // namespace codec
}  // namespace bytelite
