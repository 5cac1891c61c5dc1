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

#include "bytelite/codecs.h"

#include <gtest/gtest.h>

#include "bytelite/error.h"
#include "test_util.h"

namespace bytelite {
namespace {

using testing::DataPath;
using testing::Fixture;
using testing::ReadJson;

Raster Golden(const std::string& name) { return Decode(ReadFile(DataPath("golden/" + name))); }

int MaxDiff(const Raster& a, const Raster& b, bool with_alpha = true) {
  EXPECT_EQ(a.width, b.width);
  EXPECT_EQ(a.height, b.height);
  if (a.pixels.size() != b.pixels.size()) return 256;
  int worst = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    if (!with_alpha && i % 4 == 3) continue;
    worst = std::max(worst, std::abs(a.pixels[i] - b.pixels[i]));
  }
  return worst;
}

TEST(DecodeTest, EveryFixtureDecodesAtDeclaredSize) {
  for (const auto& item : ReadJson("fixtures/images/index.json")) {
    const std::string name = item["file"].get<std::string>();
    const auto side = ReadJson("fixtures/images/" + name + ".json");
    const Raster r = Decode(Fixture(name));
    EXPECT_EQ(r.width, side["width"].get<int>()) << name;
    EXPECT_EQ(r.height, side["height"].get<int>()) << name;
  }
}

TEST(DecodeTest, TruncatedInputIsDecodeError) {
  const Bytes data = Fixture("png_baseline.png");
  try {
    Decode(ByteView(data).first(data.size() / 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDecodeError);
  }
}

// PIL decodes losslessly stored fixtures to the same pixels.
TEST(DecodeTest, LosslessMatchesReference) {
  EXPECT_EQ(MaxDiff(Decode(ReadFile(DataPath("golden/reflect_a_input.png"))),
                    Decode(Fixture("png_baseline.png"))),
            0);
  // Interlaced GIF and Adam7 PNG decode to the same frame as their
  // sequential twins.
  EXPECT_EQ(MaxDiff(Decode(Fixture("pair_c_baseline.png")), Decode(Fixture("pair_c_progressive.png"))), 0);
  EXPECT_EQ(MaxDiff(Decode(Fixture("pair_d_baseline.gif")), Decode(Fixture("pair_d_progressive.gif"))), 0);
}

TEST(DecodeTest, ProgressiveFirstScanMatchesReferenceDecoder) {
  const Bytes prefix = ReadFile(DataPath("golden/progressive_dc_prefix.bin"));
  const ImageMeta meta = ParseMetaOrThrow(prefix);
  ASSERT_TRUE(meta.progressive);
  const PartialDecode d = DecodePartial(meta, prefix);
  EXPECT_TRUE(d.truncated);
  EXPECT_EQ(d.valid_rows, meta.height);
  // The reference decoder is a newer libjpeg-turbo whose interblock
  // smoothing of DC-only blocks differs slightly; complete files decode
  // bit-identically (below).
  const Raster want = Golden("progressive_dc_expected.png");
  EXPECT_LE(MaxDiff(d.raster, want), 2);
  double sum = 0;
  for (size_t i = 0; i < want.pixels.size(); ++i) sum += std::abs(want.pixels[i] - d.raster.pixels[i]);
  EXPECT_LT(sum / want.pixels.size(), 0.1);
}

TEST(DecodeTest, CompleteJpegMatchesReferenceDecoder) {
  const Raster full = Decode(Fixture("jpeg_progressive_small.jpg"));
  const Raster want = Golden("progressive_full_expected.png");
  EXPECT_EQ(MaxDiff(full, want), 0);
}

TEST(DecodeTest, Adam7PrefixCoversFrame) {
  const Bytes data = Fixture("pair_c_progressive.png");
  const ImageMeta meta = ParseMetaOrThrow(data);
  const PartialDecode d = DecodePartial(meta, ByteView(data).first(data.size() / 4));
  EXPECT_TRUE(d.truncated);
  EXPECT_EQ(d.valid_rows, meta.height);
  // After a quarter of the bytes the first passes are complete: no pixel is
  // left unpainted.
  for (size_t i = 3; i < d.raster.pixels.size(); i += 4) ASSERT_EQ(d.raster.pixels[i], 255) << i;
}

TEST(DecodeTest, InterlacedGifPrefixCoversFrame) {
  const Bytes data = Fixture("pair_d_progressive.gif");
  const ImageMeta meta = ParseMetaOrThrow(data);
  const PartialDecode d = DecodePartial(meta, ByteView(data).first(data.size() / 4));
  EXPECT_EQ(d.valid_rows, meta.height);
  for (size_t i = 3; i < d.raster.pixels.size(); i += 4) ASSERT_EQ(d.raster.pixels[i], 255) << i;
}

TEST(DecodeTest, WebpIncremental) {
  const Bytes data = Fixture("webp_lossy_large.webp");
  const ImageMeta meta = ParseMetaOrThrow(data);
  const PartialDecode half = DecodePartial(meta, ByteView(data).first(data.size() / 2));
  EXPECT_TRUE(half.truncated);
  EXPECT_GT(half.valid_rows, 0);
  EXPECT_LT(half.valid_rows, meta.height);
  const PartialDecode head = DecodePartial(meta, ByteView(data).first(meta.header_bytes));
  EXPECT_EQ(head.valid_rows, 0);
  EXPECT_EQ(head.raster.width, meta.width);
}

TEST(DecodeTest, GarbageAfterHeaderIsCorrupt) {
  Bytes data = Fixture("jpeg_baseline_small.jpg");
  const ImageMeta meta = ParseMetaOrThrow(data);
  // Wipe the Huffman tables and scan header.
  for (size_t i = meta.header_bytes; i < data.size(); ++i) data[i] = 0x00;
  EXPECT_THROW(DecodePartial(meta, data), Error);

  Bytes png = Fixture("png_baseline.png");
  const ImageMeta pm = ParseMetaOrThrow(png);
  for (size_t i = 200; i < 400; ++i) png[i] ^= 0x5A;  // inside the first IDAT
  EXPECT_THROW(DecodePartial(pm, png), Error);
}

TEST(EncodeTest, PngRoundTripIsLossless) {
  for (const char* name : {"png_rgba.png", "gif_baseline.gif", "jpeg_baseline_small.jpg"}) {
    const Raster r = Decode(Fixture(name));
    EXPECT_EQ(Decode(codec::EncodePng(r)), r) << name;
  }
}

TEST(EncodeTest, LossyEncoders) {
  const Raster r = Decode(Fixture("png_baseline.png"));
  const Bytes jpeg = codec::EncodeJpeg(r, 85);
  const Bytes pjpeg = codec::EncodeJpeg(r, 85, true);
  const Bytes webp = codec::EncodeWebp(r, 85);
  EXPECT_EQ(SniffFormat(jpeg), ImageFormat::kJpeg);
  EXPECT_FALSE(ParseMetaOrThrow(jpeg).progressive);
  EXPECT_TRUE(ParseMetaOrThrow(pjpeg).progressive);
  EXPECT_EQ(SniffFormat(webp), ImageFormat::kWebp);
  EXPECT_LE(MaxDiff(Decode(jpeg), r, false), 128);
  const Raster w = Decode(webp);
  EXPECT_EQ(w.width, r.width);
  EXPECT_FALSE(w.HasAlpha());
  EXPECT_LT(codec::EncodeWebp(r, 10).size(), webp.size());
  EXPECT_THROW(codec::EncodeWebp(Raster(), 85), Error);
}

TEST(ResizeTest, MatchesReferenceBoxFilter) {
  const Raster src = Decode(Fixture("png_baseline.png"));
  for (const auto& g : ReadJson("golden/box.json")) {
    const Raster want = Golden(g["file"].get<std::string>());
    const Raster got = ResizeArea(src, g["width"].get<int>(), g["height"].get<int>());
    EXPECT_EQ(MaxDiff(got, want), 0) << g["file"];
  }
  EXPECT_EQ(ResizeArea(src, src.width, src.height), src);
}

TEST(ResizeTest, TargetClamp) {
  int w = 400, h = 300;
  ClampTargetDims(800, 600, &w, &h);
  EXPECT_EQ(w, 400);
  EXPECT_EQ(h, 300);
  w = 400, h = 400;
  ClampTargetDims(100, 100, &w, &h);
  EXPECT_EQ(w, 100);
  EXPECT_EQ(h, 100);
  w = 0, h = 0;
  ClampTargetDims(64, 48, &w, &h);
  EXPECT_EQ(w, 64);
  EXPECT_EQ(h, 48);
  w = 32, h = 0;
  ClampTargetDims(64, 48, &w, &h);
  EXPECT_EQ(h, 24);
}

}  // namespace
}  // namespace bytelite
