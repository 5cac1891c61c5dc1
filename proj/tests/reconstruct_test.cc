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

#include <gtest/gtest.h>

#include "bytelite/codecs.h"
#include "bytelite/error.h"
#include "test_util.h"

namespace bytelite {
namespace {

using testing::DataPath;
using testing::Fixture;
using testing::ReadJson;

Raster Golden(const std::string& name) { return Decode(ReadFile(DataPath("golden/" + name))); }

ImageMeta MetaOf(const Bytes& data) { return ParseMetaOrThrow(data); }

int MaxDiff(const Raster& a, const Raster& b) {
  int m = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i) m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
  return m;
}

bool RowsEqual(const Raster& a, int ya, const Raster& b, int yb) {
  return std::equal(a.Row(ya), a.Row(ya) + a.width * 4, b.Row(yb));
}

TEST(RenderPrefixTest, FullPayloadEqualsReferenceDecode) {
  for (const char* name : {"jpeg_baseline_small.jpg", "jpeg_progressive_small.jpg",
                           "png_baseline.png", "gif_baseline.gif", "webp_lossy.webp",
                           "pair_c_progressive.png"}) {
    const Bytes data = Fixture(name);
    RenderedPrefix p = RenderPrefix(data, MetaOf(data));
    EXPECT_EQ(p.valid_rows, p.raster.height) << name;
    EXPECT_EQ(p.raster, Decode(data)) << name;
  }
}

TEST(RenderPrefixTest, ProgressiveFirstScanCoversFrame) {
  const Bytes prefix = ReadFile(DataPath("golden/progressive_dc_prefix.bin"));
  RenderedPrefix p = RenderPrefix(prefix, MetaOf(prefix));
  const Raster expected = Golden("progressive_dc_expected.png");
  EXPECT_EQ(p.valid_rows, expected.height);
  EXPECT_EQ(p.raster.width, expected.width);
  EXPECT_LE(MaxDiff(p.raster, expected), 2);
}

TEST(RenderPrefixTest, BaselineRowsAndEmptyEntropy) {
  const Bytes data = Fixture("jpeg_baseline_small.jpg");
  const ImageMeta meta = MetaOf(data);
  const size_t half = data.size() / 2;
  RenderedPrefix p = RenderPrefix(ByteView(data).first(half), meta);
  EXPECT_EQ(p.valid_rows, CompleteRows(meta, ByteView(data).first(half)));
  EXPECT_GT(p.valid_rows, 0);
  EXPECT_LT(p.valid_rows, meta.height);
  try {
    RenderPrefix(ByteView(data).first(meta.header_bytes), meta);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptPayload);
  }
}

TEST(ReflectFillTest, MatchesIndependentReference) {
  for (const auto& g : ReadJson("golden/reflect.json")) {
    const std::string name = g["name"];
    const Raster input = Golden(name + "_input.png");
    const Raster expected = Golden(name + "_expected.png");
    ReflectionParams params{g["blur_sigma"], g["blend_rows"], g["max_mirror_repeats"]};
    const Raster out = ReflectFill(input, g["valid_rows"], params);
    ASSERT_EQ(out.width, expected.width);
    ASSERT_EQ(out.height, expected.height);
    EXPECT_LE(MaxDiff(out, expected), 1) << name;
  }
}

TEST(ReflectFillTest, SingleRowMirror) {
  const Raster src = Decode(Fixture("png_baseline.png"));
  const int h = src.height;
  const Raster out = ReflectFill(src, h - 1, {0.0, 0, 8});
  EXPECT_TRUE(RowsEqual(out, h - 1, src, h - 2));
  for (int y = 0; y < h - 1; ++y) ASSERT_TRUE(RowsEqual(out, y, src, y));
}

TEST(ReflectFillTest, BlurFreeFillIsRowPermutation) {
  const Raster src = Decode(Fixture("png_baseline.png"));
  for (int r : {1, 7, 50, src.height / 2, src.height - 3}) {
    const Raster out = ReflectFill(src, r, {0.0, 0, 8});
    for (int y = 0; y < r; ++y) ASSERT_TRUE(RowsEqual(out, y, src, y));
    for (int y = r; y < src.height; ++y) {
      const int k = y - r, seg = k / r, off = k % r;
      int expect = seg % 2 == 0 ? r - 1 - off : off;
      if (seg >= 8) expect = r - 1;  // clamped to the end of the last (odd) segment
      ASSERT_TRUE(RowsEqual(out, y, src, expect)) << "r=" << r << " y=" << y;
    }
  }
}

TEST(ReflectFillTest, PreservesDecodedRowsAndFillsEverything) {
  const Raster src = Decode(Fixture("jpeg_baseline_small.jpg"));
  for (int r : {1, 5, 100, src.height - 1}) {
    Raster holed = src;
    for (int y = r; y < holed.height; ++y) std::fill(holed.Row(y), holed.Row(y) + holed.width * 4, 0);
    const ReflectionParams params;
    const Raster out = ReflectFill(holed, r, params);
    for (int y = 0; y < r - params.blend_rows; ++y) ASSERT_TRUE(RowsEqual(out, y, holed, y)) << y;
    // The source is opaque, so any zero alpha would be an unfilled pixel.
    for (int y = r; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) ASSERT_EQ(out.At(x, y)[3], 255) << x << "," << y;
    }
  }
}

TEST(ReflectFillTest, RejectsNothingToFill) {
  const Raster src = SolidRaster(8, 8, 1, 2, 3);
  for (int r : {0, 8, -1, 9}) {
    try {
      ReflectFill(src, r);
      ADD_FAILURE() << r;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNothingToFill);
    }
  }
  EXPECT_THROW(ReflectFill(src, 4, {-1.0, 0, 8}), Error);
}

TEST(BlankFillTest, ClearsMissingRows) {
  const Raster out = BlankFill(SolidRaster(4, 4, 9, 9, 9), 3);
  EXPECT_EQ(out.At(0, 2)[3], 255);
  EXPECT_EQ(out.At(0, 3)[3], 0);
}

TEST(FinalizeTest, LosslessRoundTripAndDims) {
  const Raster src = Decode(Fixture("png_rgba.png"));
  EXPECT_EQ(Decode(Finalize(src, 0, 0, EncodeKind::kPng)), src);
  const Raster big = SolidRaster(800, 600, 10, 20, 30);
  for (EncodeKind k : {EncodeKind::kPng, EncodeKind::kJpegQ85, EncodeKind::kWebpQ85}) {
    const Raster out = Decode(Finalize(big, 400, 300, k));
    EXPECT_EQ(out.width, 400);
    EXPECT_EQ(out.height, 300);
  }
  const Raster small = SolidRaster(100, 100, 1, 1, 1);
  const Raster kept = Decode(Finalize(small, 400, 400, EncodeKind::kPng));
  EXPECT_EQ(kept.width, 100);
  EXPECT_EQ(kept.height, 100);
  EXPECT_EQ(Decode(Finalize(small, 50, 0, EncodeKind::kPng)).height, 50);
  EXPECT_THROW(Finalize(small, -1, 5, EncodeKind::kPng), Error);
}

TEST(FinalizeTest, KindNames) {
  for (EncodeKind k : {EncodeKind::kPng, EncodeKind::kJpegQ85, EncodeKind::kWebpQ85}) {
    EXPECT_EQ(EncodeKindFromName(EncodeKindName(k)), k);
  }
  EXPECT_EQ(EncodeKindFromName("gif"), std::nullopt);
}

TEST(ReconstructTest, BaselinePrefixBecomesCompleteRaster) {
  const Bytes data = Fixture("pair_b_baseline.jpg");
  const ImageMeta meta = MetaOf(data);
  const Raster out = Reconstruct(ByteView(data).first(data.size() / 2), meta);
  EXPECT_EQ(out.width, meta.width);
  EXPECT_EQ(out.height, meta.height);
  EXPECT_FALSE(out.HasAlpha());
}

}  // namespace
}  // namespace bytelite
