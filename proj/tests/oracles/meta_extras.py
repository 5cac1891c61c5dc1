#!/usr/bin/env python3
# Copyright 2026 The Bytelite Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Small metadata fixtures for formats outside the budget corpus, plus a
reference decode of a progressive JPEG cut after its first scan.

  meta/*.{jpg,png,bmp,tif} + meta/index.json   PIL-encoded, PIL-inspected
  golden/progressive_dc_prefix.bin              first-scan prefix (+ EOI)
  golden/progressive_dc_expected.png            PIL decode of that prefix
  golden/progressive_full_expected.png          PIL decode of the whole file
"""

import io
import json
import os
import struct

import numpy as np
from PIL import Image, ImageFile

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.normpath(os.path.join(HERE, ".."))
META = os.path.join(ROOT, "fixtures", "meta")
IMAGES = os.path.join(ROOT, "fixtures", "images")
GOLDEN = os.path.join(ROOT, "golden")


def gradient(w, h):
    y, x = np.mgrid[0:h, 0:w]
    return np.stack([(x * 255 // max(1, w - 1)), (y * 255 // max(1, h - 1)),
                     ((x + y) * 7) % 256], axis=-1).astype(np.uint8)


def end_of_first_scan(d):
    """Offset of the marker that follows the first scan's entropy data."""
    i = 2
    while True:
        while d[i] == 0xFF:
            i += 1
        m = d[i]
        i += 1
        seglen = struct.unpack(">H", d[i:i + 2])[0]
        if m == 0xDA:
            j = i + seglen
            while True:
                if d[j] == 0xFF and d[j + 1] != 0 and not (0xD0 <= d[j + 1] <= 0xD7):
                    return j
                j += 1
        i += seglen


def main():
    os.makedirs(META, exist_ok=True)
    arr = gradient(64, 48)
    items = []

    def add(name, save_kw, expect):
        path = os.path.join(META, name)
        Image.fromarray(arr).save(path, **save_kw)
        im = Image.open(path)
        meta = {"file": name, "format": expect["format"], "width": im.size[0],
                "height": im.size[1]}
        meta.update({k: v for k, v in expect.items() if k != "format"})
        items.append(meta)

    add("tiny_progressive.jpg", dict(format="JPEG", quality=90, progressive=True),
        {"format": "jpeg", "progressive": True})
    add("tiny_baseline.jpg", dict(format="JPEG", quality=90), {"format": "jpeg", "progressive": False})
    add("tiny_plain.png", dict(format="PNG"), {"format": "png", "progressive": False})
    add("tiny.bmp", dict(format="BMP"), {"format": "bmp", "progressive": False, "header_bytes": 54})
    add("tiny_raw.tif", dict(format="TIFF", compression="raw"),
        {"format": "tiff", "progressive": False})
    add("tiny_lzw.tif", dict(format="TIFF", compression="tiff_lzw"),
        {"format": "tiff", "progressive": False})
    with open(os.path.join(META, "index.json"), "w") as f:
        json.dump(items, f, indent=1)

    d = open(os.path.join(IMAGES, "jpeg_progressive_small.jpg"), "rb").read()
    cut = end_of_first_scan(d)
    prefix = d[:cut]
    with open(os.path.join(GOLDEN, "progressive_dc_prefix.bin"), "wb") as f:
        f.write(prefix)
    ImageFile.LOAD_TRUNCATED_IMAGES = True
    im = Image.open(io.BytesIO(prefix + b"\xff\xd9")).convert("RGB")
    im.load()
    im.save(os.path.join(GOLDEN, "progressive_dc_expected.png"))
    Image.open(os.path.join(IMAGES, "jpeg_progressive_small.jpg")).convert("RGB").save(
        os.path.join(GOLDEN, "progressive_full_expected.png"))
    print(items, cut, len(d))


if __name__ == "__main__":
    main()
