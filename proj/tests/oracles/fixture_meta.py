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

"""Writes a sidecar JSON per fixture image plus the budget and row goldens.

Dimensions and progressiveness come from PIL (the reference metadata tool).
header_bytes is the minimal prefix length that contains dimensions and the
progressive flag, computed by a standalone marker walk below.

Truncated-row goldens:
  jpeg: PIL decodes the truncated file with an EOI appended; rows are
        compared with the full decode and rounded to whole MCU rows.
  png:  zlib inflates the available IDAT bytes; rows = bytes // (stride+1).
  gif:  standalone LZW decode of the available data; rows = pixels // width.
"""

import json
import math
import os
import struct
import zlib

import numpy as np
from PIL import Image, ImageFile

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.normpath(os.path.join(HERE, ".."))
IMAGES = os.path.join(ROOT, "fixtures", "images")
GOLDEN = os.path.join(ROOT, "golden")
PROBE = 2048


def jpeg_header_bytes(d):
    i = 2
    while i < len(d):
        assert d[i] == 0xFF
        while d[i] == 0xFF:
            i += 1
        m = d[i]
        i += 1
        if m in (0x01,) or 0xD0 <= m <= 0xD7:
            continue
        seglen = struct.unpack(">H", d[i:i + 2])[0]
        if 0xC0 <= m <= 0xCF and m not in (0xC4, 0xC8, 0xCC):
            return i + seglen
        i += seglen
    raise ValueError("no SOF")


def jpeg_mcu_height(path):
    d = open(path, "rb").read()
    i = 2
    while True:
        while d[i] == 0xFF:
            i += 1
        m = d[i]
        i += 1
        seglen = struct.unpack(">H", d[i:i + 2])[0]
        if 0xC0 <= m <= 0xCF and m not in (0xC4, 0xC8, 0xCC):
            nf = d[i + 7]
            vmax = max(d[i + 8 + 3 * c + 1] & 0x0F for c in range(nf))
            return 8 * vmax
        i += seglen


def gif_header_bytes(d):
    i = 13
    flags = d[10]
    if flags & 0x80:
        i += 3 * (2 << (flags & 7))
    while True:
        b = d[i]
        if b == 0x2C:
            return i + 10, bool(d[i + 9] & 0x40)
        if b == 0x21:
            i += 2
            while d[i] != 0:
                i += d[i] + 1
            i += 1
            continue
        raise ValueError("bad gif block %x" % b)


def webp_header_bytes(d):
    tag = d[12:16]
    if tag == b"VP8 ":
        return 30
    if tag == b"VP8L":
        return 25
    if tag == b"VP8X":
        return 30
    raise ValueError(tag)


def meta(path):
    d = open(path, "rb").read()
    im = Image.open(path)
    fmt = {"JPEG": "jpeg", "PNG": "png", "GIF": "gif", "WEBP": "webp"}[im.format]
    w, h = im.size
    if fmt == "jpeg":
        progressive = bool(im.info.get("progressive", 0) or im.info.get("progression", 0))
        hb = jpeg_header_bytes(d)
    elif fmt == "png":
        progressive = bool(im.info.get("interlace", 0))
        hb = 29
    elif fmt == "gif":
        hb, progressive = gif_header_bytes(d)
    else:
        progressive = False
        hb = webp_header_bytes(d)
    tags = ["oversized-header"] if hb > PROBE else []
    return {"format": fmt, "width": w, "height": h, "progressive": progressive,
            "header_bytes": hb, "total_bytes": len(d), "tags": tags}


# ---- truncated row oracles -------------------------------------------------

def jpeg_rows(path, n):
    d = open(path, "rb").read()
    full = np.asarray(Image.open(path).convert("RGB"))
    if n >= len(d):
        return full.shape[0]
    ImageFile.LOAD_TRUNCATED_IMAGES = True
    try:
        tmp = d[:n] + b"\xff\xd9"
        import io
        t = np.asarray(Image.open(io.BytesIO(tmp)).convert("RGB"))
    finally:
        ImageFile.LOAD_TRUNCATED_IMAGES = False
    same = np.all(t == full, axis=(1, 2))
    matching = 0
    while matching < len(same) and same[matching]:
        matching += 1
    mcu = jpeg_mcu_height(path)
    # Fancy upsampling of the last row in a complete MCU row borrows chroma
    # from the next (missing) MCU row, hence the one-row slack.
    slack = 1 if mcu == 16 else 0
    if matching >= full.shape[0]:
        return full.shape[0]
    return min(full.shape[0], ((matching + slack) // mcu) * mcu)


def png_rows(path, n):
    d = open(path, "rb")
    d = open(path, "rb").read()[:n]
    i = 8
    w = h = None
    idat = b""
    bpp = None
    while i + 8 <= len(d):
        ln = struct.unpack(">I", d[i:i + 4])[0]
        tag = d[i + 4:i + 8]
        body = d[i + 8:i + 8 + ln]
        if tag == b"IHDR":
            w, h, depth, ct = struct.unpack(">IIBB", body[:10])
            bpp = {2: 3, 6: 4, 0: 1, 4: 2, 3: 1}[ct]
        if tag == b"IDAT":
            idat += body
        i += 12 + ln
    out = zlib.decompressobj().decompress(idat)
    return min(h, len(out) // (w * bpp + 1))


def gif_rows(path, n):
    d = open(path, "rb").read()[:n]
    i = 13
    flags = d[10]
    if flags & 0x80:
        i += 3 * (2 << (flags & 7))
    while d[i] != 0x2C:
        i += 2
        while d[i] != 0:
            i += d[i] + 1
        i += 1
    iw = struct.unpack("<H", d[i + 5:i + 7])[0]
    ih = struct.unpack("<H", d[i + 7:i + 9])[0]
    lflags = d[i + 9]
    i += 10
    if lflags & 0x80:
        i += 3 * (2 << (lflags & 7))
    min_code = d[i]
    i += 1
    data = bytearray()
    while i < len(d):
        ln = d[i]
        if ln == 0:
            break
        if i + 1 + ln > len(d):
            # A partially received sub-block still carries usable bits.
            data += d[i + 1:]
            break
        data += d[i + 1:i + 1 + ln]
        i += 1 + ln
    # LZW decode.
    clear = 1 << min_code
    eoi = clear + 1
    size = min_code + 1
    table = [bytes([k]) for k in range(clear)] + [b"", b""]
    prev = None
    out = bytearray()
    bitpos = 0
    total_bits = len(data) * 8
    while bitpos + size <= total_bits:
        code = 0
        for b in range(size):
            p = bitpos + b
            code |= ((data[p >> 3] >> (p & 7)) & 1) << b
        bitpos += size
        if code == clear:
            table = table[:clear + 2]
            size = min_code + 1
            prev = None
            continue
        if code == eoi:
            break
        if prev is None:
            entry = table[code]
        elif code < len(table):
            entry = table[code]
            table.append(prev + entry[:1])
        else:
            entry = prev + prev[:1]
            table.append(entry)
        out += entry
        prev = entry
        if len(table) == (1 << size) and size < 12:
            size += 1
    return min(ih, len(out) // iw)


def main():
    index = json.load(open(os.path.join(IMAGES, "index.json")))
    budget_golden = []
    rows_golden = []
    for e in index:
        path = os.path.join(IMAGES, e["file"])
        m = meta(path)
        m["file"] = e["file"]
        m["rendered"] = e["rendered"]
        m["pair"] = e["pair"]
        m["demo"] = e["demo"]
        with open(path + ".json", "w") as f:
            json.dump(m, f, indent=1)
        total = m["total_bytes"]
        k = max(1, math.ceil(m["header_bytes"] / PROBE))
        for frac in (0.1, 0.15, 0.25, 0.5, 0.75, 1.0):
            want = max(PROBE * k, math.ceil(frac * total))
            budget_golden.append({"file": e["file"], "fraction": frac,
                                  "probes": k,
                                  "fetched_bytes": min(total, want)})
        if not m["progressive"] and m["format"] in ("jpeg", "png", "gif"):
            for frac in (0.25, 0.5, 0.75):
                n = math.ceil(frac * total)
                fn = {"jpeg": jpeg_rows, "png": png_rows, "gif": gif_rows}[m["format"]]
                rows_golden.append({"file": e["file"], "bytes": n, "rows": fn(path, n)})
        print(e["file"], m)
    with open(os.path.join(GOLDEN, "budget.json"), "w") as f:
        json.dump(budget_golden, f, indent=1)
    with open(os.path.join(GOLDEN, "complete_rows.json"), "w") as f:
        json.dump(rows_golden, f, indent=1)


if __name__ == "__main__":
    main()
