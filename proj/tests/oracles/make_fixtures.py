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

"""Generates the binary image fixture corpus with reference encoders (PIL).

Images are synthetic landscapes: the top of the frame differs from the
bottom so that truncated baseline images are visibly incomplete.
Run once; outputs are checked in.  Re-running is deterministic.
"""

import io
import json
import os
import struct
import zlib

import numpy as np
from PIL import Image

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.normpath(os.path.join(HERE, ".."))
IMAGES = os.path.join(ROOT, "fixtures", "images")
CDN = os.path.join(ROOT, "fixtures", "cdn")
GOLDEN = os.path.join(ROOT, "golden")


def scene(w, h, seed, noise=6.0, alpha=False):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.zeros((h, w, 3), np.float64)
    horizon = h * (0.42 + 0.08 * np.sin(xx[0] / w * 2 * np.pi * rng.uniform(1, 3)
                                        + rng.uniform(0, 6)))
    sky_t = yy / max(1.0, h * 0.5)
    sky = np.stack([40 + 120 * sky_t, 80 + 120 * sky_t, 190 + 50 * sky_t], -1)
    ground_t = (yy - horizon[None, :]) / max(1.0, h * 0.6)
    ground = np.stack([60 + 90 * ground_t, 120 - 40 * ground_t, 40 + 10 * ground_t], -1)
    mask = (yy < horizon[None, :])[..., None]
    img = np.where(mask, sky, ground)
    # Sun.
    cx, cy, r = rng.uniform(0.15, 0.85) * w, rng.uniform(0.08, 0.25) * h, 0.07 * min(w, h) + 2
    sun = ((xx - cx) ** 2 + (yy - cy) ** 2) < r * r
    img[sun] = [250, 220, 90]
    # Buildings in the lower part of the frame.
    for _ in range(int(rng.integers(4, 9))):
        bw = rng.uniform(0.05, 0.18) * w
        bh = rng.uniform(0.1, 0.3) * h
        bx = rng.uniform(0, w - bw)
        by = rng.uniform(0.55, 0.95) * h - bh
        col = rng.uniform(30, 220, 3)
        sel = (xx >= bx) & (xx < bx + bw) & (yy >= by) & (yy < by + bh)
        img[sel] = col
    # Texture.
    tex = rng.normal(0, noise, (h, w, 3))
    img = np.clip(img + tex, 0, 255).astype(np.uint8)
    if alpha:
        a = np.clip(255 - (yy / h) * 120 + rng.normal(0, 2, (h, w)), 0, 255).astype(np.uint8)
        img = np.dstack([img, a])
    return img


def png_adam7(arr, path):
    """Minimal Adam7 PNG writer (filter 0 on every pass row)."""
    h, w = arr.shape[:2]
    channels = arr.shape[2]
    color_type = {3: 2, 4: 6}[channels]
    passes = [(0, 0, 8, 8), (4, 0, 8, 8), (0, 4, 4, 8), (2, 0, 4, 4),
              (0, 2, 2, 4), (1, 0, 2, 2), (0, 1, 1, 2)]
    raw = bytearray()
    for x0, y0, dx, dy in passes:
        sub = arr[y0::dy, x0::dx]
        if sub.shape[0] == 0 or sub.shape[1] == 0:
            continue
        for row in sub:
            raw.append(0)
            raw += row.tobytes()
    def chunk(tag, data):
        c = struct.pack(">I", len(data)) + tag + data
        return c + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 1)
    comp = zlib.compress(bytes(raw), 9)
    with open(path, "wb") as f:
        f.write(b"\x89PNG\r\n\x1a\n")
        f.write(chunk(b"IHDR", ihdr))
        # Several IDAT chunks, as real encoders emit.
        for i in range(0, len(comp), 8192):
            f.write(chunk(b"IDAT", comp[i:i + 8192]))
        f.write(chunk(b"IEND", b""))


def save(name, data_or_fn):
    path = os.path.join(IMAGES, name)
    data_or_fn(path)
    return name


def jpeg(arr, quality, progressive, subsampling=2, comment=None):
    def fn(path):
        kw = dict(quality=quality, progressive=progressive, subsampling=subsampling)
        if comment is not None:
            kw["comment"] = comment
        Image.fromarray(arr).save(path, "JPEG", **kw)
    return fn


def png(arr):
    return lambda path: Image.fromarray(arr).save(path, "PNG", compress_level=6)


def gif(arr, interlace):
    def fn(path):
        im = Image.fromarray(arr).quantize(colors=128, method=Image.Quantize.MEDIANCUT, dither=Image.Dither.NONE)
        im.save(path, "GIF", interlace=interlace)
    return fn


def webp(arr, quality=None, lossless=False):
    def fn(path):
        im = Image.fromarray(arr)
        if lossless:
            im.save(path, "WEBP", lossless=True, quality=80, method=4)
        else:
            im.save(path, "WEBP", quality=quality, method=4)
    return fn


def main():
    os.makedirs(IMAGES, exist_ok=True)
    os.makedirs(CDN, exist_ok=True)
    index = []

    def add(name, fn, rendered, pair=None, demo=False):
        save(name, fn)
        index.append({"file": name, "rendered": list(rendered),
                      "pair": pair, "demo": demo})

    s_small = scene(320, 240, 1, noise=5)
    s_444 = scene(400, 300, 2, noise=4)
    s_large = scene(1600, 1200, 3, noise=7)
    s_huge = scene(1800, 1350, 4, noise=18)
    s_pa = scene(1200, 900, 5, noise=6)
    s_pb = scene(800, 600, 6, noise=6)
    s_oh = scene(640, 480, 7, noise=5)
    s_png = scene(400, 300, 8, noise=5)
    s_pngl = scene(1000, 750, 9, noise=6)
    s_rgba = scene(300, 220, 10, noise=4, alpha=True)
    s_pp = scene(600, 450, 11, noise=3)
    s_gif = scene(320, 240, 12, noise=2)
    s_gifp = scene(480, 360, 13, noise=2)
    s_webp = scene(400, 300, 14, noise=8)
    s_webpl = scene(1200, 900, 15, noise=6)
    s_webpll = scene(300, 200, 16, noise=3)
    s_prog_med = scene(640, 480, 17, noise=6)

    add("jpeg_baseline_small.jpg", jpeg(s_small, 85, False), (320, 240), demo=True)
    add("jpeg_baseline_444.jpg", jpeg(s_444, 90, False, subsampling=0), (200, 150))
    add("jpeg_baseline_large.jpg", jpeg(s_large, 90, False), (400, 300))
    add("jpeg_baseline_huge.jpg", jpeg(s_huge, 95, False), (411, 308))
    add("jpeg_progressive_small.jpg", jpeg(s_small, 85, True), (160, 120))
    add("jpeg_progressive_medium.jpg", jpeg(s_prog_med, 88, True), (320, 240))
    add("jpeg_progressive_large.jpg", jpeg(s_large, 90, True), (400, 300))
    add("pair_a_baseline.jpg", jpeg(s_pa, 90, False), (400, 300), pair="a")
    add("pair_a_progressive.jpg", jpeg(s_pa, 90, True), (400, 300), pair="a")
    add("pair_b_baseline.jpg", jpeg(s_pb, 90, False), (400, 300), pair="b")
    add("pair_b_progressive.jpg", jpeg(s_pb, 90, True), (400, 300), pair="b")
    add("jpeg_oversized_header.jpg", jpeg(s_oh, 85, False, comment=b"metadata " * 600), (320, 240))
    add("png_baseline.png", png(s_png), (200, 150))
    add("png_baseline_large.png", png(s_pngl), (400, 300))
    add("png_rgba.png", png(s_rgba), (300, 220))
    add("pair_c_baseline.png", png(s_pp), (300, 225), pair="c")
    add("pair_c_progressive.png", lambda p: png_adam7(s_pp, p), (300, 225), pair="c")
    add("gif_baseline.gif", gif(s_gif, False), (320, 240))
    add("pair_d_baseline.gif", gif(s_gifp, False), (240, 180), pair="d")
    add("pair_d_progressive.gif", gif(s_gifp, True), (240, 180), pair="d")
    add("webp_lossy.webp", webp(s_webp, quality=90), (400, 300))
    add("webp_lossy_large.webp", webp(s_webpl, quality=85), (400, 300))
    add("webp_lossless.webp", webp(s_webpll, lossless=True), (300, 200))

    # Image-service sources (served by the mock CDN).
    Image.fromarray(scene(800, 600, 21, noise=5)).save(os.path.join(CDN, "harbor.jpg"), "JPEG", quality=100)
    Image.fromarray(scene(400, 300, 22, noise=4)).save(os.path.join(CDN, "field.jpg"), "JPEG", quality=100)
    Image.fromarray(scene(600, 400, 23, noise=4)).save(os.path.join(CDN, "valley.png"), "PNG")
    Image.fromarray(scene(400, 52, 24, noise=4)).save(os.path.join(CDN, "banner.jpg"), "JPEG", quality=100)

    # SSIM oracle pairs: lossless reference and a lossy re-encode.
    for name, arr, q in (("ssim_ref_a", s_png, 85), ("ssim_ref_b", s_webpll, 40)):
        Image.fromarray(arr).save(os.path.join(GOLDEN, name + ".png"), "PNG")
        Image.fromarray(arr).save(os.path.join(GOLDEN, name + "_q%d.webp" % q), "WEBP", quality=q, method=4)

    with open(os.path.join(IMAGES, "index.json"), "w") as f:
        json.dump(index, f, indent=1)
    for e in index:
        print("%-32s %8d" % (e["file"], os.path.getsize(os.path.join(IMAGES, e["file"]))))


if __name__ == "__main__":
    main()
