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

"""Brute-force replay of the shipped ruleset over the mock-CDN URL list.

Models the mock CDN routes directly:
  /media/<src>/v1/fill/w_W,h_H,...,q_Q/<name>.<ext>  honours every token
  /imgsvc/<src>?w=&h=&q=&fm=                         honours every parameter
  /static/...                                       exact files only (404)
  /fixed/...                                        ignores tokens (same bytes)
  /plain/...                                        fixture files, no tokens
Writes tests/golden/rewrite.json (per-URL rewrite + outcome, and counters).
"""

import json
import os
import re
from urllib.parse import parse_qs, urlsplit

from PIL import Image

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.normpath(os.path.join(HERE, ".."))
PROJ = os.path.normpath(os.path.join(ROOT, ".."))
CDN = os.path.join(ROOT, "fixtures", "cdn")
IMAGES = os.path.join(ROOT, "fixtures", "images")

EXT = {"jpg": "jpeg", "jpeg": "jpeg", "png": "png", "gif": "gif", "webp": "webp"}


def native(path):
    """(width, height, format) of the object the mock CDN serves at path."""
    u = urlsplit(path)
    parts = u.path.split("/")
    if parts[1] == "media":
        m = re.search(r"w_(\d+),h_(\d+)", parts[5])
        ext = parts[-1].rsplit(".", 1)[1]
        return int(m.group(1)), int(m.group(2)), EXT[ext]
    if parts[1] in ("static", "plain"):
        im = Image.open(os.path.join(IMAGES, parts[-1]))
        return im.size[0], im.size[1], EXT[parts[-1].rsplit(".", 1)[1]]
    if parts[1] == "fixed":
        im = Image.open(os.path.join(CDN, parts[-1]))
        return im.size[0], im.size[1], EXT[parts[-1].rsplit(".", 1)[1]]
    if parts[1] == "imgsvc":
        src = Image.open(os.path.join(CDN, parts[2]))
        q = parse_qs(u.query)
        w = int((q.get("w") or q.get("width") or [0])[0])
        h = int((q.get("h") or q.get("height") or [0])[0])
        sw, sh = src.size
        if w and not h:
            h = int(sh * w / sw + 0.5)
        elif h and not w:
            w = int(sw * h / sh + 0.5)
        elif not w and not h:
            w, h = sw, sh
        fm = (q.get("fm") or [parts[2].rsplit(".", 1)[1]])[0]
        return w, h, EXT[fm]
    raise ValueError(path)


def route_outcome(path):
    prefix = path.split("/")[1]
    return {"media": "accept", "imgsvc": "accept", "static": "revert_404",
            "fixed": "revert_no_savings", "plain": "revert_404"}[prefix]


def main():
    rules = json.load(open(os.path.join(PROJ, "data", "rules.json")))
    urls = json.load(open(os.path.join(CDN, "urls.json")))
    counters = dict(attempted=0, matched=0, accepted=0, reverted_404=0,
                    reverted_no_savings=0, reverted_error=0)
    results = []
    for entry in urls:
        path = entry["path"]
        css_w, css_h = entry["css"]
        nw, nh, nfmt = native(path)
        counters["attempted"] += 1
        matches = []
        for r in rules:
            if "scope" in r and not re.search(r["scope"], path):
                continue
            m = re.search(r["token_pattern"], path)
            if not m:
                continue
            val = m.group(1)
            k = r["class"]
            if k == "width" and int(val) != nw:
                continue
            if k == "height" and int(val) != nh:
                continue
            if k == "format" and EXT[val] != nfmt:
                continue
            matches.append((k, r, m))
        if matches:
            counters["matched"] += 1
        new_w = min(nw, css_w) if css_w > 0 else nw
        if css_h > 0:
            new_h = min(nh, css_h)
        elif new_w != nw:
            new_h = int(nh * new_w / nw + 0.5)
        else:
            new_h = nh
        edits = []
        for k, r, m in matches:
            cur = m.group(1)
            if k == "width":
                val = str(new_w)
            elif k == "height":
                val = str(new_h)
            elif k == "quality":
                val = str(min(int(cur), 85))
            else:
                val = "webp"
            edits.append((m.start(), m.end(), r["template"].replace("{value}", val)))
        rewritten = path
        for s, e, text in sorted(edits, reverse=True):
            rewritten = rewritten[:s] + text + rewritten[e:]
        if rewritten == path:
            outcome = "matched_noop" if matches else "no_match"
        else:
            outcome = route_outcome(path)
            counters[{"accept": "accepted", "revert_404": "reverted_404",
                      "revert_no_savings": "reverted_no_savings"}[outcome]] += 1
        results.append({"path": path, "native": [nw, nh, nfmt],
                        "classes": sorted({k for k, _, _ in matches}),
                        "rewritten": rewritten, "outcome": outcome})
        print("%-22s %s\n    -> %s" % (outcome, path, rewritten))
    with open(os.path.join(ROOT, "golden", "rewrite.json"), "w") as f:
        json.dump({"urls": results, "counters": counters}, f, indent=1)
    print(counters)


if __name__ == "__main__":
    main()
