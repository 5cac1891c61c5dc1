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

"""Builds the page-manifest corpus and HAR fixtures, then computes the
accounting goldens with a standalone brute-force model:

  * fetched bytes per image: min(total, max(2048*k, ceil(f*total))) with
    f = 0.5 (baseline) or 0.15 (progressive), k from the sidecar header size
  * cold savings: sum(original - fetched) / total_page_bytes
  * warm savings: URLs on the parent landing page that are cacheable under
    the cacheability table are dropped from numerator and denominator
  * oracle estimate with a stub optimizer (saved = floor(bytes * r)) and the
    union-area sprite rule
"""

import base64
import email.utils
import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.normpath(os.path.join(HERE, ".."))
IMAGES = os.path.join(ROOT, "fixtures", "images")
CORPUS = os.path.join(ROOT, "fixtures", "corpus")
HAR = os.path.join(ROOT, "fixtures", "har")
GOLDEN = os.path.join(ROOT, "golden")
PROBE = 2048
FUTURE = "Thu, 01 Jan 2099 00:00:00 GMT"
PAST = "Mon, 01 Jan 2001 00:00:00 GMT"

STUB_RATIO = {"standard": 0.4, "extreme": 0.55}


def sidecar(name):
    return json.load(open(os.path.join(IMAGES, name + ".json")))


def size(name):
    return os.path.getsize(os.path.join(IMAGES, name))


def entry(url, body, headers, css=None, pos=None, background=False, crops=None, native=None):
    e = {"url": url, "transfer_bytes": size(body), "headers": headers,
         "is_background": background, "crop_rects": crops or [],
         "body_file": "../images/" + body}
    if css is not None:
        e["css"] = css
    if pos is not None:
        e["position"] = pos
    if native is not None:
        e["native"] = native
    return e


def page(url, bucket, kind, entries, other_bytes, parent=None):
    p = {"version": 1, "page_url": url, "rank_bucket": bucket, "kind": kind,
         "viewport": [411, 731],
         "total_page_bytes": other_bytes + sum(e["transfer_bytes"] for e in entries),
         "entries": entries}
    if parent:
        p["parent_landing_url"] = parent
    return p


A = "https://cdn.alpha.example/"
B = "https://img.beta.example/"

PAGES = {
    "alpha_landing.json": page("https://www.alpha.example/", "top100", "landing", [
        entry(A + "hero.jpg", "jpeg_baseline_large.jpg", {"cache-control": "public, max-age=86400"}, [411, 308], [0, 0]),
        entry(A + "logo.png", "png_rgba.png", {"etag": "\"logo-1\""}, [150, 110], [10, 320]),
        entry(A + "sprites.png", "png_baseline.png", {"cache-control": "max-age=600"}, [40, 40], [300, 320],
              background=True, crops=[[0, 0, 40, 40], [40, 0, 40, 40], [0, 40, 80, 20], [20, 20, 40, 40]],
              native=[400, 300]),
        entry(A + "banner.gif", "gif_baseline.gif", {"cache-control": "no-store"}, [320, 240], [0, 450]),
    ], 250000),
    "alpha_news.json": page("https://www.alpha.example/news", "top100", "internal", [
        entry(A + "hero.jpg", "jpeg_baseline_large.jpg", {"cache-control": "public, max-age=86400"}, [411, 308], [0, 0]),
        entry(A + "banner.gif", "gif_baseline.gif", {"cache-control": "no-store"}, [320, 240], [0, 320]),
        entry(A + "story.jpg", "pair_b_progressive.jpg", {"cache-control": "max-age=0"}, [400, 300], [0, 580]),
        entry(A + "photo.webp", "webp_lossy.webp", {"expires": FUTURE}, [200, 150], [205, 900]),
    ], 180000, parent="https://www.alpha.example/"),
    "alpha_about.json": page("https://www.alpha.example/about", "top100", "internal", [
        entry(A + "logo.png", "png_rgba.png", {"etag": "\"logo-1\""}, [150, 110], [10, 0]),
        entry(A + "team.jpg", "pair_a_baseline.jpg", {"last-modified": PAST, "cache-control": "no-cache"}, [400, 300], [0, 120]),
        entry(A + "map.png", "pair_c_progressive.png", {}, [300, 225], [0, 430]),
        entry(A + "badge.gif", "pair_d_progressive.gif", {"expires": PAST}, None, None),
    ], 90000, parent="https://www.alpha.example/"),
    "beta_landing.json": page("https://www.beta.example/", "apr50k", "landing", [
        entry(A + "hero.jpg", "jpeg_baseline_large.jpg", {"cache-control": "public, max-age=86400"}, [411, 308], [0, 0]),
        entry(B + "gallery.jpg", "jpeg_progressive_medium.jpg", {"cache-control": "max-age=31536000, immutable"}, [320, 240], [0, 320]),
        entry(B + "icon.webp", "webp_lossless.webp", {"cache-control": "private, max-age=3600"}, [100, 66], [330, 320]),
    ], 400000),
    "beta_shop.json": page("https://www.beta.example/shop", "apr50k", "internal", [
        entry(A + "hero.jpg", "jpeg_baseline_large.jpg", {"cache-control": "public, max-age=86400"}, [411, 308], [0, 0]),
        entry(B + "icon.webp", "webp_lossless.webp", {"cache-control": "private, max-age=3600"}, [100, 66], [0, 320]),
        entry(B + "product.jpg", "jpeg_baseline_huge.jpg", {"etag": "W/\"p1\""}, [411, 308], [0, 400]),
        entry(B + "thumb.jpg", "jpeg_oversized_header.jpg", {"cache-control": "max-age=60"}, [160, 120], [0, 720]),
    ], 120000, parent="https://www.beta.example/"),
}


def classify(headers):
    """Cacheability table: returns (cacheable, reason)."""
    cc = headers.get("cache-control", "").lower()
    directives = {}
    for part in cc.split(","):
        part = part.strip()
        if not part:
            continue
        k, _, v = part.partition("=")
        directives[k.strip()] = v.strip().strip('"')
    if "no-store" in directives:
        return False, "no_store"
    if "no-cache" in directives:
        return False, "no_cache"
    if "max-age" in directives:
        try:
            if int(directives["max-age"]) > 0:
                return True, "max_age_positive"
        except ValueError:
            pass
    if "expires" in headers:
        try:
            t = email.utils.parsedate_to_datetime(headers["expires"])
            import datetime
            if t > datetime.datetime.now(datetime.timezone.utc):
                return True, "expires_future"
        except (TypeError, ValueError):
            pass
    if "last-modified" in headers or "etag" in headers:
        return True, "validator_only_heuristic"
    return False, "no_signal"


def fetched_bytes(body):
    m = sidecar(body)
    total = m["total_bytes"]
    f = 0.15 if m["progressive"] else 0.5
    k = max(1, math.ceil(m["header_bytes"] / PROBE))
    return min(total, max(PROBE * k, math.ceil(f * total)))


def union_area(rects):
    xs = sorted({x for r in rects for x in (r[0], r[0] + r[2])})
    area = 0
    for x0, x1 in zip(xs, xs[1:]):
        spans = sorted((r[1], r[1] + r[3]) for r in rects
                       if r[2] > 0 and r[3] > 0 and r[0] <= x0 and r[0] + r[2] >= x1)
        cov, end = 0, None
        for lo, hi in spans:
            if end is None or lo > end:
                cov += hi - lo
                end = hi
            elif hi > end:
                cov += hi - end
                end = hi
        area += cov * (x1 - x0)
    return area


def sprite_savings(e):
    w, h = e["native"]
    used = union_area(e["crop_rects"])
    saved = e["transfer_bytes"] * (1 - used / (w * h))
    return min(e["transfer_bytes"], max(0, math.floor(saved)))


def main():
    os.makedirs(CORPUS, exist_ok=True)
    os.makedirs(HAR, exist_ok=True)
    for name, p in PAGES.items():
        with open(os.path.join(CORPUS, name), "w") as f:
            json.dump(p, f, indent=1)

    by_url = {p["page_url"]: p for p in PAGES.values()}
    report = []
    estimate = []
    for name, p in sorted(PAGES.items()):
        landing = by_url.get(p.get("parent_landing_url"))
        landing_urls = {e["url"] for e in landing["entries"]} if landing else set()
        excluded = sorted({e["url"] for e in p["entries"]
                           if landing and e["url"] in landing_urls and classify(e["headers"])[0]})
        saved = 0
        saved_warm = 0
        warm_weight = p["total_page_bytes"]
        images = []
        for e in p["entries"]:
            body = e["body_file"].split("/")[-1]
            fetched = fetched_bytes(body)
            images.append({"url": e["url"], "original_bytes": e["transfer_bytes"], "fetched_bytes": fetched})
            saved += e["transfer_bytes"] - fetched
            if e["url"] in excluded:
                warm_weight -= e["transfer_bytes"]
            else:
                saved_warm += e["transfer_bytes"] - fetched
        row = {"manifest": name, "page_url": p["page_url"], "images": images,
               "cold_savings_fraction": saved / p["total_page_bytes"],
               "excluded_urls": excluded, "warm_page_weight": warm_weight}
        if landing:
            row["warm_savings_fraction"] = saved_warm / warm_weight
        report.append(row)

        for mode, ratio in STUB_RATIO.items():
            raw = 0
            raw_warm = 0
            for e in p["entries"]:
                s = sprite_savings(e) if e["crop_rects"] else math.floor(e["transfer_bytes"] * ratio)
                raw += s
                if e["url"] not in excluded:
                    raw_warm += s
            est = {"manifest": name, "mode": mode, "saved_bytes": raw,
                   "cold_fraction": raw / p["total_page_bytes"]}
            if landing:
                est["warm_saved_bytes"] = raw_warm
                est["warm_fraction"] = raw_warm / warm_weight
            estimate.append(est)

    # Corpus-level savings of the /img endpoint at budget 0.5 over every
    # fixture image served by the range-capable origin.
    index = json.load(open(os.path.join(IMAGES, "index.json")))
    tot = sum(size(e["file"]) for e in index)
    fetched = sum(fetched_bytes(e["file"]) for e in index)
    gateway = {"budget": 0.5, "progressive_budget": 0.15, "total_bytes": tot,
               "fetched_bytes": fetched, "savings_fraction": (tot - fetched) / tot,
               "per_image": {e["file"]: fetched_bytes(e["file"]) for e in index}}

    sprite = PAGES["alpha_landing.json"]["entries"][2]
    with open(os.path.join(GOLDEN, "accounting.json"), "w") as f:
        json.dump({"report": report, "estimate": estimate, "gateway": gateway,
                   "stub_ratio": STUB_RATIO,
                   "sprite": {"url": sprite["url"], "union_area": union_area(sprite["crop_rects"]),
                              "savings": sprite_savings(sprite)},
                   "cacheability": {u: classify(e["headers"]) for p in PAGES.values()
                                    for e in p["entries"] for u in [e["url"]]}},
                  f, indent=1)

    # HAR fixtures.
    def har_entry(url, mime, transfer, body=None, headers=None):
        content = {"size": transfer, "mimeType": mime}
        if body is not None:
            content["text"] = base64.b64encode(open(os.path.join(IMAGES, body), "rb").read()).decode()
            content["encoding"] = "base64"
        hdrs = [{"name": k, "value": v} for k, v in (headers or {}).items()]
        return {"request": {"method": "GET", "url": url, "headers": []},
                "response": {"status": 200, "headers": hdrs, "content": content,
                             "bodySize": transfer, "_transferSize": transfer + 300}}
    entries = [
        har_entry("https://www.gamma.example/", "text/html", 15000),
        har_entry("https://www.gamma.example/site.css", "text/css", 8000),
        har_entry("https://www.gamma.example/app.js", "application/javascript", 42000),
        har_entry("https://www.gamma.example/a.jpg", "image/jpeg", size("jpeg_baseline_small.jpg"),
                  "jpeg_baseline_small.jpg", {"Cache-Control": "max-age=3600", "Content-Type": "image/jpeg"}),
        har_entry("https://www.gamma.example/b.png", "image/png", 5000, None, {"ETag": "\"b\""}),
        har_entry("https://www.gamma.example/c.gif", "image/gif", 1200),
    ]
    har = {"log": {"version": "1.2", "creator": {"name": "fixture", "version": "1"},
                   "pages": [{"id": "page_1", "title": "https://www.gamma.example/"}],
                   "entries": entries}}
    with open(os.path.join(HAR, "sample.har"), "w") as f:
        json.dump(har, f, indent=1)
    with open(os.path.join(HAR, "empty.har"), "w") as f:
        json.dump({"log": {"version": "1.2", "creator": {"name": "fixture", "version": "1"},
                           "entries": []}}, f, indent=1)
    har_golden = {"entries": 3,
                  "total_page_bytes": sum(e["response"]["_transferSize"] for e in entries),
                  "image_bytes": [e["response"]["_transferSize"] for e in entries[3:]]}
    with open(os.path.join(GOLDEN, "har.json"), "w") as f:
        json.dump(har_golden, f, indent=1)
    print(json.dumps(report, indent=1)[:3000])
    print(gateway["savings_fraction"], har_golden)


if __name__ == "__main__":
    main()
