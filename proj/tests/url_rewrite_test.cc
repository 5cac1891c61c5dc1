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

#include "bytelite/url_rewrite.h"

#include <gtest/gtest.h>

#include <thread>

#include "bytelite/error.h"
#include "bytelite/fixture_origin.h"
#include "memory_transport.h"
#include "test_util.h"

namespace bytelite {
namespace {

using testing::DataPath;
using testing::ReadJson;

RuleSet ShippedRules() { return RuleSet::Load(DataPath("../data/rules.json")); }

ImageMeta Jpeg(int w, int h) {
  ImageMeta m;
  m.format = ImageFormat::kJpeg;
  m.width = w;
  m.height = h;
  m.header_complete = true;
  return m;
}

std::vector<RuleClass> Classes(const std::vector<RuleMatch>& matches) {
  std::vector<RuleClass> out;
  for (const RuleMatch& m : matches) out.push_back(m.rule->klass);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(RuleSetTest, LoadsShippedRules) {
  RuleSet rules = ShippedRules();
  EXPECT_EQ(rules.rules().size(), 12u);
  EXPECT_EQ(rules.rules()[4].scope, "/v1/fill/");
  EXPECT_EQ(rules.rules()[0].klass, RuleClass::kWidth);
}

TEST(RuleSetTest, RejectsInvalidRules) {
  const char* bad[] = {
      R"J({"id":"x"})J",
      R"J([{"id":"a","class":"width","token_pattern":"w_\\d+","template":"w_{value}"}])J",
      R"J([{"id":"a","class":"width","token_pattern":"(w)_(\\d+)","template":"w_{value}"}])J",
      R"J([{"id":"a","class":"width","token_pattern":"w_(\\d+)","template":"w_"}])J",
      R"J([{"id":"a","class":"width","token_pattern":"w_(\\d+)","template":"{value}{value}"}])J",
      R"J([{"id":"a","class":"size","token_pattern":"w_(\\d+)","template":"w_{value}"}])J",
      R"J([{"id":"a","class":"width","token_pattern":"w_((\\d+)","template":"w_{value}"}])J",
      R"J([{"id":"a","class":"width","template":"w_{value}"}])J",
      R"J([{"id":"a","class":"width","token_pattern":"w_(\\d+)","template":"w_{value}"},
          {"id":"a","class":"height","token_pattern":"h_(\\d+)","template":"h_{value}"}])J",
      R"J([{"id":"a","class":"width","token_pattern":"w_(\\d+)","template":"w_{value}","scope":3}])J",
      "not json",
  };
  for (const char* text : bad) {
    try {
      RuleSet::Parse(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseError) << text;
    }
  }
  EXPECT_TRUE(RuleSet::Parse("[]").rules().empty());
}

constexpr char kFill[] =
    "https://img.example/media/a.jpg/v1/fill/w_400,h_52,al_c,q_100,usm_0.66_1.00_0.01/a.jpg";

TEST(DiscoverTest, FillUrlMatchesNativeProperties) {
  RuleSet rules = ShippedRules();
  EXPECT_EQ(Classes(Discover(rules, kFill, Jpeg(400, 300))),
            (std::vector<RuleClass>{RuleClass::kWidth, RuleClass::kQuality, RuleClass::kFormat}));
  EXPECT_EQ(Classes(Discover(rules, kFill, Jpeg(400, 52))),
            (std::vector<RuleClass>{RuleClass::kWidth, RuleClass::kHeight, RuleClass::kQuality,
                                    RuleClass::kFormat}));
}

TEST(DiscoverTest, RequiresEqualityAndCompleteHeader) {
  RuleSet rules = ShippedRules();
  EXPECT_TRUE(Discover(rules, "https://img.example/photos/cat.jpg", Jpeg(400, 300)).empty());
  EXPECT_EQ(Classes(Discover(rules, kFill, Jpeg(500, 300))),
            (std::vector<RuleClass>{RuleClass::kQuality, RuleClass::kFormat}));
  ImageMeta png = Jpeg(400, 300);
  png.format = ImageFormat::kPng;
  EXPECT_EQ(Classes(Discover(rules, kFill, png)),
            (std::vector<RuleClass>{RuleClass::kWidth, RuleClass::kQuality}));
  ImageMeta unknown;  // header not parsed: only pattern-based quality
  EXPECT_EQ(Classes(Discover(rules, kFill, unknown)), (std::vector<RuleClass>{RuleClass::kQuality}));
  // The extension rule is scoped to fill URLs.
  EXPECT_TRUE(Discover(rules, "https://img.example/a/b.jpg", Jpeg(1, 1)).empty());
  // Token boundaries: "vw_400" is not a width token.
  EXPECT_TRUE(Discover(rules, "https://img.example/x/vw_400/b", Jpeg(400, 1)).empty());
}

TEST(RewriteTest, Examples) {
  RuleSet rules = ShippedRules();
  const ImageMeta meta = Jpeg(400, 300);
  auto matches = Discover(rules, kFill, meta);
  EXPECT_EQ(Rewrite(kFill, matches, meta, {200, 0}),
            "https://img.example/media/a.jpg/v1/fill/w_200,h_52,al_c,q_85,usm_0.66_1.00_0.01/"
            "a.webp");
  // Unknown geometry: width kept, quality and format still rewritten.
  EXPECT_EQ(Rewrite(kFill, matches, meta, {0, 0}),
            "https://img.example/media/a.jpg/v1/fill/w_400,h_52,al_c,q_85,usm_0.66_1.00_0.01/"
            "a.webp");
  // Never upscales.
  EXPECT_EQ(Rewrite(kFill, matches, meta, {800, 0}), Rewrite(kFill, matches, meta, {0, 0}));
  // Targets equal to the current values: identity.
  const std::string same = "https://img.example/media/a/v1/fill/w_400,q_80/a.webp";
  ImageMeta webp = meta;
  webp.format = ImageFormat::kWebp;
  auto m2 = Discover(rules, same, webp);
  ASSERT_FALSE(m2.empty());
  EXPECT_EQ(Rewrite(same, m2, webp, {400, 0}), same);
  try {
    Rewrite(kFill, {}, meta, {});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNothingToRewrite);
  }
}

TEST(RewriteTest, HeightFollowsWidth) {
  RuleSet rules = ShippedRules();
  const std::string url = "https://img.example/media/h/v1/fill/w_500,h_375,q_100/h.jpg";
  const ImageMeta meta = Jpeg(500, 375);
  auto matches = Discover(rules, url, meta);
  EXPECT_EQ(Rewrite(url, matches, meta, {250, 0}),
            "https://img.example/media/h/v1/fill/w_250,h_188,q_85/h.webp");
  EXPECT_EQ(Rewrite(url, matches, meta, {250, 100}),
            "https://img.example/media/h/v1/fill/w_250,h_100,q_85/h.webp");
}

TEST(RewriteTest, OnlyMatchedSpansChange) {
  RuleSet rules = ShippedRules();
  const std::string url = "https://w_400.example/imgsvc/a.jpg?w=400&q=100&tag=w_400";
  const ImageMeta meta = Jpeg(400, 300);
  const std::string out = Rewrite(url, Discover(rules, url, meta), meta, {100, 0});
  EXPECT_EQ(out.substr(0, 22), url.substr(0, 22)) << "scheme and host untouched";
  EXPECT_NE(out.find("w=100"), std::string::npos);
  EXPECT_NE(out.find("q=85"), std::string::npos);
}

TEST(ValidateTest, Outcomes) {
  testing::MemoryTransport t;
  t.Put("http://cdn/small", {Bytes(3000, 1)});
  t.Put("http://cdn/same", {Bytes(5000, 1)});
  testing::MemoryTransport::Object broken;
  broken.status = 500;
  t.Put("http://cdn/broken", broken);
  EXPECT_EQ(Validate(t, "http://cdn/small", 5000).outcome, RewriteOutcome::kAccept);
  EXPECT_EQ(Validate(t, "http://cdn/small", 5000).probe->prefix.size(), 2048u);
  EXPECT_EQ(Validate(t, "http://cdn/same", 5000).outcome, RewriteOutcome::kRevertNoSavings);
  EXPECT_EQ(Validate(t, "http://cdn/none", 5000).outcome, RewriteOutcome::kRevert404);
  EXPECT_EQ(Validate(t, "http://cdn/broken", 5000).outcome, RewriteOutcome::kRevertError);
  t.FailWith(ErrorCode::kNetworkError);
  EXPECT_EQ(Validate(t, "http://cdn/small", 5000).outcome, RewriteOutcome::kRevertError);
}

TEST(RewriteStatsTest, ConcurrentCounting) {
  RewriteStats stats;
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] {
      for (int k = 0; k < 1000; ++k) {
        stats.CountAttempt();
        stats.Count(RewriteOutcome::kAccept, 2);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(stats.Get().attempted, 4000);
  EXPECT_EQ(stats.Get().accepted, 4000);
  EXPECT_EQ(stats.Get().savings_bytes, 8000);
  EXPECT_EQ(nlohmann::json::parse(stats.ToJson())["accepted"], 4000);
}

// Replays the fixture URL list against the mock CDN over HTTP.
class MockCdnTest : public ::testing::Test {
 protected:
  void SetUp() override {
    urls_ = ReadJson("fixtures/cdn/urls.json");
    std::vector<std::string> statics;
    for (const auto& u : urls_) {
      const std::string path = u["path"];
      if (path.rfind("/static/", 0) == 0) statics.push_back(path);
    }
    cdn_ = std::make_unique<FixtureOrigin>(MockCdnResolver(
        DataPath("fixtures/cdn"), DataPath("fixtures/images"), statics));
    cdn_->Start();
  }
  nlohmann::json urls_;
  std::unique_ptr<FixtureOrigin> cdn_;
};

TEST_F(MockCdnTest, ReplayGoldenAndByteBounds) {
  const nlohmann::json golden = ReadJson("golden/rewrite.json");
  RuleSet rules = ShippedRules();
  RewriteStats stats;
  auto transport = MakeHttpTransport();
  ASSERT_EQ(golden["urls"].size(), urls_.size());
  for (size_t i = 0; i < urls_.size(); ++i) {
    const nlohmann::json& g = golden["urls"][i];
    const std::string url = cdn_->BaseUrl() + urls_[i]["path"].get<std::string>();
    RewriteTargets targets{urls_[i]["css"][0], urls_[i]["css"][1]};
    cdn_->ClearLog();
    RewriteAttempt a = RewriteAndValidate(*transport, rules, url, targets, &stats);
    std::vector<std::string> classes;
    for (RuleClass c : a.classes) classes.emplace_back(RuleClassName(c));
    std::sort(classes.begin(), classes.end());
    EXPECT_EQ(classes, g["classes"].get<std::vector<std::string>>()) << url;
    const std::string outcome = g["outcome"];
    if (outcome == "no_match" || outcome == "matched_noop") {
      EXPECT_FALSE(a.changed) << url;
      EXPECT_EQ(a.matched, outcome == "matched_noop") << url;
      continue;
    }
    ASSERT_TRUE(a.outcome) << url;
    EXPECT_EQ(RewriteOutcomeName(*a.outcome), outcome) << url;
    if (*a.outcome == RewriteOutcome::kAccept) {
      EXPECT_EQ(a.rewritten_url, cdn_->BaseUrl() + g["rewritten"].get<std::string>());
    }

    // Finish the fetch from the reusable probe and audit upstream bytes.
    FetchBudget full;
    full.baseline_fraction = full.progressive_fraction = 1.0;
    FetchOutcome o = FetchFromProbe(*transport, a.rewritten_url, full, a.probe(), {});
    const int64_t original_total = a.original_probe.total_bytes.value();
    const int64_t upstream = cdn_->BodyBytes();
    if (*a.outcome == RewriteOutcome::kAccept) {
      EXPECT_LT(o.total_bytes, original_total) << url;
      EXPECT_LE(upstream, original_total) << url;
    } else {
      EXPECT_EQ(o.total_bytes, original_total) << url;
      EXPECT_LE(upstream - original_total, 2048) << url;
    }
  }
  const nlohmann::json& c = golden["counters"];
  RewriteStats::Snapshot s = stats.Get();
  EXPECT_EQ(s.attempted, c["attempted"].get<int64_t>());
  EXPECT_EQ(s.matched, c["matched"].get<int64_t>());
  EXPECT_EQ(s.accepted, c["accepted"].get<int64_t>());
  EXPECT_EQ(s.reverted_404, c["reverted_404"].get<int64_t>());
  EXPECT_EQ(s.reverted_no_savings, c["reverted_no_savings"].get<int64_t>());
  EXPECT_EQ(s.reverted_error, c["reverted_error"].get<int64_t>());
  EXPECT_GT(s.savings_bytes, 0);
}

}  // namespace
}  // namespace bytelite
