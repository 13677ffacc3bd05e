// Copyright 2026 The clipcurate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "clipcurate/datamodel.hpp"
#include "clipcurate/errors.hpp"
#include "synth.hpp"

namespace clipcurate {
namespace {

ClipRecord dog_clip() {
  return synth::make_clip("abcDEF12345", 30.0, Source::kAudioSet, {"Dog", "Bark"});
}

CaptionRecord caption_for(const std::string& id) {
  CaptionRecord c;
  c.clip_id = id;
  c.caption = "A dog barks in a yard.";
  c.prompt_hash = std::string(64, '0');
  c.llm_model = "m";
  return c;
}

TEST(ClipId, UsesIntegerSeconds) {
  EXPECT_EQ(make_clip_id("vid", 30.0), "vid_30");
  EXPECT_EQ(make_clip_id("vid", 30.9), "vid_30");
  EXPECT_EQ(make_clip_id("vid", 0.0), "vid_0");
}

TEST(ClipRecord, ValidatesFields) {
  EXPECT_NO_THROW(dog_clip().validate());

  auto c = dog_clip();
  c.dur_s = 9.5;
  EXPECT_THROW(c.validate(), ValidationError);

  c = dog_clip();
  c.start_s = -1.0;
  EXPECT_THROW(c.validate(), ValidationError);

  c = dog_clip();
  c.id = "other_30";
  EXPECT_THROW(c.validate(), ValidationError);

  c = dog_clip();
  c.source = Source::kVggSound;
  EXPECT_THROW(c.validate(), ValidationError);  // two labels
  c.labels = {"dog barking"};
  EXPECT_NO_THROW(c.validate());

  c = dog_clip();
  c.labels.clear();
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(ClipRecord, ErrorNamesTheField) {
  Json j = to_json(dog_clip());
  j["media"].erase("audio_uri");
  ClipRecord out;
  try {
    from_json(j, out);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "media.audio_uri");
  }
}

TEST(Clue, CapsAudioTagsAndConfidence) {
  Clue c;
  c.tool = Tool::kAudioTags;
  for (int i = 0; i < 4; ++i) c.items.push_back({"t" + std::to_string(i), 0.5});
  EXPECT_THROW(c.validate(), ValidationError);
  c.items.pop_back();
  EXPECT_NO_THROW(c.validate());
  c.items[0].confidence = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(CluePacket, RejectsDuplicateTools) {
  CluePacket p;
  p.clip_id = "x_0";
  p.clues.push_back({Tool::kPlace, {{"beach", 0.4}}});
  p.clues.push_back({Tool::kPlace, {{"lake", 0.3}}});
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(CaptionRecord, ReviewInvariants) {
  auto c = caption_for("x_0");
  Review r;
  r.total_word_count = 5;
  r.modified_word_count = 6;
  r.reviewer = "a";
  r.timestamp = "2026-01-01T00:00:00Z";
  c.review = r;
  EXPECT_THROW(c.validate(), ValidationError);
  c.review->modified_word_count = 5;
  EXPECT_NO_THROW(c.validate());
  c.review->total_word_count = 0;
  c.review->modified_word_count = 0;
  EXPECT_THROW(c.validate(), ValidationError);

  c = caption_for("x_0");
  c.caption = "   ";
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(CaptionRecord, FinalCaptionPrefersEdit) {
  auto c = caption_for("x_0");
  EXPECT_EQ(c.final_caption(), c.caption);
  Review r;
  r.edited_caption = "A dog barks.";
  r.modified_word_count = 1;
  r.total_word_count = 3;
  c.review = r;
  EXPECT_EQ(c.final_caption(), "A dog barks.");
}

FilterVerdict all_error_verdict() {
  FilterVerdict v;
  v.clip_id = "x_0";
  for (int i = 0; i < 5; ++i) v.sync_trials.push_back({0.2 * i, std::nullopt, TrialClass::kError});
  v.sync_filter = SyncFilterResult::kRemovedAllError;
  v.final = FinalDecision::kRemoved;
  return v;
}

TEST(FilterVerdict, Consistency) {
  EXPECT_NO_THROW(all_error_verdict().validate());

  auto v = all_error_verdict();
  v.sync_trials[2] = {0.4, 0.4, TrialClass::kCorrect};
  EXPECT_THROW(v.validate(), ValidationError);  // not all error but removed
  v.sync_filter = SyncFilterResult::kPass;
  v.final = FinalDecision::kKept;
  EXPECT_NO_THROW(v.validate());

  v.sync_trials.pop_back();
  EXPECT_THROW(v.validate(), ValidationError);  // four trials

  FilterVerdict label;
  label.clip_id = "y_0";
  label.label_filter = LabelFilterResult::kRemovedSpeechMusic;
  label.final = FinalDecision::kRemoved;
  EXPECT_NO_THROW(label.validate());
  label.final = FinalDecision::kKept;
  EXPECT_THROW(label.validate(), ValidationError);
}

TEST(FilterVerdict, FailedTrialSerializesNull) {
  const Json j = to_json(all_error_verdict());
  EXPECT_TRUE(j["sync_trials"][0]["pred_offset_s"].is_null());
  EXPECT_EQ(j["sync_trials"][0]["class"], "error");
}

TEST(Manifest, CollectsEveryBadLine) {
  const std::string good = serialize_line(dog_clip());
  std::string bytes = good + "{not json\n" + "{\"id\": 3}\n";
  try {
    parse_manifest<ClipRecord>(bytes);
    FAIL() << "expected ManifestError";
  } catch (const ManifestError& e) {
    ASSERT_EQ(e.issues().size(), 2u);
    EXPECT_EQ(e.issues()[0].line, 2u);
    EXPECT_EQ(e.issues()[1].line, 3u);
  }
}

TEST(Manifest, RejectsDuplicateIds) {
  const std::string line = serialize_line(dog_clip());
  EXPECT_THROW(parse_manifest<ClipRecord>(line + line), ManifestError);
}

TEST(Manifest, SkipsBlankLinesAndAcceptsEmpty) {
  EXPECT_TRUE(parse_manifest<ClipRecord>("").empty());
  const auto recs = parse_manifest<ClipRecord>("\n" + serialize_line(dog_clip()) + "\n\n");
  EXPECT_EQ(recs.size(), 1u);
}

TEST(Manifest, KindDispatch) {
  const auto m = parse_manifest(serialize_line(caption_for("x_0")), ManifestKind::kCaptions);
  ASSERT_TRUE(std::holds_alternative<std::vector<CaptionRecord>>(m));
}

// Property: parse(serialize(x)) == x for generated records.
TEST(RoundTrip, GeneratedRecords) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 3);
  for (int iter = 0; iter < 200; ++iter) {
    const double start = std::floor(unit(rng) * 500.0) + (iter % 2 ? 0.0 : 0.25);
    ClipRecord clip = synth::make_clip("v" + std::to_string(iter), start,
                                       iter % 3 ? Source::kAudioSet : Source::kVggSound,
                                       {"label \"" + std::to_string(iter) + "\" \xc3\xa9"});
    std::vector<ClipRecord> clips{clip};
    EXPECT_EQ(parse_manifest<ClipRecord>(serialize_manifest(clips)), clips);

    CluePacket p;
    p.clip_id = clip.id;
    for (Tool t : kAllTools) {
      if (unit(rng) < 0.3) continue;
      Clue c;
      c.tool = t;
      for (int k = 0; k < small(rng); ++k) {
        ClueItem item{"item " + std::to_string(k)};
        if (unit(rng) < 0.7) item.confidence = unit(rng);
        c.items.push_back(item);
      }
      p.clues.push_back(c);
    }
    std::vector<CluePacket> packets{p};
    EXPECT_EQ(parse_manifest<CluePacket>(serialize_manifest(packets)), packets);

    CaptionRecord cap = caption_for(clip.id);
    cap.flags.inaudible_terms = {"brown"};
    if (iter % 2) {
      Review r;
      r.verdict = ReviewVerdict::kNotCorrespond;
      r.total_word_count = 6;
      r.modified_word_count = small(rng);
      r.edited_caption = "A dog barks in a yard";
      r.inaudible = true;
      r.reviewer = "rev";
      r.timestamp = "2026-03-01T10:00:00Z";
      cap.review = r;
    }
    std::vector<CaptionRecord> caps{cap};
    EXPECT_EQ(parse_manifest<CaptionRecord>(serialize_manifest(caps)), caps);

    FilterVerdict v;
    v.clip_id = clip.id;
    v.sync_filter = SyncFilterResult::kPass;
    for (int k = 0; k < 5; ++k) {
      const double t = 0.2 * (k - 2) + unit(rng) * 1e-3;
      v.sync_trials.push_back({t, t + 0.1 * k, k ? TrialClass::kTolerable : TrialClass::kCorrect});
    }
    std::vector<FilterVerdict> verdicts{v};
    EXPECT_EQ(parse_manifest<FilterVerdict>(serialize_manifest(verdicts)), verdicts);
  }
}

TEST(RoundTrip, InvalidUtf8IsReplacedNotFatal) {
  auto c = caption_for("x_0");
  c.caption = std::string("bad \xff byte");
  const std::string line = serialize_line(c);
  EXPECT_NE(line.find("bad"), std::string::npos);
  EXPECT_EQ(line.back(), '\n');
}

TEST(Enums, ParseRejectsUnknown) {
  EXPECT_EQ(parse_tool("audio_tags"), Tool::kAudioTags);
  EXPECT_THROW(parse_tool("audio_tag"), ValidationError);
  EXPECT_EQ(parse_source("vggsound"), Source::kVggSound);
  EXPECT_THROW(parse_review_verdict("maybe", "verdict"), ValidationError);
}

}  // namespace
}  // namespace clipcurate
