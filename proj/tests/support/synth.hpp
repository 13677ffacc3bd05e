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

#pragma once

// Synthetic inputs shared by unit and acceptance tests.

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "clipcurate/curation_store.hpp"
#include "clipcurate/datamodel.hpp"

namespace clipcurate::synth {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("clipcurate_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline ClipRecord make_clip(const std::string& video_id, double start_s, Source source,
                            std::vector<std::string> labels) {
  ClipRecord c;
  c.id = make_clip_id(video_id, start_s);
  c.source = source;
  c.video_id = video_id;
  c.start_s = start_s;
  c.labels = std::move(labels);
  c.media.video_uri = "file:///media/video/" + video_id + ".mp4";
  c.media.audio_uri = "file:///media/audio/" + video_id + ".wav";
  return c;
}

/// 50 AudioSet clips; clip i carries both Speech and Music iff i % 4 == 1
/// and i < 48 (12 clips). Others carry at most one of the two.
inline std::vector<ClipRecord> label_manifest_50() {
  std::vector<ClipRecord> out;
  const std::vector<std::string> other = {"Dog", "Vehicle", "Rain", "Bird", "Engine", "Water"};
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> labels{other[i % other.size()]};
    if (i % 4 == 1 && i < 48) {
      labels = {"Speech", other[i % other.size()], "Music"};
    } else if (i % 4 == 2) {
      labels.push_back("Speech");
    } else if (i % 4 == 3) {
      labels.push_back("Music");
    } else if (i % 8 == 0) {
      labels.push_back("Musical instrument");  // near miss, not "Music"
    }
    out.push_back(make_clip("lbl" + std::to_string(1000 + i), 10.0 * i, Source::kAudioSet, labels));
  }
  return out;
}

/// 1000 reviewed captions: 924 correspond, modified/total word sums of
/// 530/10000 and 42 inaudible flags.
inline std::vector<CaptionRecord> manual_check_reviews() {
  std::vector<CaptionRecord> out;
  for (int i = 0; i < 1000; ++i) {
    CaptionRecord r;
    r.clip_id = "mc" + std::to_string(i) + "_0";
    r.caption = "a dog barks while a car passes on the road";  // 10 words
    r.prompt_hash = std::string(64, 'a');
    r.llm_model = "synthetic";
    Review rev;
    rev.verdict = i < 924 ? ReviewVerdict::kCorrespond : ReviewVerdict::kNotCorrespond;
    rev.total_word_count = 10;
    if (i < 106) {
      rev.edited_caption = "a dog howls as a truck drives on the street";
      rev.modified_word_count = 5;
    }
    rev.inaudible = i >= 500 && i < 542;
    rev.reviewer = "r" + std::to_string(i % 3);
    rev.timestamp = "2026-01-01T00:00:00Z";
    r.review = rev;
    out.push_back(std::move(r));
  }
  return out;
}

/// 200 clue reviews with per-tool correct counts 183, 151, 161, 145, 181,
/// 154 (image_caption, object_detection, image_label, place, audio_tags,
/// audio_caption), 176 correct captions, and 188 samples with at least
/// four correct clues.
inline std::vector<ToolReview> tool_reviews_200() {
  constexpr int kSamples = 200;
  const std::vector<std::pair<Tool, int>> wrong = {
      {Tool::kImageCaption, 17}, {Tool::kObjectDetection, 49}, {Tool::kImageLabel, 39},
      {Tool::kPlace, 55},        {Tool::kAudioTags, 19},       {Tool::kAudioCaption, 46}};
  // Wrong-clue budget per sample: 12 samples with 3, one with 2, the rest 1.
  std::vector<int> capacity(kSamples, 1);
  for (int i = 0; i < 12; ++i) capacity[i] = 3;
  capacity[12] = 2;
  std::vector<ToolReview> out(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    out[i].clip_id = "tr" + std::to_string(i) + "_0";
    for (Tool t : kRemoteTools) out[i].per_tool_correct[t] = true;
    out[i].caption_correct = i < 176;
  }
  auto order = wrong;
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tool, count] : order) {
    std::vector<int> idx(kSamples);
    for (int i = 0; i < kSamples; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return capacity[a] > capacity[b]; });
    for (int k = 0; k < count; ++k) {
      out[idx[k]].per_tool_correct[tool] = false;
      --capacity[idx[k]];
    }
  }
  return out;
}

inline std::vector<std::string> word_pool() {
  return {"a",    "dog",   "barks", "loudly", "while", "car",  "engine", "revs",
          "in",   "the",   "rain",  "birds",  "chirp", "man",  "speaks", "crowd",
          "cheers", "water", "flows", "wind",  "blows", "train", "passes", "nearby"};
}

inline std::string random_sentence(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  const auto pool = word_pool();
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + pool[pick(rng)];
  return s;
}

}  // namespace clipcurate::synth
