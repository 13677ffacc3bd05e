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

// Canonical record types and their JSON-Lines encoding.
//
// Every manifest is newline-delimited JSON, one record per line. Keys are
// emitted in the declaration order of the struct fields below; optional
// fields are omitted when absent. Doubles are written in shortest
// round-trip form, so parse(serialize(x)) == x holds bit-for-bit.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace clipcurate {

using Json = nlohmann::ordered_json;

inline constexpr double kClipDurationS = 10.0;

enum class Source { kAudioSet, kVggSound };

/// The seven clue sources. Order here is the fixed prompt section order.
enum class Tool {
  kImageCaption,
  kObjectDetection,
  kImageLabel,
  kPlace,
  kAudioTags,
  kAudioCaption,
  kDatasetLabels,
};

inline constexpr std::array<Tool, 7> kAllTools = {
    Tool::kImageCaption, Tool::kObjectDetection, Tool::kImageLabel,
    Tool::kPlace,        Tool::kAudioTags,       Tool::kAudioCaption,
    Tool::kDatasetLabels};

/// Tools backed by a remote model (everything except dataset_labels).
inline constexpr std::array<Tool, 6> kRemoteTools = {
    Tool::kImageCaption, Tool::kObjectDetection, Tool::kImageLabel,
    Tool::kPlace,        Tool::kAudioTags,       Tool::kAudioCaption};

inline constexpr std::size_t kMaxAudioTags = 3;

enum class LabelFilterResult { kPass, kRemovedSpeechMusic };
enum class TrialClass { kCorrect, kTolerable, kError };
enum class SyncFilterResult { kPass, kRemovedAllError, kSkipped };
enum class FinalDecision { kKept, kRemoved };
enum class ReviewVerdict { kCorrespond, kNotCorrespond };

std::string_view to_string(Source v);
std::string_view to_string(Tool v);
std::string_view to_string(LabelFilterResult v);
std::string_view to_string(TrialClass v);
std::string_view to_string(SyncFilterResult v);
std::string_view to_string(FinalDecision v);
std::string_view to_string(ReviewVerdict v);

// Parsers throw ValidationError naming `field` on an unknown value.
Source parse_source(std::string_view s, const std::string& field = "source");
Tool parse_tool(std::string_view s, const std::string& field = "tool");
LabelFilterResult parse_label_filter_result(std::string_view s,
                                            const std::string& field);
TrialClass parse_trial_class(std::string_view s, const std::string& field);
SyncFilterResult parse_sync_filter_result(std::string_view s,
                                          const std::string& field);
FinalDecision parse_final_decision(std::string_view s,
                                   const std::string& field);
ReviewVerdict parse_review_verdict(std::string_view s,
                                   const std::string& field);

struct MediaRefs {
  std::string video_uri;
  std::string audio_uri;
  bool operator==(const MediaRefs&) const = default;
};

struct ClipRecord {
  std::string id;
  Source source = Source::kAudioSet;
  std::string video_id;
  double start_s = 0.0;
  double dur_s = kClipDurationS;
  std::vector<std::string> labels;
  MediaRefs media;

  void validate() const;
  bool operator==(const ClipRecord&) const = default;
};

/// "<video_id>_<start_s as integer seconds>".
std::string make_clip_id(std::string_view video_id, double start_s);

struct ClueItem {
  std::string text;
  std::optional<double> confidence;
  bool operator==(const ClueItem&) const = default;
};

struct Clue {
  Tool tool = Tool::kDatasetLabels;
  std::vector<ClueItem> items;

  void validate() const;
  bool operator==(const Clue&) const = default;
};

struct CluePacket {
  std::string clip_id;
  std::vector<Clue> clues;

  void validate() const;
  const Clue* find(Tool tool) const;
  bool operator==(const CluePacket&) const = default;
};

struct CaptionFlags {
  std::vector<std::string> inaudible_terms;
  bool operator==(const CaptionFlags&) const = default;
};

struct Review {
  ReviewVerdict verdict = ReviewVerdict::kCorrespond;
  std::optional<std::string> edited_caption;
  long long modified_word_count = 0;
  long long total_word_count = 1;
  bool inaudible = false;
  std::string reviewer;
  std::string timestamp;  // ISO-8601

  bool operator==(const Review&) const = default;
};

struct CaptionRecord {
  std::string clip_id;
  std::string caption;
  std::string prompt_hash;
  std::string llm_model;
  CaptionFlags flags;
  std::optional<Review> review;

  void validate() const;
  /// The reviewer's edit when there is one, otherwise the generated caption.
  const std::string& final_caption() const;
  bool operator==(const CaptionRecord&) const = default;
};

struct SyncTrial {
  double true_offset_s = 0.0;
  // Absent when the sync tool failed to answer; such trials are error-class.
  std::optional<double> pred_offset_s;
  TrialClass cls = TrialClass::kError;
  bool operator==(const SyncTrial&) const = default;
};

inline constexpr std::size_t kSyncTrials = 5;

struct FilterVerdict {
  std::string clip_id;
  LabelFilterResult label_filter = LabelFilterResult::kPass;
  std::vector<SyncTrial> sync_trials;
  SyncFilterResult sync_filter = SyncFilterResult::kSkipped;
  FinalDecision final = FinalDecision::kKept;

  void validate() const;
  bool operator==(const FilterVerdict&) const = default;
};

// JSON mapping. from_json functions throw ValidationError with dotted field
// paths ("media.video_uri", "sync_trials[2].class").
Json to_json(const ClipRecord& r);
Json to_json(const Clue& r);
Json to_json(const CluePacket& r);
Json to_json(const CaptionRecord& r);
Json to_json(const Review& r);
Json to_json(const FilterVerdict& r);

void from_json(const Json& j, ClipRecord& r);
void from_json(const Json& j, Clue& r);
void from_json(const Json& j, CluePacket& r);
void from_json(const Json& j, CaptionRecord& r);
void from_json(const Json& j, Review& r);
void from_json(const Json& j, FilterVerdict& r);

enum class ManifestKind { kClips, kClues, kCaptions, kVerdicts };

using Manifest =
    std::variant<std::vector<ClipRecord>, std::vector<CluePacket>,
                 std::vector<CaptionRecord>, std::vector<FilterVerdict>>;

/// Parses newline-delimited JSON into validated records. Blank lines are
/// skipped. Every bad line is collected and reported together in a
/// ManifestError. Clip manifests additionally reject duplicate ids.
template <typename Record>
std::vector<Record> parse_manifest(std::string_view bytes);

Manifest parse_manifest(std::string_view bytes, ManifestKind kind);

template <typename Record>
std::string serialize_manifest(const std::vector<Record>& records);

std::string serialize_line(const ClipRecord& r);
std::string serialize_line(const CluePacket& r);
std::string serialize_line(const CaptionRecord& r);
std::string serialize_line(const FilterVerdict& r);

// Conventional manifest file names inside a workspace.
inline constexpr std::string_view kClipsFile = "clips.jsonl";
inline constexpr std::string_view kCluesFile = "clues.jsonl";
inline constexpr std::string_view kCaptionsFile = "captions.jsonl";
inline constexpr std::string_view kVerdictsFile = "verdicts.jsonl";
inline constexpr std::string_view kLedgerFile = "ledger.jsonl";

}  // namespace clipcurate
