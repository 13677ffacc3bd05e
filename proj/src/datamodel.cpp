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

#include "clipcurate/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "clipcurate/errors.hpp"
#include "clipcurate/text.hpp"

namespace clipcurate {

ManifestError::ManifestError(std::vector<ManifestIssue> issues)
    : Error([&] {
        std::string msg = "manifest has " + std::to_string(issues.size()) +
                          " invalid line(s)";
        if (!issues.empty()) {
          const auto& first = issues.front();
          msg += "; first at line " + std::to_string(first.line) + ": " +
                 first.message;
        }
        return msg;
      }()),
      issues_(std::move(issues)) {}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table,
             const std::string& field) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw ValidationError(field, "unknown value '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Source, std::string_view>, 2> kSourceNames{{
    {Source::kAudioSet, "audioset"},
    {Source::kVggSound, "vggsound"},
}};

constexpr std::array<std::pair<Tool, std::string_view>, 7> kToolNames{{
    {Tool::kImageCaption, "image_caption"},
    {Tool::kObjectDetection, "object_detection"},
    {Tool::kImageLabel, "image_label"},
    {Tool::kPlace, "place"},
    {Tool::kAudioTags, "audio_tags"},
    {Tool::kAudioCaption, "audio_caption"},
    {Tool::kDatasetLabels, "dataset_labels"},
}};

constexpr std::array<std::pair<LabelFilterResult, std::string_view>, 2>
    kLabelFilterNames{{
        {LabelFilterResult::kPass, "pass"},
        {LabelFilterResult::kRemovedSpeechMusic, "removed_speech_music"},
    }};

constexpr std::array<std::pair<TrialClass, std::string_view>, 3>
    kTrialClassNames{{
        {TrialClass::kCorrect, "correct"},
        {TrialClass::kTolerable, "tolerable"},
        {TrialClass::kError, "error"},
    }};

constexpr std::array<std::pair<SyncFilterResult, std::string_view>, 3>
    kSyncFilterNames{{
        {SyncFilterResult::kPass, "pass"},
        {SyncFilterResult::kRemovedAllError, "removed_all_error"},
        {SyncFilterResult::kSkipped, "skipped"},
    }};

constexpr std::array<std::pair<FinalDecision, std::string_view>, 2>
    kFinalNames{{
        {FinalDecision::kKept, "kept"},
        {FinalDecision::kRemoved, "removed"},
    }};

constexpr std::array<std::pair<ReviewVerdict, std::string_view>, 2>
    kVerdictNames{{
        {ReviewVerdict::kCorrespond, "correspond"},
        {ReviewVerdict::kNotCorrespond, "not_correspond"},
    }};

// Field accessors. Each names the full dotted path on failure.
const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError(path.empty() ? key : path + "." + key,
                          "missing required field");
  }
  return *it;
}

std::string join_path(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

std::string get_string(const Json& j, const char* key,
                       const std::string& path = {}) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) throw ValidationError(join_path(path, key), "expected a string");
  return v.get<std::string>();
}

double get_number(const Json& j, const char* key, const std::string& path = {}) {
  const Json& v = require(j, key, path);
  if (!v.is_number()) throw ValidationError(join_path(path, key), "expected a number");
  return v.get<double>();
}

long long get_integer(const Json& j, const char* key,
                      const std::string& path = {}) {
  const Json& v = require(j, key, path);
  if (!v.is_number_integer()) {
    throw ValidationError(join_path(path, key), "expected an integer");
  }
  return v.get<long long>();
}

bool get_bool(const Json& j, const char* key, const std::string& path = {}) {
  const Json& v = require(j, key, path);
  if (!v.is_boolean()) throw ValidationError(join_path(path, key), "expected a boolean");
  return v.get<bool>();
}

std::vector<std::string> get_string_list(const Json& j, const char* key,
                                         const std::string& path = {}) {
  const Json& v = require(j, key, path);
  const std::string p = join_path(path, key);
  if (!v.is_array()) throw ValidationError(p, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      throw ValidationError(p + "[" + std::to_string(i) + "]", "expected a string");
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

const Json& get_array(const Json& j, const char* key, const std::string& path = {}) {
  const Json& v = require(j, key, path);
  if (!v.is_array()) throw ValidationError(join_path(path, key), "expected an array");
  return v;
}

void check_unit_interval(double v, const std::string& field) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw ValidationError(field, "must lie in [0, 1]");
  }
}

}  // namespace

std::string_view to_string(Source v) { return enum_name(v, kSourceNames); }
std::string_view to_string(Tool v) { return enum_name(v, kToolNames); }
std::string_view to_string(LabelFilterResult v) { return enum_name(v, kLabelFilterNames); }
std::string_view to_string(TrialClass v) { return enum_name(v, kTrialClassNames); }
std::string_view to_string(SyncFilterResult v) { return enum_name(v, kSyncFilterNames); }
std::string_view to_string(FinalDecision v) { return enum_name(v, kFinalNames); }
std::string_view to_string(ReviewVerdict v) { return enum_name(v, kVerdictNames); }

Source parse_source(std::string_view s, const std::string& field) {
  return parse_enum(s, kSourceNames, field);
}
Tool parse_tool(std::string_view s, const std::string& field) {
  return parse_enum(s, kToolNames, field);
}
LabelFilterResult parse_label_filter_result(std::string_view s, const std::string& field) {
  return parse_enum(s, kLabelFilterNames, field);
}
TrialClass parse_trial_class(std::string_view s, const std::string& field) {
  return parse_enum(s, kTrialClassNames, field);
}
SyncFilterResult parse_sync_filter_result(std::string_view s, const std::string& field) {
  return parse_enum(s, kSyncFilterNames, field);
}
FinalDecision parse_final_decision(std::string_view s, const std::string& field) {
  return parse_enum(s, kFinalNames, field);
}
ReviewVerdict parse_review_verdict(std::string_view s, const std::string& field) {
  return parse_enum(s, kVerdictNames, field);
}

std::string make_clip_id(std::string_view video_id, double start_s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld",
                static_cast<long long>(std::floor(start_s)));
  return std::string(video_id) + "_" + buf;
}

// ---------------------------------------------------------------------------
// Validation

void ClipRecord::validate() const {
  if (video_id.empty()) throw ValidationError("video_id", "must be non-empty");
  if (!std::isfinite(start_s) || start_s < 0.0) {
    throw ValidationError("start_s", "must be finite and >= 0");
  }
  if (dur_s != kClipDurationS) {
    throw ValidationError("dur_s", "clips are fixed 10-second segments");
  }
  if (id != make_clip_id(video_id, start_s)) {
    throw ValidationError("id", "expected '" + make_clip_id(video_id, start_s) + "'");
  }
  if (source == Source::kVggSound && labels.size() != 1) {
    throw ValidationError("labels", "vggsound clips carry exactly one label");
  }
  if (source == Source::kAudioSet && labels.empty()) {
    throw ValidationError("labels", "audioset clips carry at least one label");
  }
}

void Clue::validate() const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].confidence) {
      check_unit_interval(*items[i].confidence,
                          "items[" + std::to_string(i) + "].confidence");
    }
  }
  if (tool == Tool::kAudioTags && items.size() > kMaxAudioTags) {
    throw ValidationError("items", "audio_tags keeps at most 3 predictions");
  }
}

void CluePacket::validate() const {
  if (clip_id.empty()) throw ValidationError("clip_id", "must be non-empty");
  std::set<Tool> seen;
  for (std::size_t i = 0; i < clues.size(); ++i) {
    const std::string prefix = "clues[" + std::to_string(i) + "]";
    try {
      clues[i].validate();
    } catch (const ValidationError& e) {
      throw ValidationError(prefix + "." + e.field(), e.what());
    }
    if (!seen.insert(clues[i].tool).second) {
      throw ValidationError(prefix + ".tool", "duplicate tool '" +
                                                  std::string(to_string(clues[i].tool)) + "'");
    }
  }
}

const Clue* CluePacket::find(Tool tool) const {
  for (const auto& c : clues) {
    if (c.tool == tool) return &c;
  }
  return nullptr;
}

void CaptionRecord::validate() const {
  if (clip_id.empty()) throw ValidationError("clip_id", "must be non-empty");
  if (trim(caption).empty()) throw ValidationError("caption", "must be non-empty");
  if (review) {
    if (review->modified_word_count < 0) {
      throw ValidationError("review.modified_word_count", "must be >= 0");
    }
    if (review->total_word_count < 1) {
      throw ValidationError("review.total_word_count", "must be >= 1");
    }
    if (review->modified_word_count > review->total_word_count) {
      throw ValidationError("review.modified_word_count",
                            "exceeds review.total_word_count");
    }
    if (review->edited_caption && trim(*review->edited_caption).empty()) {
      throw ValidationError("review.edited_caption", "must be non-empty when present");
    }
  }
}

const std::string& CaptionRecord::final_caption() const {
  if (review && review->edited_caption) return *review->edited_caption;
  return caption;
}

void FilterVerdict::validate() const {
  if (clip_id.empty()) throw ValidationError("clip_id", "must be non-empty");
  if (sync_filter == SyncFilterResult::kSkipped) {
    if (!sync_trials.empty()) {
      throw ValidationError("sync_trials", "must be empty when sync_filter is skipped");
    }
  } else {
    if (sync_trials.size() != kSyncTrials) {
      throw ValidationError("sync_trials", "must hold exactly 5 trials");
    }
    bool all_error = true;
    for (std::size_t i = 0; i < sync_trials.size(); ++i) {
      const auto& t = sync_trials[i];
      const std::string p = "sync_trials[" + std::to_string(i) + "]";
      if (!std::isfinite(t.true_offset_s)) {
        throw ValidationError(p + ".true_offset_s", "must be finite");
      }
      if (t.pred_offset_s && !std::isfinite(*t.pred_offset_s)) {
        throw ValidationError(p + ".pred_offset_s", "must be finite");
      }
      if (!t.pred_offset_s && t.cls != TrialClass::kError) {
        throw ValidationError(p + ".class", "unanswered trials are error-class");
      }
      all_error = all_error && t.cls == TrialClass::kError;
    }
    if ((sync_filter == SyncFilterResult::kRemovedAllError) != all_error) {
      throw ValidationError("sync_filter",
                            "removed_all_error must match all five trials being error");
    }
  }
  const bool should_remove = label_filter == LabelFilterResult::kRemovedSpeechMusic ||
                             sync_filter == SyncFilterResult::kRemovedAllError;
  if ((final == FinalDecision::kRemoved) != should_remove) {
    throw ValidationError("final", "inconsistent with label_filter/sync_filter");
  }
}

// ---------------------------------------------------------------------------
// JSON encoding

Json to_json(const ClipRecord& r) {
  Json j;
  j["id"] = r.id;
  j["source"] = to_string(r.source);
  j["video_id"] = r.video_id;
  j["start_s"] = r.start_s;
  j["dur_s"] = r.dur_s;
  j["labels"] = r.labels;
  j["media"] = Json{{"video_uri", r.media.video_uri}, {"audio_uri", r.media.audio_uri}};
  return j;
}

Json to_json(const Clue& r) {
  Json j;
  j["tool"] = to_string(r.tool);
  Json items = Json::array();
  for (const auto& it : r.items) {
    Json item;
    item["text"] = it.text;
    if (it.confidence) item["confidence"] = *it.confidence;
    items.push_back(std::move(item));
  }
  j["items"] = std::move(items);
  return j;
}

Json to_json(const CluePacket& r) {
  Json j;
  j["clip_id"] = r.clip_id;
  Json clues = Json::array();
  for (const auto& c : r.clues) clues.push_back(to_json(c));
  j["clues"] = std::move(clues);
  return j;
}

Json to_json(const Review& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  if (r.edited_caption) j["edited_caption"] = *r.edited_caption;
  j["modified_word_count"] = r.modified_word_count;
  j["total_word_count"] = r.total_word_count;
  j["inaudible"] = r.inaudible;
  j["reviewer"] = r.reviewer;
  j["timestamp"] = r.timestamp;
  return j;
}

Json to_json(const CaptionRecord& r) {
  Json j;
  j["clip_id"] = r.clip_id;
  j["caption"] = r.caption;
  j["prompt_hash"] = r.prompt_hash;
  j["llm_model"] = r.llm_model;
  j["flags"] = Json{{"inaudible_terms", r.flags.inaudible_terms}};
  if (r.review) j["review"] = to_json(*r.review);
  return j;
}

Json to_json(const FilterVerdict& r) {
  Json j;
  j["clip_id"] = r.clip_id;
  j["label_filter"] = to_string(r.label_filter);
  Json trials = Json::array();
  for (const auto& t : r.sync_trials) {
    Json tj;
    tj["true_offset_s"] = t.true_offset_s;
    tj["pred_offset_s"] = t.pred_offset_s ? Json(*t.pred_offset_s) : Json(nullptr);
    tj["class"] = to_string(t.cls);
    trials.push_back(std::move(tj));
  }
  j["sync_trials"] = std::move(trials);
  j["sync_filter"] = to_string(r.sync_filter);
  j["final"] = to_string(r.final);
  return j;
}

void from_json(const Json& j, ClipRecord& r) {
  r.id = get_string(j, "id");
  r.source = parse_source(get_string(j, "source"), "source");
  r.video_id = get_string(j, "video_id");
  r.start_s = get_number(j, "start_s");
  r.dur_s = get_number(j, "dur_s");
  r.labels = get_string_list(j, "labels");
  const Json& media = require(j, "media", "");
  r.media.video_uri = get_string(media, "video_uri", "media");
  r.media.audio_uri = get_string(media, "audio_uri", "media");
  r.validate();
}

void from_json(const Json& j, Clue& r) {
  r.tool = parse_tool(get_string(j, "tool"), "tool");
  const Json& items = get_array(j, "items");
  r.items.clear();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string p = "items[" + std::to_string(i) + "]";
    ClueItem item;
    item.text = get_string(items[i], "text", p);
    auto it = items[i].find("confidence");
    if (it != items[i].end() && !it->is_null()) {
      if (!it->is_number()) throw ValidationError(p + ".confidence", "expected a number");
      item.confidence = it->get<double>();
    }
    r.items.push_back(std::move(item));
  }
  r.validate();
}

void from_json(const Json& j, CluePacket& r) {
  r.clip_id = get_string(j, "clip_id");
  const Json& clues = get_array(j, "clues");
  r.clues.clear();
  for (std::size_t i = 0; i < clues.size(); ++i) {
    Clue c;
    try {
      from_json(clues[i], c);
    } catch (const ValidationError& e) {
      throw ValidationError("clues[" + std::to_string(i) + "]." + e.field(), e.what());
    }
    r.clues.push_back(std::move(c));
  }
  r.validate();
}

void from_json(const Json& j, Review& r) {
  r.verdict = parse_review_verdict(get_string(j, "verdict", "review"), "review.verdict");
  r.edited_caption.reset();
  auto it = j.find("edited_caption");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("review.edited_caption", "expected a string");
    r.edited_caption = it->get<std::string>();
  }
  r.modified_word_count = get_integer(j, "modified_word_count", "review");
  r.total_word_count = get_integer(j, "total_word_count", "review");
  r.inaudible = get_bool(j, "inaudible", "review");
  r.reviewer = get_string(j, "reviewer", "review");
  r.timestamp = get_string(j, "timestamp", "review");
}

void from_json(const Json& j, CaptionRecord& r) {
  r.clip_id = get_string(j, "clip_id");
  r.caption = get_string(j, "caption");
  r.prompt_hash = get_string(j, "prompt_hash");
  r.llm_model = get_string(j, "llm_model");
  const Json& flags = require(j, "flags", "");
  r.flags.inaudible_terms = get_string_list(flags, "inaudible_terms", "flags");
  r.review.reset();
  auto it = j.find("review");
  if (it != j.end() && !it->is_null()) {
    Review review;
    from_json(*it, review);
    r.review = std::move(review);
  }
  r.validate();
}

void from_json(const Json& j, FilterVerdict& r) {
  r.clip_id = get_string(j, "clip_id");
  r.label_filter = parse_label_filter_result(get_string(j, "label_filter"), "label_filter");
  const Json& trials = get_array(j, "sync_trials");
  r.sync_trials.clear();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const std::string p = "sync_trials[" + std::to_string(i) + "]";
    SyncTrial t;
    t.true_offset_s = get_number(trials[i], "true_offset_s", p);
    const Json& pred = require(trials[i], "pred_offset_s", p);
    if (pred.is_number()) {
      t.pred_offset_s = pred.get<double>();
    } else if (!pred.is_null()) {
      throw ValidationError(p + ".pred_offset_s", "expected a number or null");
    }
    t.cls = parse_trial_class(get_string(trials[i], "class", p), p + ".class");
    r.sync_trials.push_back(t);
  }
  r.sync_filter = parse_sync_filter_result(get_string(j, "sync_filter"), "sync_filter");
  r.final = parse_final_decision(get_string(j, "final"), "final");
  r.validate();
}

// ---------------------------------------------------------------------------
// Manifests

namespace {

template <typename Record>
void check_duplicates(const std::vector<Record>&, const std::vector<std::size_t>&,
                      std::vector<ManifestIssue>&) {}

template <>
void check_duplicates(const std::vector<ClipRecord>& records,
                      const std::vector<std::size_t>& lines,
                      std::vector<ManifestIssue>& issues) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!seen.insert(records[i].id).second) {
      issues.push_back({lines[i], "id", "duplicate clip id '" + records[i].id + "'"});
    }
  }
}

}  // namespace

template <typename Record>
std::vector<Record> parse_manifest(std::string_view bytes) {
  std::vector<Record> records;
  std::vector<std::size_t> record_lines;
  std::vector<ManifestIssue> issues;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      issues.push_back({line_no, "", std::string("malformed JSON: ") + e.what()});
      continue;
    }
    try {
      Record r;
      from_json(j, r);
      records.push_back(std::move(r));
      record_lines.push_back(line_no);
    } catch (const ValidationError& e) {
      issues.push_back({line_no, e.field(), e.what()});
    }
  }
  check_duplicates(records, record_lines, issues);
  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const auto& a, const auto& b) { return a.line < b.line; });
    throw ManifestError(std::move(issues));
  }
  return records;
}

Manifest parse_manifest(std::string_view bytes, ManifestKind kind) {
  switch (kind) {
    case ManifestKind::kClips:
      return parse_manifest<ClipRecord>(bytes);
    case ManifestKind::kClues:
      return parse_manifest<CluePacket>(bytes);
    case ManifestKind::kCaptions:
      return parse_manifest<CaptionRecord>(bytes);
    case ManifestKind::kVerdicts:
      return parse_manifest<FilterVerdict>(bytes);
  }
  throw ContractError("unknown manifest kind");
}

namespace {

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
}

}  // namespace

std::string serialize_line(const ClipRecord& r) { return dump_line(to_json(r)); }
std::string serialize_line(const CluePacket& r) { return dump_line(to_json(r)); }
std::string serialize_line(const CaptionRecord& r) { return dump_line(to_json(r)); }
std::string serialize_line(const FilterVerdict& r) { return dump_line(to_json(r)); }

template <typename Record>
std::string serialize_manifest(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) out += serialize_line(r);
  return out;
}

template std::vector<ClipRecord> parse_manifest<ClipRecord>(std::string_view);
template std::vector<CluePacket> parse_manifest<CluePacket>(std::string_view);
template std::vector<CaptionRecord> parse_manifest<CaptionRecord>(std::string_view);
template std::vector<FilterVerdict> parse_manifest<FilterVerdict>(std::string_view);
template std::string serialize_manifest(const std::vector<ClipRecord>&);
template std::string serialize_manifest(const std::vector<CluePacket>&);
template std::string serialize_manifest(const std::vector<CaptionRecord>&);
template std::string serialize_manifest(const std::vector<FilterVerdict>&);

}  // namespace clipcurate
