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

#include "clipcurate/review_service.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>

#include "clipcurate/curation_store.hpp"
#include "clipcurate/errors.hpp"
#include "clipcurate/pipeline.hpp"
#include "clipcurate/random.hpp"
#include "clipcurate/text.hpp"

namespace clipcurate {

namespace fs = std::filesystem;

namespace {

ApiResponse error_response(int status, const std::string& message) {
  Json body;
  body["error"] = message;
  return {status, std::move(body)};
}

template <typename Record>
std::vector<Record> read_if_present(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return parse_manifest<Record>(read_text_file(path));
}

}  // namespace

ReviewService::ReviewService(ReviewServiceOptions options) : options_(std::move(options)) {
  if (options_.place_lexicon.empty()) options_.place_lexicon = default_place_lexicon();
  if (!options_.clock) options_.clock = iso8601_now;
  if (!fs::is_directory(options_.workspace)) {
    throw ConfigError("workspace does not exist: " + options_.workspace.string());
  }
  reload();
}

std::uint64_t ReviewService::queue_key(std::uint64_t seed, const std::string& clip_id) {
  return SeededRng(seed, clip_id).next();
}

void ReviewService::reload() {
  const fs::path ws = options_.workspace;
  const auto history = read_if_present<CaptionRecord>(ws / kCaptionsFile);
  auto latest = latest_captions(history);
  std::map<std::string, std::size_t> counts;
  for (const auto& r : history) {
    if (r.review) ++counts[r.clip_id];
  }
  std::stable_sort(latest.begin(), latest.end(), [&](const auto& a, const auto& b) {
    const auto ka = queue_key(options_.seed, a.clip_id);
    const auto kb = queue_key(options_.seed, b.clip_id);
    return ka != kb ? ka < kb : a.clip_id < b.clip_id;
  });
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < latest.size(); ++i) index[latest[i].clip_id] = i;
  std::map<std::string, CluePacket> clues;
  for (auto& p : read_if_present<CluePacket>(ws / kCluesFile)) clues[p.clip_id] = std::move(p);
  std::map<std::string, ClipRecord> clips;
  for (auto& c : read_if_present<ClipRecord>(ws / kClipsFile)) clips[c.id] = std::move(c);

  std::unique_lock lock(mu_);
  latest_ = std::move(latest);
  index_ = std::move(index);
  clues_ = std::move(clues);
  clips_ = std::move(clips);
  history_count_ = std::move(counts);
}

ApiResponse ReviewService::queue(const std::optional<std::string>& limit) const {
  std::size_t n = static_cast<std::size_t>(-1);
  if (limit) {
    long long v = 0;
    const char* first = limit->data();
    const char* last = first + limit->size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || v <= 0) {
      return error_response(400, "limit must be a positive integer");
    }
    n = static_cast<std::size_t>(v);
  }
  std::shared_lock lock(mu_);
  if (latest_.empty()) return error_response(404, "workspace has no captions");
  Json items = Json::array();
  for (const auto& rec : latest_) {
    if (items.size() >= n) break;
    if (rec.review) continue;
    Json item;
    item["clip_id"] = rec.clip_id;
    item["caption"] = rec.caption;
    auto c = clues_.find(rec.clip_id);
    item["clues"] = c == clues_.end() ? Json::array() : to_json(c->second)["clues"];
    item["flags"] = to_json(rec)["flags"];
    auto clip = clips_.find(rec.clip_id);
    if (clip != clips_.end()) item["media"] = to_json(clip->second)["media"];
    items.push_back(std::move(item));
  }
  return {200, std::move(items)};
}

ApiResponse ReviewService::submit(std::string_view body, bool force) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    return error_response(400, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) return error_response(400, "body must be a JSON object");

  std::string clip_id, reviewer;
  ReviewVerdict verdict;
  std::optional<std::string> edited;
  long long modified = 0;
  bool inaudible = false;
  try {
    clip_id = j.at("clip_id").get<std::string>();
    verdict = parse_review_verdict(j.at("verdict").get<std::string>(), "verdict");
    if (j.contains("edited_caption") && !j["edited_caption"].is_null()) {
      edited = j["edited_caption"].get<std::string>();
    }
    const Json& m = j.at("modified_word_count");
    if (!m.is_number_integer()) return error_response(400, "modified_word_count must be an integer");
    modified = m.get<long long>();
    inaudible = j.at("inaudible").get<bool>();
    reviewer = j.at("reviewer").get<std::string>();
    if (j.contains("force")) force = force || j["force"].get<bool>();
  } catch (const Json::exception& e) {
    return error_response(400, std::string("invalid submission: ") + e.what());
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  }

  if (modified < 0) return error_response(422, "modified_word_count must be >= 0");
  if (edited && modified < 1) {
    return error_response(422, "an edited caption needs modified_word_count >= 1");
  }
  if (edited && trim(*edited).empty()) return error_response(422, "edited_caption is blank");

  std::unique_lock lock(mu_);
  auto it = index_.find(clip_id);
  if (it == index_.end()) return error_response(404, "unknown clip: " + clip_id);
  CaptionRecord rec = latest_[it->second];
  if (rec.review && !force) {
    return error_response(409, "clip " + clip_id + " is already reviewed; resubmit with force");
  }

  Review review;
  review.verdict = verdict;
  review.edited_caption = edited;
  review.modified_word_count = modified;
  review.inaudible = inaudible;
  review.reviewer = reviewer;
  review.timestamp = options_.clock();
  const std::string& final_text = edited ? *edited : rec.caption;
  review.total_word_count = static_cast<long long>(tokenize_words(final_text).size());
  if (review.total_word_count < 1) return error_response(422, "final caption has no words");
  if (modified > review.total_word_count) {
    return error_response(422, "modified_word_count exceeds the caption's " +
                                   std::to_string(review.total_word_count) + " words");
  }
  rec.review = std::move(review);
  try {
    rec.validate();
  } catch (const ValidationError& e) {
    return error_response(422, e.what());
  }

  const std::vector<CaptionRecord> batch{rec};
  JsonlStore(options_.workspace / kCaptionsFile).append<CaptionRecord>(batch);
  latest_[it->second] = rec;
  ++history_count_[clip_id];
  return {200, to_json(rec)};
}

ApiResponse ReviewService::stats() const {
  std::shared_lock lock(mu_);
  Json body = Json::object();
  std::vector<CaptionRecord> reviewed;
  for (const auto& r : latest_) {
    if (r.review) reviewed.push_back(r);
  }
  if (!latest_.empty()) body["corpus"] = to_json(compute_corpus_stats(latest_, options_.place_lexicon));
  if (!reviewed.empty()) body["manual_check"] = to_json(compute_manual_check_stats(reviewed));
  body["captions"] = latest_.size();
  body["reviewed"] = reviewed.size();
  body["pending"] = latest_.size() - reviewed.size();
  return {200, std::move(body)};
}

ApiResponse ReviewService::sample(const std::string& clip_id) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(clip_id);
  if (it == index_.end()) return error_response(404, "unknown clip: " + clip_id);
  Json body;
  body["caption"] = to_json(latest_[it->second]);
  auto c = clues_.find(clip_id);
  if (c != clues_.end()) body["clues"] = to_json(c->second)["clues"];
  auto clip = clips_.find(clip_id);
  if (clip != clips_.end()) body["clip"] = to_json(clip->second);
  auto h = history_count_.find(clip_id);
  body["review_count"] = h == history_count_.end() ? 0 : h->second;
  return {200, std::move(body)};
}

}  // namespace clipcurate
