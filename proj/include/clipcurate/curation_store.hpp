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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "clipcurate/datamodel.hpp"

namespace clipcurate {

struct CorpusStats {
  std::size_t pair_count = 0;
  double avg_sentence_len = 0.0;
  std::size_t vocab_size = 0;
  std::map<std::string, std::size_t> word_freq;
  double env_caption_ratio = 0.0;

  bool operator==(const CorpusStats&) const = default;
};

struct ManualCheckStats {
  double correspondence = 0.0;
  double modification = 0.0;
  double inaudibility = 0.0;
  std::size_t n_reviewed = 0;

  bool operator==(const ManualCheckStats&) const = default;
};

/// One reviewer's judgement of the six model-produced clues for a clip.
struct ToolReview {
  std::string clip_id;
  std::map<Tool, bool> per_tool_correct;
  bool caption_correct = false;
};

struct ToolAccuracyStats {
  std::map<Tool, double> per_tool;
  double mean_accuracy = 0.0;
  double caption_accuracy = 0.0;
  /// number of correct clues in a sample -> number of samples
  std::map<int, std::size_t> min_correct_clues_histogram;
  std::size_t n_reviewed = 0;
};

struct BenchmarkSplit {
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
};

/// Built-in place/environment words for env_caption_ratio.
std::set<std::string> default_place_lexicon();

/// Statistics over each record's final caption (the reviewer edit when
/// present). Throws ContractError on empty input.
CorpusStats compute_corpus_stats(std::span<const CaptionRecord> captions,
                                 const std::set<std::string>& place_lexicon);

/// Seeded shuffle of the clip ids; the first n_val form validation, the
/// next n_test form test. Stable across platforms for a given seed.
BenchmarkSplit sample_benchmark_split(std::span<const ClipRecord> clips,
                                      std::uint64_t seed, std::size_t n_val,
                                      std::size_t n_test);

/// Ratios over reviewed records. modification is word-level:
/// sum(modified_word_count) / sum(total_word_count).
ManualCheckStats compute_manual_check_stats(std::span<const CaptionRecord> reviews);

/// Each record must cover all six remote tools (ValidationError otherwise).
ToolAccuracyStats compute_tool_accuracy(std::span<const ToolReview> reviews);

Json to_json(const CorpusStats& s);
Json to_json(const ManualCheckStats& s);
Json to_json(const ToolAccuracyStats& s);
Json to_json(const BenchmarkSplit& s);
Json to_json(const ToolReview& r);
void from_json(const Json& j, ToolReview& r);

/// word,count rows sorted by descending count then word.
std::string word_freq_csv(const CorpusStats& s);

/// Latest record per clip id (later lines supersede earlier ones), in
/// order of first appearance.
std::vector<CaptionRecord> latest_captions(std::span<const CaptionRecord> history);

std::string read_text_file(const std::filesystem::path& path);

/// Replaces `path` atomically (temp file in the same directory, fsync,
/// rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Exclusive advisory lock on a file (flock). Also serializes threads of
/// this process that lock the same path.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& lock_path, bool blocking = true);
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  ~FileLock();

 private:
  struct State;
  State* state_;
};

/// Append-only JSON-Lines store for one manifest file. Each append writes
/// existing + new lines to a temp file and renames it over the original
/// under the store lock ("<path>.lock"), so readers never observe a torn
/// line and a failed append leaves the file unchanged.
class JsonlStore {
 public:
  explicit JsonlStore(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const { return path_; }

  template <typename Record>
  std::size_t append(std::span<const Record> records);

  template <typename Record>
  std::vector<Record> read_all() const;

 private:
  std::size_t append_bytes(const std::string& lines, std::size_t count);

  std::filesystem::path path_;
};

template <typename Record>
std::size_t append_records(const std::filesystem::path& path,
                           std::span<const Record> records) {
  return JsonlStore(path).append(records);
}

}  // namespace clipcurate
