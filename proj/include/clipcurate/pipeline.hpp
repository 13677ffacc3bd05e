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
#include <optional>
#include <string>
#include <vector>

#include "clipcurate/curation_store.hpp"
#include "clipcurate/datamodel.hpp"
#include "clipcurate/eval_harness.hpp"
#include "clipcurate/filter_engine.hpp"
#include "clipcurate/prompt_composer.hpp"
#include "clipcurate/tool_gateway.hpp"

namespace clipcurate {

/// Everything a pipeline run needs. Loaded from a JSON config file; CLI
/// flags override individual fields afterwards.
struct RunConfig {
  std::filesystem::path workspace_dir;
  std::uint64_t seed = 0;
  Backend backend = Backend::kReplay;
  std::vector<ToolEndpointConfig> endpoints;
  std::filesystem::path fixtures_dir;  // empty: <workspace>/fixtures
  LabelFilterConfig labels;
  SyncFilterConfig sync;
  std::filesystem::path template_path;  // empty: built-in v1
  std::filesystem::path inaudible_lexicon;  // extra terms, optional
  std::filesystem::path place_lexicon;      // replaces the default, optional
  std::size_t parallelism = 4;

  /// Relative paths in `j` resolve against `base_dir`.
  static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  /// Throws ConfigError. Live runs need every remote service configured.
  void validate() const;
  std::filesystem::path effective_fixtures_dir() const;
  PromptTemplate load_template() const;
  InaudibleLexicon load_inaudible_lexicon() const;
  std::set<std::string> load_place_lexicon() const;
  Json echo() const;
};

/// Advisory lock on <workspace>/.lock; a second writer fails fast.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const std::filesystem::path& workspace);

 private:
  FileLock lock_;
};

struct IngestResult {
  std::size_t records = 0;
  std::vector<std::string> warnings;
};

/// Validates a clip manifest and writes <workspace>/clips.jsonl. Invalid
/// lines and duplicate ids raise ManifestError listing every failure.
IngestResult cmd_ingest(const std::filesystem::path& source_manifest,
                        const std::filesystem::path& workspace);

struct RunSummary {
  std::size_t clips = 0;
  std::size_t kept = 0;
  std::size_t removed_label = 0;
  std::size_t removed_sync = 0;
  std::size_t captions = 0;
  std::size_t tool_failures = 0;
  std::size_t caption_failures = 0;  // live mode only; replay aborts instead

  std::size_t removed() const { return removed_label + removed_sync; }
  Json to_json() const;
};

/// Filters only: writes verdicts.jsonl.
RunSummary cmd_filter(const RunConfig& cfg);

/// Filter, gather clues, caption and QC every kept clip. Rewrites
/// verdicts.jsonl, clues.jsonl and captions.jsonl and appends to
/// ledger.jsonl. In replay mode any missing fixture or failed caption
/// aborts the run with the clip id.
RunSummary cmd_run(const RunConfig& cfg);

/// Corpus statistics, manual-check statistics (when reviews exist) and tool
/// accuracy (when a tool-review manifest is given). Writes
/// reports/stats.json and reports/word_freq.csv.
Json cmd_stats(const std::filesystem::path& workspace, const std::set<std::string>& place_lexicon,
               const std::optional<std::filesystem::path>& tool_reviews);

/// Writes reports/split.json.
BenchmarkSplit cmd_split(const std::filesystem::path& workspace, std::uint64_t seed,
                         std::size_t n_val, std::size_t n_test);

enum class EvalKind { kRetrieval, kCaptioning, kZeroShot };
EvalKind parse_eval_kind(std::string_view s);

struct EvalInputs {
  // retrieval / zeroshot
  std::filesystem::path audio_embeddings;
  // retrieval
  std::filesystem::path text_embeddings;
  std::filesystem::path gt;
  std::vector<std::size_t> ks{1, 5, 10};
  // captioning: JSONL of {"id", "candidate", "references": [...]}
  std::filesystem::path pairs;
  std::optional<std::filesystem::path> spice_scores;   // JSON array
  std::optional<std::filesystem::path> meteor_scores;  // JSON array
  std::optional<std::filesystem::path> sbert_candidates;  // embeddings, one row per pair
  std::optional<std::filesystem::path> sbert_references;  // rows for all references, in order
  // zeroshot
  std::filesystem::path labels;         // JSON array of label strings
  std::filesystem::path targets;        // JSON array of label indices per audio row
  std::filesystem::path prompt_table;   // JSONL {"prompt", "embedding"}
  ZeroShotKind zeroshot_kind = ZeroShotKind::kGeneric;
};

/// Runs one evaluation and returns the report (kind, config echo, results).
Json cmd_eval(EvalKind kind, const EvalInputs& inputs);

/// UTC now as "YYYY-MM-DDTHH:MM:SSZ".
std::string iso8601_now();

}  // namespace clipcurate
