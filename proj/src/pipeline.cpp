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

#include "clipcurate/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <mutex>

#include "clipcurate/errors.hpp"
#include "clipcurate/text.hpp"
#include "clipcurate/worker_pool.hpp"

namespace clipcurate {

namespace fs = std::filesystem;

std::string iso8601_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Config

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::set<std::string> string_set(const Json& j, const char* field) {
  if (!j.is_array()) throw ConfigError(std::string(field) + " must be an array of strings");
  std::set<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(std::string(field) + " must be an array of strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    c.workspace_dir = resolve(base_dir, j.value("workspace", std::string()));
    c.seed = j.value("seed", std::uint64_t{0});
    c.backend = parse_backend(j.value("backend", std::string("replay")));
    c.fixtures_dir = resolve(base_dir, j.value("fixtures_dir", std::string()));
    c.template_path = resolve(base_dir, j.value("template", std::string()));
    c.inaudible_lexicon = resolve(base_dir, j.value("inaudible_lexicon", std::string()));
    c.place_lexicon = resolve(base_dir, j.value("place_lexicon", std::string()));
    c.parallelism = j.value("parallelism", c.parallelism);
    if (j.contains("filter")) {
      const Json& f = j["filter"];
      if (f.contains("speech_labels")) c.labels.speech_labels = string_set(f["speech_labels"], "speech_labels");
      if (f.contains("music_labels")) c.labels.music_labels = string_set(f["music_labels"], "music_labels");
      c.sync.tolerance_s = f.value("tolerance_s", c.sync.tolerance_s);
      c.sync.correct_eps_s = f.value("correct_eps_s", c.sync.correct_eps_s);
      c.sync.grid_s = f.value("grid_s", c.sync.grid_s);
      c.sync.max_offset_s = f.value("max_offset_s", c.sync.max_offset_s);
      c.sync.max_start_jitter_s = f.value("max_start_jitter_s", c.sync.max_start_jitter_s);
    }
    if (j.contains("endpoints")) {
      for (const auto& e : j["endpoints"]) {
        ToolEndpointConfig ep;
        clipcurate::from_json(e, ep);
        c.endpoints.push_back(std::move(ep));
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return from_json(j, path.parent_path());
}

void RunConfig::validate() const {
  if (workspace_dir.empty()) throw ConfigError("workspace is not set");
  if (!fs::is_directory(workspace_dir)) {
    throw ConfigError("workspace does not exist: " + workspace_dir.string());
  }
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  labels.validate();
  sync.validate();
  validate_endpoints(endpoints);
  if (backend == Backend::kLive) {
    std::string missing;
    for (Service s : kAllServices) {
      bool found = false;
      for (const auto& e : endpoints) found = found || e.tool == s;
      if (!found) missing += (missing.empty() ? "" : ", ") + std::string(to_string(s));
    }
    if (!missing.empty()) throw ConfigError("live backend needs endpoints for: " + missing);
  } else if (!fs::is_directory(effective_fixtures_dir())) {
    throw ConfigError("replay fixtures directory not found: " + effective_fixtures_dir().string());
  }
}

fs::path RunConfig::effective_fixtures_dir() const {
  return fixtures_dir.empty() ? workspace_dir / "fixtures" : fixtures_dir;
}

PromptTemplate RunConfig::load_template() const {
  return template_path.empty() ? PromptTemplate::builtin() : PromptTemplate::load(template_path);
}

InaudibleLexicon RunConfig::load_inaudible_lexicon() const {
  InaudibleLexicon lex = InaudibleLexicon::defaults();
  if (!inaudible_lexicon.empty()) lex.extend_from_file(inaudible_lexicon);
  return lex;
}

std::set<std::string> RunConfig::load_place_lexicon() const {
  return place_lexicon.empty() ? default_place_lexicon() : load_word_list(place_lexicon);
}

Json RunConfig::echo() const {
  Json j;
  j["workspace"] = workspace_dir.string();
  j["seed"] = seed;
  j["backend"] = to_string(backend);
  if (backend == Backend::kReplay) {
    j["fixtures_dir"] = effective_fixtures_dir().string();
  } else {
    Json eps = Json::array();
    for (const auto& e : endpoints) eps.push_back(to_json(e));
    j["endpoints"] = std::move(eps);
  }
  j["template"] = template_path.empty() ? std::string("builtin") : template_path.string();
  j["parallelism"] = parallelism;
  Json f;
  f["speech_labels"] = labels.speech_labels;
  f["music_labels"] = labels.music_labels;
  f["tolerance_s"] = sync.tolerance_s;
  f["correct_eps_s"] = sync.correct_eps_s;
  f["grid_s"] = sync.grid_s;
  f["max_offset_s"] = sync.max_offset_s;
  f["max_start_jitter_s"] = sync.max_start_jitter_s;
  j["filter"] = std::move(f);
  return j;
}

WorkspaceLock::WorkspaceLock(const fs::path& workspace)
    : lock_(workspace / ".lock", /*blocking=*/false) {}

Json RunSummary::to_json() const {
  Json j;
  j["clips"] = clips;
  j["kept"] = kept;
  j["removed"] = removed();
  j["removed_label"] = removed_label;
  j["removed_sync"] = removed_sync;
  j["captions"] = captions;
  j["tool_failures"] = tool_failures;
  j["caption_failures"] = caption_failures;
  return j;
}

// ---------------------------------------------------------------------------
// ingest / filter / run

IngestResult cmd_ingest(const fs::path& source_manifest, const fs::path& workspace) {
  if (!fs::is_directory(workspace)) {
    throw ConfigError("workspace does not exist: " + workspace.string());
  }
  const std::string bytes = read_text_file(source_manifest);
  std::vector<ClipRecord> clips = parse_manifest<ClipRecord>(bytes);
  WorkspaceLock lock(workspace);
  IngestResult result;
  result.records = clips.size();
  if (clips.empty()) result.warnings.push_back(source_manifest.string() + " holds no records");
  write_file_atomic(workspace / kClipsFile, serialize_manifest(clips));
  return result;
}

namespace {

std::vector<ClipRecord> load_clips(const fs::path& workspace) {
  const fs::path path = workspace / kClipsFile;
  if (!fs::exists(path)) throw IoError(path.string() + " not found; run ingest first");
  return parse_manifest<ClipRecord>(read_text_file(path));
}

void append_ledger(const fs::path& workspace, const std::vector<Json>& entries) {
  std::string lines;
  for (const auto& e : entries) lines += e.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
  const fs::path path = workspace / kLedgerFile;
  FileLock lock(path.string() + ".lock");
  std::string existing = fs::exists(path) ? read_text_file(path) : std::string();
  write_file_atomic(path, existing + lines);
}

RunSummary summarize(const std::vector<FilterVerdict>& verdicts) {
  RunSummary s;
  s.clips = verdicts.size();
  for (const auto& v : verdicts) {
    if (v.final == FinalDecision::kKept) ++s.kept;
    if (v.label_filter == LabelFilterResult::kRemovedSpeechMusic) ++s.removed_label;
    if (v.sync_filter == SyncFilterResult::kRemovedAllError) ++s.removed_sync;
  }
  return s;
}

ToolGateway make_gateway(const RunConfig& cfg) {
  GatewayOptions opts;
  opts.backend = cfg.backend;
  opts.endpoints = cfg.endpoints;
  opts.fixtures_dir = cfg.effective_fixtures_dir();
  opts.parallelism = cfg.parallelism;
  opts.sync_grid_s = cfg.sync.grid_s;
  opts.seed = cfg.seed;
  return ToolGateway(std::move(opts));
}

FilterOptions filter_options(const RunConfig& cfg) {
  FilterOptions f;
  f.labels = cfg.labels;
  f.sync = cfg.sync;
  f.seed = cfg.seed;
  f.parallelism = cfg.parallelism;
  return f;
}

}  // namespace

RunSummary cmd_filter(const RunConfig& cfg) {
  cfg.validate();
  WorkspaceLock lock(cfg.workspace_dir);
  const auto clips = load_clips(cfg.workspace_dir);
  ToolGateway gateway = make_gateway(cfg);
  const auto verdicts = run_filters(clips, gateway.sync_probe(), filter_options(cfg));
  write_file_atomic(cfg.workspace_dir / kVerdictsFile, serialize_manifest(verdicts));
  RunSummary summary = summarize(verdicts);
  Json entry;
  entry["event"] = "filter";
  entry["timestamp"] = iso8601_now();
  entry["config"] = cfg.echo();
  entry["counts"] = summary.to_json();
  append_ledger(cfg.workspace_dir, {entry});
  return summary;
}

RunSummary cmd_run(const RunConfig& cfg) {
  cfg.validate();
  WorkspaceLock lock(cfg.workspace_dir);
  const fs::path ws = cfg.workspace_dir;
  if (fs::exists(ws / kCaptionsFile)) {
    for (const auto& rec : parse_manifest<CaptionRecord>(read_text_file(ws / kCaptionsFile))) {
      if (rec.review) {
        throw ConfigError(
            "captions.jsonl already holds reviews; move it aside before re-running");
      }
    }
  }
  const auto clips = load_clips(ws);
  const PromptTemplate tmpl = cfg.load_template();
  const InaudibleLexicon lexicon = cfg.load_inaudible_lexicon();
  ToolGateway gateway = make_gateway(cfg);

  const auto verdicts = run_filters(clips, gateway.sync_probe(), filter_options(cfg));
  RunSummary summary = summarize(verdicts);

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (verdicts[i].final == FinalDecision::kKept) kept.push_back(i);
  }

  struct ClipOutput {
    CluePacket packet;
    std::vector<ToolFailure> failures;
    std::optional<CaptionRecord> caption;
    std::string raw_llm;
    std::string caption_error;
  };
  std::vector<ClipOutput> outputs(kept.size());

  parallel_for(kept.size(), cfg.parallelism, [&](std::size_t k) {
    const ClipRecord& clip = clips[kept[k]];
    ClipOutput& out = outputs[k];
    try {
      FetchResult fetched = gateway.fetch_clues(clip);
      out.packet = std::move(fetched.packet);
      out.failures = std::move(fetched.failures);
      const BuiltPrompt prompt = build_prompt(out.packet, tmpl);
      GeneratedCaption gen;
      try {
        gen = gateway.generate_caption(prompt.text, prompt.hash);
      } catch (const ToolError& e) {
        if (cfg.backend == Backend::kReplay) throw;
        out.caption_error = e.what();
        return;
      }
      CaptionRecord rec;
      rec.clip_id = clip.id;
      rec.caption = gen.caption;
      rec.prompt_hash = prompt.hash;
      rec.llm_model = gen.model;
      rec.flags = qc_caption(gen.caption, lexicon);
      rec.validate();
      out.caption = std::move(rec);
      out.raw_llm = std::move(gen.raw_response);
    } catch (const FixtureMissingError& e) {
      throw FixtureMissingError("clip " + clip.id + ": " + e.what());
    } catch (const ToolError& e) {
      throw ToolError("clip " + clip.id + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError("clip " + clip.id + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), "clip " + clip.id + ": " + e.what());
    } catch (const ContractError& e) {
      throw ContractError("clip " + clip.id + ": " + e.what());
    }
  });

  std::vector<CluePacket> packets;
  std::vector<CaptionRecord> captions;
  std::vector<Json> ledger;
  Json run;
  run["event"] = "run";
  run["timestamp"] = iso8601_now();
  run["config"] = cfg.echo();
  run["template_version"] = tmpl.version;
  for (auto& out : outputs) {
    for (const auto& f : out.failures) {
      Json j;
      j["event"] = "tool_failure";
      j["clip_id"] = out.packet.clip_id;
      j["tool"] = to_string(f.tool);
      j["message"] = f.message;
      ledger.push_back(std::move(j));
      ++summary.tool_failures;
    }
    if (out.caption) {
      Json j;
      j["event"] = "llm_response";
      j["clip_id"] = out.caption->clip_id;
      j["prompt_hash"] = out.caption->prompt_hash;
      j["response"] = out.raw_llm;
      ledger.push_back(std::move(j));
      captions.push_back(std::move(*out.caption));
    } else if (!out.caption_error.empty()) {
      Json j;
      j["event"] = "caption_failure";
      j["clip_id"] = out.packet.clip_id;
      j["message"] = out.caption_error;
      ledger.push_back(std::move(j));
      ++summary.caption_failures;
    }
    packets.push_back(std::move(out.packet));
  }
  summary.captions = captions.size();
  run["counts"] = summary.to_json();
  ledger.insert(ledger.begin(), std::move(run));

  write_file_atomic(ws / kVerdictsFile, serialize_manifest(verdicts));
  write_file_atomic(ws / kCluesFile, serialize_manifest(packets));
  write_file_atomic(ws / kCaptionsFile, serialize_manifest(captions));
  append_ledger(ws, ledger);
  return summary;
}

// ---------------------------------------------------------------------------
// stats / split

Json cmd_stats(const fs::path& workspace, const std::set<std::string>& place_lexicon,
               const std::optional<fs::path>& tool_reviews) {
  const fs::path captions_path = workspace / kCaptionsFile;
  if (!fs::exists(captions_path)) throw IoError(captions_path.string() + " not found");
  const auto history = parse_manifest<CaptionRecord>(read_text_file(captions_path));
  const auto latest = latest_captions(history);

  Json report;
  std::optional<CorpusStats> corpus;
  if (!latest.empty()) {
    corpus = compute_corpus_stats(latest, place_lexicon);
    report["corpus"] = to_json(*corpus);
  }
  std::vector<CaptionRecord> reviewed;
  for (const auto& r : latest) {
    if (r.review) reviewed.push_back(r);
  }
  if (!reviewed.empty()) report["manual_check"] = to_json(compute_manual_check_stats(reviewed));

  if (tool_reviews) {
    std::vector<ToolReview> reviews;
    const std::string bytes = read_text_file(*tool_reviews);
    std::size_t line_no = 0, pos = 0;
    std::vector<ManifestIssue> issues;
    while (pos < bytes.size()) {
      std::size_t end = bytes.find('\n', pos);
      if (end == std::string::npos) end = bytes.size();
      std::string_view line(bytes.data() + pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        ToolReview r;
        from_json(Json::parse(line), r);
        reviews.push_back(std::move(r));
      } catch (const Json::exception& e) {
        issues.push_back({line_no, "", std::string("malformed JSON: ") + e.what()});
      } catch (const ValidationError& e) {
        issues.push_back({line_no, e.field(), e.what()});
      }
    }
    if (!issues.empty()) throw ManifestError(std::move(issues));
    report["tool_accuracy"] = to_json(compute_tool_accuracy(reviews));
  }

  fs::create_directories(workspace / "reports");
  write_file_atomic(workspace / "reports" / "stats.json", report.dump(2) + "\n");
  if (corpus) write_file_atomic(workspace / "reports" / "word_freq.csv", word_freq_csv(*corpus));
  return report;
}

BenchmarkSplit cmd_split(const fs::path& workspace, std::uint64_t seed, std::size_t n_val,
                         std::size_t n_test) {
  const auto clips = load_clips(workspace);
  BenchmarkSplit split = sample_benchmark_split(clips, seed, n_val, n_test);
  fs::create_directories(workspace / "reports");
  write_file_atomic(workspace / "reports" / "split.json", to_json(split).dump(2) + "\n");
  return split;
}

// ---------------------------------------------------------------------------
// eval

EvalKind parse_eval_kind(std::string_view s) {
  if (s == "retrieval") return EvalKind::kRetrieval;
  if (s == "captioning") return EvalKind::kCaptioning;
  if (s == "zeroshot") return EvalKind::kZeroShot;
  throw ConfigError("eval kind must be retrieval, captioning or zeroshot");
}

namespace {

Json read_json_file(const fs::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw ValidationError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

std::vector<double> read_score_array(const fs::path& path, std::size_t expected) {
  const Json j = read_json_file(path);
  if (!j.is_array()) throw ValidationError(path.string(), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ValidationError(path.string(), "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  if (out.size() != expected) {
    throw ValidationError(path.string(), "has " + std::to_string(out.size()) + " scores, expected " +
                                             std::to_string(expected));
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Json eval_retrieval(const EvalInputs& in, Json& config) {
  config["audio_embeddings"] = in.audio_embeddings.string();
  config["text_embeddings"] = in.text_embeddings.string();
  config["gt"] = in.gt.string();
  config["ks"] = in.ks;
  EmbeddingBatch batch;
  batch.audio = read_embeddings(in.audio_embeddings);
  batch.text = read_embeddings(in.text_embeddings);
  if (batch.audio.cols() != batch.text.cols()) {
    throw ValidationError(in.text_embeddings.string(),
                          "dim " + std::to_string(batch.text.cols()) + " does not match audio dim " +
                              std::to_string(batch.audio.cols()));
  }
  try {
    batch.gt = parse_gt(read_json_file(in.gt));
    batch.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(in.gt.string(), e.what());
  }
  return to_json(recall_at_k(batch, in.ks));
}

Json eval_captioning(const EvalInputs& in, Json& config) {
  config["pairs"] = in.pairs.string();
  std::vector<std::string> ids, candidates;
  std::vector<std::vector<std::string>> references;
  {
    const std::string bytes = read_text_file(in.pairs);
    std::size_t pos = 0, line_no = 0;
    while (pos < bytes.size()) {
      std::size_t end = bytes.find('\n', pos);
      if (end == std::string::npos) end = bytes.size();
      std::string_view line(bytes.data() + pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (trim(line).empty()) continue;
      const std::string where = in.pairs.string() + ":" + std::to_string(line_no);
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::exception& e) {
        throw ValidationError(where, std::string("malformed JSON: ") + e.what());
      }
      if (!j.contains("candidate") || !j["candidate"].is_string() || !j.contains("references") ||
          !j["references"].is_array() || j["references"].empty()) {
        throw ValidationError(where, "needs a candidate string and a non-empty references array");
      }
      ids.push_back(j.value("id", std::to_string(ids.size())));
      candidates.push_back(j["candidate"].get<std::string>());
      std::vector<std::string> refs;
      for (const auto& r : j["references"]) {
        if (!r.is_string()) throw ValidationError(where, "references must be strings");
        refs.push_back(r.get<std::string>());
      }
      references.push_back(std::move(refs));
    }
  }
  if (candidates.size() < 2) throw ValidationError(in.pairs.string(), "need at least 2 pairs");

  std::vector<double> rouge;
  std::size_t rouge_warnings = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const RougeLScore r = rouge_l(candidates[i], references[i]);
    rouge.push_back(r.score);
    rouge_warnings += r.empty_input ? 1 : 0;
  }
  const CiderScores cid = cider(candidates, references);

  Json results;
  Json items = Json::array();
  std::optional<std::vector<double>> spice, spider_scores, meteor, sbert;
  if (in.spice_scores) {
    config["spice_scores"] = in.spice_scores->string();
    spice = read_score_array(*in.spice_scores, candidates.size());
    spider_scores = spider(cid.per_item, *spice);
  }
  if (in.meteor_scores) {
    config["meteor_scores"] = in.meteor_scores->string();
    meteor = read_score_array(*in.meteor_scores, candidates.size());
  }
  if (in.sbert_candidates || in.sbert_references) {
    if (!in.sbert_candidates || !in.sbert_references) {
      throw ConfigError("SentenceBERT scoring needs both candidate and reference embeddings");
    }
    config["sbert_candidates"] = in.sbert_candidates->string();
    config["sbert_references"] = in.sbert_references->string();
    const Matrix cand = read_embeddings(*in.sbert_candidates);
    const Matrix refs = read_embeddings(*in.sbert_references);
    std::size_t total_refs = 0;
    for (const auto& r : references) total_refs += r.size();
    if (cand.rows() != candidates.size()) {
      throw ValidationError(in.sbert_candidates->string(), "needs one row per pair");
    }
    if (refs.rows() != total_refs) {
      throw ValidationError(in.sbert_references->string(),
                            "needs one row per reference (" + std::to_string(total_refs) + ")");
    }
    if (refs.cols() != cand.cols()) {
      throw ValidationError(in.sbert_references->string(), "dimension differs from candidates");
    }
    sbert.emplace();
    std::size_t next = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      std::vector<std::vector<double>> ref_rows;
      for (std::size_t r = 0; r < references[i].size(); ++r, ++next) {
        auto row = refs.row(next);
        ref_rows.emplace_back(row.begin(), row.end());
      }
      sbert->push_back(sbert_similarity(cand.row(i), ref_rows));
    }
  }

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    Json item;
    item["id"] = ids[i];
    item["rouge_l"] = rouge[i];
    item["cider"] = cid.per_item[i];
    if (spice) item["spice"] = (*spice)[i];
    if (spider_scores) item["spider"] = (*spider_scores)[i];
    if (meteor) item["meteor"] = (*meteor)[i];
    if (sbert) item["sbert"] = (*sbert)[i];
    items.push_back(std::move(item));
  }
  Json corpus;
  corpus["rouge_l"] = mean_of(rouge);
  corpus["cider"] = cid.mean;
  if (spice) corpus["spice"] = mean_of(*spice);
  if (spider_scores) corpus["spider"] = mean_of(*spider_scores);
  if (meteor) corpus["meteor"] = mean_of(*meteor);
  if (sbert) corpus["sbert"] = mean_of(*sbert);
  results["corpus"] = std::move(corpus);
  results["items"] = std::move(items);
  results["rouge_l_empty_inputs"] = rouge_warnings;
  return results;
}

Json eval_zeroshot(const EvalInputs& in, Json& config) {
  config["audio_embeddings"] = in.audio_embeddings.string();
  config["labels"] = in.labels.string();
  config["targets"] = in.targets.string();
  config["prompt_table"] = in.prompt_table.string();
  config["kind"] = in.zeroshot_kind == ZeroShotKind::kEnvironment ? "environment" : "generic";

  const Matrix audio = read_embeddings(in.audio_embeddings);
  const Json labels_json = read_json_file(in.labels);
  std::vector<std::string> labels;
  if (!labels_json.is_array()) throw ValidationError(in.labels.string(), "expected an array of strings");
  for (const auto& l : labels_json) {
    if (!l.is_string()) throw ValidationError(in.labels.string(), "expected an array of strings");
    labels.push_back(l.get<std::string>());
  }
  const Json targets_json = read_json_file(in.targets);
  std::vector<std::size_t> targets;
  if (!targets_json.is_array()) throw ValidationError(in.targets.string(), "expected an array of indices");
  for (const auto& t : targets_json) {
    if (!t.is_number_unsigned() || t.get<std::size_t>() >= labels.size()) {
      throw ValidationError(in.targets.string(), "indices must address the labels array");
    }
    targets.push_back(t.get<std::size_t>());
  }
  if (targets.size() != audio.rows()) {
    throw ValidationError(in.targets.string(), "needs one target per audio row (" +
                                                   std::to_string(audio.rows()) + ")");
  }

  std::map<std::string, std::vector<double>> table;
  {
    const std::string bytes = read_text_file(in.prompt_table);
    std::size_t pos = 0, line_no = 0;
    while (pos < bytes.size()) {
      std::size_t end = bytes.find('\n', pos);
      if (end == std::string::npos) end = bytes.size();
      std::string_view line(bytes.data() + pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (trim(line).empty()) continue;
      const std::string where = in.prompt_table.string() + ":" + std::to_string(line_no);
      try {
        const Json j = Json::parse(line);
        table[j.at("prompt").get<std::string>()] = j.at("embedding").get<std::vector<double>>();
      } catch (const Json::exception& e) {
        throw ValidationError(where, std::string("expected {prompt, embedding}: ") + e.what());
      }
    }
  }
  TextEmbedder embedder = [&](std::span<const std::string> prompts) {
    std::vector<std::vector<double>> rows;
    for (const auto& p : prompts) {
      auto it = table.find(p);
      if (it == table.end()) {
        throw ValidationError(in.prompt_table.string(), "no embedding for prompt '" + p + "'");
      }
      rows.push_back(it->second);
    }
    try {
      return Matrix::from_rows(rows);
    } catch (const ContractError&) {
      throw ValidationError(in.prompt_table.string(), "embeddings differ in dimension");
    }
  };
  double acc;
  try {
    acc = zero_shot_classify(audio, targets, labels, in.zeroshot_kind, embedder);
  } catch (const ContractError& e) {
    throw ValidationError(in.prompt_table.string(), e.what());
  }
  Json results;
  results["accuracy"] = acc;
  results["n"] = audio.rows();
  return results;
}

}  // namespace

Json cmd_eval(EvalKind kind, const EvalInputs& inputs) {
  Json report;
  Json config;
  Json results;
  switch (kind) {
    case EvalKind::kRetrieval:
      report["kind"] = "retrieval";
      results = eval_retrieval(inputs, config);
      break;
    case EvalKind::kCaptioning:
      report["kind"] = "captioning";
      results = eval_captioning(inputs, config);
      break;
    case EvalKind::kZeroShot:
      report["kind"] = "zeroshot";
      results = eval_zeroshot(inputs, config);
      break;
  }
  report["config"] = std::move(config);
  report["results"] = std::move(results);
  return report;
}

}  // namespace clipcurate
