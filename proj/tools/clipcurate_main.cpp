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

// clipcurate: curate audio-caption datasets and score audio-language models.

#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "clipcurate/errors.hpp"
#include "clipcurate/pipeline.hpp"
#include "clipcurate/review_service.hpp"

namespace cc = clipcurate;
namespace fs = std::filesystem;

namespace {

struct RunFlags {
  std::string config;
  std::string workspace;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string fixtures;
  std::optional<double> tolerance_s;
  std::optional<double> correct_eps_s;
  std::optional<std::size_t> parallelism;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
  app->add_option("--workspace", f.workspace, "workspace directory (overrides config)");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--backend", f.backend, "live or replay");
  app->add_option("--fixtures", f.fixtures, "replay fixture directory");
  app->add_option("--tolerance-s", f.tolerance_s, "sync tolerance in seconds");
  app->add_option("--correct-eps-s", f.correct_eps_s, "sync correct-class bound in seconds");
  app->add_option("--parallelism", f.parallelism, "worker threads");
}

cc::RunConfig resolve_config(const RunFlags& f) {
  cc::RunConfig cfg = f.config.empty() ? cc::RunConfig{} : cc::RunConfig::load(f.config);
  if (!f.workspace.empty()) cfg.workspace_dir = f.workspace;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.backend.empty()) cfg.backend = cc::parse_backend(f.backend);
  if (!f.fixtures.empty()) cfg.fixtures_dir = f.fixtures;
  if (f.tolerance_s) cfg.sync.tolerance_s = *f.tolerance_s;
  if (f.correct_eps_s) cfg.sync.correct_eps_s = *f.correct_eps_s;
  if (f.parallelism) cfg.parallelism = *f.parallelism;
  return cfg;
}

void print_summary(const cc::RunSummary& s, bool json) {
  if (json) {
    std::cout << s.to_json().dump(2) << "\n";
    return;
  }
  std::printf("clips %zu, kept %zu, removed %zu (speech+music %zu, sync %zu)\n", s.clips, s.kept,
              s.removed(), s.removed_label, s.removed_sync);
  if (s.captions || s.tool_failures || s.caption_failures) {
    std::printf("captions %zu, tool failures %zu, caption failures %zu\n", s.captions,
                s.tool_failures, s.caption_failures);
  }
}

cc::ReviewServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio-caption curation and evaluation"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable output");

  std::string ingest_source, ingest_ws;
  auto* ingest = app.add_subcommand("ingest", "validate a clip manifest into a workspace");
  ingest->add_option("source", ingest_source, "JSONL clip manifest")->required();
  ingest->add_option("--workspace", ingest_ws, "workspace directory")->required();

  RunFlags filter_flags, run_flags;
  auto* filter = app.add_subcommand("filter", "run the speech/music and sync filters");
  add_run_flags(filter, filter_flags);
  auto* run = app.add_subcommand("run", "filter, gather clues and caption every kept clip");
  add_run_flags(run, run_flags);

  std::string stats_ws, stats_places, stats_reviews;
  auto* stats = app.add_subcommand("stats", "corpus, manual-check and tool-accuracy statistics");
  stats->add_option("--workspace", stats_ws, "workspace directory")->required();
  stats->add_option("--place-lexicon", stats_places, "word list replacing the place lexicon");
  stats->add_option("--tool-reviews", stats_reviews, "JSONL of per-tool clue judgements");

  std::string split_ws;
  std::uint64_t split_seed = 0;
  std::size_t n_val = 0, n_test = 0;
  auto* split = app.add_subcommand("split", "sample validation and test clips");
  split->add_option("--workspace", split_ws, "workspace directory")->required();
  split->add_option("--seed", split_seed, "random seed");
  split->add_option("--n-val", n_val, "validation size")->required();
  split->add_option("--n-test", n_test, "test size")->required();

  std::string eval_kind, eval_out, zs_kind = "generic";
  std::string audio_emb, text_emb, gt, pairs, spice, meteor, sbert_c, sbert_r, labels, targets,
      prompts;
  std::vector<std::size_t> ks{1, 5, 10};
  auto* eval = app.add_subcommand("eval", "score retrieval, captioning or zero-shot output");
  eval->add_option("kind", eval_kind, "retrieval, captioning or zeroshot")->required();
  eval->add_option("--audio-emb", audio_emb, "audio embeddings (float32 + .json sidecar)");
  eval->add_option("--text-emb", text_emb, "text embeddings");
  eval->add_option("--gt", gt, "ground truth JSON");
  eval->add_option("--k", ks, "recall cut-offs")->delimiter(',');
  eval->add_option("--pairs", pairs, "JSONL of {id, candidate, references}");
  eval->add_option("--spice", spice, "JSON array of per-item SPICE scores");
  eval->add_option("--meteor", meteor, "JSON array of per-item METEOR scores");
  eval->add_option("--sbert-candidates", sbert_c, "candidate sentence embeddings");
  eval->add_option("--sbert-references", sbert_r, "reference sentence embeddings");
  eval->add_option("--labels", labels, "JSON array of class labels");
  eval->add_option("--targets", targets, "JSON array of target label indices");
  eval->add_option("--prompt-table", prompts, "JSONL of {prompt, embedding}");
  eval->add_option("--zeroshot-kind", zs_kind, "environment or generic");
  eval->add_option("--out", eval_out, "also write the report here");

  std::string serve_ws, serve_host = "127.0.0.1", serve_token, serve_origin = "*";
  int serve_port = 8080;
  std::uint64_t serve_seed = 0;
  auto* serve = app.add_subcommand("serve", "HTTP review API over a workspace");
  serve->add_option("--workspace", serve_ws, "workspace directory")->required();
  serve->add_option("--port", serve_port, "listen port (0 picks one)");
  serve->add_option("--host", serve_host, "listen address");
  serve->add_option("--seed", serve_seed, "queue order seed");
  serve->add_option("--token", serve_token, "require this bearer token");
  serve->add_option("--cors-origin", serve_origin, "allowed browser origin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(cc::ExitCode::kConfig);
  }

  try {
    if (*ingest) {
      const auto r = cc::cmd_ingest(ingest_source, ingest_ws);
      for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      if (json) {
        std::cout << cc::Json{{"records", r.records}}.dump() << "\n";
      } else {
        std::printf("ingested %zu clips\n", r.records);
      }
    } else if (*filter) {
      print_summary(cc::cmd_filter(resolve_config(filter_flags)), json);
    } else if (*run) {
      print_summary(cc::cmd_run(resolve_config(run_flags)), json);
    } else if (*stats) {
      const auto places = stats_places.empty() ? cc::default_place_lexicon()
                                               : cc::load_word_list(stats_places);
      std::optional<fs::path> reviews;
      if (!stats_reviews.empty()) reviews = stats_reviews;
      std::cout << cc::cmd_stats(stats_ws, places, reviews).dump(json ? -1 : 2) << "\n";
    } else if (*split) {
      const auto s = cc::cmd_split(split_ws, split_seed, n_val, n_test);
      if (json) {
        std::cout << cc::to_json(s).dump() << "\n";
      } else {
        std::printf("val %zu, test %zu (seed %llu)\n", s.val_ids.size(), s.test_ids.size(),
                    static_cast<unsigned long long>(s.seed));
      }
    } else if (*eval) {
      cc::EvalInputs in;
      in.audio_embeddings = audio_emb;
      in.text_embeddings = text_emb;
      in.gt = gt;
      in.ks = ks;
      in.pairs = pairs;
      if (!spice.empty()) in.spice_scores = spice;
      if (!meteor.empty()) in.meteor_scores = meteor;
      if (!sbert_c.empty()) in.sbert_candidates = sbert_c;
      if (!sbert_r.empty()) in.sbert_references = sbert_r;
      in.labels = labels;
      in.targets = targets;
      in.prompt_table = prompts;
      if (zs_kind == "environment") {
        in.zeroshot_kind = cc::ZeroShotKind::kEnvironment;
      } else if (zs_kind != "generic") {
        throw cc::ConfigError("--zeroshot-kind must be environment or generic");
      }
      cc::Json report = cc::cmd_eval(cc::parse_eval_kind(eval_kind), in);
      report["generated_at"] = cc::iso8601_now();
      if (!eval_out.empty()) cc::write_file_atomic(eval_out, report.dump(2) + "\n");
      std::cout << report.dump(json ? -1 : 2) << "\n";
    } else if (*serve) {
      cc::ReviewServiceOptions so;
      so.workspace = serve_ws;
      so.seed = serve_seed;
      cc::ReviewService service(std::move(so));
      cc::ReviewServerOptions o;
      o.host = serve_host;
      o.port = serve_port;
      o.cors_origin = serve_origin;
      if (!serve_token.empty()) o.auth_token = serve_token;
      cc::ReviewServer server(service, o);
      const int port = server.bind();
      std::fprintf(stderr, "listening on %s:%d\n", serve_host.c_str(), port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.serve();
      g_server = nullptr;
    }
  } catch (const cc::ManifestError& e) {
    for (const auto& issue : e.issues()) {
      std::fprintf(stderr, "line %zu: %s%s%s\n", issue.line, issue.field.c_str(),
                   issue.field.empty() ? "" : ": ", issue.message.c_str());
    }
    return static_cast<int>(e.exit_code());
  } catch (const cc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(cc::ExitCode::kIo);
  }
  return 0;
}
