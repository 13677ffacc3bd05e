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

// Regenerates the prompt-keyed parts of a replay fixture: llm.json per
// kept clip, golden prompt files and the expected run outputs.
//
//   make_replay_fixture <fixture_root>
//
// <fixture_root> holds clips.jsonl, captions_src.json ({clip_id: caption})
// and fixtures/<clip_id>/<tool>.json.

#include <cstdio>
#include <filesystem>

#include "clipcurate/curation_store.hpp"
#include "clipcurate/pipeline.hpp"
#include "clipcurate/text.hpp"

namespace cc = clipcurate;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <fixture_root>\n", argv[0]);
    return 3;
  }
  const fs::path root = argv[1];
  const auto clips = cc::parse_manifest<cc::ClipRecord>(cc::read_text_file(root / "clips.jsonl"));
  const cc::Json captions = cc::Json::parse(cc::read_text_file(root / "captions_src.json"));
  const cc::PromptTemplate tmpl = cc::PromptTemplate::builtin();

  cc::GatewayOptions opts;
  opts.fixtures_dir = root / "fixtures";
  cc::ToolGateway gateway(opts);

  fs::create_directories(root / "golden_prompts");
  for (const auto& clip : clips) {
    if (!captions.contains(clip.id)) continue;
    const auto fetched = gateway.fetch_clues(clip);
    if (!fetched.failures.empty()) {
      std::fprintf(stderr, "%s: clue fixture incomplete\n", clip.id.c_str());
      return 1;
    }
    const cc::BuiltPrompt prompt = cc::build_prompt(fetched.packet, tmpl);
    cc::Json llm;
    llm["prompt_hash"] = prompt.hash;
    llm["model"] = "replay-llm";
    llm["items"] = cc::Json::array({cc::Json{{"text", captions[clip.id]}}});
    cc::write_file_atomic(root / "fixtures" / clip.id / "llm.json", llm.dump(2) + "\n");
    cc::write_file_atomic(root / "golden_prompts" / (clip.id + ".txt"), prompt.text);
  }

  const fs::path ws = fs::temp_directory_path() / "clipcurate_fixture_ws";
  fs::remove_all(ws);
  fs::create_directories(ws);
  cc::cmd_ingest(root / "clips.jsonl", ws);
  cc::RunConfig cfg;
  cfg.workspace_dir = ws;
  cfg.fixtures_dir = root / "fixtures";
  const auto summary = cc::cmd_run(cfg);
  fs::create_directories(root / "expected");
  for (auto name : {cc::kVerdictsFile, cc::kCluesFile, cc::kCaptionsFile}) {
    fs::copy_file(ws / name, root / "expected" / name, fs::copy_options::overwrite_existing);
  }
  fs::remove_all(ws);
  std::printf("%s\n", summary.to_json().dump().c_str());
  return 0;
}
