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

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clipcurate/datamodel.hpp"

namespace clipcurate {

/// Structured caption prompt. Loaded from a versioned text file with
/// [preamble], [examples], [constraints] and [layout] blocks; the layout
/// holds {{preamble}}, {{clues}}, {{examples}} and {{constraints}}
/// placeholders, each exactly once.
struct PromptTemplate {
  std::string version;
  std::string preamble;
  std::array<Tool, 7> clue_section_order = kAllTools;
  std::vector<std::string> example_captions;
  std::vector<std::string> constraints;
  std::string layout;

  void validate() const;

  static PromptTemplate parse(std::string_view text);
  static PromptTemplate load(const std::filesystem::path& path);
  /// templates/v1.txt, compiled in.
  static const PromptTemplate& builtin();
};

struct InaudibleLexicon {
  std::set<std::string> terms;

  void validate() const;
  /// Colour words.
  static InaudibleLexicon defaults();
  /// Adds one lowercase term per non-empty, non-comment line.
  void extend_from_file(const std::filesystem::path& path);
};

struct BuiltPrompt {
  std::string text;
  std::string hash;  // prompt_hash(template version, text)
};

/// sha256 over "<version>\n<text>", so the same rendered text under two
/// template versions never shares a hash.
std::string prompt_hash(std::string_view template_version, std::string_view text);

/// Renders the prompt. Clue sections follow template.clue_section_order
/// regardless of the order clues appear in the packet; items render as
/// "- text (confidence=0.87)" or "- text" when no score exists.
BuiltPrompt build_prompt(const CluePacket& packet, const PromptTemplate& tmpl);

/// Words of `caption` (tokenized as in tokenize_words) found in the lexicon,
/// in order of appearance, duplicates kept.
std::vector<std::string> flag_inaudible(std::string_view caption,
                                        const InaudibleLexicon& lexicon);

/// Flags only; the caption itself is never modified here.
CaptionFlags qc_caption(std::string_view caption, const InaudibleLexicon& lexicon);

/// Reads a word-per-line file ('#' starts a comment line), lowercased.
std::set<std::string> load_word_list(const std::filesystem::path& path);

}  // namespace clipcurate
