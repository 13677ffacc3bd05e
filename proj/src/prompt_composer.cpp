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

#include "clipcurate/prompt_composer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "clipcurate/errors.hpp"
#include "clipcurate/text.hpp"

namespace clipcurate {

namespace {

#include "default_template.inc"  // kBuiltinTemplateText

constexpr std::string_view kInaudibleDirective = "remove information that is inaudible";

constexpr std::array<std::string_view, 4> kPlaceholders = {
    "{{preamble}}", "{{clues}}", "{{examples}}", "{{constraints}}"};

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string replace_once(std::string text, std::string_view needle,
                         std::string_view value) {
  std::size_t pos = text.find(needle);
  if (pos != std::string::npos) text.replace(pos, needle.size(), value);
  return text;
}

std::string strip_trailing_blank_lines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r')) {
    s.pop_back();
  }
  return s;
}

std::string format_confidence(double c) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", c);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void PromptTemplate::validate() const {
  if (version.empty()) throw ValidationError("version", "must be non-empty");
  if (example_captions.size() != 3) {
    throw ValidationError("example_captions", "exactly 3 example captions required");
  }
  bool has_directive = false;
  for (const auto& c : constraints) {
    if (to_lower_ascii(c).find(kInaudibleDirective) != std::string::npos) {
      has_directive = true;
    }
  }
  if (!has_directive) {
    throw ValidationError("constraints",
                          "must include the instruction to remove inaudible information");
  }
  for (auto ph : kPlaceholders) {
    if (count_occurrences(layout, ph) != 1) {
      throw ValidationError("layout", std::string(ph) + " must appear exactly once");
    }
  }
}

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate t;
  std::string section;
  std::string preamble, layout;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section != "preamble" && section != "examples" && section != "constraints" &&
          section != "layout") {
        throw ValidationError("template", "unknown section [" + section + "]");
      }
      continue;
    }
    if (section.empty()) {
      if (line.empty() || line.front() == '#') continue;
      if (line.rfind("version:", 0) == 0) {
        t.version = std::string(trim(std::string_view(line).substr(8)));
        continue;
      }
      throw ValidationError("template", "unexpected line before first section: " + line);
    }
    if (section == "preamble") {
      preamble += line + "\n";
    } else if (section == "layout") {
      layout += line + "\n";
    } else if (!trim(line).empty()) {
      auto& list = section == "examples" ? t.example_captions : t.constraints;
      list.emplace_back(trim(line));
    }
  }
  t.preamble = strip_trailing_blank_lines(std::move(preamble));
  t.layout = strip_trailing_blank_lines(std::move(layout));
  t.validate();
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate tmpl = parse(kBuiltinTemplateText);
  return tmpl;
}

void InaudibleLexicon::validate() const {
  if (terms.empty()) throw ValidationError("terms", "lexicon must be non-empty");
}

InaudibleLexicon InaudibleLexicon::defaults() {
  return InaudibleLexicon{{
      "red",    "orange", "yellow", "green",  "blue",     "purple",  "violet",
      "pink",   "brown",  "black",  "white",  "gray",     "grey",    "beige",
      "maroon", "navy",   "teal",   "cyan",   "magenta",  "turquoise", "crimson",
      "scarlet", "indigo", "colorful", "colourful", "colored", "coloured",
  }};
}

void InaudibleLexicon::extend_from_file(const std::filesystem::path& path) {
  auto words = load_word_list(path);
  terms.insert(words.begin(), words.end());
}

std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::set<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::string_view w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    out.insert(to_lower_ascii(w));
  }
  return out;
}

BuiltPrompt build_prompt(const CluePacket& packet, const PromptTemplate& tmpl) {
  packet.validate();
  tmpl.validate();
  if (packet.clues.empty()) {
    throw ContractError("clip " + packet.clip_id + " has no clues to summarize");
  }

  std::string clues;
  for (Tool tool : tmpl.clue_section_order) {
    const Clue* clue = packet.find(tool);
    if (clue == nullptr) continue;
    if (!clues.empty()) clues += "\n\n";
    clues += std::string(to_string(tool)) + ":";
    for (const auto& item : clue->items) {
      clues += "\n- " + item.text;
      if (item.confidence) clues += " (confidence=" + format_confidence(*item.confidence) + ")";
    }
  }

  std::string examples;
  for (const auto& e : tmpl.example_captions) {
    if (!examples.empty()) examples += "\n";
    examples += "- " + e;
  }
  std::string constraints;
  for (const auto& c : tmpl.constraints) {
    if (!constraints.empty()) constraints += "\n";
    constraints += "- " + c;
  }

  // Clue text is substituted last so a clue containing "{{examples}}"
  // cannot be expanded.
  std::string text = tmpl.layout;
  text = replace_once(std::move(text), "{{preamble}}", tmpl.preamble);
  text = replace_once(std::move(text), "{{examples}}", examples);
  text = replace_once(std::move(text), "{{constraints}}", constraints);
  text = replace_once(std::move(text), "{{clues}}", clues);
  text += "\n";

  BuiltPrompt out;
  out.hash = prompt_hash(tmpl.version, text);
  out.text = std::move(text);
  return out;
}

std::string prompt_hash(std::string_view template_version, std::string_view text) {
  std::string input(template_version);
  input += '\n';
  input += text;
  return sha256_hex(input);
}

std::vector<std::string> flag_inaudible(std::string_view caption,
                                        const InaudibleLexicon& lexicon) {
  std::vector<std::string> hits;
  for (auto& w : tokenize_words(caption)) {
    if (lexicon.terms.count(w)) hits.push_back(std::move(w));
  }
  return hits;
}

CaptionFlags qc_caption(std::string_view caption, const InaudibleLexicon& lexicon) {
  if (trim(caption).empty()) throw ContractError("qc_caption: caption is empty");
  return CaptionFlags{flag_inaudible(caption, lexicon)};
}

}  // namespace clipcurate
