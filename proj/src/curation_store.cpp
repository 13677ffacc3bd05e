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

#include "clipcurate/curation_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "clipcurate/errors.hpp"
#include "clipcurate/random.hpp"
#include "clipcurate/text.hpp"

namespace clipcurate {

std::set<std::string> default_place_lexicon() {
  return {
      "airport",  "alley",     "arena",    "auditorium", "backyard",  "bar",
      "barn",     "bathroom",  "beach",    "bedroom",    "cafe",      "canyon",
      "cathedral", "cave",     "church",   "city",       "classroom", "construction",
      "countryside", "desert", "factory",  "farm",       "field",     "forest",
      "garage",   "garden",    "gym",      "hall",       "harbor",    "highway",
      "hospital", "house",     "indoors",  "jungle",     "kitchen",   "lake",
      "library",  "market",    "meadow",   "mountain",   "ocean",     "office",
      "outdoors", "park",      "playground", "pool",     "railway",   "restaurant",
      "river",    "road",      "room",     "school",     "sea",       "shop",
      "stadium",  "station",   "street",   "studio",     "subway",    "theater",
      "track",    "tunnel",    "underwater", "urban",    "village",   "warehouse",
      "waterfall", "woods",    "workshop", "yard",       "zoo",
  };
}

CorpusStats compute_corpus_stats(std::span<const CaptionRecord> captions,
                                 const std::set<std::string>& place_lexicon) {
  if (captions.empty()) throw ContractError("corpus statistics need at least one caption");
  CorpusStats s;
  s.pair_count = captions.size();
  std::size_t total_words = 0;
  std::size_t env_captions = 0;
  for (const auto& rec : captions) {
    const auto words = tokenize_words(rec.final_caption());
    total_words += words.size();
    bool has_place = false;
    for (const auto& w : words) {
      ++s.word_freq[w];
      has_place = has_place || place_lexicon.count(w) > 0;
    }
    if (has_place) ++env_captions;
  }
  s.avg_sentence_len = static_cast<double>(total_words) / static_cast<double>(s.pair_count);
  s.vocab_size = s.word_freq.size();
  s.env_caption_ratio = static_cast<double>(env_captions) / static_cast<double>(s.pair_count);
  return s;
}

BenchmarkSplit sample_benchmark_split(std::span<const ClipRecord> clips,
                                      std::uint64_t seed, std::size_t n_val,
                                      std::size_t n_test) {
  if (n_val > clips.size() || n_test > clips.size() || n_val + n_test > clips.size()) {
    throw ContractError("split needs " + std::to_string(n_val) + "+" +
                        std::to_string(n_test) + " clips, have " +
                        std::to_string(clips.size()));
  }
  std::vector<std::string> ids;
  ids.reserve(clips.size());
  for (const auto& c : clips) ids.push_back(c.id);
  SeededRng rng(seed);
  rng.shuffle(ids);
  BenchmarkSplit split;
  split.seed = seed;
  split.val_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val),
                        ids.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  return split;
}

ManualCheckStats compute_manual_check_stats(std::span<const CaptionRecord> reviews) {
  if (reviews.empty()) throw ContractError("manual-check statistics need at least one review");
  std::size_t correspond = 0, inaudible = 0;
  long long modified = 0, total = 0;
  for (const auto& r : reviews) {
    if (!r.review) {
      throw ValidationError("review", "record for clip " + r.clip_id + " has no review");
    }
    if (r.review->verdict == ReviewVerdict::kCorrespond) ++correspond;
    if (r.review->inaudible) ++inaudible;
    modified += r.review->modified_word_count;
    total += r.review->total_word_count;
  }
  const double n = static_cast<double>(reviews.size());
  ManualCheckStats s;
  s.n_reviewed = reviews.size();
  s.correspondence = static_cast<double>(correspond) / n;
  s.modification = static_cast<double>(modified) / static_cast<double>(total);
  s.inaudibility = static_cast<double>(inaudible) / n;
  return s;
}

ToolAccuracyStats compute_tool_accuracy(std::span<const ToolReview> reviews) {
  if (reviews.empty()) throw ContractError("tool accuracy needs at least one review");
  std::map<Tool, std::size_t> correct;
  std::size_t caption_correct = 0;
  ToolAccuracyStats s;
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    const auto& r = reviews[i];
    int n_correct = 0;
    for (Tool t : kRemoteTools) {
      auto it = r.per_tool_correct.find(t);
      if (it == r.per_tool_correct.end()) {
        throw ValidationError("per_tool_correct." + std::string(to_string(t)),
                              "missing for clip " + r.clip_id);
      }
      if (it->second) {
        ++correct[t];
        ++n_correct;
      }
    }
    if (r.per_tool_correct.size() != kRemoteTools.size()) {
      throw ValidationError("per_tool_correct", "unexpected tool for clip " + r.clip_id);
    }
    if (r.caption_correct) ++caption_correct;
    ++s.min_correct_clues_histogram[n_correct];
  }
  const double n = static_cast<double>(reviews.size());
  std::size_t all_correct = 0;
  for (Tool t : kRemoteTools) {
    s.per_tool[t] = static_cast<double>(correct[t]) / n;
    all_correct += correct[t];
  }
  // Equal denominators make the pooled ratio the mean of the per-tool ratios.
  s.mean_accuracy = static_cast<double>(all_correct) / (n * static_cast<double>(kRemoteTools.size()));
  s.caption_accuracy = static_cast<double>(caption_correct) / n;
  s.n_reviewed = reviews.size();
  return s;
}

Json to_json(const CorpusStats& s) {
  Json j;
  j["pair_count"] = s.pair_count;
  j["avg_sentence_len"] = s.avg_sentence_len;
  j["vocab_size"] = s.vocab_size;
  j["env_caption_ratio"] = s.env_caption_ratio;
  Json freq = Json::object();
  for (const auto& [w, c] : s.word_freq) freq[w] = c;
  j["word_freq"] = std::move(freq);
  return j;
}

Json to_json(const ManualCheckStats& s) {
  Json j;
  j["correspondence"] = s.correspondence;
  j["modification"] = s.modification;
  j["inaudibility"] = s.inaudibility;
  j["n_reviewed"] = s.n_reviewed;
  return j;
}

Json to_json(const ToolAccuracyStats& s) {
  Json j;
  Json per_tool = Json::object();
  for (const auto& [t, a] : s.per_tool) per_tool[std::string(to_string(t))] = a;
  j["per_tool"] = std::move(per_tool);
  j["mean_accuracy"] = s.mean_accuracy;
  j["caption_accuracy"] = s.caption_accuracy;
  Json hist = Json::object();
  for (const auto& [k, c] : s.min_correct_clues_histogram) hist[std::to_string(k)] = c;
  j["min_correct_clues_histogram"] = std::move(hist);
  j["n_reviewed"] = s.n_reviewed;
  return j;
}

Json to_json(const BenchmarkSplit& s) {
  Json j;
  j["seed"] = s.seed;
  j["val_ids"] = s.val_ids;
  j["test_ids"] = s.test_ids;
  return j;
}

Json to_json(const ToolReview& r) {
  Json j;
  j["clip_id"] = r.clip_id;
  Json per_tool = Json::object();
  for (const auto& [tool, ok] : r.per_tool_correct) per_tool[std::string(to_string(tool))] = ok;
  j["per_tool_correct"] = std::move(per_tool);
  j["caption_correct"] = r.caption_correct;
  return j;
}

void from_json(const Json& j, ToolReview& r) {
  if (!j.is_object()) throw ValidationError("", "expected an object");
  auto id = j.find("clip_id");
  if (id == j.end() || !id->is_string()) throw ValidationError("clip_id", "expected a string");
  r.clip_id = id->get<std::string>();
  auto per_tool = j.find("per_tool_correct");
  if (per_tool == j.end() || !per_tool->is_object()) {
    throw ValidationError("per_tool_correct", "expected an object");
  }
  r.per_tool_correct.clear();
  for (const auto& [name, value] : per_tool->items()) {
    const std::string field = "per_tool_correct." + name;
    if (!value.is_boolean()) throw ValidationError(field, "expected a boolean");
    r.per_tool_correct[parse_tool(name, field)] = value.get<bool>();
  }
  auto cap = j.find("caption_correct");
  if (cap == j.end() || !cap->is_boolean()) {
    throw ValidationError("caption_correct", "expected a boolean");
  }
  r.caption_correct = cap->get<bool>();
}

std::string word_freq_csv(const CorpusStats& s) {
  std::vector<std::pair<std::string, std::size_t>> rows(s.word_freq.begin(), s.word_freq.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string out = "word,count\n";
  for (const auto& [w, c] : rows) out += w + "," + std::to_string(c) + "\n";
  return out;
}

std::vector<CaptionRecord> latest_captions(std::span<const CaptionRecord> history) {
  std::vector<CaptionRecord> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& rec : history) {
    auto [it, inserted] = index.emplace(rec.clip_id, out.size());
    if (inserted) {
      out.push_back(rec);
    } else {
      out[it->second] = rec;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

namespace {

void write_all(int fd, std::string_view bytes, const std::string& what) {
  while (!bytes.empty()) {
    ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("write " + what + ": " + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::atomic<unsigned> g_temp_counter{0};

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  const std::filesystem::path tmp =
      path.string() + ".tmp." + std::to_string(::getpid()) + "." +
      std::to_string(g_temp_counter.fetch_add(1));
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot create " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, bytes, tmp.string());
    if (::fsync(fd) != 0) throw IoError("fsync " + tmp.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    throw IoError("rename to " + path.string() + ": " + std::strerror(err));
  }
}

struct FileLock::State {
  int fd = -1;
};

FileLock::FileLock(const std::filesystem::path& lock_path, bool blocking)
    : state_(new State) {
  state_->fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (state_->fd < 0) {
    const int err = errno;
    delete state_;
    throw IoError("cannot open lock " + lock_path.string() + ": " + std::strerror(err));
  }
  int op = LOCK_EX | (blocking ? 0 : LOCK_NB);
  int rc;
  do {
    rc = ::flock(state_->fd, op);
  } while (rc != 0 && errno == EINTR);
  if (rc != 0) {
    const int err = errno;
    ::close(state_->fd);
    delete state_;
    if (err == EWOULDBLOCK) {
      throw IoError("locked by another process: " + lock_path.string());
    }
    throw IoError("flock " + lock_path.string() + ": " + std::strerror(err));
  }
}

FileLock::~FileLock() {
  ::flock(state_->fd, LOCK_UN);
  ::close(state_->fd);
  delete state_;
}

std::size_t JsonlStore::append_bytes(const std::string& lines, std::size_t count) {
  if (count == 0) return 0;
  FileLock lock(path_.string() + ".lock");
  std::string existing;
  if (std::filesystem::exists(path_)) existing = read_text_file(path_);
  if (!existing.empty() && existing.back() != '\n') existing.push_back('\n');
  write_file_atomic(path_, existing + lines);
  return count;
}

template <typename Record>
std::size_t JsonlStore::append(std::span<const Record> records) {
  std::string lines;
  for (const auto& r : records) {
    r.validate();
    lines += serialize_line(r);
  }
  return append_bytes(lines, records.size());
}

template <typename Record>
std::vector<Record> JsonlStore::read_all() const {
  if (!std::filesystem::exists(path_)) return {};
  return parse_manifest<Record>(read_text_file(path_));
}

template std::size_t JsonlStore::append(std::span<const ClipRecord>);
template std::size_t JsonlStore::append(std::span<const CluePacket>);
template std::size_t JsonlStore::append(std::span<const CaptionRecord>);
template std::size_t JsonlStore::append(std::span<const FilterVerdict>);
template std::vector<ClipRecord> JsonlStore::read_all() const;
template std::vector<CluePacket> JsonlStore::read_all() const;
template std::vector<CaptionRecord> JsonlStore::read_all() const;
template std::vector<FilterVerdict> JsonlStore::read_all() const;

}  // namespace clipcurate
