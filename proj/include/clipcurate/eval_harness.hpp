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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clipcurate/datamodel.hpp"

namespace clipcurate {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
/// Cosine similarity; throws ContractError for a zero vector or a
/// dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

/// Copy with every row scaled to unit L2 norm. Zero rows are an error.
Matrix normalize_rows(const Matrix& m);

/// Aligned audio/text embeddings with multi-caption ground truth:
/// gt[i] lists the text rows that describe audio row i.
struct EmbeddingBatch {
  Matrix audio;
  Matrix text;
  std::vector<std::vector<std::size_t>> gt;
  double tau = 1.0;

  void validate() const;
  /// gt = identity over min(n_a, n_t) rows.
  static std::vector<std::vector<std::size_t>> identity_gt(std::size_t n);
};

enum class RetrievalDirection { kAudioToText, kTextToAudio };

struct RetrievalReport {
  RetrievalDirection direction = RetrievalDirection::kAudioToText;
  std::map<std::size_t, double> recall_at;
};

struct RetrievalReports {
  RetrievalReport audio_to_text;
  RetrievalReport text_to_audio;
};

/// Cosine Recall@k in both directions. A query hits at k when any of its
/// ground-truth items ranks within the top k; equal similarities rank the
/// lower index first. For text->audio each text must belong to exactly one
/// audio's gt set.
RetrievalReports recall_at_k(const EmbeddingBatch& batch, std::span<const std::size_t> ks);

enum class ZeroShotKind { kEnvironment, kGeneric };

/// "The sound in {label}" for environment labels, "The sound of {label}"
/// otherwise.
std::string zero_shot_prompt(std::string_view label, ZeroShotKind kind);

/// Maps prompts to embedding rows (one row per prompt, same order).
using TextEmbedder = std::function<Matrix(std::span<const std::string>)>;

/// Fraction of audio rows whose argmax-cosine prompt is their target label
/// (Recall@1). Ties go to the lower label index.
double zero_shot_classify(const Matrix& audio, std::span<const std::size_t> targets,
                          std::span<const std::string> labels, ZeroShotKind kind,
                          const TextEmbedder& embedder);

struct RougeLScore {
  double score = 0.0;
  // Candidate or every reference tokenized to nothing; score forced to 0.
  bool empty_input = false;
};

inline constexpr double kRougeBeta = 1.2;

/// LCS F-measure (beta = 1.2) against each reference; the best one wins.
RougeLScore rouge_l(std::string_view candidate, std::span<const std::string> references);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct CiderScores {
  std::vector<double> per_item;
  double mean = 0.0;
};

/// CIDEr over n = 1..4 with document frequencies taken from the reference
/// sets (x10 scale). Needs at least two items.
CiderScores cider(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references);

/// Elementwise (CIDEr + SPICE) / 2. SPICE comes from an external scorer.
std::vector<double> spider(std::span<const double> cider_scores,
                           std::span<const double> spice_scores);

/// Symmetric InfoNCE over identity-paired rows, rows L2-normalized first.
double info_nce_loss(const EmbeddingBatch& batch);

struct TokenSequence {
  std::vector<double> logprobs;  // log p of each correct token, all <= 0
};

/// -sum of every token log-probability over every sequence.
double caption_nll(std::span<const TokenSequence> seqs);

/// Max cosine similarity between the candidate and any reference.
double sbert_similarity(std::span<const double> candidate,
                        const std::vector<std::vector<double>>& references);

// Embedding files: raw little-endian float32, row-major, with a JSON
// sidecar "<path>.json" holding {"rows": R, "dim": D}.
Matrix read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const Matrix& m);

/// Ground truth as [[text indices of audio 0], ...] or {"0": [...], ...}.
std::vector<std::vector<std::size_t>> parse_gt(const Json& j);

Json to_json(const RetrievalReports& r);

}  // namespace clipcurate
