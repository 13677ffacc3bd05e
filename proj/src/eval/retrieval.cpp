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

#include <algorithm>
#include <cmath>
#include <limits>

#include "clipcurate/errors.hpp"
#include "clipcurate/eval_harness.hpp"

namespace clipcurate {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ContractError("matrix data size does not match " + std::to_string(rows) + "x" +
                        std::to_string(cols));
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw ContractError("ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(data));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("dimension mismatch");
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw ContractError("cosine of a zero vector");
  return dot(a, b) / (na * nb);
}

Matrix normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double n = l2_norm(r);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw ContractError("row " + std::to_string(i) + " has zero or non-finite norm");
    }
    for (double& v : r) v /= n;
  }
  return out;
}

std::vector<std::vector<std::size_t>> EmbeddingBatch::identity_gt(std::size_t n) {
  std::vector<std::vector<std::size_t>> gt(n);
  for (std::size_t i = 0; i < n; ++i) gt[i] = {i};
  return gt;
}

void EmbeddingBatch::validate() const {
  if (audio.cols() == 0 || text.cols() == 0) throw ValidationError("dim", "must be >= 1");
  if (audio.cols() != text.cols()) {
    throw ValidationError("dim", "audio and text embeddings differ in dimension");
  }
  if (gt.size() != audio.rows()) {
    throw ValidationError("gt", "needs one entry per audio row");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i].empty()) throw ValidationError("gt[" + std::to_string(i) + "]", "empty");
    for (std::size_t t : gt[i]) {
      if (t >= text.rows()) {
        throw ValidationError("gt[" + std::to_string(i) + "]", "text index out of range");
      }
    }
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau", "must be > 0");
}

namespace {

// 0-based rank of `target` among `scores`; ties favour the lower index.
std::size_t rank_of(std::span<const double> scores, std::size_t target) {
  const double s = scores[target];
  std::size_t rank = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > s || (scores[j] == s && j < target)) ++rank;
  }
  return rank;
}

void check_ks(std::span<const std::size_t> ks, std::size_t n, const char* what) {
  if (ks.empty()) throw ContractError("no k values given");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || ks[i] > n) {
      throw ContractError("k=" + std::to_string(ks[i]) + " out of range [1, " +
                          std::to_string(n) + "] for " + what);
    }
    if (i > 0 && ks[i] <= ks[i - 1]) throw ContractError("ks must be strictly ascending");
  }
}

std::map<std::size_t, double> recall_from_ranks(const std::vector<std::size_t>& best_ranks,
                                                std::span<const std::size_t> ks) {
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t r : best_ranks) hits += r < k ? 1 : 0;
    out[k] = static_cast<double>(hits) / static_cast<double>(best_ranks.size());
  }
  return out;
}

}  // namespace

RetrievalReports recall_at_k(const EmbeddingBatch& batch, std::span<const std::size_t> ks) {
  batch.validate();
  const std::size_t n_a = batch.audio.rows(), n_t = batch.text.rows();
  check_ks(ks, n_t, "audio_to_text");
  check_ks(ks, n_a, "text_to_audio");

  std::vector<std::size_t> owner(n_t, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n_a; ++i) {
    for (std::size_t t : batch.gt[i]) {
      if (owner[t] != std::numeric_limits<std::size_t>::max() && owner[t] != i) {
        throw ValidationError("gt", "text " + std::to_string(t) + " belongs to two audios");
      }
      owner[t] = i;
    }
  }
  for (std::size_t t = 0; t < n_t; ++t) {
    if (owner[t] == std::numeric_limits<std::size_t>::max()) {
      throw ValidationError("gt", "text " + std::to_string(t) + " has no audio");
    }
  }

  const Matrix a = normalize_rows(batch.audio);
  const Matrix t = normalize_rows(batch.text);
  Matrix sim(n_a, n_t);
  for (std::size_t i = 0; i < n_a; ++i) {
    for (std::size_t j = 0; j < n_t; ++j) sim(i, j) = dot(a.row(i), t.row(j));
  }

  std::vector<std::size_t> a2t(n_a);
  for (std::size_t i = 0; i < n_a; ++i) {
    std::size_t best = n_t;
    for (std::size_t j : batch.gt[i]) best = std::min(best, rank_of(sim.row(i), j));
    a2t[i] = best;
  }

  std::vector<std::size_t> t2a(n_t);
  std::vector<double> column(n_a);
  for (std::size_t j = 0; j < n_t; ++j) {
    for (std::size_t i = 0; i < n_a; ++i) column[i] = sim(i, j);
    t2a[j] = rank_of(column, owner[j]);
  }

  RetrievalReports out;
  out.audio_to_text.direction = RetrievalDirection::kAudioToText;
  out.audio_to_text.recall_at = recall_from_ranks(a2t, ks);
  out.text_to_audio.direction = RetrievalDirection::kTextToAudio;
  out.text_to_audio.recall_at = recall_from_ranks(t2a, ks);
  return out;
}

std::string zero_shot_prompt(std::string_view label, ZeroShotKind kind) {
  return std::string(kind == ZeroShotKind::kEnvironment ? "The sound in " : "The sound of ") +
         std::string(label);
}

double zero_shot_classify(const Matrix& audio, std::span<const std::size_t> targets,
                          std::span<const std::string> labels, ZeroShotKind kind,
                          const TextEmbedder& embedder) {
  if (labels.empty()) throw ContractError("zero-shot classification needs labels");
  if (audio.rows() == 0) throw ContractError("no audio rows to classify");
  if (targets.size() != audio.rows()) {
    throw ContractError("need one target label per audio row");
  }
  std::vector<std::string> prompts;
  prompts.reserve(labels.size());
  for (const auto& l : labels) prompts.push_back(zero_shot_prompt(l, kind));
  const Matrix prompt_emb = embedder(prompts);
  if (prompt_emb.rows() != labels.size()) {
    throw ContractError("embedder returned " + std::to_string(prompt_emb.rows()) +
                        " rows for " + std::to_string(labels.size()) + " prompts");
  }
  if (prompt_emb.cols() != audio.cols()) {
    throw ContractError("embedder dimension " + std::to_string(prompt_emb.cols()) +
                        " does not match audio dimension " + std::to_string(audio.cols()));
  }
  const Matrix a = normalize_rows(audio);
  const Matrix p = normalize_rows(prompt_emb);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (targets[i] >= labels.size()) throw ContractError("target label index out of range");
    std::size_t best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < p.rows(); ++l) {
      const double s = dot(a.row(i), p.row(l));
      if (s > best_sim) {
        best_sim = s;
        best = l;
      }
    }
    correct += best == targets[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(a.rows());
}

Json to_json(const RetrievalReports& r) {
  auto encode = [](const RetrievalReport& rep) {
    Json j = Json::object();
    for (const auto& [k, v] : rep.recall_at) j["R@" + std::to_string(k)] = v;
    return j;
  };
  Json j;
  j["audio_to_text"] = encode(r.audio_to_text);
  j["text_to_audio"] = encode(r.text_to_audio);
  return j;
}

}  // namespace clipcurate
