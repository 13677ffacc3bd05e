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

#include <cmath>
#include <map>
#include <set>

#include "clipcurate/errors.hpp"
#include "clipcurate/eval_harness.hpp"
#include "clipcurate/text.hpp"

namespace clipcurate {

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeLScore rouge_l(std::string_view candidate, std::span<const std::string> references) {
  const auto cand = tokenize_words(candidate);
  RougeLScore out;
  bool any_reference = false;
  double best = 0.0;
  for (const auto& ref_text : references) {
    const auto ref = tokenize_words(ref_text);
    if (ref.empty()) continue;
    any_reference = true;
    if (cand.empty()) break;
    const double lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(cand.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double b2 = kRougeBeta * kRougeBeta;
    best = std::max(best, ((1.0 + b2) * p * r) / (r + b2 * p));
  }
  if (cand.empty() || !any_reference) {
    out.empty_input = true;
    return out;
  }
  out.score = best;
  return out;
}

namespace {

constexpr int kCiderMaxN = 4;

using NgramCounts = std::map<std::string, double>;

// counts[n-1] holds the n-gram term frequencies.
std::array<NgramCounts, kCiderMaxN> count_ngrams(std::string_view sentence) {
  const auto words = tokenize_words(sentence);
  std::array<NgramCounts, kCiderMaxN> counts;
  for (int n = 1; n <= kCiderMaxN; ++n) {
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      std::string gram = words[i];
      for (int k = 1; k < n; ++k) gram += " " + words[i + k];
      counts[n - 1][gram] += 1.0;
    }
  }
  return counts;
}

struct TfIdfVector {
  std::array<NgramCounts, kCiderMaxN> weights;
  std::array<double, kCiderMaxN> norms{};
};

TfIdfVector to_tfidf(const std::array<NgramCounts, kCiderMaxN>& counts,
                     const std::map<std::string, double>& doc_freq, double log_n) {
  TfIdfVector v;
  for (int n = 0; n < kCiderMaxN; ++n) {
    double sq = 0.0;
    for (const auto& [gram, tf] : counts[n]) {
      auto it = doc_freq.find(gram);
      const double df = it == doc_freq.end() ? 0.0 : it->second;
      const double w = tf * (log_n - std::log(std::max(1.0, df)));
      v.weights[n][gram] = w;
      sq += w * w;
    }
    v.norms[n] = std::sqrt(sq);
  }
  return v;
}

double cosine_per_n(const TfIdfVector& cand, const TfIdfVector& ref, int n) {
  if (cand.norms[n] == 0.0 || ref.norms[n] == 0.0) return 0.0;
  double num = 0.0;
  for (const auto& [gram, w] : cand.weights[n]) {
    auto it = ref.weights[n].find(gram);
    if (it != ref.weights[n].end()) num += w * it->second;
  }
  return num / (cand.norms[n] * ref.norms[n]);
}

}  // namespace

CiderScores cider(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references) {
  if (candidates.size() != references.size()) {
    throw ContractError("cider: " + std::to_string(candidates.size()) + " candidates but " +
                        std::to_string(references.size()) + " reference sets");
  }
  if (candidates.size() < 2) throw ContractError("cider: corpus needs at least 2 items");

  std::vector<std::vector<std::array<NgramCounts, kCiderMaxN>>> ref_counts(references.size());
  std::map<std::string, double> doc_freq;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (references[i].empty()) {
      throw ContractError("cider: item " + std::to_string(i) + " has no references");
    }
    std::set<std::string> seen;
    for (const auto& ref : references[i]) {
      ref_counts[i].push_back(count_ngrams(ref));
      for (const auto& per_n : ref_counts[i].back()) {
        for (const auto& [gram, tf] : per_n) seen.insert(gram);
      }
    }
    for (const auto& gram : seen) doc_freq[gram] += 1.0;
  }

  const double log_n = std::log(static_cast<double>(candidates.size()));
  CiderScores out;
  out.per_item.reserve(candidates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const TfIdfVector cand = to_tfidf(count_ngrams(candidates[i]), doc_freq, log_n);
    double item = 0.0;
    for (const auto& rc : ref_counts[i]) {
      const TfIdfVector ref = to_tfidf(rc, doc_freq, log_n);
      double mean_n = 0.0;
      for (int n = 0; n < kCiderMaxN; ++n) mean_n += cosine_per_n(cand, ref, n);
      item += mean_n / kCiderMaxN;
    }
    item = item / static_cast<double>(ref_counts[i].size()) * 10.0;
    out.per_item.push_back(item);
    total += item;
  }
  out.mean = total / static_cast<double>(candidates.size());
  return out;
}

std::vector<double> spider(std::span<const double> cider_scores,
                           std::span<const double> spice_scores) {
  if (cider_scores.size() != spice_scores.size()) {
    throw ContractError("spider: " + std::to_string(cider_scores.size()) +
                        " CIDEr scores but " + std::to_string(spice_scores.size()) +
                        " SPICE scores");
  }
  std::vector<double> out;
  out.reserve(cider_scores.size());
  for (std::size_t i = 0; i < cider_scores.size(); ++i) {
    if (!std::isfinite(spice_scores[i]) || spice_scores[i] < 0.0) {
      throw ContractError("spider: SPICE score " + std::to_string(i) + " must be >= 0");
    }
    out.push_back((cider_scores[i] + spice_scores[i]) / 2.0);
  }
  return out;
}

double sbert_similarity(std::span<const double> candidate,
                        const std::vector<std::vector<double>>& references) {
  if (references.empty()) throw ContractError("sbert_similarity: no references");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& ref : references) best = std::max(best, cosine(candidate, ref));
  return best;
}

}  // namespace clipcurate
