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

#include "clipcurate/errors.hpp"
#include "clipcurate/eval_harness.hpp"

namespace clipcurate {

namespace {

double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double info_nce_loss(const EmbeddingBatch& batch) {
  if (!(batch.tau > 0.0) || !std::isfinite(batch.tau)) {
    throw ContractError("info_nce_loss: tau must be > 0");
  }
  const std::size_t n = batch.audio.rows();
  if (n == 0) throw ContractError("info_nce_loss: empty batch");
  if (batch.text.rows() != n) {
    throw ContractError("info_nce_loss: audio and text batches differ in size");
  }
  batch.validate();
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.gt[i].size() != 1 || batch.gt[i][0] != i) {
      throw ContractError("info_nce_loss: ground truth must be the identity pairing");
    }
  }

  const Matrix a = normalize_rows(batch.audio);
  const Matrix t = normalize_rows(batch.text);
  // logits(i, j) = a_i . t_j / tau; audio->text uses rows, text->audio columns.
  Matrix logits(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) logits(i, j) = dot(a.row(i), t.row(j)) / batch.tau;
  }
  std::vector<double> column(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) column[j] = logits(j, i);
    const double audio_term = logits(i, i) - log_sum_exp(logits.row(i));
    const double text_term = logits(i, i) - log_sum_exp(column);
    total += audio_term + text_term;
  }
  const double loss = -total / (2.0 * static_cast<double>(n));
  // A single pair has log-softmax exactly 0; clamp away the -0.0.
  return loss <= 0.0 ? 0.0 : loss;
}

double caption_nll(std::span<const TokenSequence> seqs) {
  double total = 0.0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto& lp = seqs[i].logprobs;
    if (lp.empty()) {
      throw ValidationError("seqs[" + std::to_string(i) + "].logprobs", "length must be >= 1");
    }
    for (std::size_t j = 0; j < lp.size(); ++j) {
      if (!(lp[j] <= 0.0)) {
        throw ValidationError(
            "seqs[" + std::to_string(i) + "].logprobs[" + std::to_string(j) + "]",
            "log-probability must be <= 0");
      }
      total -= lp[j];
    }
  }
  return total;
}

}  // namespace clipcurate
