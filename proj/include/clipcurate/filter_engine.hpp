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

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "clipcurate/datamodel.hpp"

namespace clipcurate {

struct LabelFilterConfig {
  std::set<std::string> speech_labels{"Speech"};
  std::set<std::string> music_labels{"Music"};

  void validate() const;
};

struct SyncFilterConfig {
  int trials = static_cast<int>(kSyncTrials);
  double tolerance_s = 0.6;
  double grid_s = 0.2;
  double correct_eps_s = 0.1;
  // Injected ground-truth offsets are drawn uniformly from the grid points
  // in [-max_offset_s, max_offset_s]; trial start times uniformly from
  // [0, max_start_jitter_s].
  double max_offset_s = 2.0;
  double max_start_jitter_s = 5.0;

  void validate() const;
  /// Grid-aligned candidate offsets, ascending.
  std::vector<double> offset_set() const;
};

/// One injected trial: where the audio is shifted to and where the
/// analysed window starts inside the clip.
struct TrialSpec {
  std::size_t index = 0;  // 0..4
  double true_offset_s = 0.0;
  double start_jitter_s = 0.0;
};

struct SyncObservation {
  double true_offset_s = 0.0;
  double pred_offset_s = 0.0;
};

/// Answers one synchronisation trial. Throws ToolError when the tool could
/// not answer (the trial then counts as error). FixtureMissingError and
/// other exceptions propagate.
using SyncProbe =
    std::function<SyncObservation(const ClipRecord&, const TrialSpec&)>;

LabelFilterResult label_filter(const ClipRecord& clip,
                               const LabelFilterConfig& cfg);

TrialClass classify_trial(double true_offset_s, double pred_offset_s,
                          const SyncFilterConfig& cfg = {});

/// Removes only when every one of the five trials is error-class.
SyncFilterResult sync_filter(std::span<const TrialClass> trials);

/// The five trial specs for a clip. Depends only on (seed, clip id), so
/// results do not change with processing order or parallelism.
std::vector<TrialSpec> plan_trials(const ClipRecord& clip, std::uint64_t seed,
                                   const SyncFilterConfig& cfg);

struct FilterOptions {
  LabelFilterConfig labels;
  SyncFilterConfig sync;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
};

/// One verdict per clip, in input order. VGGSound clips are kept without
/// any check; AudioSet clips run the label rule first and only reach the
/// sync trials when it passes.
std::vector<FilterVerdict> run_filters(std::span<const ClipRecord> clips,
                                       const SyncProbe& probe,
                                       const FilterOptions& options);

}  // namespace clipcurate
