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

#include "clipcurate/filter_engine.hpp"

#include <algorithm>
#include <cmath>

#include "clipcurate/errors.hpp"
#include "clipcurate/random.hpp"
#include "clipcurate/worker_pool.hpp"

namespace clipcurate {

namespace {

// Offsets arrive as differences of grid-snapped doubles; absorb the
// representation error so 0.6 compares as 0.6.
constexpr double kOffsetSlackS = 1e-9;

bool intersects(const std::vector<std::string>& labels,
                const std::set<std::string>& set) {
  return std::any_of(labels.begin(), labels.end(),
                     [&](const std::string& l) { return set.count(l) > 0; });
}

}  // namespace

void LabelFilterConfig::validate() const {
  if (speech_labels.empty()) throw ConfigError("speech_labels must be non-empty");
  if (music_labels.empty()) throw ConfigError("music_labels must be non-empty");
}

void SyncFilterConfig::validate() const {
  if (trials != static_cast<int>(kSyncTrials)) {
    throw ConfigError("sync trials is fixed at 5");
  }
  if (!(grid_s > 0.0)) throw ConfigError("grid_s must be > 0");
  if (!(correct_eps_s > 0.0 && correct_eps_s < tolerance_s)) {
    throw ConfigError("require 0 < correct_eps_s < tolerance_s");
  }
  if (!(max_offset_s >= 0.0)) throw ConfigError("max_offset_s must be >= 0");
  if (!(max_start_jitter_s >= 0.0)) {
    throw ConfigError("max_start_jitter_s must be >= 0");
  }
}

std::vector<double> SyncFilterConfig::offset_set() const {
  const auto steps = static_cast<long long>(std::floor(max_offset_s / grid_s + kOffsetSlackS));
  std::vector<double> out;
  for (long long k = -steps; k <= steps; ++k) out.push_back(static_cast<double>(k) * grid_s);
  return out;
}

LabelFilterResult label_filter(const ClipRecord& clip,
                               const LabelFilterConfig& cfg) {
  if (intersects(clip.labels, cfg.speech_labels) &&
      intersects(clip.labels, cfg.music_labels)) {
    return LabelFilterResult::kRemovedSpeechMusic;
  }
  return LabelFilterResult::kPass;
}

TrialClass classify_trial(double true_offset_s, double pred_offset_s,
                          const SyncFilterConfig& cfg) {
  if (!std::isfinite(true_offset_s) || !std::isfinite(pred_offset_s)) {
    return TrialClass::kError;
  }
  const double d = std::fabs(pred_offset_s - true_offset_s);
  if (d < cfg.correct_eps_s - kOffsetSlackS) return TrialClass::kCorrect;
  if (d <= cfg.tolerance_s + kOffsetSlackS) return TrialClass::kTolerable;
  return TrialClass::kError;
}

SyncFilterResult sync_filter(std::span<const TrialClass> trials) {
  if (trials.size() != kSyncTrials) {
    throw ContractError("sync_filter expects exactly 5 trials, got " +
                        std::to_string(trials.size()));
  }
  const bool all_error = std::all_of(trials.begin(), trials.end(), [](TrialClass c) {
    return c == TrialClass::kError;
  });
  return all_error ? SyncFilterResult::kRemovedAllError : SyncFilterResult::kPass;
}

std::vector<TrialSpec> plan_trials(const ClipRecord& clip, std::uint64_t seed,
                                   const SyncFilterConfig& cfg) {
  const std::vector<double> offsets = cfg.offset_set();
  SeededRng rng(seed, clip.id);
  std::vector<TrialSpec> specs(kSyncTrials);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    TrialSpec& spec = specs[i];
    spec.index = i;
    spec.true_offset_s = offsets[rng.uniform_index(offsets.size())];
    spec.start_jitter_s = rng.uniform_unit() * cfg.max_start_jitter_s;
  }
  return specs;
}

std::vector<FilterVerdict> run_filters(std::span<const ClipRecord> clips,
                                       const SyncProbe& probe,
                                       const FilterOptions& options) {
  options.labels.validate();
  options.sync.validate();
  std::vector<FilterVerdict> verdicts(clips.size());

  parallel_for(clips.size(), options.parallelism, [&](std::size_t i) {
    const ClipRecord& clip = clips[i];
    FilterVerdict& v = verdicts[i];
    v.clip_id = clip.id;

    if (clip.source == Source::kVggSound) {
      v.label_filter = LabelFilterResult::kPass;
      v.sync_filter = SyncFilterResult::kSkipped;
      v.final = FinalDecision::kKept;
      return;
    }

    v.label_filter = label_filter(clip, options.labels);
    if (v.label_filter == LabelFilterResult::kRemovedSpeechMusic) {
      v.sync_filter = SyncFilterResult::kSkipped;
      v.final = FinalDecision::kRemoved;
      return;
    }

    std::vector<TrialClass> classes;
    for (const TrialSpec& spec : plan_trials(clip, options.seed, options.sync)) {
      SyncTrial trial;
      trial.true_offset_s = spec.true_offset_s;
      try {
        SyncObservation obs = probe(clip, spec);
        if (std::isfinite(obs.true_offset_s)) trial.true_offset_s = obs.true_offset_s;
        trial.pred_offset_s = obs.pred_offset_s;
        trial.cls = classify_trial(trial.true_offset_s, obs.pred_offset_s, options.sync);
        if (!std::isfinite(obs.pred_offset_s)) trial.pred_offset_s.reset();
      } catch (const ToolError&) {
        trial.cls = TrialClass::kError;
      }
      classes.push_back(trial.cls);
      v.sync_trials.push_back(trial);
    }
    v.sync_filter = sync_filter(classes);
    v.final = v.sync_filter == SyncFilterResult::kRemovedAllError
                  ? FinalDecision::kRemoved
                  : FinalDecision::kKept;
  });
  return verdicts;
}

}  // namespace clipcurate
