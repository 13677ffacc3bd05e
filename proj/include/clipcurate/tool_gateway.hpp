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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "clipcurate/datamodel.hpp"
#include "clipcurate/filter_engine.hpp"
#include "clipcurate/worker_pool.hpp"

namespace clipcurate {

/// Remote services: the six model-backed clue tools, the synchronisation
/// model and the LLM.
enum class Service {
  kImageCaption,
  kObjectDetection,
  kImageLabel,
  kPlace,
  kAudioTags,
  kAudioCaption,
  kSync,
  kLlm,
};

inline constexpr std::array<Service, 8> kAllServices = {
    Service::kImageCaption, Service::kObjectDetection, Service::kImageLabel,
    Service::kPlace,        Service::kAudioTags,       Service::kAudioCaption,
    Service::kSync,         Service::kLlm};

std::string_view to_string(Service s);
Service parse_service(std::string_view s, const std::string& field = "tool");
Service service_for(Tool t);  // dataset_labels has no service

enum class Backend { kLive, kReplay };
std::string_view to_string(Backend b);
Backend parse_backend(std::string_view s);

struct ToolEndpointConfig {
  Service tool = Service::kLlm;
  std::string base_url;
  double timeout_s = 30.0;
  int max_retries = 2;
  double backoff_base_ms = 200.0;
  double backoff_cap_ms = 10000.0;
  std::optional<std::string> auth_token;  // falls back to $ACD_TOOL_TOKEN
  std::size_t max_concurrency = 4;
  Json params = Json::object();  // passed through in every request

  void validate() const;
};

Json to_json(const ToolEndpointConfig& c);
void from_json(const Json& j, ToolEndpointConfig& c);

/// Rejects two endpoints for the same service.
void validate_endpoints(const std::vector<ToolEndpointConfig>& endpoints);

/// Delays (ms) before retry 1..max_retries: exponential in the attempt,
/// up to +50% jitter, capped, never decreasing.
std::vector<double> backoff_delays_ms(const ToolEndpointConfig& cfg, std::uint64_t jitter_seed);

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POSTs a JSON body to an endpoint. Throws ToolError when no HTTP
/// response was received (refused, timed out, DNS failure).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post_json(const ToolEndpointConfig& endpoint, const std::string& body,
                                 const std::optional<std::string>& bearer_token) = 0;
};

std::shared_ptr<Transport> make_http_transport();

/// Canned responses under <root>/<clip_id>/<tool>.json. Each file holds the
/// wire response for that tool. Two files differ from the wire shape:
///   sync.json  {"trials": [t0, ..., t4]} where each entry is
///              {"pred_offset_s": x}, {"pred_error_s": e} (prediction is
///              true offset + e), or {"error": "..."} (tool failure);
///   llm.json   {"prompt_hash": "<sha256>", "items": [...], "model": ...},
///              looked up by prompt hash rather than clip.
class ReplayStore {
 public:
  explicit ReplayStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  bool has_clip(const std::string& clip_id) const;
  /// Raw bytes of <clip>/<tool>.json, or nullopt when the file is absent.
  std::optional<std::string> response(const std::string& clip_id, Service s) const;
  std::optional<std::string> llm_response(const std::string& prompt_hash) const;

 private:
  void index_llm() const;

  std::filesystem::path root_;
  mutable std::once_flag llm_once_;
  mutable std::map<std::string, std::string> llm_by_hash_;
};

struct ToolFailure {
  Tool tool = Tool::kImageCaption;
  std::string message;
  int attempts = 0;
};

struct FetchResult {
  CluePacket packet;
  std::vector<ToolFailure> failures;
};

struct GeneratedCaption {
  std::string caption;
  std::string model;
  std::string raw_response;  // verbatim, for the run ledger
};

struct GatewayOptions {
  Backend backend = Backend::kReplay;
  std::vector<ToolEndpointConfig> endpoints;
  std::filesystem::path fixtures_dir;
  std::size_t parallelism = 4;
  double sync_grid_s = 0.2;
  std::uint64_t seed = 0;
  /// Used between retries; tests substitute a recorder.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Uniform client over every remote service. Thread-safe.
class ToolGateway {
 public:
  explicit ToolGateway(GatewayOptions options,
                       std::shared_ptr<Transport> transport = nullptr);

  /// One clue per tool that answered, plus dataset_labels built from the
  /// clip's labels. audio_tags keeps the three highest-confidence items.
  /// Tools that fail after retries are listed in `failures`; a replay
  /// fixture directory missing for the clip throws FixtureMissingError.
  FetchResult fetch_clues(const ClipRecord& clip);

  /// Prediction snapped to the sync grid. Throws ToolError on failure.
  SyncObservation check_sync(const ClipRecord& clip, const TrialSpec& spec);

  /// Throws ContractError for an empty prompt and ToolError when every
  /// attempt failed or returned a blank caption.
  GeneratedCaption generate_caption(const std::string& prompt, const std::string& prompt_hash);

  SyncProbe sync_probe();

  /// Attempts made so far per service (every try, including retries).
  std::map<Service, int> attempt_counts() const;

  const GatewayOptions& options() const { return options_; }

 private:
  struct CallOutcome {
    Json body;
    std::string raw;
    int attempts = 0;
  };

  const ToolEndpointConfig* endpoint(Service s) const;
  /// Runs one logical call with retries. `accept` throws to reject a
  /// response (which is then retried).
  CallOutcome call(Service s, const std::string& key, const Json& request,
                   const std::function<std::optional<std::string>()>& replay,
                   const std::function<void(const Json&)>& accept);
  void count_attempt(Service s);

  GatewayOptions options_;
  std::shared_ptr<Transport> transport_;
  std::optional<ReplayStore> replay_;
  std::map<Service, std::unique_ptr<ConcurrencyLimiter>> limiters_;
  mutable std::mutex stats_mu_;
  std::map<Service, int> attempts_;
};

/// Parses {"items": [{"text", "confidence"}]} into a Clue. Throws
/// ValidationError on a malformed body.
Clue parse_clue_response(Tool tool, const Json& body);

}  // namespace clipcurate
