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

#include "clipcurate/tool_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "clipcurate/curation_store.hpp"
#include "clipcurate/errors.hpp"
#include "clipcurate/random.hpp"
#include "clipcurate/text.hpp"

namespace clipcurate {

namespace {

constexpr std::array<std::pair<Service, std::string_view>, 8> kServiceNames{{
    {Service::kImageCaption, "image_caption"},
    {Service::kObjectDetection, "object_detection"},
    {Service::kImageLabel, "image_label"},
    {Service::kPlace, "place"},
    {Service::kAudioTags, "audio_tags"},
    {Service::kAudioCaption, "audio_caption"},
    {Service::kSync, "sync"},
    {Service::kLlm, "llm"},
}};

bool is_audio_tool(Service s) {
  return s == Service::kAudioTags || s == Service::kAudioCaption;
}

// Retryable rejection of a response body.
class BadResponse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace

std::string_view to_string(Service s) {
  for (const auto& [v, name] : kServiceNames) {
    if (v == s) return name;
  }
  return "?";
}

Service parse_service(std::string_view s, const std::string& field) {
  for (const auto& [v, name] : kServiceNames) {
    if (name == s) return v;
  }
  throw ValidationError(field, "unknown tool '" + std::string(s) + "'");
}

Service service_for(Tool t) {
  switch (t) {
    case Tool::kImageCaption: return Service::kImageCaption;
    case Tool::kObjectDetection: return Service::kObjectDetection;
    case Tool::kImageLabel: return Service::kImageLabel;
    case Tool::kPlace: return Service::kPlace;
    case Tool::kAudioTags: return Service::kAudioTags;
    case Tool::kAudioCaption: return Service::kAudioCaption;
    case Tool::kDatasetLabels: break;
  }
  throw ContractError("dataset_labels is computed locally, not by a service");
}

std::string_view to_string(Backend b) { return b == Backend::kLive ? "live" : "replay"; }

Backend parse_backend(std::string_view s) {
  if (s == "live") return Backend::kLive;
  if (s == "replay") return Backend::kReplay;
  throw ConfigError("backend must be 'live' or 'replay', got '" + std::string(s) + "'");
}

void ToolEndpointConfig::validate() const {
  const std::string name(to_string(tool));
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw ConfigError(name + ": base_url must start with http:// or https://");
  }
  if (!(timeout_s > 0.0)) throw ConfigError(name + ": timeout_s must be > 0");
  if (max_retries < 0) throw ConfigError(name + ": max_retries must be >= 0");
  if (!(backoff_base_ms > 0.0)) throw ConfigError(name + ": backoff_base_ms must be > 0");
  if (backoff_cap_ms < backoff_base_ms) {
    throw ConfigError(name + ": backoff_cap_ms must be >= backoff_base_ms");
  }
  if (max_concurrency < 1) throw ConfigError(name + ": max_concurrency must be >= 1");
  if (!params.is_object()) throw ConfigError(name + ": params must be an object");
}

Json to_json(const ToolEndpointConfig& c) {
  Json j;
  j["tool"] = to_string(c.tool);
  j["base_url"] = c.base_url;
  j["timeout_s"] = c.timeout_s;
  j["max_retries"] = c.max_retries;
  j["backoff_base_ms"] = c.backoff_base_ms;
  j["backoff_cap_ms"] = c.backoff_cap_ms;
  j["max_concurrency"] = c.max_concurrency;
  // auth_token deliberately not echoed
  j["params"] = c.params;
  return j;
}

void from_json(const Json& j, ToolEndpointConfig& c) {
  if (!j.is_object()) throw ConfigError("endpoint entry must be an object");
  try {
    c.tool = parse_service(j.at("tool").get<std::string>());
    c.base_url = j.at("base_url").get<std::string>();
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_base_ms = j.value("backoff_base_ms", c.backoff_base_ms);
    c.backoff_cap_ms = j.value("backoff_cap_ms", std::max(c.backoff_cap_ms, c.backoff_base_ms));
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
    if (j.contains("auth_token") && j["auth_token"].is_string()) {
      c.auth_token = j["auth_token"].get<std::string>();
    }
    if (j.contains("params")) c.params = j["params"];
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("endpoint config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("endpoint config: ") + e.what());
  }
  c.validate();
}

void validate_endpoints(const std::vector<ToolEndpointConfig>& endpoints) {
  std::set<Service> seen;
  for (const auto& e : endpoints) {
    e.validate();
    if (!seen.insert(e.tool).second) {
      throw ConfigError("tool '" + std::string(to_string(e.tool)) +
                        "' has more than one endpoint");
    }
  }
}

std::vector<double> backoff_delays_ms(const ToolEndpointConfig& cfg, std::uint64_t jitter_seed) {
  SeededRng rng(jitter_seed);
  std::vector<double> delays;
  double prev = 0.0;
  for (int k = 0; k < cfg.max_retries; ++k) {
    const double exp_delay = cfg.backoff_base_ms * std::ldexp(1.0, std::min(k, 60));
    double d = std::min(cfg.backoff_cap_ms, exp_delay * (1.0 + 0.5 * rng.uniform_unit()));
    d = std::max(prev, d);
    delays.push_back(d);
    prev = d;
  }
  return delays;
}

// ---------------------------------------------------------------------------
// Replay

ReplayStore::ReplayStore(std::filesystem::path root) : root_(std::move(root)) {
  if (!std::filesystem::is_directory(root_)) {
    throw ConfigError("replay fixtures directory not found: " + root_.string());
  }
}

bool ReplayStore::has_clip(const std::string& clip_id) const {
  return std::filesystem::is_directory(root_ / clip_id);
}

std::optional<std::string> ReplayStore::response(const std::string& clip_id, Service s) const {
  const auto path = root_ / clip_id / (std::string(to_string(s)) + ".json");
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  return read_text_file(path);
}

void ReplayStore::index_llm() const {
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (!entry.is_directory()) continue;
    const auto path = entry.path() / "llm.json";
    if (!std::filesystem::is_regular_file(path)) continue;
    std::string raw = read_text_file(path);
    Json j;
    try {
      j = Json::parse(raw);
    } catch (const Json::exception& e) {
      throw ValidationError(path.string(), std::string("malformed JSON: ") + e.what());
    }
    if (!j.contains("prompt_hash") || !j["prompt_hash"].is_string()) {
      throw ValidationError(path.string() + ":prompt_hash", "missing");
    }
    llm_by_hash_[j["prompt_hash"].get<std::string>()] = std::move(raw);
  }
}

std::optional<std::string> ReplayStore::llm_response(const std::string& prompt_hash) const {
  std::call_once(llm_once_, [this] { index_llm(); });
  auto it = llm_by_hash_.find(prompt_hash);
  if (it == llm_by_hash_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Responses

Clue parse_clue_response(Tool tool, const Json& body) {
  if (!body.is_object() || !body.contains("items") || !body["items"].is_array()) {
    throw ValidationError("items", "response must be an object with an items array");
  }
  Clue clue;
  clue.tool = tool;
  for (std::size_t i = 0; i < body["items"].size(); ++i) {
    const Json& it = body["items"][i];
    const std::string p = "items[" + std::to_string(i) + "]";
    if (!it.is_object() || !it.contains("text") || !it["text"].is_string()) {
      throw ValidationError(p + ".text", "expected a string");
    }
    ClueItem item;
    item.text = it["text"].get<std::string>();
    if (it.contains("confidence") && !it["confidence"].is_null()) {
      if (!it["confidence"].is_number()) throw ValidationError(p + ".confidence", "expected a number");
      item.confidence = it["confidence"].get<double>();
    }
    clue.items.push_back(std::move(item));
  }
  if (tool == Tool::kAudioTags && clue.items.size() > kMaxAudioTags) {
    // Unscored items sort last; equal scores keep response order.
    std::stable_sort(clue.items.begin(), clue.items.end(), [](const ClueItem& a, const ClueItem& b) {
      const double ca = a.confidence.value_or(-1.0), cb = b.confidence.value_or(-1.0);
      return ca > cb;
    });
    clue.items.resize(kMaxAudioTags);
  }
  clue.validate();
  return clue;
}

// ---------------------------------------------------------------------------
// Gateway

ToolGateway::ToolGateway(GatewayOptions options, std::shared_ptr<Transport> transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
  validate_endpoints(options_.endpoints);
  if (!(options_.sync_grid_s > 0.0)) throw ConfigError("sync grid must be > 0");
  if (options_.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (options_.backend == Backend::kReplay) {
    replay_.emplace(options_.fixtures_dir);
  } else if (!transport_) {
    transport_ = make_http_transport();
  }
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  for (const auto& e : options_.endpoints) {
    limiters_[e.tool] = std::make_unique<ConcurrencyLimiter>(e.max_concurrency);
  }
}

const ToolEndpointConfig* ToolGateway::endpoint(Service s) const {
  for (const auto& e : options_.endpoints) {
    if (e.tool == s) return &e;
  }
  return nullptr;
}

void ToolGateway::count_attempt(Service s) {
  std::lock_guard lock(stats_mu_);
  ++attempts_[s];
}

std::map<Service, int> ToolGateway::attempt_counts() const {
  std::lock_guard lock(stats_mu_);
  return attempts_;
}

ToolGateway::CallOutcome ToolGateway::call(
    Service s, const std::string& key, const Json& request,
    const std::function<std::optional<std::string>()>& replay,
    const std::function<void(const Json&)>& accept) {
  const std::string name(to_string(s));
  const ToolEndpointConfig* ep = endpoint(s);
  if (options_.backend == Backend::kLive && ep == nullptr) {
    throw ToolError(name + ": no endpoint configured");
  }
  const int max_retries = ep ? ep->max_retries : 0;
  const std::vector<double> delays =
      ep ? backoff_delays_ms(*ep, options_.seed ^ fnv1a64(name + "/" + key))
         : std::vector<double>{};

  std::string last_error;
  CallOutcome out;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0 && options_.backend == Backend::kLive) {
      options_.sleep(std::chrono::milliseconds(
          static_cast<long long>(std::llround(delays[attempt - 1]))));
    }
    ++out.attempts;
    count_attempt(s);
    std::string raw;
    if (options_.backend == Backend::kReplay) {
      auto r = replay();
      if (!r) throw FixtureMissingError(name + ": no replay fixture for " + key);
      raw = std::move(*r);
    } else {
      const char* env = std::getenv("ACD_TOOL_TOKEN");
      std::optional<std::string> token = ep->auth_token;
      if (!token && env != nullptr && *env != '\0') token = std::string(env);
      HttpResponse resp;
      try {
        ConcurrencyLimiter::Permit permit(*limiters_.at(s));
        resp = transport_->post_json(*ep, request.dump(), token);
      } catch (const ToolError& e) {
        last_error = e.what();
        continue;
      }
      if (resp.status < 200 || resp.status >= 300) {
        last_error = "HTTP " + std::to_string(resp.status);
        const bool retryable = resp.status == 429 || resp.status >= 500;
        if (!retryable) break;
        continue;
      }
      raw = std::move(resp.body);
    }
    try {
      Json body = Json::parse(raw);
      if (body.is_object() && body.contains("error")) {
        throw BadResponse("tool reported error: " + body["error"].dump());
      }
      accept(body);
      out.body = std::move(body);
      out.raw = std::move(raw);
      return out;
    } catch (const Json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    } catch (const BadResponse& e) {
      last_error = e.what();
    } catch (const ValidationError& e) {
      last_error = std::string("invalid response: ") + e.what();
    }
  }
  throw ToolError(name + " failed for " + key + " after " + std::to_string(out.attempts) +
                  " attempt(s): " + last_error);
}

FetchResult ToolGateway::fetch_clues(const ClipRecord& clip) {
  if (replay_ && !replay_->has_clip(clip.id)) {
    throw FixtureMissingError("no replay fixtures for clip " + clip.id + " under " +
                              replay_->root().string());
  }
  struct Slot {
    std::optional<Clue> clue;
    std::optional<ToolFailure> failure;
  };
  std::array<Slot, kRemoteTools.size()> slots;

  parallel_for(kRemoteTools.size(), options_.parallelism, [&](std::size_t i) {
    const Tool tool = kRemoteTools[i];
    const Service svc = service_for(tool);
    Json request;
    request["clip_id"] = clip.id;
    request["media_uri"] = is_audio_tool(svc) ? clip.media.audio_uri : clip.media.video_uri;
    const ToolEndpointConfig* ep = endpoint(svc);
    request["params"] = ep ? ep->params : Json::object();
    try {
      Clue clue;
      call(svc, clip.id, request,
           [&] { return replay_->response(clip.id, svc); },
           [&](const Json& body) { clue = parse_clue_response(tool, body); });
      slots[i].clue = std::move(clue);
    } catch (const FixtureMissingError& e) {
      // Fixture directory exists but this tool never answered for the clip.
      slots[i].failure = ToolFailure{tool, e.what(), 1};
    } catch (const ToolError& e) {
      slots[i].failure = ToolFailure{tool, e.what(), (ep ? ep->max_retries : 0) + 1};
    }
  });

  FetchResult result;
  result.packet.clip_id = clip.id;
  for (auto& slot : slots) {
    if (slot.clue) result.packet.clues.push_back(std::move(*slot.clue));
    if (slot.failure) result.failures.push_back(std::move(*slot.failure));
  }
  Clue labels;
  labels.tool = Tool::kDatasetLabels;
  for (const auto& l : clip.labels) labels.items.push_back(ClueItem{l, std::nullopt});
  result.packet.clues.push_back(std::move(labels));
  result.packet.validate();
  return result;
}

SyncObservation ToolGateway::check_sync(const ClipRecord& clip, const TrialSpec& spec) {
  const std::string key = clip.id + "#" + std::to_string(spec.index);
  Json request;
  request["clip_id"] = clip.id;
  request["media_uri"] = clip.media.video_uri;
  const ToolEndpointConfig* ep = endpoint(Service::kSync);
  Json params = ep ? ep->params : Json::object();
  params["audio_uri"] = clip.media.audio_uri;
  params["offset_s"] = spec.true_offset_s;
  params["start_s"] = spec.start_jitter_s;
  params["trial"] = spec.index;
  request["params"] = std::move(params);

  double pred = 0.0;
  auto replay = [&]() -> std::optional<std::string> {
    auto raw = replay_->response(clip.id, Service::kSync);
    if (!raw) return std::nullopt;
    Json j;
    try {
      j = Json::parse(*raw);
    } catch (const Json::exception& e) {
      throw ValidationError("sync.json", std::string("malformed JSON: ") + e.what());
    }
    if (!j.contains("trials") || !j["trials"].is_array() || spec.index >= j["trials"].size()) {
      return std::nullopt;
    }
    Json entry = j["trials"][spec.index];
    if (entry.contains("pred_error_s") && entry["pred_error_s"].is_number()) {
      entry = Json{{"pred_offset_s", spec.true_offset_s + entry["pred_error_s"].get<double>()}};
    }
    return entry.dump();
  };
  call(Service::kSync, key, request, replay, [&](const Json& body) {
    if (!body.is_object() || !body.contains("pred_offset_s") ||
        !body["pred_offset_s"].is_number()) {
      throw BadResponse("sync response lacks numeric pred_offset_s");
    }
    pred = body["pred_offset_s"].get<double>();
    if (!std::isfinite(pred)) throw BadResponse("sync prediction is not finite");
  });
  const double grid = options_.sync_grid_s;
  double snapped = std::round(pred / grid) * grid;
  if (snapped == 0.0) snapped = 0.0;  // no -0.0 in manifests
  return SyncObservation{spec.true_offset_s, snapped};
}

GeneratedCaption ToolGateway::generate_caption(const std::string& prompt,
                                               const std::string& hash) {
  if (trim(prompt).empty()) throw ContractError("generate_caption: prompt is empty");
  if (hash.empty()) throw ContractError("generate_caption: prompt hash is empty");
  const ToolEndpointConfig* ep = endpoint(Service::kLlm);
  Json request;
  request["clip_id"] = "";
  request["media_uri"] = "";
  Json params = ep ? ep->params : Json::object();
  params["prompt"] = prompt;
  request["params"] = std::move(params);

  GeneratedCaption out;
  auto outcome = call(
      Service::kLlm, hash, request, [&] { return replay_->llm_response(hash); },
      [&](const Json& body) {
        const Clue parsed = parse_clue_response(Tool::kAudioCaption, body);
        if (parsed.items.empty() || trim(parsed.items.front().text).empty()) {
          throw BadResponse("LLM returned an empty caption");
        }
        out.caption = std::string(trim(parsed.items.front().text));
      });
  out.raw_response = std::move(outcome.raw);
  if (outcome.body.contains("model") && outcome.body["model"].is_string()) {
    out.model = outcome.body["model"].get<std::string>();
  } else if (ep && ep->params.contains("model") && ep->params["model"].is_string()) {
    out.model = ep->params["model"].get<std::string>();
  } else {
    out.model = options_.backend == Backend::kReplay ? "replay" : "unknown";
  }
  return out;
}

SyncProbe ToolGateway::sync_probe() {
  return [this](const ClipRecord& clip, const TrialSpec& spec) { return check_sync(clip, spec); };
}

}  // namespace clipcurate
