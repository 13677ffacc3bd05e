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

#include <gtest/gtest.h>

#include <httplib.h>

#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

#include "clipcurate/curation_store.hpp"
#include "clipcurate/errors.hpp"
#include "clipcurate/text.hpp"
#include "clipcurate/tool_gateway.hpp"
#include "synth.hpp"

namespace clipcurate {
namespace {

const std::filesystem::path kReplay = CLIPCURATE_TEST_DATA "/replay20";

// Local stand-in for the remote services. Each path answers from a queue of
// scripted (status, body) pairs; the last entry repeats once the queue drains.
class ScriptedServer {
 public:
  struct Seen {
    std::string path;
    std::string authorization;
    Json body;
  };

  ScriptedServer() {
    server_.Post(R"(/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      Seen s{req.path, req.get_header_value("Authorization"), Json::parse(req.body, nullptr, false)};
      seen_.push_back(std::move(s));
      auto& q = script_[req.path];
      if (q.empty()) {
        res.status = 404;
        return;
      }
      const auto [status, body] = q.front();
      if (q.size() > 1) q.pop_front();
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScriptedServer() {
    server_.stop();
    thread_.join();
  }

  void script(const std::string& path, std::deque<std::pair<int, std::string>> replies) {
    std::lock_guard lock(mu_);
    script_[path] = std::move(replies);
  }
  std::vector<Seen> seen() {
    std::lock_guard lock(mu_);
    return seen_;
  }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::map<std::string, std::deque<std::pair<int, std::string>>> script_;
  std::vector<Seen> seen_;
};

ToolEndpointConfig endpoint(Service s, const std::string& url, int retries = 2) {
  ToolEndpointConfig e;
  e.tool = s;
  e.base_url = url;
  e.timeout_s = 2.0;
  e.max_retries = retries;
  e.backoff_base_ms = 10.0;
  e.backoff_cap_ms = 40.0;
  return e;
}

struct SleepLog {
  std::mutex mu;
  std::vector<long long> ms;
  std::function<void(std::chrono::milliseconds)> fn() {
    return [this](std::chrono::milliseconds d) {
      std::lock_guard lock(mu);
      ms.push_back(d.count());
    };
  }
};

GatewayOptions live(std::vector<ToolEndpointConfig> eps, SleepLog& log) {
  GatewayOptions o;
  o.backend = Backend::kLive;
  o.endpoints = std::move(eps);
  o.sleep = log.fn();
  o.seed = 11;
  return o;
}

const char* kCaptionBody = R"({"model":"m1","items":[{"text":"  A dog barks twice. "}]})";

TEST(LiveGateway, RetriesServerErrorsAndRateLimits) {
  ScriptedServer srv;
  srv.script("/llm", {{503, "{}"}, {429, "{}"}, {200, kCaptionBody}});
  SleepLog log;
  ToolGateway gw(live({endpoint(Service::kLlm, srv.url("/llm"))}, log));
  const auto out = gw.generate_caption("Describe it.", sha256_hex("Describe it."));
  EXPECT_EQ(out.caption, "A dog barks twice.");
  EXPECT_EQ(out.model, "m1");
  EXPECT_EQ(out.raw_response, kCaptionBody);
  EXPECT_EQ(gw.attempt_counts().at(Service::kLlm), 3);
  ASSERT_EQ(log.ms.size(), 2u);
  EXPECT_LE(log.ms[0], log.ms[1]);
  EXPECT_LE(log.ms[1], 40);

  const auto seen = srv.seen();
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0].body["params"]["prompt"], "Describe it.");
}

TEST(LiveGateway, GivesUpAfterMaxRetries) {
  ScriptedServer srv;
  srv.script("/llm", {{500, "{}"}});
  SleepLog log;
  ToolGateway gw(live({endpoint(Service::kLlm, srv.url("/llm"), 3)}, log));
  EXPECT_THROW(gw.generate_caption("p", sha256_hex("p")), ToolError);
  EXPECT_EQ(gw.attempt_counts().at(Service::kLlm), 4);
  EXPECT_EQ(log.ms.size(), 3u);
}

TEST(LiveGateway, ClientErrorsAreNotRetried) {
  ScriptedServer srv;
  srv.script("/llm", {{400, "{}"}, {200, kCaptionBody}});
  SleepLog log;
  ToolGateway gw(live({endpoint(Service::kLlm, srv.url("/llm"))}, log));
  EXPECT_THROW(gw.generate_caption("p", sha256_hex("p")), ToolError);
  EXPECT_EQ(gw.attempt_counts().at(Service::kLlm), 1);
  EXPECT_TRUE(log.ms.empty());
}

TEST(LiveGateway, MalformedAndBlankBodiesAreRetried) {
  ScriptedServer srv;
  srv.script("/llm", {{200, "not json"}, {200, R"({"items":[{"text":"   "}]})"}, {200, kCaptionBody}});
  SleepLog log;
  ToolGateway gw(live({endpoint(Service::kLlm, srv.url("/llm"))}, log));
  EXPECT_EQ(gw.generate_caption("p", sha256_hex("p")).caption, "A dog barks twice.");
  EXPECT_EQ(gw.attempt_counts().at(Service::kLlm), 3);
}

TEST(LiveGateway, BearerTokenFromConfigThenEnvironment) {
  ScriptedServer srv;
  srv.script("/llm", {{200, kCaptionBody}});
  SleepLog log;
  auto ep = endpoint(Service::kLlm, srv.url("/llm"));
  ep.auth_token = "cfg-token";
  {
    ToolGateway gw(live({ep}, log));
    gw.generate_caption("p", sha256_hex("p"));
  }
  ep.auth_token.reset();
  ::setenv("ACD_TOOL_TOKEN", "env-token", 1);
  {
    ToolGateway gw(live({ep}, log));
    gw.generate_caption("p", sha256_hex("p"));
  }
  ::unsetenv("ACD_TOOL_TOKEN");
  {
    ToolGateway gw(live({ep}, log));
    gw.generate_caption("p", sha256_hex("p"));
  }
  const auto seen = srv.seen();
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0].authorization, "Bearer cfg-token");
  EXPECT_EQ(seen[1].authorization, "Bearer env-token");
  EXPECT_EQ(seen[2].authorization, "");
}

std::vector<ToolEndpointConfig> clue_endpoints(const ScriptedServer& srv, int retries) {
  std::vector<ToolEndpointConfig> eps;
  for (Service s : {Service::kImageCaption, Service::kObjectDetection, Service::kImageLabel,
                    Service::kPlace, Service::kAudioTags, Service::kAudioCaption}) {
    eps.push_back(endpoint(s, srv.url("/" + std::string(to_string(s))), retries));
  }
  return eps;
}

TEST(LiveGateway, FetchCluesSendsMediaAndParams) {
  ScriptedServer srv;
  auto eps = clue_endpoints(srv, 0);
  for (auto& e : eps) {
    srv.script("/" + std::string(to_string(e.tool)), {{200, R"({"items":[{"text":"x","confidence":0.5}]})"}});
  }
  eps[0].params = Json{{"model", "cap-large"}};
  SleepLog log;
  ToolGateway gw(live(eps, log));
  const auto clip = synth::make_clip("vid", 30, Source::kAudioSet, {"Dog", "Bark"});
  const auto r = gw.fetch_clues(clip);
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.packet.clues.size(), 7u);
  EXPECT_EQ(r.packet.clues.back().tool, Tool::kDatasetLabels);
  EXPECT_EQ(r.packet.clues.back().items.size(), 2u);

  for (const auto& s : srv.seen()) {
    EXPECT_EQ(s.body["clip_id"], "vid_30");
    const bool audio = s.path == "/audio_tags" || s.path == "/audio_caption";
    EXPECT_EQ(s.body["media_uri"], audio ? clip.media.audio_uri : clip.media.video_uri) << s.path;
    if (s.path == "/image_caption") EXPECT_EQ(s.body["params"]["model"], "cap-large");
  }
}

TEST(LiveGateway, PartialFailureKeepsOtherClues) {
  ScriptedServer srv;
  auto eps = clue_endpoints(srv, 1);
  for (auto& e : eps) {
    srv.script("/" + std::string(to_string(e.tool)), {{200, R"({"items":[{"text":"x"}]})"}});
  }
  srv.script("/place", {{502, "{}"}});
  srv.script("/object_detection", {{200, R"({"error":"model unavailable"})"}});
  SleepLog log;
  ToolGateway gw(live(eps, log));
  const auto r = gw.fetch_clues(synth::make_clip("vid", 0, Source::kAudioSet, {"Dog"}));
  ASSERT_EQ(r.failures.size(), 2u);
  EXPECT_EQ(r.packet.clues.size(), 5u);
  for (const auto& f : r.failures) {
    EXPECT_EQ(f.attempts, 2);
    EXPECT_TRUE(f.tool == Tool::kPlace || f.tool == Tool::kObjectDetection);
  }
  EXPECT_EQ(gw.attempt_counts().at(Service::kPlace), 2);
  EXPECT_EQ(gw.attempt_counts().at(Service::kImageCaption), 1);
}

TEST(LiveGateway, AllEndpointsDownLeavesDatasetLabels) {
  // Grab a free port, then close it so connections are refused.
  int dead_port = 0;
  {
    httplib::Server s;
    dead_port = s.bind_to_any_port("127.0.0.1");
  }
  std::vector<ToolEndpointConfig> eps;
  for (Service s : {Service::kImageCaption, Service::kObjectDetection, Service::kImageLabel,
                    Service::kPlace, Service::kAudioTags, Service::kAudioCaption}) {
    eps.push_back(endpoint(s, "http://127.0.0.1:" + std::to_string(dead_port) + "/x", 0));
  }
  SleepLog log;
  ToolGateway gw(live(eps, log));
  const auto r = gw.fetch_clues(synth::make_clip("vid", 0, Source::kAudioSet, {"Dog"}));
  ASSERT_EQ(r.packet.clues.size(), 1u);
  EXPECT_EQ(r.packet.clues[0].tool, Tool::kDatasetLabels);
  EXPECT_EQ(r.failures.size(), 6u);
  EXPECT_TRUE(log.ms.empty());
}

TEST(LiveGateway, MissingEndpointIsAToolError) {
  SleepLog log;
  ToolGateway gw(live({}, log));
  EXPECT_THROW(gw.generate_caption("p", sha256_hex("p")), ToolError);
}

TEST(LiveGateway, SyncPredictionSnapsToGrid) {
  ScriptedServer srv;
  srv.script("/sync", {{200, R"({"pred_offset_s":0.43})"}});
  SleepLog log;
  ToolGateway gw(live({endpoint(Service::kSync, srv.url("/sync"))}, log));
  TrialSpec spec;
  spec.index = 3;
  spec.true_offset_s = 0.4;
  spec.start_jitter_s = 1.25;
  const auto obs = gw.check_sync(synth::make_clip("vid", 0, Source::kAudioSet, {"Dog"}), spec);
  EXPECT_DOUBLE_EQ(obs.pred_offset_s, 0.4);
  const auto seen = srv.seen();
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].body["params"]["offset_s"], 0.4);
  EXPECT_EQ(seen[0].body["params"]["trial"], 3);
}

TEST(Backoff, MonotoneAndCapped) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    ToolEndpointConfig c;
    c.tool = Service::kLlm;
    c.base_url = "http://x";
    c.max_retries = static_cast<int>(rng() % 12);
    c.backoff_base_ms = 1.0 + static_cast<double>(rng() % 500);
    c.backoff_cap_ms = c.backoff_base_ms * (1.0 + static_cast<double>(rng() % 64));
    const std::uint64_t seed = rng();
    const auto d = backoff_delays_ms(c, seed);
    ASSERT_EQ(d.size(), static_cast<std::size_t>(c.max_retries));
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_GE(d[i], c.backoff_base_ms);
      EXPECT_LE(d[i], c.backoff_cap_ms);
      if (i > 0) EXPECT_GE(d[i], d[i - 1]);
    }
    EXPECT_EQ(d, backoff_delays_ms(c, seed));
  }
}

TEST(EndpointConfig, ParsesAndValidates) {
  ToolEndpointConfig c;
  from_json(Json{{"tool", "place"}, {"base_url", "https://svc/place"}, {"auth_token", "s3cret"}}, c);
  EXPECT_EQ(c.tool, Service::kPlace);
  EXPECT_EQ(c.auth_token, "s3cret");
  EXPECT_FALSE(to_json(c).contains("auth_token"));
  EXPECT_THROW(from_json(Json{{"tool", "place"}, {"base_url", "ftp://x"}}, c), ConfigError);
  EXPECT_THROW(from_json(Json{{"tool", "nope"}, {"base_url", "http://x"}}, c), ConfigError);
  EXPECT_THROW(from_json(Json{{"tool", "llm"}, {"base_url", "http://x"}, {"max_retries", -1}}, c),
               ConfigError);
  ToolEndpointConfig a, b;
  from_json(Json{{"tool", "llm"}, {"base_url", "http://a"}}, a);
  from_json(Json{{"tool", "llm"}, {"base_url", "http://b"}}, b);
  EXPECT_THROW(validate_endpoints({a, b}), ConfigError);
}

ClipRecord replay_clip(const std::string& id) {
  for (const auto& c : parse_manifest<ClipRecord>(read_text_file(kReplay / "clips.jsonl"))) {
    if (c.id == id) return c;
  }
  throw std::runtime_error("no clip " + id);
}

GatewayOptions replay(const std::filesystem::path& root) {
  GatewayOptions o;
  o.backend = Backend::kReplay;
  o.fixtures_dir = root;
  return o;
}

TEST(ReplayGateway, FetchesAllClues) {
  ToolGateway gw(replay(kReplay / "fixtures"));
  const auto r = gw.fetch_clues(replay_clip("aS0r3kT9vQw_30"));
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.packet.clues.size(), 7u);
  for (const auto& c : r.packet.clues) {
    if (c.tool != Tool::kAudioTags) continue;
    // Five tags in the fixture; the top three by confidence survive.
    ASSERT_EQ(c.items.size(), 3u);
    EXPECT_EQ(c.items[0].text, "Bark");
    EXPECT_EQ(c.items[1].text, "Dog");
    EXPECT_EQ(c.items[2].text, "Animal");
  }
}

TEST(ReplayGateway, UnknownClipIsFixtureMissing) {
  ToolGateway gw(replay(kReplay / "fixtures"));
  EXPECT_THROW(gw.fetch_clues(synth::make_clip("nope", 0, Source::kAudioSet, {"Dog"})),
               FixtureMissingError);
  EXPECT_THROW(gw.generate_caption("no such prompt", sha256_hex("no such prompt")), FixtureMissingError);
}

TEST(ReplayGateway, MissingToolFileIsAFailure) {
  synth::TempDir dir("replay");
  const std::string id = "aS0r3kT9vQw_30";
  std::filesystem::copy(kReplay / "fixtures" / id, dir.path() / id);
  std::filesystem::remove(dir.path() / id / "place.json");
  ToolGateway gw(replay(dir.path()));
  const auto r = gw.fetch_clues(replay_clip(id));
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].tool, Tool::kPlace);
  EXPECT_EQ(r.packet.clues.size(), 6u);
}

TEST(ReplayGateway, LlmByPromptHash) {
  synth::TempDir dir("replay");
  std::filesystem::create_directories(dir.path() / "c_0");
  const std::string prompt = "Describe the sound.\n";
  std::ofstream(dir.path() / "c_0" / "llm.json")
      << Json{{"prompt_hash", sha256_hex(prompt)}, {"model", "m-replay"},
              {"items", Json::array({Json{{"text", "A bell rings."}}})}}.dump();
  ToolGateway gw(replay(dir.path()));
  const auto out = gw.generate_caption(prompt, sha256_hex(prompt));
  EXPECT_EQ(out.caption, "A bell rings.");
  EXPECT_EQ(out.model, "m-replay");
  EXPECT_THROW(gw.generate_caption("Describe the sound.", sha256_hex("Describe the sound.")), FixtureMissingError);
  EXPECT_THROW(gw.generate_caption("  ", sha256_hex("  ")), ContractError);
}

TEST(ReplayGateway, BlankCaptionIsAToolError) {
  synth::TempDir dir("replay");
  std::filesystem::create_directories(dir.path() / "c_0");
  std::ofstream(dir.path() / "c_0" / "llm.json")
      << Json{{"prompt_hash", sha256_hex("p")}, {"items", Json::array({Json{{"text", " "}}})}}.dump();
  ToolGateway gw(replay(dir.path()));
  EXPECT_THROW(gw.generate_caption("p", sha256_hex("p")), ToolError);
}

TEST(ReplayGateway, SyncFixtureForms) {
  synth::TempDir dir("replay");
  const auto clip = synth::make_clip("vid", 0, Source::kAudioSet, {"Dog"});
  std::filesystem::create_directories(dir.path() / clip.id);
  std::ofstream(dir.path() / clip.id / "sync.json")
      << R"({"trials":[{"pred_offset_s":-0.61},{"pred_error_s":0.2},{"error":"decode failed"}]})";
  ToolGateway gw(replay(dir.path()));
  TrialSpec spec;
  spec.true_offset_s = 1.0;
  spec.index = 0;
  EXPECT_DOUBLE_EQ(gw.check_sync(clip, spec).pred_offset_s, -0.6);
  spec.index = 1;
  EXPECT_NEAR(gw.check_sync(clip, spec).pred_offset_s, 1.2, 1e-12);
  spec.index = 2;
  EXPECT_THROW(gw.check_sync(clip, spec), ToolError);
  spec.index = 3;
  EXPECT_THROW(gw.check_sync(clip, spec), FixtureMissingError);
}

TEST(ReplayGateway, MissingFixturesDirIsAConfigError) {
  EXPECT_THROW(ToolGateway gw(replay("/nonexistent/fixtures")), ConfigError);
}

}  // namespace
}  // namespace clipcurate
