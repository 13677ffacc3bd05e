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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "clipcurate/datamodel.hpp"

namespace clipcurate {

struct ReviewServiceOptions {
  std::filesystem::path workspace;
  std::uint64_t seed = 0;
  std::set<std::string> place_lexicon;  // empty: default lexicon
  /// Review timestamps; tests pin it.
  std::function<std::string()> clock;
};

/// Status code plus JSON body; the HTTP layer only serializes it.
struct ApiResponse {
  int status = 200;
  Json body;
};

/// Review queue and QC statistics over one workspace, independent of the
/// HTTP transport. Reads run concurrently; submissions are serialized and
/// appended to captions.jsonl through the store lock.
class ReviewService {
 public:
  explicit ReviewService(ReviewServiceOptions options);

  /// Re-reads captions, clues and clips from the workspace.
  void reload();

  /// `limit` is the raw query value (absent means every item).
  ApiResponse queue(const std::optional<std::string>& limit) const;
  ApiResponse submit(std::string_view body, bool force = false);
  ApiResponse stats() const;
  ApiResponse sample(const std::string& clip_id) const;

  /// Seed-stable position key of a clip in the queue.
  static std::uint64_t queue_key(std::uint64_t seed, const std::string& clip_id);

 private:
  ReviewServiceOptions options_;
  mutable std::shared_mutex mu_;
  std::vector<CaptionRecord> latest_;  // queue key order
  std::map<std::string, std::size_t> index_;
  std::map<std::string, CluePacket> clues_;
  std::map<std::string, ClipRecord> clips_;
  std::map<std::string, std::size_t> history_count_;
};

struct ReviewServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::string> auth_token;
  std::string cors_origin = "*";
};

/// httplib front end for ReviewService.
class ReviewServer {
 public:
  ReviewServer(ReviewService& service, ReviewServerOptions options);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds the socket and returns the port. Throws IoError when it cannot.
  int bind();
  /// Serves until stop(); call bind() first.
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace clipcurate
