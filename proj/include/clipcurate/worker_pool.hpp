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

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace clipcurate {

/// Runs fn(0..n-1) on at most `width` threads (the caller counts as one).
/// The first exception thrown by any task is rethrown after all workers
/// stop; remaining unstarted tasks are skipped.
void parallel_for(std::size_t n, std::size_t width,
                  const std::function<void(std::size_t)>& fn);

/// Counting limiter for per-endpoint concurrency caps.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(std::size_t limit) : available_(limit) {}

  class Permit {
   public:
    explicit Permit(ConcurrencyLimiter& owner) : owner_(&owner) { owner_->acquire(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    ~Permit() { owner_->release(); }

   private:
    ConcurrencyLimiter* owner_;
  };

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t available_;
};

}  // namespace clipcurate
