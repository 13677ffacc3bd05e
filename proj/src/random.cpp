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

#include "clipcurate/random.hpp"

#include <limits>

#include "clipcurate/text.hpp"

namespace clipcurate {

SeededRng::SeededRng(std::uint64_t seed, std::string_view key)
    : engine_(seed ^ (fnv1a64(key) * 0x9e3779b97f4a7c15ULL)) {}

std::uint64_t SeededRng::uniform_index(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

}  // namespace clipcurate
