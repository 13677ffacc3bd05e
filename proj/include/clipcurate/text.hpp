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
#include <string>
#include <string_view>
#include <vector>

namespace clipcurate {

/// Word tokenizer shared by inaudible-term flagging, corpus statistics,
/// review word counts and the caption metrics: lowercase, split on
/// whitespace, strip leading/trailing non-alphanumerics, drop empties.
/// Only ASCII letters are case-folded; other bytes pass through.
std::vector<std::string> tokenize_words(std::string_view text);

std::string_view trim(std::string_view text);

std::string to_lower_ascii(std::string_view text);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// 64-bit FNV-1a; used to derive per-item seeds that do not depend on
/// processing order.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace clipcurate
