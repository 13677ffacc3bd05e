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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace clipcurate {

// Process exit codes shared by every CLI subcommand.
enum class ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kConfig = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::kValidation; }
};

/// A record (or request) violates a type invariant. `field` names the
/// offending field using its wire name.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A caller broke an operation precondition (wrong trial count, empty
/// input where a mean is undefined, k out of range, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::kConfig; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::kIo; }
};

/// Remote tool call failed after exhausting retries.
class ToolError : public IoError {
 public:
  using IoError::IoError;
};

/// Replay backend has no canned response for the request. Always fatal.
class FixtureMissingError : public IoError {
 public:
  using IoError::IoError;
};

struct ManifestIssue {
  std::size_t line = 0;  // 1-based
  std::string field;     // empty for JSON syntax errors
  std::string message;
};

/// Thrown by manifest parsing; carries every failing line, not just the
/// first one.
class ManifestError : public Error {
 public:
  explicit ManifestError(std::vector<ManifestIssue> issues);
  const std::vector<ManifestIssue>& issues() const { return issues_; }

 private:
  std::vector<ManifestIssue> issues_;
};

}  // namespace clipcurate
