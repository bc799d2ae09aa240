// Copyright 2026 The tprlab Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace tprlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Structurally inconsistent data (dangling endpoints, duplicate ids, ...).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Reference to an id that does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or parameters out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite objective.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A required upstream artifact is missing or was produced by another config.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace tprlab
