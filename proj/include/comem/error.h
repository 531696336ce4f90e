// Copyright 2026 The ComEM Authors.
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

#ifndef COMEM_ERROR_H_
#define COMEM_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace comem {

// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that does not parse. line() is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string &source, std::size_t line,
             const std::string &what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " +
              what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input that parses but violates a data-model invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Failure talking to a completion backend. status() is the HTTP status code,
// or 0 when no response was received.
class BackendError : public Error {
 public:
  BackendError(const std::string &what, int status = 0, std::string body = {})
      : Error(what), status_(status), body_(std::move(body)) {}

  int status() const { return status_; }
  const std::string &body() const { return body_; }

  // Same error with `context` prepended to the message.
  BackendError WithContext(const std::string &context) const {
    return BackendError(context + ": " + what(), status_, body_);
  }

 private:
  int status_;
  std::string body_;
};

}  // namespace comem

#endif  // COMEM_ERROR_H_
