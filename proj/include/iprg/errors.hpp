// Copyright 2026 The IPRG Authors
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

#ifndef IPRG_ERRORS_HPP_
#define IPRG_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iprg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Remote endpoint unreachable, timed out, or answered 5xx. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Remote endpoint answered, but with a body that breaks the wire contract
/// (4xx, malformed record, probabilities that do not sum to one).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  PlanningError(std::size_t iteration, const std::string& what)
      : Error("planning failed at iteration " + std::to_string(iteration) +
              ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Malformed input record. Line numbers are 1-based; 0 means "not line
/// oriented".
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " +
              what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace iprg

#endif  // IPRG_ERRORS_HPP_
