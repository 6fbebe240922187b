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

// Clients for the remote model capabilities the engine consumes.
//
// Wire protocol (UTF-8 JSON bodies, shared with the inference sidecar):
//
//   POST /generate  {prompt, max_new_tokens}  -> {text, finished}
//   POST /nli       {premise, hypothesis}     -> {entail, neutral, contradict}
//   POST /embed     {texts: [...]}            -> {vectors: [[...]], dim}
//
// A non-2xx status carries {error}. 5xx and connection failures surface as
// TransportError (retryable); 4xx and malformed bodies as ProtocolError.
//
// Every client must tolerate concurrent calls.

#ifndef IPRG_CLIENTS_HPP_
#define IPRG_CLIENTS_HPP_

#include <chrono>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "iprg/jsonl.hpp"

namespace iprg {

struct GenerationRequest {
  std::string prompt;
  std::size_t max_new_tokens = 128;
  std::optional<std::string> stop_on;
};

struct GenerationResult {
  std::string text;
  bool finished = true;  // false when cut at max_new_tokens
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

/// Replays a fixed script, one step per call, and records every request.
/// A request's max_new_tokens is honored by truncating the scripted text.
class ScriptedGenerator : public Generator {
 public:
  struct Step {
    std::string text;
    bool transport_failure = false;
  };

  enum class WhenExhausted { kThrow, kEmpty, kRepeatLast };

  explicit ScriptedGenerator(std::vector<std::string> script,
                             WhenExhausted when_exhausted = WhenExhausted::kThrow);
  explicit ScriptedGenerator(std::vector<Step> steps,
                             WhenExhausted when_exhausted = WhenExhausted::kThrow);

  static Step failure() { return Step{{}, true}; }

  GenerationResult generate(const GenerationRequest& request) override;

  std::size_t call_count() const;
  std::vector<GenerationRequest> requests() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Step> steps_;
  std::size_t next_ = 0;
  WhenExhausted when_exhausted_;
  std::vector<GenerationRequest> requests_;
};

/// A base URL plus request timeout; posts JSON bodies and maps failures onto
/// the error taxonomy above.
class HttpEndpoint {
 public:
  explicit HttpEndpoint(std::string base_url,
                        std::chrono::milliseconds timeout = std::chrono::seconds(60));

  Json post(const std::string& path, const Json& body) const;
  const std::string& base_url() const noexcept { return base_url_; }

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

class HttpGenerator : public Generator {
 public:
  explicit HttpGenerator(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  GenerationResult generate(const GenerationRequest& request) override;

 private:
  HttpEndpoint endpoint_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{100};  // doubled after each failure
};

/// Validates the request and calls the client, retrying TransportError up to
/// `retry.attempts` total calls. An empty text is returned as-is; callers
/// treat it as the empty-generation signal.
GenerationResult generate_paragraph(Generator& client,
                                    const GenerationRequest& request,
                                    const RetryPolicy& retry = {});

struct NliScore {
  double entail = 0.0;
  double neutral = 0.0;
  double contradict = 0.0;
};

/// Throws ProtocolError unless each probability is in [0,1] and they sum to
/// 1 within 1e-3.
void validate(const NliScore& score);

class NliClient {
 public:
  virtual ~NliClient() = default;
  virtual NliScore score(const std::string& premise,
                         const std::string& hypothesis) = 0;
};

class ScriptedNli : public NliClient {
 public:
  struct Step {
    NliScore score;
    bool transport_failure = false;
  };

  explicit ScriptedNli(std::vector<Step> steps) : steps_(std::move(steps)) {}
  NliScore score(const std::string& premise,
                 const std::string& hypothesis) override;

  std::size_t call_count() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Step> steps_;
  std::size_t next_ = 0;
};

class HttpNli : public NliClient {
 public:
  explicit HttpNli(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  NliScore score(const std::string& premise,
                 const std::string& hypothesis) override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace iprg

#endif  // IPRG_CLIENTS_HPP_
