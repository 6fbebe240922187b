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

#include "iprg/clients.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "iprg/errors.hpp"
#include "iprg/text.hpp"

namespace iprg {

ScriptedGenerator::ScriptedGenerator(std::vector<std::string> script,
                                     WhenExhausted when_exhausted)
    : when_exhausted_(when_exhausted) {
  steps_.reserve(script.size());
  for (auto& text : script) steps_.push_back(Step{std::move(text), false});
}

ScriptedGenerator::ScriptedGenerator(std::vector<Step> steps,
                                     WhenExhausted when_exhausted)
    : steps_(std::move(steps)), when_exhausted_(when_exhausted) {}

GenerationResult ScriptedGenerator::generate(const GenerationRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);

  const Step* step = nullptr;
  if (next_ < steps_.size()) {
    step = &steps_[next_++];
  } else {
    switch (when_exhausted_) {
      case WhenExhausted::kThrow:
        throw TransportError("scripted generator exhausted after " +
                             std::to_string(steps_.size()) + " calls");
      case WhenExhausted::kEmpty:
        return GenerationResult{"", true};
      case WhenExhausted::kRepeatLast:
        if (steps_.empty()) return GenerationResult{"", true};
        step = &steps_.back();
        break;
    }
  }
  if (step->transport_failure) {
    throw TransportError("scripted transport failure");
  }

  const auto spans = token_spans(step->text);
  if (spans.size() > request.max_new_tokens) {
    const std::size_t cut = spans[request.max_new_tokens - 1].end;
    return GenerationResult{step->text.substr(0, cut), false};
  }
  return GenerationResult{step->text, true};
}

std::size_t ScriptedGenerator::call_count() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

std::vector<GenerationRequest> ScriptedGenerator::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

HttpEndpoint::HttpEndpoint(std::string base_url,
                           std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

Json HttpEndpoint::post(const std::string& path, const Json& body) const {
  httplib::Client client(base_url_);
  if (!client.is_valid()) {
    throw TransportError("invalid endpoint URL: " + base_url_);
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  auto response = client.Post(path, body.dump(), "application/json");
  if (!response) {
    throw TransportError(base_url_ + path + ": " +
                         httplib::to_string(response.error()));
  }

  Json parsed;
  bool parsed_ok = true;
  try {
    parsed = Json::parse(response->body);
  } catch (const Json::parse_error&) {
    parsed_ok = false;
  }

  if (response->status < 200 || response->status >= 300) {
    std::string message = "HTTP " + std::to_string(response->status);
    if (parsed_ok && parsed.is_object() && parsed.contains("error") &&
        parsed["error"].is_string()) {
      message += ": " + parsed["error"].get<std::string>();
    }
    if (response->status >= 500) throw TransportError(base_url_ + path + ": " + message);
    throw ProtocolError(base_url_ + path + ": " + message);
  }
  if (!parsed_ok || !parsed.is_object()) {
    throw ProtocolError(base_url_ + path + ": response is not a JSON object");
  }
  return parsed;
}

GenerationResult HttpGenerator::generate(const GenerationRequest& request) {
  Json body;
  body["prompt"] = request.prompt;
  body["max_new_tokens"] = request.max_new_tokens;
  const Json reply = endpoint_.post("/generate", body);
  if (!reply.contains("text") || !reply["text"].is_string() ||
      !reply.contains("finished") || !reply["finished"].is_boolean()) {
    throw ProtocolError("/generate response must carry {text, finished}");
  }
  return GenerationResult{reply["text"].get<std::string>(),
                          reply["finished"].get<bool>()};
}

GenerationResult generate_paragraph(Generator& client,
                                    const GenerationRequest& request,
                                    const RetryPolicy& retry) {
  if (request.prompt.empty()) {
    throw PreconditionError("generation prompt is empty");
  }
  if (request.max_new_tokens < 1) {
    throw PreconditionError("max_new_tokens must be at least 1");
  }
  const int attempts = std::max(retry.attempts, 1);
  auto delay = retry.base_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return client.generate(request);
    } catch (const TransportError& e) {
      if (attempt >= attempts) throw;
      spdlog::warn("generation attempt {}/{} failed: {}", attempt, attempts,
                   e.what());
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

void validate(const NliScore& score) {
  for (double p : {score.entail, score.neutral, score.contradict}) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ProtocolError("NLI probability outside [0,1]");
    }
  }
  const double sum = score.entail + score.neutral + score.contradict;
  if (std::abs(sum - 1.0) > 1e-3) {
    throw ProtocolError("NLI probabilities sum to " + std::to_string(sum) +
                        ", expected 1");
  }
}

NliScore ScriptedNli::score(const std::string&, const std::string&) {
  std::lock_guard lock(mutex_);
  if (next_ >= steps_.size()) throw TransportError("scripted NLI exhausted");
  const Step& step = steps_[next_++];
  if (step.transport_failure) throw TransportError("scripted transport failure");
  return step.score;
}

std::size_t ScriptedNli::call_count() const {
  std::lock_guard lock(mutex_);
  return next_;
}

NliScore HttpNli::score(const std::string& premise,
                        const std::string& hypothesis) {
  Json body;
  body["premise"] = premise;
  body["hypothesis"] = hypothesis;
  const Json reply = endpoint_.post("/nli", body);
  NliScore out;
  try {
    out.entail = reply.at("entail").get<double>();
    out.neutral = reply.at("neutral").get<double>();
    out.contradict = reply.at("contradict").get<double>();
  } catch (const Json::exception&) {
    throw ProtocolError("/nli response must carry numeric {entail, neutral, contradict}");
  }
  return out;
}

}  // namespace iprg
