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

// The answer loop. Each iteration plans keywords from the question and the
// answer so far, retrieves the top-k passages for question + pretext +
// keywords, asks the generator for a paragraph, and appends that paragraph's
// first new sentence. IRG mode skips planning and drops every keyword
// segment.
//
// A trace is written as line-delimited JSON: one header record
//
//   {type: "header", question_id, mode, config, embedder_tag,
//    terminated_reason, iterations, timestamp?}
//
// followed by one record per started iteration
//
//   {type: "iteration", iteration, keywords, query,
//    retrieved: [{id, score}], paragraph, appended}

#ifndef IPRG_CONTROLLER_HPP_
#define IPRG_CONTROLLER_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iprg/clients.hpp"
#include "iprg/errors.hpp"
#include "iprg/jsonl.hpp"
#include "iprg/planner.hpp"
#include "iprg/retriever.hpp"
#include "iprg/text.hpp"

namespace iprg {

enum class Mode { kIprg, kIrg };

enum class TerminationReason { kEmptyGeneration, kDuplicateOnly, kMaxIterations, kTokenBudget };

std::string_view to_string(Mode mode);
std::string_view to_string(TerminationReason reason);
/// Accepts "iprg" / "irg" in any case.
Mode parse_mode(std::string_view text);

struct RunConfig {
  std::size_t k = 5;
  std::size_t max_iterations = 10;
  std::size_t max_answer_tokens = 256;
  double dup_threshold = 0.8;
  Mode mode = Mode::kIprg;
  std::size_t max_keywords = 5;
  std::size_t max_new_tokens = 128;
  std::size_t plan_max_new_tokens = 32;
  std::size_t prompt_token_budget = 1024;
  bool plan_fallback = true;
  RetryPolicy retry;
};

/// Throws PreconditionError when a count is zero or the threshold leaves
/// (0, 1].
void validate(const RunConfig& config);
Json to_json(const RunConfig& config);

struct AnswerState {
  std::string question;
  std::vector<Sentence> sentences;
  std::size_t iteration = 0;
  std::optional<TerminationReason> terminated_reason;

  std::string pretext() const { return join_sentences(sentences); }
  std::size_t answer_tokens() const;
};

struct RetrievedRef {
  std::string id;
  double score = 0.0;
};

struct IterationTrace {
  std::size_t iteration = 0;
  std::vector<std::string> keywords;
  std::string query;
  std::vector<RetrievedRef> retrieved;
  std::string paragraph;
  std::optional<std::string> appended;
};

Json to_json(const IterationTrace& record);

struct IterationOutcome {
  bool empty_generation = false;
  std::optional<Sentence> appended;
};

/// In priority order: empty generation, no new sentence, iteration cap,
/// answer token cap. Nothing means continue.
std::optional<TerminationReason> should_terminate(const AnswerState& state,
                                                  const IterationOutcome& last,
                                                  const RunConfig& config);

struct Clients {
  Generator* generator = nullptr;              // required
  Generator* planner = nullptr;                // optional, IPRG only
  const Embedder* embedder = nullptr;          // required, must match the index
  const KeywordExtractor* extractor = nullptr; // required for IPRG
};

struct RunResult {
  std::string answer;
  std::vector<IterationTrace> trace;
  AnswerState state;
};

/// A run aborted by a client or index failure. Carries the trace up to and
/// including the iteration that failed.
class RunError : public Error {
 public:
  RunError(const std::string& what, std::vector<IterationTrace> partial, AnswerState state)
      : Error(what), partial_(std::move(partial)), state_(std::move(state)) {}

  const std::vector<IterationTrace>& partial_trace() const noexcept { return partial_; }
  const AnswerState& state() const noexcept { return state_; }

 private:
  std::vector<IterationTrace> partial_;
  AnswerState state_;
};

RunResult run(std::string_view question, const PassageIndex& index, const Clients& clients,
              const RunConfig& config);
/// `run` with the mode forced to IRG.
RunResult run_irg(std::string_view question, const PassageIndex& index,
                  const Clients& clients, const RunConfig& config);

struct TraceHeader {
  std::string question_id;
  Mode mode = Mode::kIprg;
  RunConfig config;
  std::string embedder_tag;
  std::optional<TerminationReason> terminated_reason;
  std::size_t iterations = 0;
  std::optional<std::string> timestamp;  // omitted in deterministic output
};

Json to_json(const TraceHeader& header);
void write_trace(std::ostream& out, const TraceHeader& header,
                 const std::vector<IterationTrace>& trace);

}  // namespace iprg

#endif  // IPRG_CONTROLLER_HPP_
