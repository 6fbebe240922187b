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

#include "iprg/controller.hpp"

#include <ostream>

#include "iprg/generation.hpp"

namespace iprg {

std::string_view to_string(Mode mode) { return mode == Mode::kIprg ? "iprg" : "irg"; }

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kEmptyGeneration: return "empty_generation";
    case TerminationReason::kDuplicateOnly: return "duplicate_only";
    case TerminationReason::kMaxIterations: return "max_iterations";
    case TerminationReason::kTokenBudget: return "token_budget";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  const std::string lower = to_lower(text);
  if (lower == "iprg") return Mode::kIprg;
  if (lower == "irg") return Mode::kIrg;
  throw PreconditionError("unknown mode \"" + std::string(text) + "\" (expected iprg or irg)");
}

void validate(const RunConfig& c) {
  auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw PreconditionError(std::string(name) + " must be at least 1");
  };
  positive(c.k, "k");
  positive(c.max_iterations, "max_iterations");
  positive(c.max_answer_tokens, "max_answer_tokens");
  positive(c.max_keywords, "max_keywords");
  positive(c.max_new_tokens, "max_new_tokens");
  positive(c.plan_max_new_tokens, "plan_max_new_tokens");
  positive(c.prompt_token_budget, "prompt_token_budget");
  if (!(c.dup_threshold > 0.0 && c.dup_threshold <= 1.0)) {
    throw PreconditionError("dup_threshold must be in (0, 1]");
  }
}

Json to_json(const RunConfig& c) {
  Json j;
  j["k"] = c.k;
  j["max_iterations"] = c.max_iterations;
  j["max_answer_tokens"] = c.max_answer_tokens;
  j["dup_threshold"] = c.dup_threshold;
  j["mode"] = to_string(c.mode);
  j["max_keywords"] = c.max_keywords;
  j["max_new_tokens"] = c.max_new_tokens;
  j["plan_max_new_tokens"] = c.plan_max_new_tokens;
  j["prompt_token_budget"] = c.prompt_token_budget;
  j["plan_fallback"] = c.plan_fallback;
  j["retry_attempts"] = c.retry.attempts;
  j["retry_base_delay_ms"] = c.retry.base_delay.count();
  return j;
}

std::size_t AnswerState::answer_tokens() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += count_tokens(s.text);
  return n;
}

Json to_json(const IterationTrace& r) {
  Json j;
  j["type"] = "iteration";
  j["iteration"] = r.iteration;
  j["keywords"] = r.keywords;
  j["query"] = r.query;
  Json retrieved = Json::array();
  for (const auto& ref : r.retrieved) {
    Json item;
    item["id"] = ref.id;
    item["score"] = ref.score;
    retrieved.push_back(std::move(item));
  }
  j["retrieved"] = std::move(retrieved);
  j["paragraph"] = r.paragraph;
  j["appended"] = r.appended ? Json(*r.appended) : Json(nullptr);
  return j;
}

std::optional<TerminationReason> should_terminate(const AnswerState& state,
                                                  const IterationOutcome& last,
                                                  const RunConfig& config) {
  if (last.empty_generation) return TerminationReason::kEmptyGeneration;
  if (!last.appended) return TerminationReason::kDuplicateOnly;
  if (state.iteration >= config.max_iterations) return TerminationReason::kMaxIterations;
  if (state.answer_tokens() >= config.max_answer_tokens) return TerminationReason::kTokenBudget;
  return std::nullopt;
}

RunResult run(std::string_view question, const PassageIndex& index, const Clients& clients,
              const RunConfig& config) {
  validate(config);
  if (trim(question).empty()) throw PreconditionError("question is empty");
  if (index.empty()) throw IndexError("index empty");
  if (clients.generator == nullptr || clients.embedder == nullptr) {
    throw PreconditionError("run needs a generator and an embedder");
  }
  const bool planning = config.mode == Mode::kIprg;
  if (planning && clients.extractor == nullptr) {
    throw PreconditionError("IPRG mode needs a keyword extractor");
  }

  PlannerConfig planner_config;
  planner_config.max_keywords = config.max_keywords;
  planner_config.max_new_tokens = config.plan_max_new_tokens;
  planner_config.fallback = config.plan_fallback;
  planner_config.retry = config.retry;

  AnswerState state;
  state.question = std::string(question);
  std::vector<IterationTrace> trace;
  std::vector<KeywordPlan> plans;

  while (true) {
    const std::size_t i = state.iteration + 1;
    trace.push_back(IterationTrace{});
    IterationTrace& record = trace.back();
    record.iteration = i;
    state.iteration = i;

    IterationOutcome outcome;
    try {
      const std::string pretext = state.pretext();
      std::optional<KeywordPlan> plan;
      if (planning) {
        plan = generate_plan(question, pretext, clients.planner, *clients.extractor,
                             planner_config, i, plans);
        record.keywords = plan->keywords;
        plans.push_back(*plan);
      }
      const KeywordPlan* plan_ptr = plan ? &*plan : nullptr;

      record.query = build_query(question, pretext, plan_ptr);
      const auto contexts = search(index, record.query, config.k, *clients.embedder);
      for (const auto& ctx : contexts) record.retrieved.push_back({ctx.passage.id, ctx.score});

      GenerationRequest request;
      request.prompt = compose_generation_prompt(question, plan_ptr, contexts, pretext,
                                                 config.prompt_token_budget);
      request.max_new_tokens = config.max_new_tokens;
      const auto result = generate_paragraph(*clients.generator, request, config.retry);
      record.paragraph = result.text;

      if (trim(result.text).empty()) {
        outcome.empty_generation = true;
      } else {
        outcome.appended = first_new_sentence(result.text, state.sentences, config.dup_threshold);
      }
    } catch (const std::exception& e) {
      throw RunError("iteration " + std::to_string(i) + ": " + e.what(), std::move(trace),
                     std::move(state));
    }

    if (outcome.appended) {
      record.appended = outcome.appended->text;
      Sentence s = *outcome.appended;
      s.index = state.sentences.size();
      state.sentences.push_back(std::move(s));
    }
    if (auto reason = should_terminate(state, outcome, config)) {
      state.terminated_reason = reason;
      break;
    }
  }

  RunResult result;
  result.answer = state.pretext();
  result.trace = std::move(trace);
  result.state = std::move(state);
  return result;
}

RunResult run_irg(std::string_view question, const PassageIndex& index,
                  const Clients& clients, const RunConfig& config) {
  RunConfig irg = config;
  irg.mode = Mode::kIrg;
  return run(question, index, clients, irg);
}

Json to_json(const TraceHeader& h) {
  Json j;
  j["type"] = "header";
  j["question_id"] = h.question_id;
  j["mode"] = to_string(h.mode);
  j["config"] = to_json(h.config);
  j["embedder_tag"] = h.embedder_tag;
  j["terminated_reason"] =
      h.terminated_reason ? Json(to_string(*h.terminated_reason)) : Json(nullptr);
  j["iterations"] = h.iterations;
  if (h.timestamp) j["timestamp"] = *h.timestamp;
  return j;
}

void write_trace(std::ostream& out, const TraceHeader& header,
                 const std::vector<IterationTrace>& trace) {
  write_jsonl(out, to_json(header));
  for (const auto& record : trace) write_jsonl(out, to_json(record));
}

}  // namespace iprg
