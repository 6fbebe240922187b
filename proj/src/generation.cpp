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

#include "iprg/generation.hpp"

#include "iprg/errors.hpp"

namespace iprg {

std::string compose_generation_prompt(std::string_view question, const KeywordPlan* plan,
                                      std::span<const RetrievedContext> contexts,
                                      std::string_view pretext, std::size_t token_budget) {
  const std::string keywords = plan ? join(plan->keywords, ", ") : std::string();
  const std::size_t fixed =
      count_tokens(question) + count_tokens(pretext) + count_tokens(keywords);
  if (token_budget < fixed) throw PreconditionError("prompt budget exhausted");
  std::size_t remaining = token_budget - fixed;

  std::string prompt = "question: ";
  prompt.append(question);
  prompt.append(kSeparator);
  prompt.append("answer so far: ");
  prompt.append(pretext);
  if (plan) {
    prompt.append(kSeparator);
    prompt.append("keywords: ");
    prompt.append(keywords);
  }
  prompt.append(kSeparator);
  prompt.append("context: ");

  bool first = true;
  for (const auto& ctx : contexts) {
    if (remaining == 0) break;
    const std::string& text = ctx.passage.text;
    const auto spans = token_spans(text);
    if (spans.empty()) continue;
    std::string_view piece = text;
    if (spans.size() > remaining) {
      piece = std::string_view(text).substr(0, spans[remaining - 1].end);
      remaining = 0;
    } else {
      remaining -= spans.size();
    }
    if (!first) prompt.append(kContextSeparator);
    prompt.append(piece);
    first = false;
  }
  return prompt;
}

std::optional<Sentence> first_new_sentence(std::string_view paragraph,
                                           std::span<const Sentence> pretext,
                                           double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw PreconditionError("duplicate threshold must be in (0, 1]");
  }
  std::vector<TokenList> seen;
  seen.reserve(pretext.size());
  for (const auto& s : pretext) seen.push_back(tokenize(s.text));

  for (auto& candidate : segment_sentences(paragraph)) {
    const TokenList tokens = tokenize(candidate.text);
    bool fresh = true;
    for (const auto& old : seen) {
      if (token_overlap(tokens, old) >= threshold) {
        fresh = false;
        break;
      }
    }
    if (fresh) return std::move(candidate);
  }
  return std::nullopt;
}

std::optional<Sentence> first_new_sentence(std::string_view paragraph,
                                           std::string_view pretext, double threshold) {
  const auto sentences = segment_sentences(pretext);
  return first_new_sentence(paragraph, sentences, threshold);
}

}  // namespace iprg
