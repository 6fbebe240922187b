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

#ifndef IPRG_GENERATION_HPP_
#define IPRG_GENERATION_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "iprg/planner.hpp"
#include "iprg/retriever.hpp"
#include "iprg/text.hpp"

namespace iprg {

inline constexpr std::string_view kContextSeparator = " [CTX] ";

/// Answer-generator prompt:
///
///   question: Q [SEP] answer so far: P [SEP] keywords: K [SEP] context: C1 [CTX] C2
///
/// The keyword segment is omitted when `plan` is null. Only the content of
/// question, pretext, keywords, and contexts counts against `token_budget`
/// (labels and markers are free). Contexts are cut from the tail to fit; the
/// rest is never truncated, and a budget too small for it throws
/// PreconditionError("prompt budget exhausted").
std::string compose_generation_prompt(std::string_view question, const KeywordPlan* plan,
                                      std::span<const RetrievedContext> contexts,
                                      std::string_view pretext, std::size_t token_budget);

/// First sentence of `paragraph` whose similarity to every pretext sentence
/// is below `threshold`, if any.
std::optional<Sentence> first_new_sentence(std::string_view paragraph,
                                           std::span<const Sentence> pretext,
                                           double threshold);
std::optional<Sentence> first_new_sentence(std::string_view paragraph,
                                           std::string_view pretext, double threshold);

}  // namespace iprg

#endif  // IPRG_GENERATION_HPP_
