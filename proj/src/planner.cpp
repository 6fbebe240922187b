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

#include "iprg/planner.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "iprg/errors.hpp"

namespace iprg {

namespace {

bool has_letter(std::string_view token) {
  return std::any_of(token.begin(), token.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
}

// Tokens separated only by whitespace or a bare intra-word hyphen stay in
// the same fragment; any other punctuation starts a new one.
bool soft_gap(std::string_view gap) {
  if (gap == "-") return true;
  return std::all_of(gap.begin(), gap.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

struct Candidate {
  std::string surface;
  std::vector<std::string> words;
};

std::string phrase_key(std::string_view phrase) {
  return join(tokenize(phrase), " ");
}

}  // namespace

std::vector<RakeExtractor::ScoredPhrase> RakeExtractor::score(
    std::string_view text) const {
  const auto spans = token_spans(text);
  std::vector<Candidate> occurrences;

  std::size_t run_begin = 0, run_len = 0;
  auto close_run = [&]() {
    if (run_len > 0 && run_len <= max_phrase_tokens_) {
      const auto& first = spans[run_begin];
      const auto& last = spans[run_begin + run_len - 1];
      Candidate c;
      c.surface = to_lower(normalize_space(text.substr(first.begin, last.end - first.begin)));
      for (std::size_t t = run_begin; t < run_begin + run_len; ++t) {
        c.words.push_back(to_lower(text.substr(spans[t].begin, spans[t].end - spans[t].begin)));
      }
      occurrences.push_back(std::move(c));
    }
    run_len = 0;
  };

  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::string_view token = text.substr(spans[i].begin, spans[i].end - spans[i].begin);
    if (i > 0 && run_len > 0) {
      const std::string_view gap =
          text.substr(spans[i - 1].end, spans[i].begin - spans[i - 1].end);
      if (!soft_gap(gap)) close_run();
    }
    if (stopwords_.contains(token) || !has_letter(token)) {
      close_run();
      continue;
    }
    if (run_len == 0) run_begin = i;
    ++run_len;
  }
  close_run();

  std::unordered_map<std::string, double> degree, frequency;
  for (const auto& c : occurrences) {
    for (const auto& w : c.words) {
      degree[w] += double(c.words.size());
      frequency[w] += 1.0;
    }
  }

  std::vector<ScoredPhrase> phrases;
  std::unordered_set<std::string> seen;
  for (const auto& c : occurrences) {
    if (!seen.insert(join(c.words, " ")).second) continue;
    double s = 0.0;
    for (const auto& w : c.words) s += degree[w] / frequency[w];
    phrases.push_back({c.surface, s});
  }
  // Insertion order is first occurrence, so a stable sort breaks ties by it.
  std::stable_sort(phrases.begin(), phrases.end(),
                   [](const ScoredPhrase& a, const ScoredPhrase& b) { return a.score > b.score; });
  return phrases;
}

std::vector<std::string> RakeExtractor::extract(std::string_view text,
                                                std::size_t max_k) const {
  if (max_k < 1) throw PreconditionError("max_k must be at least 1");
  std::vector<std::string> out;
  for (auto& p : score(text)) {
    if (out.size() >= max_k) break;
    out.push_back(std::move(p.phrase));
  }
  return out;
}

std::vector<std::string> extract_keywords(std::string_view text, std::size_t max_k,
                                          const WordSet& stopwords) {
  return RakeExtractor(stopwords).extract(text, max_k);
}

std::string compose_plan_prompt(std::string_view question, std::string_view pretext) {
  std::string prompt(question);
  if (!pretext.empty()) {
    prompt.append(kSeparator);
    prompt.append(pretext);
  }
  return prompt;
}

std::vector<PlanTrainingExample> build_plan_training_examples(
    const QAPair& pair, const KeywordExtractor& extractor, std::size_t max_keywords) {
  const auto sentences = segment_sentences(pair.answer);
  if (sentences.empty()) {
    throw PreconditionError("answer of \"" + pair.id + "\" has no sentences");
  }
  std::vector<PlanTrainingExample> examples;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto keywords = extractor.extract(sentences[i].text, max_keywords);
    if (keywords.empty()) {
      spdlog::info("{}: sentence {} has no extractable keywords; example dropped",
                   pair.id, i + 1);
      continue;
    }
    PlanTrainingExample ex;
    ex.id = pair.id + "#" + std::to_string(i + 1);
    ex.prompt = compose_plan_prompt(
        pair.question, join_sentences(std::span(sentences).first(i)));
    ex.target_keywords = std::move(keywords);
    ex.source_sentence_index = i + 1;
    examples.push_back(std::move(ex));
  }
  return examples;
}

Json to_json(const PlanTrainingExample& example) {
  Json record;
  record["id"] = example.id;
  record["prompt"] = example.prompt;
  record["keywords"] = example.target_keywords;
  return record;
}

std::vector<std::string> parse_keyword_list(std::string_view text,
                                            std::size_t max_keywords) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= text.size() && out.size() < max_keywords) {
    std::size_t end = text.find_first_of(",\n", pos);
    if (end == std::string_view::npos) end = text.size();
    std::string phrase = to_lower(normalize_space(text.substr(pos, end - pos)));
    pos = end + 1;
    const std::size_t n = count_tokens(phrase);
    if (n == 0 || n > kMaxPhraseTokens) continue;
    if (!seen.insert(phrase).second) continue;
    out.push_back(std::move(phrase));
  }
  return out;
}

KeywordPlan generate_plan(std::string_view question, std::string_view pretext,
                          Generator* client, const KeywordExtractor& extractor,
                          const PlannerConfig& config, std::size_t iteration,
                          std::span<const KeywordPlan> prior_plans) {
  if (trim(question).empty()) throw PreconditionError("question is empty");
  if (config.max_keywords < 1) throw PreconditionError("max_keywords must be at least 1");

  std::string reason = "no plan client configured";
  if (client != nullptr) {
    try {
      GenerationRequest request{compose_plan_prompt(question, pretext),
                                config.max_new_tokens, std::nullopt};
      const auto result = generate_paragraph(*client, request, config.retry);
      auto keywords = parse_keyword_list(result.text, config.max_keywords);
      if (!keywords.empty()) return KeywordPlan{std::move(keywords), iteration};
      reason = "plan model returned no usable keywords";
    } catch (const TransportError& e) {
      reason = e.what();
    } catch (const ProtocolError& e) {
      reason = e.what();
    }
  }
  if (!config.fallback) throw PlanningError(iteration, reason);
  if (client != nullptr) {
    spdlog::warn("iteration {}: {}; using extractive plan", iteration, reason);
  }

  std::string source(question);
  if (!pretext.empty()) {
    source.append(". ");
    source.append(pretext);
  }
  const auto ranked = extractor.extract(source, std::numeric_limits<std::size_t>::max());

  std::unordered_set<std::string> used;
  for (const auto& plan : prior_plans) {
    for (const auto& k : plan.keywords) used.insert(phrase_key(k));
  }
  std::vector<std::string> keywords;
  for (const auto& phrase : ranked) {
    if (keywords.size() >= config.max_keywords) break;
    if (!used.count(phrase_key(phrase))) keywords.push_back(phrase);
  }
  // Everything was already planned: repeating beats an empty plan.
  if (keywords.empty()) {
    keywords.assign(ranked.begin(),
                    ranked.begin() + std::min(ranked.size(), config.max_keywords));
  }
  if (keywords.empty()) {
    throw PlanningError(iteration, "no keywords could be extracted from the question");
  }
  return KeywordPlan{std::move(keywords), iteration};
}

}  // namespace iprg
