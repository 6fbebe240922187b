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

// Keyword planning: which phrases the next answer sentence should cover.
//
// At run time a seq2seq plan model is asked for a comma-separated keyword
// list given the question and the answer so far. Its training data is built
// here by extracting keywords from each reference answer sentence and pairing
// them with the question plus all preceding sentences.

#ifndef IPRG_PLANNER_HPP_
#define IPRG_PLANNER_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iprg/clients.hpp"
#include "iprg/ingest.hpp"
#include "iprg/text.hpp"

namespace iprg {

/// Joins every composed prompt segment.
inline constexpr std::string_view kSeparator = " [SEP] ";

inline constexpr std::size_t kMaxPhraseTokens = 5;

struct KeywordPlan {
  std::vector<std::string> keywords;
  std::size_t iteration = 0;
};

struct PlanTrainingExample {
  std::string id;
  std::string prompt;
  std::vector<std::string> target_keywords;
  std::size_t source_sentence_index = 0;  // 1-based
};

class KeywordExtractor {
 public:
  virtual ~KeywordExtractor() = default;
  /// Ranked phrases, best first. Must be deterministic, and a smaller
  /// `max_k` must yield a prefix of a larger one.
  virtual std::vector<std::string> extract(std::string_view text,
                                           std::size_t max_k) const = 0;
};

/// RAKE: candidates are maximal stopword-free token runs inside
/// punctuation-delimited fragments; a word scores degree / frequency over the
/// candidate co-occurrence graph and a phrase scores the sum over its words.
/// Phrases keep their lowercased surface form; candidates longer than
/// `max_phrase_tokens` are discarded.
class RakeExtractor : public KeywordExtractor {
 public:
  explicit RakeExtractor(WordSet stopwords,
                         std::size_t max_phrase_tokens = kMaxPhraseTokens)
      : stopwords_(std::move(stopwords)), max_phrase_tokens_(max_phrase_tokens) {}

  std::vector<std::string> extract(std::string_view text,
                                   std::size_t max_k) const override;

  struct ScoredPhrase {
    std::string phrase;
    double score = 0.0;
  };
  std::vector<ScoredPhrase> score(std::string_view text) const;

 private:
  WordSet stopwords_;
  std::size_t max_phrase_tokens_;
};

std::vector<std::string> extract_keywords(std::string_view text, std::size_t max_k,
                                          const WordSet& stopwords);

/// "question" alone for an empty pretext, otherwise "question [SEP] pretext".
std::string compose_plan_prompt(std::string_view question, std::string_view pretext);

/// Example i pairs the question plus answer sentences 1..i-1 with the
/// keywords of sentence i. Sentences whose extraction is empty are dropped
/// and logged.
std::vector<PlanTrainingExample> build_plan_training_examples(
    const QAPair& pair, const KeywordExtractor& extractor,
    std::size_t max_keywords = 5);

Json to_json(const PlanTrainingExample& example);

/// Splits on commas and newlines, normalizes case and spacing, drops empty
/// or over-long phrases and duplicates, and keeps at most `max_keywords`.
std::vector<std::string> parse_keyword_list(std::string_view text,
                                            std::size_t max_keywords);

struct PlannerConfig {
  std::size_t max_keywords = 5;
  std::size_t max_new_tokens = 32;
  bool fallback = true;
  RetryPolicy retry;
};

/// Asks `client` (may be null) for a plan. When the client is missing, fails,
/// or returns nothing usable, and fallback is enabled, extracts keywords from
/// the question and pretext instead, skipping phrases used by earlier plans.
/// Throws PlanningError otherwise.
KeywordPlan generate_plan(std::string_view question, std::string_view pretext,
                          Generator* client, const KeywordExtractor& extractor,
                          const PlannerConfig& config, std::size_t iteration,
                          std::span<const KeywordPlan> prior_plans = {});

}  // namespace iprg

#endif  // IPRG_PLANNER_HPP_
