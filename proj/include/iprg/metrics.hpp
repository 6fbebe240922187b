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

// Answer quality metrics: ROUGE-N / ROUGE-L over lowercased tokens (no
// stemming, no stopword removal), NLI factual consistency, five readability
// indices, and aspect coverage. `evaluate` scores a prediction set against a
// dataset and `write_report` emits it as line-delimited JSON:
//
//   {type: "config", ...}
//   {type: "item", id, r1_recall, r1_f1, rl_recall, rl_f1, entail, contradict,
//    fkgl, gfi, ari, cli, dcr, aspect_coverage}        one per prediction
//   {type: "summary", count, means..., display...}
//
// Disabled or unavailable values are null. Summary ROUGE and NLI means are
// scaled by 100; `display` holds every mean formatted to two decimals.

#ifndef IPRG_METRICS_HPP_
#define IPRG_METRICS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iprg/clients.hpp"
#include "iprg/ingest.hpp"
#include "iprg/jsonl.hpp"
#include "iprg/text.hpp"

namespace iprg {

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

RougeScore make_rouge(double recall, double precision);

RougeScore rouge_n(std::string_view candidate, std::string_view reference, std::size_t n);
RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   std::size_t n);
RougeScore rouge_l(std::string_view candidate, std::string_view reference);
RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

struct ReadabilityCounts {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  std::size_t complex_words = 0;  // three or more syllables
  std::size_t letters = 0;
  std::size_t digits = 0;
  std::size_t unfamiliar_words = 0;
};

struct ReadabilityReport {
  double fkgl = 0.0;
  double gfi = 0.0;
  double ari = 0.0;
  double cli = 0.0;
  double dcr = 0.0;
  ReadabilityCounts counts;
};

ReadabilityCounts readability_counts(std::string_view text, const WordSet& familiar);
/// Throws PreconditionError when the text has no words or no sentences.
ReadabilityReport readability(std::string_view text, const WordSet& familiar);
/// Uses the bundled familiar-word list.
ReadabilityReport readability(std::string_view text);

/// Premise is the reference, hypothesis the generated answer.
NliScore nli_eval(NliClient& client, std::string_view reference, std::string_view generated);

/// Fraction of aspects found as contiguous token runs of the answer.
double aspect_coverage(std::string_view answer, std::span<const std::string> aspects);

struct EvalOptions {
  bool rouge = true;
  bool nli = false;
  bool readability = false;
  bool aspects = false;
  std::size_t jobs = 1;
  std::size_t nli_in_flight = 4;
};

Json to_json(const EvalOptions& options);

struct ItemScores {
  std::string id;
  std::optional<RougeScore> rouge1;
  std::optional<RougeScore> rougel;
  std::optional<NliScore> nli;
  std::optional<ReadabilityReport> readability;
  std::optional<double> aspect_coverage;
};

struct EvalSummary {
  std::size_t count = 0;
  std::size_t nli_missing = 0;
  std::size_t readability_missing = 0;
  // Column name to corpus mean; nullopt when no item has a value.
  std::vector<std::pair<std::string, std::optional<double>>> means;

  std::optional<double> mean(std::string_view column) const;
};

struct EvalReport {
  EvalOptions options;
  std::vector<ItemScores> items;
  EvalSummary summary;
};

/// Throws PreconditionError when a prediction id is missing from the dataset
/// or NLI is requested without a client. NLI transport failures mark the item
/// missing and are excluded from the means.
EvalReport evaluate(std::span<const Prediction> predictions, std::span<const QAPair> dataset,
                    const EvalOptions& options, NliClient* nli = nullptr);

Json to_json(const ItemScores& item);
Json summary_json(const EvalReport& report);
void write_report(std::ostream& out, const EvalReport& report, const Json& extra_config = {});

}  // namespace iprg

#endif  // IPRG_METRICS_HPP_
