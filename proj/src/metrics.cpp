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

#include "iprg/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <ostream>
#include <semaphore>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "iprg/errors.hpp"
#include "iprg/parallel.hpp"
#include "iprg/resources.hpp"

namespace iprg {

RougeScore make_rouge(double recall, double precision) {
  RougeScore s{recall, precision, 0.0};
  if (recall + precision > 0.0) s.f1 = 2.0 * precision * recall / (precision + recall);
  return s;
}

namespace {

std::unordered_map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens,
                                                          std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      key.push_back('\x1f');
      key.append(tokens[i + j]);
    }
    ++counts[key];
  }
  return counts;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   std::size_t n) {
  if (n < 1) throw PreconditionError("rouge_n needs n >= 1");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  if (cand.empty() || ref.empty()) return {};
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  const double ref_total = static_cast<double>(reference.size() - n + 1);
  const double cand_total = static_cast<double>(candidate.size() - n + 1);
  return make_rouge(static_cast<double>(overlap) / ref_total,
                    static_cast<double>(overlap) / cand_total);
}

RougeScore rouge_n(std::string_view candidate, std::string_view reference, std::size_t n) {
  const TokenList c = tokenize(candidate);
  const TokenList r = tokenize(reference);
  return rouge_n(c, r, n);
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto l = static_cast<double>(lcs_length(candidate, reference));
  return make_rouge(l / static_cast<double>(reference.size()),
                    l / static_cast<double>(candidate.size()));
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  const TokenList c = tokenize(candidate);
  const TokenList r = tokenize(reference);
  return rouge_l(c, r);
}

ReadabilityCounts readability_counts(std::string_view text, const WordSet& familiar) {
  ReadabilityCounts c;
  for (const auto& word : tokenize(text)) {
    ++c.words;
    const int syllables = count_syllables(word);
    c.syllables += static_cast<std::size_t>(syllables);
    if (syllables >= 3) ++c.complex_words;
    for (unsigned char ch : word) {
      if (std::isalpha(ch)) ++c.letters;
      else if (std::isdigit(ch)) ++c.digits;
    }
    if (!familiar.contains(word)) ++c.unfamiliar_words;
  }
  c.sentences = segment_sentences(text).size();
  return c;
}

ReadabilityReport readability(std::string_view text, const WordSet& familiar) {
  ReadabilityReport r;
  r.counts = readability_counts(text, familiar);
  const auto& c = r.counts;
  if (c.words == 0 || c.sentences == 0) {
    throw PreconditionError("readability needs at least one word and one sentence");
  }
  const double w = static_cast<double>(c.words);
  const double words_per_sentence = w / static_cast<double>(c.sentences);

  r.fkgl = 0.39 * words_per_sentence + 11.8 * (static_cast<double>(c.syllables) / w) - 15.59;
  r.gfi = 0.4 * (words_per_sentence + 100.0 * (static_cast<double>(c.complex_words) / w));
  r.ari = 4.71 * (static_cast<double>(c.letters + c.digits) / w) + 0.5 * words_per_sentence -
          21.43;
  const double letters_per_100 = 100.0 * static_cast<double>(c.letters) / w;
  const double sentences_per_100 = 100.0 * static_cast<double>(c.sentences) / w;
  r.cli = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;
  const double difficult_pct = 100.0 * static_cast<double>(c.unfamiliar_words) / w;
  r.dcr = 0.1579 * difficult_pct + 0.0496 * words_per_sentence;
  if (difficult_pct > 5.0) r.dcr += 3.6365;
  return r;
}

ReadabilityReport readability(std::string_view text) {
  return readability(text, dale_chall_words());
}

NliScore nli_eval(NliClient& client, std::string_view reference, std::string_view generated) {
  NliScore s = client.score(std::string(reference), std::string(generated));
  validate(s);
  return s;
}

double aspect_coverage(std::string_view answer, std::span<const std::string> aspects) {
  if (aspects.empty()) throw PreconditionError("aspect list is empty");
  const TokenList tokens = tokenize(answer);
  std::size_t found = 0;
  for (const auto& aspect : aspects) {
    const TokenList phrase = tokenize(aspect);
    if (phrase.empty()) continue;
    if (std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end()) {
      ++found;
    }
  }
  return static_cast<double>(found) / static_cast<double>(aspects.size());
}

Json to_json(const EvalOptions& o) {
  Json j;
  j["rouge"] = o.rouge;
  j["rouge_variant"] = "lowercased alphanumeric tokens, no stemming, no stopword removal";
  j["nli"] = o.nli;
  j["nli_aggregate"] = "mean probability x100, missing items excluded";
  j["readability"] = o.readability;
  j["dale_chall_list"] = kDaleChallListVersion;
  j["aspects"] = o.aspects;
  j["jobs"] = o.jobs;
  j["nli_in_flight"] = o.nli_in_flight;
  return j;
}

std::optional<double> EvalSummary::mean(std::string_view column) const {
  for (const auto& [name, value] : means) {
    if (name == column) return value;
  }
  return std::nullopt;
}

namespace {

constexpr const char* kColumns[] = {"r1_recall", "r1_f1", "rl_recall", "rl_f1",
                                    "entail",    "contradict", "fkgl", "gfi",
                                    "ari",       "cli",   "dcr",       "aspect_coverage"};

// Per-column value of one item, before any summary scaling.
std::optional<double> column_value(const ItemScores& item, std::string_view column) {
  if (column == "r1_recall" && item.rouge1) return item.rouge1->recall;
  if (column == "r1_f1" && item.rouge1) return item.rouge1->f1;
  if (column == "rl_recall" && item.rougel) return item.rougel->recall;
  if (column == "rl_f1" && item.rougel) return item.rougel->f1;
  if (column == "entail" && item.nli) return item.nli->entail;
  if (column == "contradict" && item.nli) return item.nli->contradict;
  if (item.readability) {
    if (column == "fkgl") return item.readability->fkgl;
    if (column == "gfi") return item.readability->gfi;
    if (column == "ari") return item.readability->ari;
    if (column == "cli") return item.readability->cli;
    if (column == "dcr") return item.readability->dcr;
  }
  if (column == "aspect_coverage") return item.aspect_coverage;
  return std::nullopt;
}

bool percent_column(std::string_view column) {
  return column.starts_with("r1_") || column.starts_with("rl_") || column == "entail" ||
         column == "contradict";
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

EvalReport evaluate(std::span<const Prediction> predictions, std::span<const QAPair> dataset,
                    const EvalOptions& options, NliClient* nli) {
  if (options.nli && nli == nullptr) throw PreconditionError("NLI scoring needs an NLI endpoint");
  std::map<std::string, const QAPair*> by_id;
  for (const auto& pair : dataset) by_id.emplace(pair.id, &pair);
  std::vector<const QAPair*> refs;
  refs.reserve(predictions.size());
  for (const auto& p : predictions) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw PreconditionError("prediction id not in dataset: " + p.id);
    refs.push_back(it->second);
  }

  EvalReport report;
  report.options = options;
  report.items.resize(predictions.size());
  std::vector<char> nli_failed(predictions.size(), 0);
  std::counting_semaphore<> nli_slots(
      static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options.nli_in_flight)));

  parallel_for(predictions.size(), options.jobs, [&](std::size_t i) {
    const Prediction& pred = predictions[i];
    const QAPair& ref = *refs[i];
    ItemScores& item = report.items[i];
    item.id = pred.id;
    if (options.rouge) {
      const TokenList c = tokenize(pred.answer);
      const TokenList r = tokenize(ref.answer);
      item.rouge1 = rouge_n(c, r, 1);
      item.rougel = rouge_l(c, r);
    }
    if (options.nli) {
      nli_slots.acquire();
      try {
        item.nli = nli_eval(*nli, ref.answer, pred.answer);
      } catch (const TransportError& e) {
        spdlog::warn("nli failed for {}: {}", pred.id, e.what());
        nli_failed[i] = 1;
      } catch (...) {
        nli_slots.release();
        throw;
      }
      nli_slots.release();
    }
    if (options.readability) {
      try {
        item.readability = readability(pred.answer);
      } catch (const PreconditionError&) {
      }
    }
    if (options.aspects && ref.aspects && !ref.aspects->empty()) {
      item.aspect_coverage = aspect_coverage(pred.answer, *ref.aspects);
    }
  });

  EvalSummary& s = report.summary;
  s.count = report.items.size();
  for (std::size_t i = 0; i < report.items.size(); ++i) {
    if (nli_failed[i]) ++s.nli_missing;
    if (options.readability && !report.items[i].readability) ++s.readability_missing;
  }
  for (const char* column : kColumns) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& item : report.items) {
      if (auto v = column_value(item, column)) {
        sum += *v;
        ++n;
      }
    }
    std::optional<double> mean;
    if (n > 0) {
      mean = sum / static_cast<double>(n);
      if (percent_column(column)) *mean *= 100.0;
    }
    s.means.emplace_back(column, mean);
  }
  return report;
}

Json to_json(const ItemScores& item) {
  Json j;
  j["type"] = "item";
  j["id"] = item.id;
  for (const char* column : kColumns) j[column] = optional_number(column_value(item, column));
  return j;
}

Json summary_json(const EvalReport& report) {
  const EvalSummary& s = report.summary;
  Json j;
  j["type"] = "summary";
  j["count"] = s.count;
  j["nli_missing"] = s.nli_missing;
  j["readability_missing"] = s.readability_missing;
  Json display = Json::object();
  for (const auto& [name, value] : s.means) {
    j[name] = optional_number(value);
    display[name] = value ? Json(two_decimals(*value)) : Json(nullptr);
  }
  j["display"] = std::move(display);
  return j;
}

void write_report(std::ostream& out, const EvalReport& report, const Json& extra_config) {
  Json config;
  config["type"] = "config";
  config["metrics"] = to_json(report.options);
  if (extra_config.is_object()) {
    for (const auto& [key, value] : extra_config.items()) config[key] = value;
  }
  write_jsonl(out, config);
  for (const auto& item : report.items) write_jsonl(out, to_json(item));
  write_jsonl(out, summary_json(report));
}

}  // namespace iprg
