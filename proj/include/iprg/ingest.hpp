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

// Dataset and corpus loaders. All files are line-delimited JSON:
//
//   QA dataset     {id, question, answer, aspects?: [...]}
//   corpus         {id, title, text}
//   predictions    {id, answer}
//   search replay  {query, results: [{text, url}]}

#ifndef IPRG_INGEST_HPP_
#define IPRG_INGEST_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "iprg/jsonl.hpp"

namespace iprg {

struct QAPair {
  std::string id;
  std::string question;
  std::string answer;
  std::optional<std::vector<std::string>> aspects;
};

struct Document {
  std::string id;
  std::string text;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Prediction {
  std::string id;
  std::string answer;
};

std::vector<QAPair> read_qa_dataset(std::istream& in, const std::string& source);
std::vector<QAPair> load_qa_dataset(const std::filesystem::path& path);
void write_qa_dataset(std::ostream& out, const std::vector<QAPair>& pairs);
Json to_json(const QAPair& pair);

/// Title is prepended to the text as "title: text" so it is chunked and
/// embedded with the body.
std::vector<Document> read_corpus(std::istream& in, const std::string& source);
std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Records carrying a "config" key are treated as a header and skipped.
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct SearchHit {
  std::string text;
  std::string url;
};

/// Sentence-level web search, abstracted so corpora can be built from a mock
/// or from pre-crawled results.
class SearchClient {
 public:
  virtual ~SearchClient() = default;
  /// Ranked hits; throws on failure.
  virtual std::vector<SearchHit> search(const std::string& query) = 0;
};

class ScriptedSearch : public SearchClient {
 public:
  explicit ScriptedSearch(std::map<std::string, std::vector<SearchHit>> results,
                          std::vector<SearchHit> fallback = {})
      : results_(std::move(results)), fallback_(std::move(fallback)) {}

  std::vector<SearchHit> search(const std::string& query) override;
  std::size_t call_count() const;

 private:
  std::map<std::string, std::vector<SearchHit>> results_;
  std::vector<SearchHit> fallback_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// Looks queries up in a replay file; an unknown query throws.
class ReplaySearch : public SearchClient {
 public:
  static ReplaySearch load(const std::filesystem::path& path);
  std::vector<SearchHit> search(const std::string& query) override;
  std::size_t size() const noexcept { return results_.size(); }

 private:
  std::map<std::string, std::vector<SearchHit>> results_;
};

struct SearchResultSentence {
  std::string query_sentence_id;  // "<pair id>#<sentence index>"
  std::size_t rank = 0;           // 1-based, after domain filtering
  std::string text;
  std::string source_url;
};

struct WebCorpus {
  std::vector<SearchResultSentence> sentences;
  std::size_t failed_queries = 0;

  /// One document per kept sentence, id "<pair id>#<sentence>#r<rank>".
  std::vector<Document> documents() const;
};

struct WebCorpusOptions {
  std::size_t top_n = 10;
  std::vector<std::string> exclude_domains;
  std::size_t jobs = 1;
};

/// True when `url`'s host equals `domain` or is a subdomain of it.
bool url_in_domain(const std::string& url, const std::string& domain);

/// Queries `search` with every answer sentence, keeps the first top_n hits
/// outside the excluded domains, and drops exact-duplicate sentences
/// corpus-wide so that each distinct text keeps its first occurrence in
/// (pair, sentence, rank) order.
WebCorpus build_web_corpus(SearchClient& search, const std::vector<QAPair>& pairs,
                           const WebCorpusOptions& options);

}  // namespace iprg

#endif  // IPRG_INGEST_HPP_
