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

#include "iprg/ingest.hpp"

#include <fstream>
#include <set>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "iprg/errors.hpp"
#include "iprg/parallel.hpp"
#include "iprg/text.hpp"

namespace iprg {

namespace {

std::string require_nonempty(const Json& record, const char* field,
                             const std::string& source, std::size_t line) {
  std::string value = require_string(record, field, source, line);
  if (trim(value).empty()) {
    throw ParseError(source, line, std::string("field \"") + field + "\" is empty");
  }
  return value;
}

std::string host_of(const std::string& url) {
  std::size_t begin = url.find("://");
  begin = begin == std::string::npos ? 0 : begin + 3;
  std::size_t end = url.find_first_of("/:?#", begin);
  if (end == std::string::npos) end = url.size();
  std::string host = to_lower(url.substr(begin, end - begin));
  const std::size_t at = host.rfind('@');
  if (at != std::string::npos) host = host.substr(at + 1);
  return host;
}

}  // namespace

std::vector<QAPair> read_qa_dataset(std::istream& in, const std::string& source) {
  std::vector<QAPair> pairs;
  std::unordered_set<std::string> seen;
  read_jsonl(in, source, [&](const Json& record, std::size_t line) {
    QAPair pair;
    pair.id = require_nonempty(record, "id", source, line);
    pair.question = require_nonempty(record, "question", source, line);
    pair.answer = require_nonempty(record, "answer", source, line);
    pair.aspects = optional_string_list(record, "aspects", source, line);
    if (!seen.insert(pair.id).second) {
      throw ParseError(source, line, "duplicate id \"" + pair.id + "\"");
    }
    pairs.push_back(std::move(pair));
  });
  return pairs;
}

std::vector<QAPair> load_qa_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open dataset");
  return read_qa_dataset(in, path.string());
}

Json to_json(const QAPair& pair) {
  Json record;
  record["id"] = pair.id;
  record["question"] = pair.question;
  record["answer"] = pair.answer;
  if (pair.aspects) record["aspects"] = *pair.aspects;
  return record;
}

void write_qa_dataset(std::ostream& out, const std::vector<QAPair>& pairs) {
  for (const auto& pair : pairs) write_jsonl(out, to_json(pair));
}

std::vector<Document> read_corpus(std::istream& in, const std::string& source) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  read_jsonl(in, source, [&](const Json& record, std::size_t line) {
    Document doc;
    doc.id = require_nonempty(record, "id", source, line);
    const std::string text = require_string(record, "text", source, line);
    std::string title;
    if (record.contains("title") && !record["title"].is_null()) {
      title = require_string(record, "title", source, line);
    }
    doc.text = trim(title).empty() ? text : title + ": " + text;
    if (!seen.insert(doc.id).second) {
      throw ParseError(source, line, "duplicate document id \"" + doc.id + "\"");
    }
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open corpus");
  return read_corpus(in, path.string());
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  std::unordered_set<std::string> seen;
  const std::string source = path.string();
  read_jsonl_file(path, [&](const Json& record, std::size_t line) {
    if (record.contains("config")) return;
    Prediction p;
    p.id = require_nonempty(record, "id", source, line);
    p.answer = require_string(record, "answer", source, line);
    if (!seen.insert(p.id).second) {
      throw ParseError(source, line, "duplicate prediction id \"" + p.id + "\"");
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<SearchHit> ScriptedSearch::search(const std::string& query) {
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }
  auto it = results_.find(query);
  if (it != results_.end()) return it->second;
  return fallback_;
}

std::size_t ScriptedSearch::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

ReplaySearch ReplaySearch::load(const std::filesystem::path& path) {
  ReplaySearch replay;
  const std::string source = path.string();
  read_jsonl_file(path, [&](const Json& record, std::size_t line) {
    const std::string query = require_string(record, "query", source, line);
    auto it = record.find("results");
    if (it == record.end() || !it->is_array()) {
      throw ParseError(source, line, "missing list field \"results\"");
    }
    std::vector<SearchHit> hits;
    for (const auto& r : *it) {
      if (!r.is_object()) throw ParseError(source, line, "result is not an object");
      hits.push_back({require_string(r, "text", source, line),
                      r.contains("url") ? require_string(r, "url", source, line)
                                        : std::string()});
    }
    replay.results_[query] = std::move(hits);
  });
  return replay;
}

std::vector<SearchHit> ReplaySearch::search(const std::string& query) {
  auto it = results_.find(query);
  if (it == results_.end()) throw Error("no replayed results for query: " + query);
  return it->second;
}

bool url_in_domain(const std::string& url, const std::string& domain) {
  const std::string host = host_of(url);
  const std::string d = to_lower(domain);
  if (d.empty() || host.size() < d.size()) return false;
  if (host == d) return true;
  return host.size() > d.size() &&
         host.compare(host.size() - d.size(), d.size(), d) == 0 &&
         host[host.size() - d.size() - 1] == '.';
}

std::vector<Document> WebCorpus::documents() const {
  std::vector<Document> docs;
  docs.reserve(sentences.size());
  for (const auto& s : sentences) {
    docs.push_back({s.query_sentence_id + "#r" + std::to_string(s.rank), s.text});
  }
  return docs;
}

WebCorpus build_web_corpus(SearchClient& search, const std::vector<QAPair>& pairs,
                           const WebCorpusOptions& options) {
  if (options.top_n < 1) throw PreconditionError("top_n must be at least 1");

  struct Query {
    std::string id;
    std::string text;
  };
  std::vector<Query> queries;
  for (const auto& pair : pairs) {
    for (const auto& s : segment_sentences(pair.answer)) {
      queries.push_back({pair.id + "#" + std::to_string(s.index), s.text});
    }
  }

  // Slots are filled concurrently; `queries` is already in
  // (pair, sentence) order so assembly below is deterministic.
  std::vector<std::vector<SearchHit>> kept(queries.size());
  std::vector<char> failed(queries.size(), 0);
  parallel_for(queries.size(), options.jobs, [&](std::size_t i) {
    std::vector<SearchHit> hits;
    try {
      hits = search.search(queries[i].text);
    } catch (const std::exception& e) {
      spdlog::warn("search failed for {}: {}", queries[i].id, e.what());
      failed[i] = 1;
      return;
    }
    for (auto& hit : hits) {
      if (kept[i].size() >= options.top_n) break;
      if (trim(hit.text).empty()) continue;
      bool excluded = false;
      for (const auto& d : options.exclude_domains) {
        if (url_in_domain(hit.url, d)) {
          excluded = true;
          break;
        }
      }
      if (!excluded) kept[i].push_back(std::move(hit));
    }
  });

  WebCorpus corpus;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    corpus.failed_queries += failed[i];
    for (std::size_t r = 0; r < kept[i].size(); ++r) {
      std::string text = trim(kept[i][r].text);
      if (!seen.insert(text).second) continue;
      corpus.sentences.push_back(
          {queries[i].id, r + 1, std::move(text), kept[i][r].url});
    }
  }
  return corpus;
}

}  // namespace iprg
