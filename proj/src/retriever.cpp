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

#include "iprg/retriever.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "iprg/errors.hpp"

namespace iprg {

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kVectorsFile = "vectors.f32";
constexpr const char* kPassagesFile = "passages.jsonl";
constexpr const char* kIdfFile = "idf.f32";
constexpr const char* kStopwordsFile = "stopwords.txt";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

void write_f32(std::ostream& out, std::span<const float> values) {
  std::vector<unsigned char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<float> read_f32(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != count * 4) {
    throw IndexError(path.string() + ": expected " + std::to_string(count * 4) +
                     " bytes, found " + std::to_string(size));
  }
  in.seekg(0);
  std::vector<unsigned char> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IndexError("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<Passage> chunk_corpus(std::span<const Document> documents,
                                  const ChunkOptions& options) {
  if (options.passage_len < 1) throw PreconditionError("passage_len must be at least 1");
  if (options.stride < 1 || options.stride > options.passage_len) {
    throw PreconditionError("stride must be in [1, passage_len]");
  }
  std::vector<Passage> passages;
  for (const auto& doc : documents) {
    const auto spans = token_spans(doc.text);
    const std::size_t n = spans.size();
    if (n == 0) {
      spdlog::warn("document {} has no tokens; skipped", doc.id);
      continue;
    }
    std::size_t position = 0;
    for (std::size_t start = 0; start < n; start += options.stride) {
      const std::size_t end = std::min(start + options.passage_len, n);
      const std::size_t len = end - start;
      if (start > 0 && len < options.passage_len && len < options.min_remainder) break;
      const std::size_t b = spans[start].begin;
      const std::size_t e = spans[end - 1].end;
      passages.push_back({doc.id + "#" + std::to_string(position), doc.id,
                          doc.text.substr(b, e - b), position});
      ++position;
      if (end == n) break;
    }
  }
  return passages;
}

LexicalEmbedder::LexicalEmbedder(std::vector<float> idf, WordSet stopwords)
    : idf_(std::move(idf)), stopwords_(std::move(stopwords)) {
  if (idf_.size() < kMinDim) {
    throw PreconditionError("lexical embedding dim must be at least " +
                            std::to_string(kMinDim));
  }
}

std::size_t LexicalEmbedder::bucket(std::string_view token, std::size_t dim) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h % dim);
}

std::vector<std::size_t> LexicalEmbedder::buckets(std::string_view text) const {
  std::string cleaned(text);
  replace_all(cleaned, "[SEP] keywords:", " ");
  replace_all(cleaned, "[SEP]", " ");
  replace_all(cleaned, "[CTX]", " ");
  std::vector<std::size_t> out;
  for (const auto& token : tokenize(cleaned)) {
    if (stopwords_.contains(token)) continue;
    out.push_back(bucket(token, idf_.size()));
  }
  return out;
}

LexicalEmbedder LexicalEmbedder::fit(std::span<const std::string> corpus, std::size_t dim,
                                     WordSet stopwords) {
  if (dim < kMinDim) {
    throw PreconditionError("lexical embedding dim must be at least " +
                            std::to_string(kMinDim));
  }
  // Bucketing does not depend on idf; fit with a placeholder table.
  LexicalEmbedder probe(std::vector<float>(dim, 1.0f), stopwords);
  std::vector<std::size_t> df(dim, 0);
  std::vector<char> present(dim, 0);
  for (const auto& text : corpus) {
    const auto ids = probe.buckets(text);
    for (auto b : ids) {
      if (!present[b]) {
        present[b] = 1;
        ++df[b];
      }
    }
    for (auto b : ids) present[b] = 0;
  }
  const double n = static_cast<double>(corpus.size());
  std::vector<float> idf(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    idf[b] = static_cast<float>(std::log((n + 1.0) / (double(df[b]) + 1.0)) + 1.0);
  }
  return LexicalEmbedder(std::move(idf), std::move(stopwords));
}

std::string LexicalEmbedder::tag() const {
  return "lexical-tfidf-fnv1a:d=" + std::to_string(idf_.size());
}

EmbeddingMatrix LexicalEmbedder::embed(std::span<const std::string> texts) const {
  const std::size_t d = idf_.size();
  EmbeddingMatrix out = EmbeddingMatrix::Zero(static_cast<Eigen::Index>(texts.size()),
                                              static_cast<Eigen::Index>(d));
  Eigen::VectorXd row(d);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    row.setZero();
    for (auto b : buckets(texts[i])) row(b) += 1.0;
    for (std::size_t b = 0; b < d; ++b) row(b) *= idf_[b];
    const double norm = row.norm();
    if (norm > 0.0) row /= norm;
    out.row(static_cast<Eigen::Index>(i)) = row.cast<float>().transpose();
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(HttpEndpoint endpoint, std::string model,
                               std::size_t batch_size)
    : endpoint_(std::move(endpoint)), model_(std::move(model)),
      batch_size_(std::max<std::size_t>(batch_size, 1)) {}

std::size_t RemoteEmbedder::dim() const { return dim_; }

EmbeddingMatrix RemoteEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<std::vector<float>> rows;
  rows.reserve(texts.size());
  std::size_t dim = dim_.load();
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto batch = texts.subspan(start, std::min(batch_size_, texts.size() - start));
    Json body;
    body["texts"] = std::vector<std::string>(batch.begin(), batch.end());
    const Json reply = endpoint_.post("/embed", body);
    if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
        !reply.contains("dim") || !reply["dim"].is_number_unsigned()) {
      throw ProtocolError("/embed response must carry {vectors, dim}");
    }
    const auto reply_dim = reply["dim"].get<std::size_t>();
    if (dim != 0 && reply_dim != dim) {
      throw ProtocolError("/embed dim changed from " + std::to_string(dim) + " to " +
                          std::to_string(reply_dim));
    }
    dim = reply_dim;
    if (reply["vectors"].size() != batch.size()) {
      throw ProtocolError("/embed returned " + std::to_string(reply["vectors"].size()) +
                          " vectors for " + std::to_string(batch.size()) + " texts");
    }
    for (const auto& v : reply["vectors"]) {
      if (!v.is_array() || v.size() != dim) {
        throw ProtocolError("/embed vector length differs from advertised dim");
      }
      rows.push_back(v.get<std::vector<float>>());
    }
  }
  dim_ = dim;
  EmbeddingMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXf>(rows[i].data(), static_cast<Eigen::Index>(dim));
  }
  return out;
}

PassageIndex::PassageIndex(std::vector<Passage> passages, EmbeddingMatrix vectors,
                           IndexInfo info)
    : passages_(std::move(passages)), vectors_(std::move(vectors)), info_(std::move(info)) {
  if (static_cast<std::size_t>(vectors_.rows()) != passages_.size()) {
    throw IndexError("vector count " + std::to_string(vectors_.rows()) +
                     " differs from passage count " + std::to_string(passages_.size()));
  }
  std::map<std::string_view, int> ids;
  for (const auto& p : passages_) {
    if (p.text.empty()) throw IndexError("passage " + p.id + " has empty text");
    if (!ids.emplace(p.id, 0).second) throw IndexError("duplicate passage id " + p.id);
  }
  norms_ = row_norms(vectors_);
}

PassageIndex PassageIndex::build(std::vector<Passage> passages, const Embedder& embedder,
                                 const ChunkOptions& chunking) {
  std::vector<std::string> texts;
  texts.reserve(passages.size());
  for (const auto& p : passages) texts.push_back(p.text);
  EmbeddingMatrix vectors = embedder.embed(texts);
  if (vectors.rows() == 0) vectors.resize(0, static_cast<Eigen::Index>(embedder.dim()));
  PassageIndex index(std::move(passages), std::move(vectors),
                     IndexInfo{embedder.tag(), chunking.passage_len, chunking.stride});
  if (const auto* lexical = dynamic_cast<const LexicalEmbedder*>(&embedder)) {
    index.lexical_ = *lexical;
  }
  return index;
}

void PassageIndex::attach_lexical_embedder(LexicalEmbedder embedder) {
  if (embedder.tag() != info_.embedder_tag) {
    throw IndexError("embedder " + embedder.tag() + " does not match index " +
                     info_.embedder_tag);
  }
  lexical_ = std::move(embedder);
}

void PassageIndex::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);

  Json manifest;
  manifest["format"] = "iprg-passage-index";
  manifest["version"] = kFormatVersion;
  manifest["embedder_tag"] = info_.embedder_tag;
  manifest["dim"] = dim();
  manifest["count"] = size();
  manifest["passage_len"] = info_.passage_len;
  manifest["stride"] = info_.stride;
  manifest["vectors_file"] = kVectorsFile;
  manifest["passages_file"] = kPassagesFile;
  if (lexical_) {
    manifest["idf_file"] = kIdfFile;
    manifest["stopwords_file"] = kStopwordsFile;
  }
  open_out(dir / kManifest) << manifest.dump(2) << '\n';

  auto vec_out = open_out(dir / kVectorsFile);
  write_f32(vec_out, std::span<const float>(vectors_.data(),
                                            static_cast<std::size_t>(vectors_.size())));

  auto passages_out = open_out(dir / kPassagesFile);
  for (const auto& p : passages_) {
    Json record;
    record["id"] = p.id;
    record["doc_id"] = p.doc_id;
    record["position"] = p.position;
    record["text"] = p.text;
    write_jsonl(passages_out, record);
  }

  if (lexical_) {
    auto idf_out = open_out(dir / kIdfFile);
    write_f32(idf_out, lexical_->idf());
    auto stop_out = open_out(dir / kStopwordsFile);
    for (const auto& w : lexical_->stopwords().sorted()) stop_out << w << '\n';
  }
}

PassageIndex PassageIndex::load(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / kManifest);
  if (!manifest_in) throw IndexError("no index manifest in " + dir.string());
  Json manifest;
  try {
    manifest = Json::parse(manifest_in);
  } catch (const Json::exception& e) {
    throw IndexError("malformed manifest in " + dir.string() + ": " + e.what());
  }

  std::size_t dim = 0, count = 0;
  IndexInfo info;
  try {
    if (manifest.at("format").get<std::string>() != "iprg-passage-index") {
      throw IndexError(dir.string() + " is not a passage index");
    }
    if (manifest.at("version").get<int>() != kFormatVersion) {
      throw IndexError("unsupported index version " + manifest.at("version").dump());
    }
    info.embedder_tag = manifest.at("embedder_tag").get<std::string>();
    info.passage_len = manifest.at("passage_len").get<std::size_t>();
    info.stride = manifest.at("stride").get<std::size_t>();
    dim = manifest.at("dim").get<std::size_t>();
    count = manifest.at("count").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw IndexError("incomplete manifest in " + dir.string() + ": " + e.what());
  }

  std::vector<Passage> passages;
  const std::string source = (dir / kPassagesFile).string();
  read_jsonl_file(dir / kPassagesFile, [&](const Json& r, std::size_t line) {
    Passage p;
    p.id = require_string(r, "id", source, line);
    p.doc_id = require_string(r, "doc_id", source, line);
    p.text = require_string(r, "text", source, line);
    if (!r.contains("position") || !r["position"].is_number_unsigned()) {
      throw ParseError(source, line, "missing field \"position\"");
    }
    p.position = r["position"].get<std::size_t>();
    passages.push_back(std::move(p));
  });
  if (passages.size() != count) {
    throw IndexError("manifest count " + std::to_string(count) + " but " +
                     std::to_string(passages.size()) + " passages on disk");
  }

  const auto flat = read_f32(dir / kVectorsFile, count * dim);
  EmbeddingMatrix vectors =
      Eigen::Map<const EmbeddingMatrix>(flat.data(), static_cast<Eigen::Index>(count),
                                        static_cast<Eigen::Index>(dim));
  PassageIndex index(std::move(passages), std::move(vectors), std::move(info));

  if (manifest.contains("idf_file")) {
    auto idf = read_f32(dir / manifest["idf_file"].get<std::string>(), dim);
    auto stopwords = WordSet::from_file(dir / manifest["stopwords_file"].get<std::string>());
    index.attach_lexical_embedder(LexicalEmbedder(std::move(idf), std::move(stopwords)));
  }
  return index;
}

PassageIndex build_lexical_index(std::span<const Document> documents,
                                 const ChunkOptions& chunking, std::size_t dim,
                                 const WordSet& stopwords) {
  auto passages = chunk_corpus(documents, chunking);
  std::vector<std::string> texts;
  texts.reserve(passages.size());
  for (const auto& p : passages) texts.push_back(p.text);
  const auto embedder = LexicalEmbedder::fit(texts, dim, stopwords);
  return PassageIndex::build(std::move(passages), embedder, chunking);
}

std::vector<RetrievedContext> search(const PassageIndex& index, std::string_view query,
                                     std::size_t k, const Embedder& embedder) {
  if (index.empty()) throw IndexError("index empty");
  if (k < 1) throw PreconditionError("k must be at least 1");
  if (embedder.tag() != index.embedder_tag()) {
    throw IndexError("query embedder " + embedder.tag() + " does not match index " +
                     index.embedder_tag());
  }
  const std::string text(query);
  const EmbeddingMatrix q = embedder.embed(std::span(&text, 1));
  if (q.rows() != 1 || static_cast<std::size_t>(q.cols()) != index.dim()) {
    throw IndexError("query embedding has dim " + std::to_string(q.cols()) +
                     ", index has " + std::to_string(index.dim()));
  }
  const Eigen::VectorXd scores =
      cosine_scores(index.vectors(), index.norms(), q.row(0).transpose());
  const auto& passages = index.passages();
  const auto order = top_k(scores, k, [&](std::size_t a, std::size_t b) {
    return passages[a].id < passages[b].id;
  });

  std::vector<RetrievedContext> out;
  out.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    double score = scores(static_cast<Eigen::Index>(order[r]));
    // A tie reordered by id reports its group's leading score.
    if (!out.empty()) score = std::min(score, out.back().score);
    out.push_back({passages[order[r]], score, r + 1});
  }
  return out;
}

std::string build_query(std::string_view question, std::string_view pretext,
                        const KeywordPlan* plan) {
  std::string query(question);
  query.append(kSeparator);
  query.append(pretext);
  if (plan != nullptr) {
    query.append(kSeparator);
    query.append("keywords: ");
    query.append(join(plan->keywords, ", "));
  }
  return query;
}

}  // namespace iprg
