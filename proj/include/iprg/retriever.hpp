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

// Passage retrieval: corpus chunking, embedding, exact cosine top-k search,
// and query construction.
//
// Serialized index layout (directory, format version 1):
//
//   manifest.json    {format, version, embedder_tag, dim, count,
//                     passage_len, stride, files...}
//   vectors.f32      count x dim float32, row-major, little-endian
//   passages.jsonl   {id, doc_id, position, text}, one per vector row
//   idf.f32          dim float32 (lexical embedder only)
//   stopwords.txt    stopword list used by the lexical embedder

#ifndef IPRG_RETRIEVER_HPP_
#define IPRG_RETRIEVER_HPP_

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iprg/clients.hpp"
#include "iprg/ingest.hpp"
#include "iprg/linalg.hpp"
#include "iprg/planner.hpp"
#include "iprg/text.hpp"

namespace iprg {

using EmbeddingMatrix = RowMatrix<float>;

struct Passage {
  std::string id;
  std::string doc_id;
  std::string text;
  std::size_t position = 0;

  friend bool operator==(const Passage&, const Passage&) = default;
};

struct ChunkOptions {
  std::size_t passage_len = 100;
  std::size_t stride = 100;
  std::size_t min_remainder = 10;
};

/// Sliding windows of `passage_len` tokens advancing by `stride`. Passage
/// text is the source span covering its tokens; ids are "<doc_id>#<position>".
/// A final short window survives only if it has at least `min_remainder`
/// tokens or is the document's only window.
std::vector<Passage> chunk_corpus(std::span<const Document> documents,
                                  const ChunkOptions& options = {});

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string tag() const = 0;
  /// 0 when not known until the first call.
  virtual std::size_t dim() const = 0;
  virtual EmbeddingMatrix embed(std::span<const std::string> texts) const = 0;
};

/// Hashed bag of words with tf-idf weights, L2-normalized. Token t lands in
/// bucket fnv1a(t) mod dim; document frequencies are counted per bucket over
/// the fitted corpus and reused for queries. Stopwords and the prompt markers
/// "[SEP]" / "[CTX]" / "keywords:" contribute nothing.
class LexicalEmbedder : public Embedder {
 public:
  static constexpr std::size_t kMinDim = 64;

  LexicalEmbedder(std::vector<float> idf, WordSet stopwords);

  static LexicalEmbedder fit(std::span<const std::string> corpus, std::size_t dim,
                             WordSet stopwords);

  static std::size_t bucket(std::string_view token, std::size_t dim);

  std::string tag() const override;
  std::size_t dim() const override { return idf_.size(); }
  EmbeddingMatrix embed(std::span<const std::string> texts) const override;

  const std::vector<float>& idf() const noexcept { return idf_; }
  const WordSet& stopwords() const noexcept { return stopwords_; }

  /// Token ids after stopword and marker removal, as embedded.
  std::vector<std::size_t> buckets(std::string_view text) const;

 private:
  std::vector<float> idf_;
  WordSet stopwords_;
};

/// Dense vectors from the sidecar's /embed endpoint.
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(HttpEndpoint endpoint, std::string model = "default",
                          std::size_t batch_size = 64);

  std::string tag() const override { return "remote:" + model_; }
  std::size_t dim() const override;
  EmbeddingMatrix embed(std::span<const std::string> texts) const override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::size_t batch_size_;
  mutable std::atomic<std::size_t> dim_{0};
};

struct IndexInfo {
  std::string embedder_tag;
  std::size_t passage_len = 0;
  std::size_t stride = 0;
};

/// Immutable after construction; safe to share between concurrent searches.
class PassageIndex {
 public:
  static constexpr int kFormatVersion = 1;

  static PassageIndex build(std::vector<Passage> passages, const Embedder& embedder,
                            const ChunkOptions& chunking = {});

  PassageIndex(std::vector<Passage> passages, EmbeddingMatrix vectors, IndexInfo info);

  void save(const std::filesystem::path& dir) const;
  static PassageIndex load(const std::filesystem::path& dir);

  std::size_t size() const noexcept { return passages_.size(); }
  bool empty() const noexcept { return passages_.empty(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors_.cols()); }
  const std::string& embedder_tag() const noexcept { return info_.embedder_tag; }
  const IndexInfo& info() const noexcept { return info_; }
  const std::vector<Passage>& passages() const noexcept { return passages_; }
  const EmbeddingMatrix& vectors() const noexcept { return vectors_; }
  const Eigen::VectorXd& norms() const noexcept { return norms_; }

  /// Set for lexical indexes: the embedder the index was built with, needed
  /// to embed queries against the same idf.
  const std::optional<LexicalEmbedder>& lexical_embedder() const noexcept { return lexical_; }
  void attach_lexical_embedder(LexicalEmbedder embedder);

 private:
  std::vector<Passage> passages_;
  EmbeddingMatrix vectors_;
  Eigen::VectorXd norms_;
  IndexInfo info_;
  std::optional<LexicalEmbedder> lexical_;
};

/// Chunks, fits a lexical embedder on the passages, and builds the index.
PassageIndex build_lexical_index(std::span<const Document> documents,
                                 const ChunkOptions& chunking, std::size_t dim,
                                 const WordSet& stopwords);

struct RetrievedContext {
  Passage passage;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

/// Exact cosine search over every passage, best first; ties go to the
/// smaller passage id. Throws IndexError for an empty index or an embedder
/// whose tag differs from the index's.
std::vector<RetrievedContext> search(const PassageIndex& index, std::string_view query,
                                     std::size_t k, const Embedder& embedder);

/// "question [SEP] pretext [SEP] keywords: a, b". An empty pretext leaves an
/// empty middle segment; without a plan the keyword segment is omitted.
std::string build_query(std::string_view question, std::string_view pretext,
                        const KeywordPlan* plan);

}  // namespace iprg

#endif  // IPRG_RETRIEVER_HPP_
