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

// Deterministic text primitives shared by every stage of the pipeline.
//
// Tokens are lowercased maximal runs of ASCII letters and digits. An ASCII
// apostrophe is kept when it sits between two alphanumerics ("don't"); every
// other byte, including all non-ASCII bytes, is a separator.

#ifndef IPRG_TEXT_HPP_
#define IPRG_TEXT_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace iprg {

using TokenList = std::vector<std::string>;

/// Byte range [begin, end) of one token inside its source text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Sentence {
  std::string text;
  std::size_t index = 0;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Case-folded set of words, loaded from one-entry-per-line text.
class WordSet {
 public:
  WordSet() = default;
  explicit WordSet(std::unordered_set<std::string> words);

  /// Blank lines and lines starting with '#' are ignored.
  static WordSet from_lines(std::string_view text);
  /// Throws ParseError if the file cannot be read.
  static WordSet from_file(const std::filesystem::path& path);
  /// Missing file falls back to `fallback`.
  static WordSet from_file_or(const std::filesystem::path& path,
                              const WordSet& fallback);

  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  /// Sorted entries, for serialization.
  std::vector<std::string> sorted() const;

 private:
  std::unordered_set<std::string> words_;
};

TokenList tokenize(std::string_view text);
std::vector<TokenSpan> token_spans(std::string_view text);
std::size_t count_tokens(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
/// Trims and collapses every whitespace run to one space.
std::string normalize_space(std::string_view text);
std::string join(std::span<const std::string> parts, std::string_view sep);

/// Splits after '.', '!' or '?' (plus any closing quotes or brackets) when the
/// next non-space character is uppercase or the text ends. A single period
/// after an abbreviation or an initial ("J. K. Rowling") never ends a sentence.
std::vector<Sentence> segment_sentences(std::string_view text);
std::vector<Sentence> segment_sentences(std::string_view text,
                                        const WordSet& abbreviations);

/// Sentences joined with single spaces.
std::string join_sentences(std::span<const Sentence> sentences);

/// Vowel-group heuristic; never less than one.
int count_syllables(std::string_view word);

/// Clipped multiset overlap |a ∩ b| / max(|a|, |b|).
double token_overlap(std::span<const std::string> a,
                     std::span<const std::string> b);
double sentence_similarity(const Sentence& a, const Sentence& b);

}  // namespace iprg

#endif  // IPRG_TEXT_HPP_
