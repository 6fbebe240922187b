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

#include "iprg/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "iprg/errors.hpp"
#include "iprg/resources.hpp"

namespace iprg {

namespace {

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

bool is_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; }

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of a closing quote or bracket starting at `pos`, or 0.
std::size_t closer_length(std::string_view text, std::size_t pos) {
  const char c = text[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  // U+201D right double quote, U+2019 right single quote.
  if (text.substr(pos, 3) == "\xE2\x80\x9D" ||
      text.substr(pos, 3) == "\xE2\x80\x99")
    return 3;
  return 0;
}

std::size_t opener_length(std::string_view text, std::size_t pos) {
  const char c = text[pos];
  if (c == '"' || c == '\'' || c == '(' || c == '[') return 1;
  // U+201C left double quote, U+2018 left single quote.
  if (text.substr(pos, 3) == "\xE2\x80\x9C" ||
      text.substr(pos, 3) == "\xE2\x80\x98")
    return 3;
  return 0;
}

// Word immediately before the period at `period`, stripped of leading
// punctuation, e.g. "(e.g" for "(e.g." yields "e.g".
std::string_view word_before(std::string_view text, std::size_t period) {
  std::size_t begin = period;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  while (begin < period && !is_alnum(text[begin])) ++begin;
  return text.substr(begin, period - begin);
}

// A lone capital is an initial when it opens the text or follows a
// capitalized word or another initial ("J. K. Rowling", "John F. Kennedy").
bool is_initial(std::string_view text, std::size_t period) {
  const std::string_view word = word_before(text, period);
  if (word.size() != 1 || !std::isupper(static_cast<unsigned char>(word[0]))) return false;
  std::size_t pos = static_cast<std::size_t>(word.data() - text.data());
  while (pos > 0 && !is_space(text[pos - 1])) --pos;
  while (pos > 0 && is_space(text[pos - 1])) --pos;
  if (pos == 0) return true;
  const std::string_view prev = word_before(text, pos);
  if (prev.empty()) return true;
  return std::isupper(static_cast<unsigned char>(prev[0])) != 0;
}

bool suppresses_break(std::string_view text, std::size_t period,
                      const WordSet& abbreviations) {
  if (is_initial(text, period)) return true;
  const std::string_view word = word_before(text, period);
  if (word.size() == 1) return false;
  return !word.empty() && abbreviations.contains(word);
}

}  // namespace

WordSet::WordSet(std::unordered_set<std::string> words) {
  for (const auto& w : words) words_.insert(to_lower(w));
}

WordSet WordSet::from_lines(std::string_view text) {
  std::unordered_set<std::string> words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line = trim(text.substr(pos, eol - pos));
    if (!line.empty() && line[0] != '#') words.insert(to_lower(line));
    pos = eol + 1;
  }
  WordSet set;
  set.words_ = std::move(words);
  return set;
}

WordSet WordSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open word list");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_lines(buffer.str());
}

WordSet WordSet::from_file_or(const std::filesystem::path& path,
                              const WordSet& fallback) {
  if (path.empty() || !std::filesystem::exists(path)) return fallback;
  return from_file(path);
}

bool WordSet::contains(std::string_view word) const {
  for (char c : word) {
    if (c >= 'A' && c <= 'Z') return words_.count(to_lower(word)) > 0;
  }
  return words_.count(std::string(word)) > 0;
}

std::vector<std::string> WordSet::sorted() const {
  std::vector<std::string> out(words_.begin(), words_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TokenSpan> token_spans(std::string_view text) {
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_alnum(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n) {
      if (is_alnum(text[j])) {
        ++j;
      } else if (text[j] == '\'' && j + 1 < n && is_alnum(text[j + 1])) {
        j += 2;
      } else {
        break;
      }
    }
    spans.push_back({i, j});
    i = j;
  }
  return spans;
}

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  for (const auto& s : token_spans(text)) {
    tokens.push_back(to_lower(text.substr(s.begin, s.end - s.begin)));
  }
  return tokens;
}

std::size_t count_tokens(std::string_view text) {
  return token_spans(text).size();
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = lower(c);
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::string normalize_space(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<Sentence> segment_sentences(std::string_view text) {
  return segment_sentences(text, default_abbreviations());
}

std::vector<Sentence> segment_sentences(std::string_view text,
                                        const WordSet& abbreviations) {
  std::vector<Sentence> sentences;
  const std::size_t n = text.size();
  std::size_t start = 0;

  auto emit = [&](std::size_t end) {
    std::string s = trim(text.substr(start, end - start));
    if (!s.empty()) sentences.push_back({std::move(s), sentences.size()});
    start = end;
  };

  std::size_t i = 0;
  while (i < n) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t run_end = i + 1;
    while (run_end < n && is_terminal(text[run_end])) ++run_end;
    std::size_t end = run_end;
    while (end < n) {
      const std::size_t len = closer_length(text, end);
      if (len == 0) break;
      end += len;
    }

    bool boundary = false;
    if (end == n) {
      boundary = true;
    } else if (is_space(text[end])) {
      std::size_t next = end;
      while (next < n && is_space(text[next])) ++next;
      while (next < n) {
        const std::size_t len = opener_length(text, next);
        if (len == 0) break;
        next += len;
      }
      boundary = next == n || is_upper(text[next]);
    }
    if (boundary && run_end == i + 1 && text[i] == '.' &&
        suppresses_break(text, i, abbreviations)) {
      boundary = false;
    }
    if (boundary) emit(end);
    i = end;
  }
  emit(n);
  return sentences;
}

std::string join_sentences(std::span<const Sentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out.push_back(' ');
    out.append(s.text);
  }
  return out;
}

int count_syllables(std::string_view word) {
  const std::string w = to_lower(word);
  auto vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' ||
           c == 'y';
  };
  auto consonant = [&](char c) { return is_alpha(c) && !vowel(c); };

  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = w.size();
  // A final 'e' that forms its own vowel group is silent, except in a
  // consonant + "le" ending ("table").
  if (n >= 2 && w[n - 1] == 'e' && consonant(w[n - 2])) {
    const bool consonant_le = w[n - 2] == 'l' && n >= 3 && consonant(w[n - 3]);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

double token_overlap(std::span<const std::string> a,
                     std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::vector<std::string_view> sa(a.begin(), a.end());
  std::vector<std::string_view> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::size_t shared = 0, i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i] == sb[j]) {
      ++shared;
      ++i;
      ++j;
    } else if (sa[i] < sb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return double(shared) / double(std::max(sa.size(), sb.size()));
}

double sentence_similarity(const Sentence& a, const Sentence& b) {
  const TokenList ta = tokenize(a.text);
  const TokenList tb = tokenize(b.text);
  return token_overlap(ta, tb);
}

}  // namespace iprg
