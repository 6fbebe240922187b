#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <random>

#include "iprg/resources.hpp"
#include "iprg/text.hpp"
#include "support/oracles.hpp"

using namespace iprg;

namespace {

std::string non_space(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (!std::isspace(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

// Random prose with abbreviations, quotes, numbers and lone initials mixed in.
std::string random_prose(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {
      "Run fast.", "Dr. Smith ran.", "He won!", "Why?", "e.g. hills", "J. K. wrote.",
      "\"Stop.\" She left.", "It costs 3.50 today.", "(See No. 2.)", "rest well",
      "Mr. Lee and Mrs. Park", "etc. and more.", "Wait... Then go.", "  ", "No. 5 wins."};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 8);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += pieces[pick(rng)] + " ";
  return s;
}

}  // namespace

TEST_SUITE("tokenize") {
  TEST_CASE("empty input gives no tokens") { CHECK(tokenize("").empty()); }

  TEST_CASE("apostrophes stay inside words, hyphens split") {
    CHECK(tokenize("Don't stop-go!") == TokenList{"don't", "stop", "go"});
  }

  TEST_CASE("digits and punctuation") {
    CHECK(tokenize("Rouge-L F1: 31.25") == TokenList{"rouge", "l", "f1", "31", "25"});
  }

  TEST_CASE("edge apostrophes and non-ascii bytes are separators") {
    CHECK(tokenize("'tis rock'n'roll'") == TokenList{"tis", "rock'n'roll"});
    CHECK(tokenize("caf\xc3\xa9 ok") == TokenList{"caf", "ok"});
  }

  TEST_CASE("token spans cover the source bytes") {
    const std::string text = "  Hello, world's end ";
    const auto spans = token_spans(text);
    REQUIRE(spans.size() == 3);
    CHECK(text.substr(spans[1].begin, spans[1].end - spans[1].begin) == "world's");
    CHECK(count_tokens(text) == 3);
  }

  TEST_CASE("property: idempotent on joined output, tokens well formed") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
      const std::string text = random_prose(rng) + gen::join(gen::words(rng, trial % 13));
      const TokenList once = tokenize(text);
      CHECK(tokenize(join(once, " ")) == once);
      CHECK(tokenize(text) == once);
      for (const auto& t : once) {
        CHECK(!t.empty());
        CHECK(std::none_of(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }));
        CHECK(std::none_of(t.begin(), t.end(), [](unsigned char c) { return std::isupper(c); }));
      }
    }
  }
}

TEST_SUITE("segment_sentences") {
  TEST_CASE("empty input") { CHECK(segment_sentences("").empty()); }

  TEST_CASE("two plain sentences") {
    const auto s = segment_sentences("Run fast. Rest well.");
    REQUIRE(s.size() == 2);
    CHECK(s[0].text == "Run fast.");
    CHECK(s[1].text == "Rest well.");
    CHECK(s[1].index == 1);
  }

  TEST_CASE("abbreviation does not end a sentence") {
    const auto s = segment_sentences("Dr. Smith ran. He won.");
    REQUIRE(s.size() == 2);
    CHECK(s[0].text == "Dr. Smith ran.");
    CHECK(s[1].text == "He won.");
  }

  TEST_CASE("lone initials and lowercase continuations") {
    CHECK(segment_sentences("J. K. Rowling wrote. She won.").size() == 2);
    CHECK(segment_sentences("It costs 3.50 today. ok then.").size() == 1);
    CHECK(segment_sentences("Use e.g. hills. Then rest.").size() == 2);
    CHECK(segment_sentences("Ask John F. Kennedy. He knew.").size() == 2);
  }

  TEST_CASE("a trailing letter after a lowercase word still ends a sentence") {
    auto s = segment_sentences("A b c. D e f.");
    REQUIRE(s.size() == 2);
    CHECK(s[0].text == "A b c.");
    s = segment_sentences("To improve X do Y. Also Z.");
    REQUIRE(s.size() == 2);
    CHECK(s[1].text == "Also Z.");
  }

  TEST_CASE("closing quotes and brackets stay with their sentence") {
    const auto s = segment_sentences("He said \"stop.\" Then (really!) \"Go.\" Done.");
    REQUIRE(s.size() == 4);
    CHECK(s[0].text == "He said \"stop.\"");
    CHECK(s[1].text == "Then (really!)");
    CHECK(s[2].text == "\"Go.\"");
  }

  TEST_CASE("unterminated text is one sentence") {
    const auto s = segment_sentences("  run fast and rest well  ");
    REQUIRE(s.size() == 1);
    CHECK(s[0].text == "run fast and rest well");
  }

  TEST_CASE("custom abbreviation list") {
    const WordSet abbrevs = WordSet::from_lines("OS\nv\n");
    CHECK(segment_sentences("Update the OS. Then reboot.", abbrevs).size() == 1);
    CHECK(segment_sentences("Update the OS. Then reboot.").size() == 2);
  }

  TEST_CASE("abbreviation file falls back to the default list when absent") {
    const auto missing = std::filesystem::temp_directory_path() / "iprg-no-such-abbrevs.txt";
    const WordSet loaded = WordSet::from_file_or(missing, default_abbreviations());
    CHECK(loaded.contains("dr"));
    CHECK(loaded.contains("E.G"));

    const auto path = std::filesystem::temp_directory_path() / "iprg-abbrevs-test.txt";
    std::ofstream(path) << "# comment\nOS\n\n";
    const WordSet custom = WordSet::from_file_or(path, default_abbreviations());
    CHECK(custom.size() == 1);
    CHECK(custom.contains("os"));
    std::filesystem::remove(path);
  }

  TEST_CASE("property: non-empty trimmed sentences that rebuild the source") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
      const std::string text = random_prose(rng);
      const auto sentences = segment_sentences(text);
      std::string rebuilt;
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        const auto& s = sentences[i];
        CHECK(!s.text.empty());
        CHECK(s.text == trim(s.text));
        CHECK(s.index == i);
        rebuilt += s.text + " ";
      }
      CHECK(non_space(rebuilt) == non_space(text));
      const auto marks = std::count_if(text.begin(), text.end(),
                                       [](char c) { return c == '.' || c == '!' || c == '?'; });
      CHECK(static_cast<std::size_t>(marks) + 1 >= sentences.size());
    }
  }
}

TEST_SUITE("count_syllables") {
  TEST_CASE("hand-traced words") {
    CHECK(count_syllables("cat") == 1);
    CHECK(count_syllables("banana") == 3);
    CHECK(count_syllables("table") == 2);
    CHECK(count_syllables("make") == 1);
    CHECK(count_syllables("the") == 1);
    CHECK(count_syllables("rhythm") == 1);
    CHECK(count_syllables("cardiovascular") == 5);
    CHECK(count_syllables("Apple") == 2);
  }

  TEST_CASE("property: at least one for every alphabetic word") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> len(1, 12), letter(0, 25);
    for (int trial = 0; trial < 2000; ++trial) {
      std::string w;
      for (int i = len(rng); i > 0; --i) w.push_back(static_cast<char>('a' + letter(rng)));
      CHECK(count_syllables(w) >= 1);
    }
  }
}

TEST_SUITE("sentence_similarity") {
  TEST_CASE("identity, disjoint, partial") {
    const Sentence a{"Run fast now.", 0};
    CHECK(sentence_similarity(a, a) == 1.0);
    CHECK(sentence_similarity(a, Sentence{"Sleep well.", 0}) == 0.0);
    CHECK(sentence_similarity(Sentence{"run fast now", 0}, Sentence{"run fast later today", 1}) ==
          doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("repeated tokens are clipped") {
    CHECK(sentence_similarity(Sentence{"go go go", 0}, Sentence{"go", 0}) ==
          doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("property: symmetric, bounded, reflexive") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> len(0, 15);
    for (int trial = 0; trial < 1000; ++trial) {
      const Sentence a{gen::join(gen::words(rng, len(rng), 12)), 0};
      const Sentence b{gen::join(gen::words(rng, len(rng), 12)), 0};
      const double ab = sentence_similarity(a, b);
      CHECK(ab == sentence_similarity(b, a));
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
      CHECK(sentence_similarity(a, a) == 1.0);
    }
  }
}
