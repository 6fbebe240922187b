#include <doctest.h>

#include <random>

#include "iprg/errors.hpp"
#include "iprg/generation.hpp"
#include "support/oracles.hpp"

using namespace iprg;

namespace {

RetrievedContext ctx(const std::string& id, const std::string& text) {
  return RetrievedContext{Passage{id, id, text, 0}, 1.0, 1};
}

std::string tokens(const std::string& stem, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

}  // namespace

TEST_SUITE("generation prompt") {
  TEST_CASE("all segments") {
    const KeywordPlan plan{{"interval training", "pace"}, 1};
    const std::vector<RetrievedContext> c{ctx("a", "Run hills."), ctx("b", "Rest well.")};
    CHECK(compose_generation_prompt("How fast?", &plan, c, "Warm up first.", 1024) ==
          "question: How fast? [SEP] answer so far: Warm up first. [SEP] keywords: interval "
          "training, pace [SEP] context: Run hills. [CTX] Rest well.");
  }

  TEST_CASE("no plan drops the keyword segment") {
    const std::vector<RetrievedContext> c{ctx("a", "Run hills.")};
    const auto p = compose_generation_prompt("How fast?", nullptr, c, "", 1024);
    CHECK(p == "question: How fast? [SEP] answer so far:  [SEP] context: Run hills.");
    CHECK(p.find("keywords:") == std::string::npos);
  }

  TEST_CASE("contexts are cut from the tail") {
    const std::vector<RetrievedContext> c{ctx("a", tokens("a", 100)), ctx("b", tokens("b", 100))};
    const std::string q = tokens("q", 10);
    const auto p = compose_generation_prompt(q, nullptr, c, "", 160);
    const auto at = p.find("context: ");
    const std::string body = p.substr(at + 9);
    const auto sep = body.find(" [CTX] ");
    REQUIRE(sep != std::string::npos);
    CHECK(body.substr(0, sep) == tokens("a", 100));
    CHECK(body.substr(sep + 7) == tokens("b", 50));
  }

  TEST_CASE("contexts beyond the budget are dropped") {
    const std::vector<RetrievedContext> c{ctx("a", tokens("a", 100)), ctx("b", tokens("b", 100))};
    const auto p = compose_generation_prompt("q", nullptr, c, "", 101);
    CHECK(p.find("[CTX]") == std::string::npos);
    CHECK(p.find("b0") == std::string::npos);
  }

  TEST_CASE("budget smaller than the fixed content") {
    const KeywordPlan plan{{"a", "b"}, 1};
    CHECK_THROWS_WITH_AS(compose_generation_prompt("one two", &plan, {}, "three", 4),
                         "prompt budget exhausted", PreconditionError);
    CHECK_NOTHROW(compose_generation_prompt("one two", &plan, {}, "three", 5));
  }

  TEST_CASE("property: content tokens never exceed the budget") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> len(0, 60), budget(20, 200);
    for (int trial = 0; trial < 300; ++trial) {
      const std::string q = gen::sentence(rng, 1, 8);
      const std::string pre = gen::join(gen::words(rng, len(rng) / 4));
      std::vector<RetrievedContext> c;
      for (int i = 0; i < 4; ++i) c.push_back(ctx("c" + std::to_string(i), gen::sentence(rng, 1, 60)));
      const std::size_t b = budget(rng);
      const std::size_t fixed = count_tokens(q) + count_tokens(pre);
      if (fixed > b) continue;
      const auto p = compose_generation_prompt(q, nullptr, c, pre, b);
      const std::string body = p.substr(p.find("context: ") + 9);
      std::size_t ctx_tokens = 0;
      std::size_t start = 0;
      for (;;) {
        const auto next = body.find(" [CTX] ", start);
        ctx_tokens += count_tokens(body.substr(start, next - start));
        if (next == std::string::npos) break;
        start = next + 7;
      }
      CHECK(fixed + ctx_tokens <= b);
    }
  }
}

TEST_SUITE("first_new_sentence") {
  TEST_CASE("examples") {
    auto s = first_new_sentence("A b c. D e f.", "", 0.8);
    REQUIRE(s);
    CHECK(s->text == "A b c.");
    CHECK_FALSE(first_new_sentence("A b c.", "A b c.", 0.8));
    s = first_new_sentence("To improve X do Y. Also Z.", "To improve X do Y.", 0.8);
    REQUIRE(s);
    CHECK(s->text == "Also Z.");
    CHECK_FALSE(first_new_sentence("", "A b.", 0.8));
  }

  TEST_CASE("threshold boundary") {
    // Overlap 4/5 = 0.8 counts as a duplicate at 0.8 but not at 0.81.
    CHECK_FALSE(first_new_sentence("One two three four five.", "One two three four six.", 0.8));
    CHECK(first_new_sentence("One two three four five.", "One two three four six.", 0.81));
  }

  TEST_CASE("threshold must be in (0, 1]") {
    CHECK_THROWS_AS(first_new_sentence("A.", "", 0.0), PreconditionError);
    CHECK_THROWS_AS(first_new_sentence("A.", "", 1.5), PreconditionError);
    CHECK_NOTHROW(first_new_sentence("A.", "", 1.0));
  }

  TEST_CASE("property: result is a verbatim paragraph sentence below the threshold") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> count(1, 4);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::string> pre_s, par_s;
      for (int i = count(rng); i > 0; --i) pre_s.push_back(gen::sentence(rng, 2, 6));
      for (int i = count(rng); i > 0; --i) {
        par_s.push_back(rng() % 3 == 0 ? pre_s[rng() % pre_s.size()] : gen::sentence(rng, 2, 6));
      }
      const std::string pre = gen::join(pre_s), par = gen::join(par_s);
      const auto pre_sentences = segment_sentences(pre);
      const auto got = first_new_sentence(par, pre_sentences, 0.8);
      const auto par_sentences = segment_sentences(par);
      std::optional<std::string> expected;
      for (const auto& c : par_sentences) {
        bool fresh = true;
        for (const auto& old : pre_sentences) {
          if (token_overlap(tokenize(c.text), tokenize(old.text)) >= 0.8) fresh = false;
        }
        if (fresh) {
          expected = c.text;
          break;
        }
      }
      REQUIRE(got.has_value() == expected.has_value());
      if (got) {
        CHECK(got->text == *expected);
        CHECK(par.find(got->text) != std::string::npos);
      }
    }
  }
}
