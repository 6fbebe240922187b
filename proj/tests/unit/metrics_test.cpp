#include <doctest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "iprg/errors.hpp"
#include "iprg/metrics.hpp"
#include "iprg/resources.hpp"
#include "support/oracles.hpp"

using namespace iprg;

namespace {

void check_same(const RougeScore& got, const oracle::Rouge& want) {
  CHECK(std::abs(got.recall - want.recall) <= 1e-12);
  CHECK(std::abs(got.precision - want.precision) <= 1e-12);
  CHECK(std::abs(got.f1 - want.f1) <= 1e-12);
}

struct ReadabilityFixture {
  const char* text;
  oracle::ReadabilityCounts counts;
  oracle::Readability expected;
};

// Hand-counted words, sentences, syllables, complex words, letters, digits
// and words outside the familiar list.
const ReadabilityFixture kReadability[] = {
    {"The cat sat on the mat. It was happy.",
     {9, 2, 10, 0, 27, 0, 0},
     {-0.7239, 1.8, -5.05, -4.7378, 0.2232}},
    {"Dr. Smith ran 5 miles today. He was very tired!",
     {10, 2, 14, 0, 34, 1, 4},
     {2.88, 2.0, -2.445, -1.728, 10.2005}},
    {"Interval training improves cardiovascular endurance. Beginners should alternate "
     "sprinting and walking. Stretch afterwards.",
     {13, 3, 32, 7, 107, 0, 9},
     {15.1462, 23.2718, 19.5036, 25.7662, 14.7830}},
    {"run fast and rest well", {5, 1, 5, 0, 18, 0, 0}, {-1.84, 2.0, -1.974, -0.552, 0.248}},
    {"Don't skip the warm-up. Spend 10 minutes jogging slowly. Then increase your speed "
     "gradually? Yes.",
     {16, 4, 23, 2, 75, 2, 5},
     {2.9325, 6.6, 3.2369, 4.3625, 8.7693}},
};

QAPair pair(std::string id, std::string answer, std::optional<std::vector<std::string>> aspects = {}) {
  return QAPair{std::move(id), "Q?", std::move(answer), std::move(aspects)};
}

}  // namespace

TEST_SUITE("rouge") {
  TEST_CASE("unigram example") {
    const auto r = rouge_n("a b c", "a b d", 1);
    CHECK(r.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("different lengths") {
    const auto r1 = rouge_n("the cat sat", "the cat ran fast", 1);
    CHECK(r1.recall == doctest::Approx(0.5));
    CHECK(r1.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r1.f1 == doctest::Approx(4.0 / 7.0));
    const auto r2 = rouge_n("the cat sat", "the cat ran fast", 2);
    CHECK(r2.recall == doctest::Approx(1.0 / 3.0));
    CHECK(r2.precision == doctest::Approx(0.5));
    const auto l = rouge_l("the cat sat", "the cat ran fast");
    CHECK(l.recall == doctest::Approx(0.5));
  }

  TEST_CASE("case and punctuation are ignored, counts are clipped") {
    CHECK(rouge_n("The CAT, the cat!", "the cat", 1).recall == 1.0);
    CHECK(rouge_n("the the the", "the cat", 1).precision == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("empty sides score zero") {
    for (auto r : {rouge_n("", "a b", 1), rouge_n("a b", "", 1), rouge_n("a", "a", 2),
                   rouge_l("", "a"), rouge_l("a", "")}) {
      CHECK(r.recall == 0.0);
      CHECK(r.precision == 0.0);
      CHECK(r.f1 == 0.0);
    }
  }

  TEST_CASE("property: agrees with the reference implementation") {
    std::mt19937 rng(101);
    std::uniform_int_distribution<std::size_t> len(0, 40), vocab(2, 30);
    for (int trial = 0; trial < 400; ++trial) {
      const std::size_t v = vocab(rng);
      const auto c = gen::words(rng, len(rng), v);
      const auto r = gen::words(rng, len(rng), v);
      check_same(rouge_n(c, r, 1), oracle::rouge_n(c, r, 1));
      check_same(rouge_n(c, r, 2), oracle::rouge_n(c, r, 2));
      const auto l = rouge_l(c, r);
      check_same(l, oracle::rouge_l(c, r));
      const auto swapped = rouge_l(r, c);
      CHECK(l.recall == doctest::Approx(swapped.precision));
      CHECK(l.f1 == doctest::Approx(swapped.f1));
      for (double x : {l.recall, l.precision, l.f1}) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
      }
      if (!c.empty()) CHECK(rouge_l(c, c).f1 == 1.0);
    }
  }
}

TEST_SUITE("readability") {
  TEST_CASE("hand-counted fixtures") {
    for (const auto& f : kReadability) {
      CAPTURE(f.text);
      const auto c = readability_counts(f.text, dale_chall_words());
      CHECK(c.words == f.counts.words);
      CHECK(c.sentences == f.counts.sentences);
      CHECK(c.syllables == f.counts.syllables);
      CHECK(c.complex_words == f.counts.complex_words);
      CHECK(c.letters == f.counts.letters);
      CHECK(c.digits == f.counts.digits);
      CHECK(c.unfamiliar_words == f.counts.unfamiliar);

      const auto want = oracle::readability(f.counts);
      const auto got = readability(f.text);
      CHECK(std::abs(got.fkgl - want.fkgl) <= 1e-9);
      CHECK(std::abs(got.gfi - want.gfi) <= 1e-9);
      CHECK(std::abs(got.ari - want.ari) <= 1e-9);
      CHECK(std::abs(got.cli - want.cli) <= 1e-9);
      CHECK(std::abs(got.dcr - want.dcr) <= 1e-9);
      CHECK(std::abs(got.fkgl - f.expected.fkgl) <= 0.01);
      CHECK(std::abs(got.gfi - f.expected.gfi) <= 0.01);
      CHECK(std::abs(got.ari - f.expected.ari) <= 0.01);
      CHECK(std::abs(got.cli - f.expected.cli) <= 0.01);
      CHECK(std::abs(got.dcr - f.expected.dcr) <= 0.01);
    }
  }

  TEST_CASE("long words push grade levels up") {
    const auto base = readability("The cat sat on the mat. It was happy.");
    const auto more = readability("The cardiovascular cat sat on the mat. It was happy.");
    CHECK(more.fkgl > base.fkgl);
    CHECK(more.gfi > base.gfi);
  }

  TEST_CASE("needs words and sentences") {
    CHECK_THROWS_AS(readability(""), PreconditionError);
    CHECK_THROWS_AS(readability("... !!"), PreconditionError);
  }
}

TEST_SUITE("nli and aspects") {
  TEST_CASE("nli passes reference as premise") {
    ScriptedNli nli({{{0.7, 0.2, 0.1}, false}});
    const auto s = nli_eval(nli, "ref", "gen");
    CHECK(s.entail == 0.7);
    ScriptedNli bad({{{0.5, 0.3, 0.1}, false}});
    CHECK_THROWS_AS(nli_eval(bad, "ref", "gen"), ProtocolError);
  }

  TEST_CASE("aspect coverage") {
    const std::vector<std::string> aspects{"interval training", "rest days", "hydration"};
    CHECK(aspect_coverage("Try interval training, take rest days, and mind hydration.", aspects) == 1.0);
    CHECK(aspect_coverage("Interval Training helps.", aspects) == doctest::Approx(1.0 / 3.0));
    CHECK(aspect_coverage("Rest when tired.", aspects) == 0.0);
    CHECK(aspect_coverage("", aspects) == 0.0);
    CHECK(aspect_coverage("training interval", aspects) == 0.0);
    CHECK_THROWS_AS(aspect_coverage("x", std::vector<std::string>{}), PreconditionError);
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("means match hand computation") {
    const std::vector<QAPair> data{pair("a", "run fast daily"), pair("b", "rest well at night")};
    const std::vector<Prediction> preds{{"a", "run fast"}, {"b", "sleep well at night"}};
    EvalOptions o;
    o.jobs = 2;
    const auto report = evaluate(preds, data, o);
    REQUIRE(report.items.size() == 2);
    const auto a = oracle::rouge_n(tokenize("run fast"), tokenize("run fast daily"), 1);
    const auto b = oracle::rouge_n(tokenize("sleep well at night"), tokenize("rest well at night"), 1);
    CHECK(*report.summary.mean("r1_recall") == doctest::Approx(50.0 * (a.recall + b.recall)));
    CHECK(*report.summary.mean("r1_f1") == doctest::Approx(50.0 * (a.f1 + b.f1)));
    CHECK_FALSE(report.summary.mean("entail"));
    CHECK_FALSE(report.summary.mean("fkgl"));
    CHECK(report.summary.count == 2);
  }

  TEST_CASE("nli aggregate") {
    const std::vector<QAPair> data{pair("a", "x y."), pair("b", "z w.")};
    const std::vector<Prediction> preds{{"a", "x."}, {"b", "z."}};
    EvalOptions o;
    o.nli = true;
    ScriptedNli nli({{{0.6, 0.3, 0.1}, false}, {{0.8, 0.1, 0.1}, false}});
    const auto r = evaluate(preds, data, o, &nli);
    CHECK(*r.summary.mean("entail") == doctest::Approx(70.0));
    CHECK(*r.summary.mean("contradict") == doctest::Approx(10.0));
    CHECK(r.summary.nli_missing == 0);
  }

  TEST_CASE("nli transport failure excludes the item") {
    const std::vector<QAPair> data{pair("a", "x y."), pair("b", "z w.")};
    const std::vector<Prediction> preds{{"a", "x."}, {"b", "z."}};
    EvalOptions o;
    o.nli = true;
    o.rouge = false;
    ScriptedNli nli({{{0.6, 0.3, 0.1}, false}, {{}, true}});
    const auto r = evaluate(preds, data, o, &nli);
    CHECK(r.summary.nli_missing == 1);
    CHECK(*r.summary.mean("entail") == doctest::Approx(60.0));
    CHECK(r.items[1].nli == std::nullopt);
    CHECK_FALSE(r.summary.mean("r1_f1"));
  }

  TEST_CASE("preconditions") {
    const std::vector<QAPair> data{pair("a", "x.")};
    const std::vector<Prediction> preds{{"zz", "x."}};
    CHECK_THROWS_AS(evaluate(preds, data, EvalOptions{}), PreconditionError);
    EvalOptions o;
    o.nli = true;
    const std::vector<Prediction> ok{{"a", "x."}};
    CHECK_THROWS_AS(evaluate(ok, data, o), PreconditionError);
  }

  TEST_CASE("readability and aspects columns") {
    const std::vector<QAPair> data{pair("a", "x.", std::vector<std::string>{"hill", "rest"}),
                                   pair("b", "y.")};
    const std::vector<Prediction> preds{{"a", "Run up a hill."}, {"b", ""}};
    EvalOptions o;
    o.readability = true;
    o.aspects = true;
    const auto r = evaluate(preds, data, o);
    CHECK(r.summary.readability_missing == 1);
    CHECK(*r.summary.mean("aspect_coverage") == doctest::Approx(0.5));
    CHECK(*r.summary.mean("fkgl") == doctest::Approx(readability("Run up a hill.").fkgl));
  }

  TEST_CASE("report lines") {
    const std::vector<QAPair> data{pair("a", "run fast")};
    const std::vector<Prediction> preds{{"a", "run fast"}};
    const auto r = evaluate(preds, data, EvalOptions{});
    std::ostringstream out;
    Json extra;
    extra["predictions"] = "p.jsonl";
    write_report(out, r, extra);
    std::istringstream in(out.str());
    std::string line;
    std::vector<Json> lines;
    while (std::getline(in, line)) lines.push_back(Json::parse(line));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0]["type"] == "config");
    CHECK(lines[0]["predictions"] == "p.jsonl");
    CHECK(lines[0]["metrics"]["dale_chall_list"].is_string());
    CHECK(lines[1]["type"] == "item");
    CHECK(lines[1]["id"] == "a");
    CHECK(lines[1]["r1_f1"] == 1.0);
    CHECK(lines[1]["entail"].is_null());
    CHECK(lines[2]["type"] == "summary");
    CHECK(lines[2]["display"]["r1_f1"] == "100.00");
    CHECK(lines[2]["display"]["entail"].is_null());
  }
}
