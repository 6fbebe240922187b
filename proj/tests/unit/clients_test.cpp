#include <doctest.h>

#include <future>
#include <set>

#include "iprg/clients.hpp"
#include "iprg/errors.hpp"
#include "iprg/retriever.hpp"
#include "support/fake_sidecar.hpp"

using namespace iprg;
using namespace std::chrono_literals;

namespace {

constexpr RetryPolicy kFastRetry{3, std::chrono::milliseconds(1)};

GenerationRequest request(std::string prompt, std::size_t max_new = 128) {
  GenerationRequest r;
  r.prompt = std::move(prompt);
  r.max_new_tokens = max_new;
  return r;
}

std::string dead_url() {
  httplib::Server s;
  const int port = s.bind_to_any_port("127.0.0.1");
  return "http://127.0.0.1:" + std::to_string(port);
}

}  // namespace

TEST_SUITE("scripted generator") {
  TEST_CASE("replays in order and records requests") {
    ScriptedGenerator g(std::vector<std::string>{"P1.", "P2."});
    CHECK(generate_paragraph(g, request("q1")).text == "P1.");
    CHECK(generate_paragraph(g, request("q2")).text == "P2.");
    const auto seen = g.requests();
    REQUIRE(seen.size() == 2);
    CHECK(seen[0].prompt == "q1");
    CHECK(seen[1].prompt == "q2");
    CHECK_THROWS_AS(g.generate(request("q3")), TransportError);
  }

  TEST_CASE("empty text passes through") {
    ScriptedGenerator g(std::vector<std::string>{""});
    const auto r = generate_paragraph(g, request("q"));
    CHECK(r.text.empty());
    CHECK(r.finished);
  }

  TEST_CASE("max_new_tokens truncates to a token boundary") {
    ScriptedGenerator g(std::vector<std::string>{"One two, three four. Five."});
    const auto r = generate_paragraph(g, request("q", 3));
    CHECK(r.text == "One two, three");
    CHECK_FALSE(r.finished);
  }

  TEST_CASE("exhaustion modes") {
    ScriptedGenerator empty(std::vector<std::string>{"a"}, ScriptedGenerator::WhenExhausted::kEmpty);
    empty.generate(request("q"));
    CHECK(empty.generate(request("q")).text.empty());
    ScriptedGenerator repeat(std::vector<std::string>{"a", "b"}, ScriptedGenerator::WhenExhausted::kRepeatLast);
    repeat.generate(request("q"));
    repeat.generate(request("q"));
    CHECK(repeat.generate(request("q")).text == "b");
    CHECK(repeat.call_count() == 3);
  }

  TEST_CASE("transport failures are retried") {
    ScriptedGenerator g(std::vector<ScriptedGenerator::Step>{
        ScriptedGenerator::failure(), ScriptedGenerator::failure(), {"ok.", false}});
    CHECK(generate_paragraph(g, request("q"), kFastRetry).text == "ok.");
    CHECK(g.call_count() == 3);

    ScriptedGenerator always(std::vector<ScriptedGenerator::Step>{
        ScriptedGenerator::failure(), ScriptedGenerator::failure(), ScriptedGenerator::failure(),
        {"late.", false}});
    CHECK_THROWS_AS(generate_paragraph(always, request("q"), kFastRetry), TransportError);
    CHECK(always.call_count() == 3);
  }

  TEST_CASE("request preconditions") {
    ScriptedGenerator g(std::vector<std::string>{"a"});
    CHECK_THROWS_AS(generate_paragraph(g, request("")), PreconditionError);
    CHECK_THROWS_AS(generate_paragraph(g, request("q", 0)), PreconditionError);
    CHECK(g.call_count() == 0);
  }

  TEST_CASE("concurrent callers each get one step") {
    std::vector<std::string> script;
    for (int i = 0; i < 64; ++i) script.push_back("S" + std::to_string(i) + ".");
    ScriptedGenerator g(script);
    std::vector<std::future<std::string>> futures;
    for (int i = 0; i < 64; ++i) {
      futures.push_back(std::async(std::launch::async, [&g] { return g.generate(request("q")).text; }));
    }
    std::set<std::string> got;
    for (auto& f : futures) got.insert(f.get());
    CHECK(got.size() == 64);
  }
}

TEST_SUITE("http generator") {
  TEST_CASE("round trip and truncation") {
    FakeSidecar side;
    HttpGenerator g{HttpEndpoint(side.url())};
    auto r = generate_paragraph(g, request("hello"));
    CHECK(r.text == side.generate_text);
    CHECK(r.finished);
    r = generate_paragraph(g, request("hello again", 2));
    CHECK(r.text == "Generated sentence");
    CHECK_FALSE(r.finished);
    const auto prompts = side.prompts();
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1] == "hello again");
  }

  TEST_CASE("5xx is retried then succeeds") {
    FakeSidecar side;
    side.fail_next(FakeSidecar::Fault::kServerError, 2);
    HttpGenerator g{HttpEndpoint(side.url())};
    CHECK(generate_paragraph(g, request("q"), kFastRetry).text == side.generate_text);
    CHECK(side.requests() == 3);
  }

  TEST_CASE("persistent 5xx exhausts retries") {
    FakeSidecar side;
    side.fail_next(FakeSidecar::Fault::kServerError, 10);
    HttpGenerator g{HttpEndpoint(side.url())};
    CHECK_THROWS_AS(generate_paragraph(g, request("q"), kFastRetry), TransportError);
    CHECK(side.requests() == 3);
  }

  TEST_CASE("protocol errors are not retried") {
    FakeSidecar side;
    HttpGenerator g{HttpEndpoint(side.url())};
    for (auto fault : {FakeSidecar::Fault::kClientError, FakeSidecar::Fault::kMalformed,
                       FakeSidecar::Fault::kWrongShape}) {
      const int before = side.requests();
      side.fail_next(fault, 1);
      CHECK_THROWS_AS(generate_paragraph(g, request("q"), kFastRetry), ProtocolError);
      CHECK(side.requests() == before + 1);
    }
  }

  TEST_CASE("4xx carries the server message") {
    FakeSidecar side;
    side.fail_next(FakeSidecar::Fault::kClientError, 1);
    HttpGenerator g{HttpEndpoint(side.url())};
    CHECK_THROWS_WITH_AS(g.generate(request("q")), doctest::Contains("HTTP 422: bad request"),
                         ProtocolError);
  }

  TEST_CASE("refused connection is a transport error") {
    HttpGenerator g{HttpEndpoint(dead_url(), 500ms)};
    CHECK_THROWS_AS(generate_paragraph(g, request("q"), kFastRetry), TransportError);
  }

  TEST_CASE("concurrent requests") {
    FakeSidecar side;
    HttpGenerator g{HttpEndpoint(side.url())};
    std::vector<std::future<GenerationResult>> futures;
    for (int i = 0; i < 16; ++i) {
      futures.push_back(std::async(std::launch::async, [&g, i] {
        return generate_paragraph(g, request("q" + std::to_string(i)));
      }));
    }
    for (auto& f : futures) CHECK(f.get().text == side.generate_text);
    CHECK(side.prompts().size() == 16);
  }
}

TEST_SUITE("nli client") {
  TEST_CASE("validate") {
    CHECK_NOTHROW(validate({0.7, 0.2, 0.1}));
    CHECK_NOTHROW(validate({0.7, 0.2, 0.1005}));
    CHECK_THROWS_AS(validate({0.6, 0.2, 0.1}), ProtocolError);
    CHECK_THROWS_AS(validate({1.2, -0.1, -0.1}), ProtocolError);
    CHECK_THROWS_AS(validate({std::nan(""), 0.5, 0.5}), ProtocolError);
  }

  TEST_CASE("http scores") {
    FakeSidecar side;
    HttpNli nli{HttpEndpoint(side.url())};
    const auto s = nli.score("premise", "hypothesis");
    CHECK(s.entail == 0.7);
    CHECK(s.neutral == 0.2);
    CHECK(s.contradict == 0.1);
    side.fail_next(FakeSidecar::Fault::kWrongShape, 1);
    CHECK_THROWS_AS(nli.score("p", "h"), ProtocolError);
    side.fail_next(FakeSidecar::Fault::kServerError, 1);
    CHECK_THROWS_AS(nli.score("p", "h"), TransportError);
  }

  TEST_CASE("scripted steps") {
    ScriptedNli nli({{{0.5, 0.5, 0.0}, false}, {{}, true}});
    CHECK(nli.score("p", "h").entail == 0.5);
    CHECK_THROWS_AS(nli.score("p", "h"), TransportError);
    CHECK_THROWS_AS(nli.score("p", "h"), TransportError);
    CHECK(nli.call_count() == 2);
  }
}

TEST_SUITE("remote embedder") {
  TEST_CASE("batches and learns the dimension") {
    FakeSidecar side;
    RemoteEmbedder e(HttpEndpoint(side.url()), "mini", 2);
    CHECK(e.tag() == "remote:mini");
    CHECK(e.dim() == 0);
    const std::vector<std::string> texts{"a", "b c", "d e f", "g", "h"};
    const auto m = e.embed(texts);
    CHECK(m.rows() == 5);
    CHECK(m.cols() == 4);
    CHECK(e.dim() == 4);
    CHECK(side.embed_batches.load() == 3);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      CHECK(m.row(r).cast<double>().norm() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("dimension disagreement is a protocol error") {
    FakeSidecar side;
    RemoteEmbedder e(HttpEndpoint(side.url()));
    const std::vector<std::string> texts{"a"};
    e.embed(texts);
    side.embed_dim_override = 8;
    CHECK_THROWS_AS(e.embed(texts), ProtocolError);
  }

  TEST_CASE("advertised dim must match vector length") {
    FakeSidecar side;
    side.embed_dim_override = 5;
    RemoteEmbedder e(HttpEndpoint(side.url()));
    const std::vector<std::string> texts{"a"};
    CHECK_THROWS_AS(e.embed(texts), ProtocolError);
  }

  TEST_CASE("index built through the sidecar") {
    FakeSidecar side;
    RemoteEmbedder e(HttpEndpoint(side.url()));
    const std::vector<Passage> passages{{"x#0", "x", "one", 0}, {"y#0", "y", "one two three", 0}};
    const auto index = PassageIndex::build(passages, e);
    CHECK(index.embedder_tag() == "remote:default");
    const auto hits = search(index, "four five six", 2, e);
    CHECK(hits[0].passage.id == "y#0");
  }
}
