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

// iprg: index / plan-data / answer / eval / web-corpus.
//
// Exit status: 0 on success, 1 on usage errors, 2 on runtime failures.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "iprg/clients.hpp"
#include "iprg/controller.hpp"
#include "iprg/errors.hpp"
#include "iprg/ingest.hpp"
#include "iprg/jsonl.hpp"
#include "iprg/metrics.hpp"
#include "iprg/parallel.hpp"
#include "iprg/planner.hpp"
#include "iprg/resources.hpp"
#include "iprg/retriever.hpp"

namespace fs = std::filesystem;
using namespace iprg;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sidecar_url() {
  const char* env = std::getenv("IPRG_SIDECAR_URL");
  return env ? std::string(env) : std::string();
}

std::string first_nonempty(const std::string& a, const std::string& b) {
  return a.empty() ? b : a;
}

WordSet load_stopwords(const std::string& path) {
  return path.empty() ? default_stopwords() : WordSet::from_file(path);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string trace_file_name(const std::string& id) {
  std::string name = id;
  for (char& c : name) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return name + ".jsonl";
}

// ---- index ---------------------------------------------------------------

struct IndexArgs {
  std::string corpus;
  std::string index;
  std::string embedder = "lexical";
  std::string embed_url;
  std::string stopwords;
  std::size_t passage_len = 100;
  std::size_t stride = 100;
  std::size_t dim = 4096;
};

int cmd_index(const IndexArgs& a) {
  if (!fs::exists(a.corpus)) throw UsageError("corpus not found: " + a.corpus);
  ChunkOptions chunking;
  chunking.passage_len = a.passage_len;
  chunking.stride = a.stride;
  std::string remote_url;
  if (a.embedder == "remote") {
    remote_url = first_nonempty(a.embed_url, sidecar_url());
    if (remote_url.empty()) throw UsageError("--embedder remote needs --embed-url or IPRG_SIDECAR_URL");
  }

  const auto docs = load_corpus(a.corpus);
  std::optional<PassageIndex> index;
  if (a.embedder == "lexical") {
    index = build_lexical_index(docs, chunking, a.dim, load_stopwords(a.stopwords));
  } else {
    RemoteEmbedder embedder{HttpEndpoint(remote_url)};
    index = PassageIndex::build(chunk_corpus(docs, chunking), embedder, chunking);
  }
  index->save(a.index);
  std::cout << "indexed " << index->size() << " passages from " << docs.size()
            << " documents into " << a.index << "\n";
  return 0;
}

// ---- plan-data -----------------------------------------------------------

struct PlanDataArgs {
  std::string dataset;
  std::string out;
  std::string stopwords;
  std::size_t max_keywords = 5;
  bool deterministic = false;
};

int cmd_plan_data(const PlanDataArgs& a) {
  if (!fs::exists(a.dataset)) throw UsageError("dataset not found: " + a.dataset);
  if (a.max_keywords < 1) throw UsageError("--max-keywords must be at least 1");
  const auto pairs = load_qa_dataset(a.dataset);
  const RakeExtractor extractor(load_stopwords(a.stopwords));

  auto out = open_output(a.out);
  std::size_t written = 0;
  for (const auto& pair : pairs) {
    for (const auto& ex : build_plan_training_examples(pair, extractor, a.max_keywords)) {
      write_jsonl(out, to_json(ex));
      ++written;
    }
  }

  Json meta;
  meta["command"] = "plan-data";
  meta["dataset"] = a.dataset;
  meta["extractor"] = "rake";
  meta["max_keywords"] = a.max_keywords;
  meta["max_phrase_tokens"] = kMaxPhraseTokens;
  meta["stopwords"] = a.stopwords.empty() ? "bundled" : a.stopwords;
  meta["pairs"] = pairs.size();
  meta["examples"] = written;
  if (!a.deterministic) meta["timestamp"] = utc_timestamp();
  auto meta_out = open_output(a.out + ".meta.json");
  meta_out << meta.dump(2) << "\n";

  std::cout << "wrote " << written << " plan examples from " << pairs.size() << " pairs\n";
  return 0;
}

// ---- answer --------------------------------------------------------------

struct AnswerArgs {
  std::string dataset;
  std::string index;
  std::string out;
  std::string mode = "iprg";
  std::string embedder = "lexical";
  std::string generator_url;
  std::string plan_url;
  std::string embed_url;
  std::string mock_script;
  std::string stopwords;
  std::size_t jobs = default_jobs();
  bool deterministic = false;
  bool no_plan_fallback = false;
  RunConfig config;
};

struct MockScript {
  std::vector<ScriptedGenerator::Step> generator;
  std::optional<std::vector<ScriptedGenerator::Step>> planner;
};

std::vector<ScriptedGenerator::Step> parse_steps(const Json& steps, const std::string& where) {
  if (!steps.is_array()) throw UsageError("mock script: " + where + " must be a list");
  std::vector<ScriptedGenerator::Step> out;
  for (const auto& s : steps) {
    if (s.is_null()) out.push_back(ScriptedGenerator::failure());
    else if (s.is_string()) out.push_back({s.get<std::string>(), false});
    else throw UsageError("mock script: " + where + " entries must be strings or null");
  }
  return out;
}

// {"<question id>" | "*": {"generator": [text | null, ...], "planner": [...]}}
std::map<std::string, MockScript> load_mock_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("mock script not found: " + path);
  Json root;
  try {
    root = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("mock script " + path + ": " + e.what());
  }
  if (!root.is_object()) throw UsageError("mock script must be an object keyed by question id");
  std::map<std::string, MockScript> scripts;
  for (const auto& [id, entry] : root.items()) {
    MockScript m;
    if (entry.contains("generator")) m.generator = parse_steps(entry["generator"], id + ".generator");
    if (entry.contains("planner")) m.planner = parse_steps(entry["planner"], id + ".planner");
    scripts.emplace(id, std::move(m));
  }
  return scripts;
}

int cmd_answer(AnswerArgs a) {
  // Everything that can be checked without doing work is checked first.
  if (!fs::exists(a.dataset)) throw UsageError("dataset not found: " + a.dataset);
  if (!fs::exists(a.index)) throw UsageError("index not found: " + a.index);
  try {
    a.config.mode = parse_mode(a.mode);
    a.config.plan_fallback = !a.no_plan_fallback;
    validate(a.config);
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  const std::string gen_url = first_nonempty(a.generator_url, sidecar_url());
  const std::string plan_url = first_nonempty(a.plan_url, sidecar_url());
  if (a.mock_script.empty() && gen_url.empty()) {
    throw UsageError("answer needs --mock-script, --generator-url, or IPRG_SIDECAR_URL");
  }
  std::string embed_url;
  if (a.embedder == "remote") {
    embed_url = first_nonempty(a.embed_url, sidecar_url());
    if (embed_url.empty()) throw UsageError("--embedder remote needs --embed-url or IPRG_SIDECAR_URL");
  }
  std::map<std::string, MockScript> scripts;
  if (!a.mock_script.empty()) scripts = load_mock_script(a.mock_script);

  const auto pairs = load_qa_dataset(a.dataset);
  const PassageIndex index = PassageIndex::load(a.index);

  std::unique_ptr<Embedder> remote_embedder;
  const Embedder* embedder = nullptr;
  if (a.embedder == "lexical") {
    if (!index.lexical_embedder()) throw Error("index was not built with the lexical embedder");
    embedder = &*index.lexical_embedder();
  } else {
    remote_embedder = std::make_unique<RemoteEmbedder>(HttpEndpoint(embed_url));
    embedder = remote_embedder.get();
  }
  const RakeExtractor extractor(a.stopwords.empty() ? default_stopwords()
                                                    : WordSet::from_file(a.stopwords));

  fs::create_directories(fs::path(a.out) / "traces");
  const std::optional<std::string> timestamp =
      a.deterministic ? std::nullopt : std::optional<std::string>(utc_timestamp());

  std::vector<std::optional<std::string>> answers(pairs.size());
  std::mutex log_mutex;
  std::size_t failures = 0;

  parallel_for(pairs.size(), a.jobs, [&](std::size_t i) {
    const QAPair& pair = pairs[i];
    std::unique_ptr<Generator> generator;
    std::unique_ptr<Generator> planner;
    if (!scripts.empty()) {
      auto it = scripts.find(pair.id);
      if (it == scripts.end()) it = scripts.find("*");
      MockScript script = it == scripts.end() ? MockScript{} : it->second;
      generator = std::make_unique<ScriptedGenerator>(std::move(script.generator),
                                                      ScriptedGenerator::WhenExhausted::kEmpty);
      if (script.planner) {
        planner = std::make_unique<ScriptedGenerator>(std::move(*script.planner),
                                                      ScriptedGenerator::WhenExhausted::kEmpty);
      }
    } else {
      generator = std::make_unique<HttpGenerator>(HttpEndpoint(gen_url));
      if (!plan_url.empty()) planner = std::make_unique<HttpGenerator>(HttpEndpoint(plan_url));
    }

    Clients clients;
    clients.generator = generator.get();
    clients.planner = planner.get();
    clients.embedder = embedder;
    clients.extractor = &extractor;

    TraceHeader header;
    header.question_id = pair.id;
    header.mode = a.config.mode;
    header.config = a.config;
    header.embedder_tag = embedder->tag();
    header.timestamp = timestamp;

    std::vector<IterationTrace> trace;
    try {
      RunResult result = run(pair.question, index, clients, a.config);
      header.terminated_reason = result.state.terminated_reason;
      header.iterations = result.state.iteration;
      trace = std::move(result.trace);
      answers[i] = std::move(result.answer);
    } catch (const RunError& e) {
      header.iterations = e.state().iteration;
      trace = e.partial_trace();
      std::lock_guard lock(log_mutex);
      spdlog::error("{}: {}", pair.id, e.what());
      ++failures;
    }
    auto out = open_output(fs::path(a.out) / "traces" / trace_file_name(pair.id));
    write_trace(out, header, trace);
  });

  auto out = open_output(fs::path(a.out) / "predictions.jsonl");
  Json config_record;
  Json config = to_json(a.config);
  config["dataset"] = a.dataset;
  config["index"] = a.index;
  config["embedder_tag"] = embedder->tag();
  config["generator"] = a.mock_script.empty() ? gen_url : "mock:" + a.mock_script;
  if (timestamp) config["timestamp"] = *timestamp;
  config_record["config"] = std::move(config);
  write_jsonl(out, config_record);
  std::size_t answered = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!answers[i]) continue;
    Json row;
    row["id"] = pairs[i].id;
    row["answer"] = *answers[i];
    write_jsonl(out, row);
    ++answered;
  }
  std::cout << "answered " << answered << " of " << pairs.size() << " questions\n";
  return failures == 0 ? 0 : kExitRuntime;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string predictions;
  std::string dataset;
  std::string out;
  std::string nli_url;
  bool no_rouge = false;
  bool nli = false;
  bool readability = false;
  bool aspects = false;
  std::size_t jobs = default_jobs();
  std::size_t nli_in_flight = 4;
};

int cmd_eval(const EvalArgs& a) {
  if (!fs::exists(a.predictions)) throw UsageError("predictions not found: " + a.predictions);
  if (!fs::exists(a.dataset)) throw UsageError("dataset not found: " + a.dataset);
  const std::string nli_url = first_nonempty(a.nli_url, sidecar_url());
  if (a.nli && nli_url.empty()) throw UsageError("--nli needs --nli-url or IPRG_SIDECAR_URL");

  EvalOptions options;
  options.rouge = !a.no_rouge;
  options.nli = a.nli;
  options.readability = a.readability;
  options.aspects = a.aspects;
  options.jobs = a.jobs;
  options.nli_in_flight = a.nli_in_flight;

  const auto predictions = load_predictions(a.predictions);
  const auto dataset = load_qa_dataset(a.dataset);
  std::unique_ptr<NliClient> nli;
  if (a.nli) nli = std::make_unique<HttpNli>(HttpEndpoint(nli_url));

  const EvalReport report = evaluate(predictions, dataset, options, nli.get());
  Json extra;
  extra["predictions"] = a.predictions;
  extra["dataset"] = a.dataset;
  auto out = open_output(a.out);
  write_report(out, report, extra);

  const Json summary = summary_json(report);
  std::cout << "items " << report.summary.count;
  for (const auto& [name, value] : summary["display"].items()) {
    if (!value.is_null()) std::cout << "  " << name << " " << value.get<std::string>();
  }
  if (options.nli) std::cout << "  nli_missing " << report.summary.nli_missing;
  std::cout << "\n";
  return 0;
}

// ---- web-corpus ----------------------------------------------------------

struct WebCorpusArgs {
  std::string dataset;
  std::string replay;
  std::string out;
  std::vector<std::string> exclude_domains;
  std::size_t top_n = 10;
  std::size_t jobs = default_jobs();
};

int cmd_web_corpus(const WebCorpusArgs& a) {
  if (!fs::exists(a.dataset)) throw UsageError("dataset not found: " + a.dataset);
  if (!fs::exists(a.replay)) throw UsageError("replay file not found: " + a.replay);
  const auto pairs = load_qa_dataset(a.dataset);
  ReplaySearch search = ReplaySearch::load(a.replay);
  WebCorpusOptions options;
  options.top_n = a.top_n;
  options.exclude_domains = a.exclude_domains;
  options.jobs = a.jobs;
  const WebCorpus corpus = build_web_corpus(search, pairs, options);

  auto out = open_output(a.out);
  const auto docs = corpus.documents();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Json row;
    row["id"] = docs[i].id;
    row["title"] = "";
    row["text"] = docs[i].text;
    row["url"] = corpus.sentences[i].source_url;
    write_jsonl(out, row);
  }
  Json meta;
  meta["command"] = "web-corpus";
  meta["dataset"] = a.dataset;
  meta["replay"] = a.replay;
  meta["top_n"] = a.top_n;
  meta["exclude_domains"] = a.exclude_domains;
  meta["documents"] = docs.size();
  meta["failed_queries"] = corpus.failed_queries;
  auto meta_out = open_output(a.out + ".meta.json");
  meta_out << meta.dump(2) << "\n";
  std::cout << "wrote " << docs.size() << " documents (" << corpus.failed_queries
            << " failed queries)\n";
  return 0;
}

void add_run_config(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--k", c.k, "passages retrieved per iteration");
  cmd->add_option("--max-iterations", c.max_iterations);
  cmd->add_option("--max-answer-tokens", c.max_answer_tokens);
  cmd->add_option("--dup-threshold", c.dup_threshold, "similarity at which a sentence is a repeat");
  cmd->add_option("--max-keywords", c.max_keywords);
  cmd->add_option("--max-new-tokens", c.max_new_tokens);
  cmd->add_option("--plan-max-new-tokens", c.plan_max_new_tokens);
  cmd->add_option("--prompt-budget", c.prompt_token_budget, "content tokens per generator prompt");
  cmd->add_option("--retries", c.retry.attempts, "total attempts per remote call");
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("iprg"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Iterative planning, retrieval and generation for long-form answers"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose);

  IndexArgs index_args;
  auto* index_cmd = app.add_subcommand("index", "chunk and embed a corpus");
  index_cmd->add_option("--corpus", index_args.corpus)->required();
  index_cmd->add_option("--index", index_args.index, "output directory")->required();
  index_cmd->add_option("--embedder", index_args.embedder)
      ->check(CLI::IsMember({"lexical", "remote"}));
  index_cmd->add_option("--embed-url", index_args.embed_url);
  index_cmd->add_option("--stopwords", index_args.stopwords);
  index_cmd->add_option("--passage-len", index_args.passage_len)->check(CLI::PositiveNumber);
  index_cmd->add_option("--stride", index_args.stride)->check(CLI::PositiveNumber);
  index_cmd->add_option("--dim", index_args.dim, "lexical hash dimension");

  PlanDataArgs plan_args;
  auto* plan_cmd = app.add_subcommand("plan-data", "build keyword-plan training pairs");
  plan_cmd->add_option("--dataset", plan_args.dataset)->required();
  plan_cmd->add_option("--out", plan_args.out)->required();
  plan_cmd->add_option("--stopwords", plan_args.stopwords);
  plan_cmd->add_option("--max-keywords", plan_args.max_keywords);
  plan_cmd->add_flag("--deterministic", plan_args.deterministic);

  AnswerArgs answer_args;
  auto* answer_cmd = app.add_subcommand("answer", "answer every question in a dataset");
  answer_cmd->add_option("--dataset", answer_args.dataset)->required();
  answer_cmd->add_option("--index", answer_args.index)->required();
  answer_cmd->add_option("--out", answer_args.out, "output directory")->required();
  answer_cmd->add_option("--mode", answer_args.mode)->check(CLI::IsMember({"iprg", "irg"}));
  answer_cmd->add_option("--embedder", answer_args.embedder)
      ->check(CLI::IsMember({"lexical", "remote"}));
  answer_cmd->add_option("--generator-url", answer_args.generator_url);
  answer_cmd->add_option("--plan-url", answer_args.plan_url);
  answer_cmd->add_option("--embed-url", answer_args.embed_url);
  answer_cmd->add_option("--mock-script", answer_args.mock_script);
  answer_cmd->add_option("--stopwords", answer_args.stopwords);
  answer_cmd->add_option("--jobs", answer_args.jobs)->check(CLI::PositiveNumber);
  answer_cmd->add_flag("--deterministic", answer_args.deterministic);
  answer_cmd->add_flag("--no-plan-fallback", answer_args.no_plan_fallback);
  add_run_config(answer_cmd, answer_args.config);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against references");
  eval_cmd->add_option("--predictions", eval_args.predictions)->required();
  eval_cmd->add_option("--dataset", eval_args.dataset)->required();
  eval_cmd->add_option("--out", eval_args.out, "report file")->required();
  eval_cmd->add_option("--nli-url", eval_args.nli_url);
  eval_cmd->add_flag("--no-rouge", eval_args.no_rouge);
  eval_cmd->add_flag("--nli", eval_args.nli);
  eval_cmd->add_flag("--readability", eval_args.readability);
  eval_cmd->add_flag("--aspects", eval_args.aspects);
  eval_cmd->add_option("--jobs", eval_args.jobs)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--nli-in-flight", eval_args.nli_in_flight)->check(CLI::PositiveNumber);

  WebCorpusArgs web_args;
  auto* web_cmd = app.add_subcommand("web-corpus", "build a corpus from replayed search results");
  web_cmd->add_option("--dataset", web_args.dataset)->required();
  web_cmd->add_option("--replay", web_args.replay)->required();
  web_cmd->add_option("--out", web_args.out)->required();
  web_cmd->add_option("--exclude-domain", web_args.exclude_domains);
  web_cmd->add_option("--top-n", web_args.top_n)->check(CLI::PositiveNumber);
  web_cmd->add_option("--jobs", web_args.jobs)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    if (*index_cmd) return cmd_index(index_args);
    if (*plan_cmd) return cmd_plan_data(plan_args);
    if (*answer_cmd) return cmd_answer(answer_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*web_cmd) return cmd_web_corpus(web_args);
  } catch (const UsageError& e) {
    std::cerr << "iprg: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "iprg: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
