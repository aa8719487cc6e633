#include <doctest.h>

#include <cstdlib>
#include <optional>
#include <sstream>

#include "../support.hpp"
#include "clausecheck/cli.hpp"
#include "clausecheck/config.hpp"
#include "clausecheck/csv.hpp"
#include "clausecheck/error.hpp"
#include "clausecheck/knowledge_base.hpp"
#include "clausecheck/text.hpp"

using namespace clausecheck;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "clausecheck");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::optional<ErrorCode> schema_code(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("config: keys, defaults and relative paths") {
  const auto c = parse_config(
      "# comment\n\n"
      "embedding.provider = remote\n"
      "embedding.endpoint = http://127.0.0.1:9/embed\n"
      "embedding.model = text-embedding\n"
      "embedding.dim = 1536\n"
      "embedding.api_key_env = EMBED_KEY\n"
      "embedding.batch_size = 16\n"
      "llm.provider = mock\n"
      "llm.mock_script = scripts/mock.json\n"
      "llm.max_retries = 4\n"
      "sampling.n_qa = 7\n"
      "sampling.n_vote = 3\n"
      "sampling.temperature = 0.5\n"
      "retrieval.k_clauses = 6\n"
      "retrieval.k_pairs = 2\n"
      "retrieval.metric = cosine\n"
      "pipeline.strict_two_stage = true\n"
      "pipeline.resample_unparseable = no\n",
      "/base");
  CHECK(c.embedding.provider_kind == EmbeddingProviderKind::kRemote);
  CHECK(c.embedding.endpoint == "http://127.0.0.1:9/embed");
  CHECK(c.embedding.api_key_env == "EMBED_KEY");
  CHECK(c.embedding.batch_size == 16);
  CHECK(c.llm.provider_kind == LlmProviderKind::kMock);
  CHECK(c.llm.mock_script == "/base/scripts/mock.json");
  CHECK(c.pipeline.max_retries == 4);
  CHECK(c.pipeline.sampling.n_qa_samples == 7);
  CHECK(c.pipeline.sampling.n_vote_samples == 3);
  CHECK(c.pipeline.sampling.temperature == 0.5);
  CHECK(c.pipeline.retrieval.k_clauses == 6);
  CHECK(c.pipeline.retrieval.k_pairs == 2);
  CHECK(c.pipeline.retrieval.metric == Metric::kCosine);
  CHECK(c.pipeline.strict_two_stage);
  CHECK_FALSE(c.pipeline.resample_unparseable);

  const auto d = parse_config("");
  CHECK(d.embedding.provider_kind == EmbeddingProviderKind::kDeterministicLocal);
  CHECK(d.embedding.dim == kDefaultEmbeddingDim);
  CHECK(d.pipeline.sampling.n_qa_samples == 5);
  CHECK(d.pipeline.retrieval.k_clauses == 5);
  CHECK(d.pipeline.retrieval.k_pairs == 3);
}

TEST_CASE("config: malformed documents are schema errors") {
  CHECK(schema_code("no equals sign") == ErrorCode::kSchema);
  CHECK(schema_code("mystery.key = 1") == ErrorCode::kSchema);
  CHECK(schema_code("sampling.n_qa = five") == ErrorCode::kSchema);
  CHECK(schema_code("sampling.n_qa = 0") == ErrorCode::kSchema);
  CHECK(schema_code("retrieval.metric = manhattan") == ErrorCode::kSchema);
  CHECK(schema_code("pipeline.strict_two_stage = maybe") == ErrorCode::kSchema);
  CHECK(schema_code("llm.provider = oracle") == ErrorCode::kSchema);
  CHECK_THROWS_AS(load_config("/nonexistent/clausecheck.conf"), Error);
}

TEST_CASE("cli: ingest reports counts and exit statuses") {
  testing::TempDir dir;
  const std::string kb = dir.file("kb");
  const auto clauses = cli({"kb", "ingest", kb, "--kind", "clauses", "--input", testing::fixture("clauses_48.csv")});
  CHECK(clauses.code == kExitOk);
  CHECK(clauses.out.find("48 ingested") == 0);
  const auto pairs = cli({"kb", "ingest", kb, "--kind", "pairs", "--input", testing::fixture("pairs_8.csv")});
  CHECK(pairs.code == kExitOk);
  CHECK(pairs.out.find("8 ingested into expert_pairs") == 0);

  text::write_file(dir.file("header.csv"), "Clause_type,Clauses\n");
  const auto header = cli({"kb", "ingest", kb, "--kind", "clauses", "--input", dir.file("header.csv")});
  CHECK(header.code == kExitOk);
  CHECK(header.out.find("0 ingested") == 0);

  text::write_file(dir.file("noreview.csv"), "Checkpoints,Clauses\na,b\n");
  CHECK(cli({"kb", "ingest", kb, "--kind", "pairs", "--input", dir.file("noreview.csv")}).code == kExitBadInput);

  text::write_file(dir.file("blank.csv"), "Clause_type,Clauses\nx,\ny,   \n");
  const auto blank = cli({"kb", "ingest", kb, "--kind", "clauses", "--input", dir.file("blank.csv")});
  CHECK(blank.code == kExitFailure);
  CHECK(blank.err.find("line 2") != std::string::npos);

  CHECK(cli({"kb", "ingest", kb, "--kind", "widgets", "--input", dir.file("blank.csv")}).code == kExitBadInput);
  CHECK(cli({"kb", "ingest", kb, "--kind", "clauses", "--input", dir.file("missing.csv")}).code == kExitBadInput);
  CHECK(cli({"kb", "frobnicate"}).code == kExitBadInput);

  const auto json_run = cli({"kb", "ingest", kb, "--kind", "clauses", "--json", "--input", dir.file("header.csv")});
  CHECK(json::parse(json_run.out).at("ingested") == 0);

  auto reopened = KnowledgeBase::open(kb);
  CHECK(reopened->project_clauses().size() == 48);
  CHECK(reopened->expert_pairs().size() == 8);
}

TEST_CASE("cli: kb add, index build and chunk") {
  testing::TempDir dir;
  const std::string kb = dir.file("kb");
  CHECK(cli({"kb", "add", kb, "--checkpoint", "c", "--clause-file", "x", "--review-file", "y"}).code ==
        kExitBadInput);
  REQUIRE(cli({"kb", "ingest", kb, "--kind", "clauses", "--input", testing::fixture("clauses_48.csv")}).code == kExitOk);
  text::write_file(dir.file("clause.txt"), "  The Owner may waive any condition.\n");
  text::write_file(dir.file("review.txt"), "Waiver should be mutual.\n");
  const auto added = cli({"kb", "add", kb, "--checkpoint", "Waiver by mutual agreement", "--clause-file",
                          dir.file("clause.txt"), "--review-file", dir.file("review.txt")});
  CHECK(added.code == kExitOk);
  CHECK(added.out.find("added expert pair ") == 0);
  {
    auto reopened = KnowledgeBase::open(kb);
    REQUIRE(reopened->expert_pairs().size() == 1);
    CHECK(reopened->expert_pairs().records().front()->pair().clause_text == "The Owner may waive any condition.");
  }

  const auto built = cli({"index", "build", kb, "--m", "16", "--ef-search", "64", "--seed", "3"});
  CHECK(built.code == kExitOk);
  CHECK(built.out.find("index built: M=16") == 0);
  CHECK(built.out.find("project_clauses: 48 records, recall@5 ") != std::string::npos);
  CHECK(cli({"index", "build", dir.file("nowhere")}).code == kExitBadInput);

  text::write_file(dir.file("contract.txt"),
                   "Preamble words.\n\n1.1 Definitions\nTerms mean things.\n\n4.1 Condition Precedent\n"
                   "The Commencement Date follows Financial Close.\n");
  const auto chunked = cli({"chunk", dir.file("contract.txt"), "--output", dir.file("chunks.csv")});
  CHECK(chunked.code == kExitOk);
  CHECK(chunked.out.find("3 chunks from 2 headings") == 0);
  const auto back = csv::parse_table(text::read_file(dir.file("chunks.csv")));
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[2].fields[0] == "4.1 Condition Precedent");
  CHECK(cli({"chunk", dir.file("contract.txt"), "--output", dir.file("c2.csv"), "--max-chars", "10"}).code ==
        kExitBadInput);
}

TEST_CASE("cli: identify with the recorded mock, both formats") {
  testing::TempDir dir;
  const std::string kb = dir.file("kb");
  const std::string conf = testing::fixture("mock.conf");
  REQUIRE(cli({"kb", "ingest", kb, "--kind", "clauses", "--config", conf, "--input", testing::fixture("clauses_48.csv")}).code == kExitOk);
  REQUIRE(cli({"kb", "ingest", kb, "--kind", "pairs", "--config", conf, "--input", testing::fixture("pairs_8.csv")}).code == kExitOk);

  const auto run = cli({"identify", kb, "--checkpoints", testing::fixture("checkpoints.csv"), "--mode", "both",
                        "--config", conf, "--output", dir.file("report.json"), "--seed", "7"});
  CHECK(run.code == kExitOk);
  CHECK(run.out.find("4 results (2 risky, 2 non-risky, 0 degraded), 0 failed") == 0);
  const auto report = json::parse(text::read_file(dir.file("report.json")));
  CHECK(report.at("run_metadata").at("seed") == 7);
  CHECK(report.at("results")[0].at("final_verdict") == "CONTRADICT");
  CHECK(report.at("results")[2].at("final_verdict") == "ENTAIL");

  const auto md = cli({"identify", kb, "--checkpoints", testing::fixture("checkpoints.csv"), "--config", conf,
                       "--output", dir.file("report.md"), "--format", "markdown"});
  CHECK(md.code == kExitOk);
  CHECK(text::read_file(dir.file("report.md")).find("# Contract risk identification report") == 0);

  CHECK(cli({"identify", kb, "--checkpoints", testing::fixture("checkpoints.csv"), "--config", conf, "--output",
             dir.file("r.json"), "--mode", "everything"})
            .code == kExitBadInput);
  CHECK(cli({"identify", kb, "--checkpoints", testing::fixture("checkpoints.csv"), "--config", conf, "--output",
             dir.file("r.json"), "--format", "pdf"})
            .code == kExitBadInput);

  // A base built with another embedding dimension is refused.
  const std::string small = dir.file("small");
  text::write_file(dir.file("small.conf"), "embedding.dim = 64\n");
  REQUIRE(cli({"kb", "ingest", small, "--kind", "clauses", "--config", dir.file("small.conf"), "--input",
               testing::fixture("clauses_48.csv")}).code == kExitOk);
  CHECK(cli({"identify", small, "--checkpoints", testing::fixture("checkpoints.csv"), "--config", conf,
             "--output", dir.file("r.json")})
            .code == kExitBadInput);
}

TEST_CASE("cli: provider outages exit 3 and never print credentials") {
  testing::TempDir dir;
  const std::string kb = dir.file("kb");
  REQUIRE(cli({"kb", "ingest", kb, "--kind", "clauses", "--input", testing::fixture("clauses_48.csv")}).code == kExitOk);

  text::write_file(dir.file("dead.json"), R"({"sequence": [{"error": "down"}]})");
  text::write_file(dir.file("dead.conf"), "llm.provider = mock\nllm.mock_script = dead.json\nllm.max_retries = 0\n");
  const auto dead = cli({"identify", kb, "--checkpoints", testing::fixture("checkpoints.csv"), "--config",
                         dir.file("dead.conf"), "--output", dir.file("dead_report.json")});
  CHECK(dead.code == kExitProviderDown);
  CHECK(dead.err.find("PROVIDER_UNAVAILABLE") != std::string::npos);
  const auto report = json::parse(text::read_file(dir.file("dead_report.json")));
  CHECK(report.at("failures").size() == 2);
  CHECK(report.at("results").empty());

  const std::string secret = "sk-test-9f8e7d6c5b4a";
  ::setenv("CLAUSECHECK_TEST_CLI_KEY", secret.c_str(), 1);
  text::write_file(dir.file("remote.conf"),
                   "llm.provider = remote\nllm.endpoint = http://127.0.0.1:1/v1/chat/completions\n"
                   "llm.model = test-model\nllm.api_key_env = CLAUSECHECK_TEST_CLI_KEY\n"
                   "llm.timeout_s = 2\nllm.max_retries = 0\n");
  const auto remote = cli({"identify", kb, "--checkpoints", testing::fixture("checkpoints.csv"), "--config",
                           dir.file("remote.conf"), "--output", dir.file("remote_report.json")});
  ::unsetenv("CLAUSECHECK_TEST_CLI_KEY");
  CHECK(remote.code == kExitProviderDown);
  CHECK(remote.out.find(secret) == std::string::npos);
  CHECK(remote.err.find(secret) == std::string::npos);
  CHECK(text::read_file(dir.file("remote_report.json")).find(secret) == std::string::npos);
}

TEST_CASE("cli: an unreachable embedding endpoint exits 3 and writes nothing") {
  testing::TempDir dir;
  const std::string secret = "emb-secret-31415";
  ::setenv("CLAUSECHECK_TEST_CLI_EMBED_KEY", secret.c_str(), 1);
  text::write_file(dir.file("remote.conf"),
                   "embedding.provider = remote\nembedding.endpoint = http://127.0.0.1:1/v1/embeddings\n"
                   "embedding.model = m\nembedding.dim = 8\nembedding.api_key_env = CLAUSECHECK_TEST_CLI_EMBED_KEY\n");
  const auto r = cli({"kb", "ingest", dir.file("kb"), "--kind", "clauses", "--config", dir.file("remote.conf"),
                      "--input", testing::fixture("clauses_48.csv")});
  ::unsetenv("CLAUSECHECK_TEST_CLI_EMBED_KEY");
  CHECK(r.code == kExitProviderDown);
  CHECK(r.err.find("TRANSPORT") != std::string::npos);
  CHECK(r.out.find(secret) == std::string::npos);
  CHECK(r.err.find(secret) == std::string::npos);
  if (KnowledgeBase::exists(dir.file("kb"))) CHECK(KnowledgeBase::open(dir.file("kb"))->project_clauses().size() == 0);
}
