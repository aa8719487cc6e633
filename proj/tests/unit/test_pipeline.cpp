#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "../oracles.hpp"
#include "../support.hpp"
#include "clausecheck/error.hpp"
#include "clausecheck/pipeline.hpp"
#include "clausecheck/report.hpp"

using namespace clausecheck;
using nlohmann::json;

namespace {

const std::string kCp1 = "The Financial Closing Date shall have occurred before the Commencement Date.";
const std::string kCp2 =
    "The conditions precedent should only be waived by mutual agreement between the Project "
    "Company and the Contractor.";

std::unique_ptr<KnowledgeBase> fixture_kb(DeterministicEmbedder& emb, bool with_pairs = true) {
  KbOptions o;
  o.dim = emb.dim();
  o.sync_writes = false;
  auto kb = KnowledgeBase::in_memory(o);
  kb->ingest(kProjectCollection, testing::read_fixture("clauses_48.csv"), emb);
  if (with_pairs) kb->ingest(kExpertCollection, testing::read_fixture("pairs_8.csv"), emb);
  return kb;
}

SuggestionSet suggestions_of(const std::vector<Verdict>& vs) {
  SuggestionSet s;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    s.suggestions.push_back({vs[i], "why " + std::to_string(i + 1), "raw " + std::to_string(i + 1),
                             static_cast<int>(i)});
  }
  return s;
}

json rule(const char* kind, const std::string& contains, json outputs) {
  return {{"kind", kind}, {"contains", contains}, {"outputs", std::move(outputs)}};
}

const std::string kA = "Reasoning. The answer is therefore [A] contradicts.";
const std::string kB = "Reasoning. The answer is therefore [B] entails.";
const std::string kC = "Reasoning. The answer is therefore [C] not found.";

}  // namespace

TEST_CASE("tie rank prefers contradict, then not found, then entail") {
  CHECK(tie_rank(Verdict::kContradict) < tie_rank(Verdict::kNotFound));
  CHECK(tie_rank(Verdict::kNotFound) < tie_rank(Verdict::kEntail));
}

TEST_CASE("documented tie example: entail and not found tied at two votes") {
  const auto s = suggestions_of({Verdict::kEntail, Verdict::kNotFound, Verdict::kContradict});
  const auto v = resolve_votes({{1, 2}, {2, 2}, {3, 1}}, s);
  CHECK(v.verdict == Verdict::kNotFound);
  CHECK(v.choice == 2);
  CHECK(v.tie_broken);
}

TEST_CASE("same-verdict ties take the lowest choice without flagging a tie") {
  const auto s = suggestions_of({Verdict::kEntail, Verdict::kContradict, Verdict::kContradict});
  const auto v = resolve_votes({{2, 2}, {3, 2}, {1, 1}}, s);
  CHECK(v.choice == 2);
  CHECK(v.verdict == Verdict::kContradict);
  CHECK_FALSE(v.tie_broken);
  CHECK_THROWS_AS(resolve_votes({}, s), Error);
  CHECK_THROWS_AS(resolve_votes({{4, 1}}, s), Error);
}

TEST_CASE("exhaustive: all 21 vote multisets of size 5 over 3 choices, every verdict labelling") {
  const auto tallies = oracle::vote_multisets(5, 3);
  REQUIRE(tallies.size() == 21);
  int checked = 0;
  for (const auto& tally : tallies) {
    for (auto v1 : kAllVerdicts) {
      for (auto v2 : kAllVerdicts) {
        for (auto v3 : kAllVerdicts) {
          const std::vector<Verdict> labels = {v1, v2, v3};
          const auto want = oracle::vote(tally, labels);
          const auto got = resolve_votes(tally, suggestions_of(labels));
          CHECK(got.choice == want.choice);
          CHECK(got.verdict == want.verdict);
          CHECK(got.tie_broken == want.tie_broken);
          ++checked;
        }
      }
    }
  }
  CHECK(checked == 21 * 27);
}

TEST_CASE("property: final verdict is invariant under permutations of suggestions and votes") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + static_cast<int>(rng() % 4);
    std::vector<Verdict> labels;
    for (int i = 0; i < n; ++i) labels.push_back(kAllVerdicts[rng() % 3]);
    std::vector<int> ballots;
    for (int i = 0; i < 5; ++i) ballots.push_back(1 + static_cast<int>(rng() % static_cast<unsigned>(n)));
    std::map<int, int> tally;
    for (int b : ballots) ++tally[b];
    const auto base = resolve_votes(tally, suggestions_of(labels));

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);  // old choice i -> new choice perm[i-1]
    std::vector<Verdict> moved(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) moved[static_cast<std::size_t>(perm[static_cast<std::size_t>(i - 1)] - 1)] = labels[static_cast<std::size_t>(i - 1)];
    std::shuffle(ballots.begin(), ballots.end(), rng);
    std::map<int, int> moved_tally;
    for (int b : ballots) ++moved_tally[perm[static_cast<std::size_t>(b - 1)]];
    const auto again = resolve_votes(moved_tally, suggestions_of(moved));
    CHECK(again.verdict == base.verdict);
    CHECK(again.tie_broken == base.tie_broken);
  }
}

TEST_CASE("majority over verdicts") {
  CHECK(majority_verdict({{Verdict::kEntail, 5}}).verdict == Verdict::kEntail);
  const auto split = majority_verdict({{Verdict::kEntail, 3}, {Verdict::kContradict, 2}});
  CHECK(split.verdict == Verdict::kEntail);
  CHECK_FALSE(split.tie_broken);
  const auto tie = majority_verdict({{Verdict::kEntail, 2}, {Verdict::kNotFound, 2}, {Verdict::kContradict, 1}});
  CHECK(tie.verdict == Verdict::kNotFound);
  CHECK(tie.tie_broken);
  CHECK_THROWS_AS(majority_verdict({}), Error);
  CHECK(tally_verdicts(suggestions_of({Verdict::kEntail, Verdict::kEntail, Verdict::kNotFound})) ==
        std::map<Verdict, int>{{Verdict::kEntail, 2}, {Verdict::kNotFound, 1}});
}

TEST_CASE("identify: recorded conversations give the expected verdicts") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb);
  auto llm = MockLlmProvider::from_file(testing::fixture("mock_recorded.json"));
  const PipelineConfig cfg;

  const auto r1 = identify({"1", kCp1, std::nullopt}, *kb, emb, *llm, cfg);
  CHECK(r1.final_verdict == Verdict::kContradict);
  CHECK(r1.is_risky());
  CHECK(r1.expert_knowledge_found);
  CHECK(r1.mode == IdentificationMode::kAugmented);
  CHECK_FALSE(r1.selection_skipped);
  CHECK(r1.suggestions.size() == 5);
  CHECK(r1.votes == std::map<int, int>{{1, 2}, {2, 1}, {3, 1}, {5, 1}});
  CHECK(r1.n_vote_samples == 5);
  CHECK(r1.votes_discarded == 0);
  CHECK(validate(r1).empty());
  for (const auto& p : r1.retrieved_pairs) CHECK(p.pair.checkpoint_text == kCp1);
  CHECK(std::any_of(r1.retrieved_clauses.begin(), r1.retrieved_clauses.end(),
                    [](const ScoredClause& c) { return c.clause.id == 1; }));

  const auto r2 = identify({"2", kCp2, std::nullopt}, *kb, emb, *llm, cfg);
  CHECK(r2.final_verdict == Verdict::kEntail);
  CHECK_FALSE(r2.is_risky());
  CHECK(r2.selection_skipped);
  CHECK(r2.votes.empty());
  CHECK(validate(r2).empty());
  CHECK(std::any_of(r2.retrieved_clauses.begin(), r2.retrieved_clauses.end(),
                    [](const ScoredClause& c) { return c.clause.id == 2; }));
}

TEST_CASE("identify: unanimity short-circuit and strict two-stage mode") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb);
  const json script = {{"rules", {rule("QA", kCp1, json::array({kA, kA, kA, kA, kA})),
                                  rule("SELECTION", kCp1, json::array({"choice 4", "choice 4", "choice 2", "x", "choice 4"}))}}};
  MockLlmProvider llm(script);
  const auto r = identify({"1", kCp1, std::nullopt}, *kb, emb, llm, PipelineConfig{});
  CHECK(r.final_verdict == Verdict::kContradict);
  CHECK(r.selection_skipped);
  CHECK_FALSE(r.tie_broken);
  CHECK(llm.calls() == 5);

  MockLlmProvider strict_llm(script);
  PipelineConfig strict;
  strict.strict_two_stage = true;
  const auto s = identify({"1", kCp1, std::nullopt}, *kb, emb, strict_llm, strict);
  CHECK_FALSE(s.selection_skipped);
  CHECK(s.votes == std::map<int, int>{{2, 1}, {4, 3}});
  CHECK(s.votes_discarded == 1);
  CHECK(s.final_verdict == Verdict::kContradict);
  CHECK(s.final_explanation == s.suggestions.suggestions[3].explanation);
  CHECK(validate(s).empty());
  CHECK(strict_llm.calls() == 10);
}

TEST_CASE("identify: unparseable answers are re-sampled once, then counted as missing") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb);
  {
    // Samples 1 and 3 are unparseable; their single re-draws parse.
    MockLlmProvider llm(json{{"rules", {rule("QA", kCp2, json::array({kB, "hmm", kB, "???", kB, kB, kB}))}}});
    const auto r = identify({"2", kCp2, std::nullopt}, *kb, emb, llm, PipelineConfig{});
    CHECK(r.suggestions.size() == 5);
    CHECK(r.qa_samples_unparseable == 0);
    CHECK_FALSE(r.degraded);
    CHECK(llm.calls() == 7);
    std::vector<int> idx;
    for (const auto& s : r.suggestions.suggestions) idx.push_back(s.sample_index);
    CHECK(idx == std::vector<int>{0, 1, 2, 3, 4});
  }
  {
    PipelineConfig cfg;
    cfg.resample_unparseable = false;
    MockLlmProvider llm(json{{"rules", {rule("QA", kCp2, json::array({kB, "hmm", "??", "no", kC})),
                                        rule("SELECTION", kCp2, json::array({"choice 1", "choice 1", "choice 2", "choice 1", "x"}))}}});
    const auto r = identify({"2", kCp2, std::nullopt}, *kb, emb, llm, cfg);
    CHECK(r.suggestions.size() == 2);
    CHECK(r.qa_samples_unparseable == 3);
    CHECK(r.degraded);
    CHECK(r.final_verdict == Verdict::kEntail);
    CHECK(llm.calls() == 10);
  }
  {
    PipelineConfig cfg;
    cfg.resample_unparseable = false;
    MockLlmProvider llm(json{{"rules", {rule("QA", kCp2, json::array({kB, "hmm", kB, "no", kB}))}}});
    const auto r = identify({"2", kCp2, std::nullopt}, *kb, emb, llm, cfg);
    CHECK(r.qa_samples_unparseable == 2);
    CHECK_FALSE(r.degraded);  // 2 * 2 < 5
  }
  {
    MockLlmProvider llm(json{{"sequence", json::array({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"})}});
    try {
      identify({"2", kCp2, std::nullopt}, *kb, emb, llm, PipelineConfig{});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoSuggestions);
    }
  }
}

TEST_CASE("identify: failed QA requests count as missing; no provider at all propagates") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb);
  const json err = {{"error", "timeout"}};
  PipelineConfig cfg;
  cfg.max_retries = 0;
  MockLlmProvider llm(json{{"rules", {rule("QA", kCp2, json::array({kB, err, err, err, kB}))}}});
  const auto r = identify({"2", kCp2, std::nullopt}, *kb, emb, llm, cfg);
  CHECK(r.qa_samples_failed == 3);
  CHECK(r.suggestions.size() == 2);
  CHECK(r.degraded);

  MockLlmProvider dead(json{{"sequence", json::array()}});
  try {
    identify({"2", kCp2, std::nullopt}, *kb, emb, dead, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProviderUnavailable);
  }
}

TEST_CASE("identify: no parseable vote falls back to the suggestion majority") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb);
  MockLlmProvider llm(json{{"rules", {rule("QA", kCp1, json::array({kB, kA, kB, kC, kB})),
                                      rule("SELECTION", kCp1, json::array({"none", "choice 9", "?", "", "no"}))}}});
  const auto r = identify({"1", kCp1, std::nullopt}, *kb, emb, llm, PipelineConfig{});
  CHECK(r.votes.empty());
  CHECK(r.votes_discarded == 5);
  CHECK(r.degraded);
  CHECK(r.final_verdict == Verdict::kEntail);
  CHECK(validate(r).empty());
}

TEST_CASE("identify: a checkpoint without expert pairs uses the standard prompt") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb);
  const std::string cp = "What is the proportion of the advance payment?";
  MockLlmProvider llm(json{{"rules", {rule("STANDARD", cp, json::array({"Condition situation: not found\nExplanation: silent.",
                                                                       "Condition situation: not found\nExplanation: silent.",
                                                                       "Condition situation: entail\nExplanation: 10%.",
                                                                       "Condition situation: not found\nExplanation: silent.",
                                                                       "Condition situation: entail\nExplanation: 10%."}))}}});
  const auto r = identify({"9", cp, std::nullopt}, *kb, emb, llm, PipelineConfig{});
  CHECK(r.mode == IdentificationMode::kAugmented);
  CHECK_FALSE(r.expert_knowledge_found);
  CHECK(r.retrieved_pairs.empty());
  CHECK(r.selection_skipped);
  CHECK(r.final_verdict == Verdict::kNotFound);
  CHECK(r.final_explanation == "silent.");
}

TEST_CASE("identify_standard: majority and tie rule") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb, false);
  const auto run = [&](json outputs) {
    MockLlmProvider llm(json{{"rules", {rule("STANDARD", kCp1, std::move(outputs))}}});
    return identify_standard({"1", kCp1, std::nullopt}, *kb, emb, llm, PipelineConfig{});
  };
  const auto unanimous = run(json::array({kB, kB, kB, kB, kB}));
  CHECK(unanimous.final_verdict == Verdict::kEntail);
  CHECK(unanimous.mode == IdentificationMode::kStandard);
  CHECK(unanimous.retrieved_pairs.empty());
  CHECK(run(json::array({kB, kA, kB, kA, kB})).final_verdict == Verdict::kEntail);
  PipelineConfig four;
  four.sampling.n_qa_samples = 4;
  MockLlmProvider llm(json{{"rules", {rule("STANDARD", kCp1, json::array({kB, kC, kB, kC}))}}});
  const auto tie = identify_standard({"1", kCp1, std::nullopt}, *kb, emb, llm, four);
  CHECK(tie.final_verdict == Verdict::kNotFound);
  CHECK(tie.tie_broken);
}

TEST_CASE("natural ordering of checkpoint ids") {
  CHECK(natural_less("cp2", "cp10"));
  CHECK_FALSE(natural_less("cp10", "cp2"));
  CHECK(natural_less("2", "10"));
  CHECK(natural_less("a", "b"));
  CHECK_FALSE(natural_less("x", "x"));
}

TEST_CASE("checkpoint CSV") {
  const auto cps = read_checkpoints_csv("Checkpoints,Topic\n\"First?\",Payment\nSecond,\n");
  REQUIRE(cps.size() == 2);
  CHECK(cps[0].id == "1");
  CHECK(cps[0].topic == std::optional<std::string>("Payment"));
  CHECK(cps[1].id == "2");
  CHECK_FALSE(cps[1].topic.has_value());
  CHECK_THROWS_AS(read_checkpoints_csv("Question\nx\n"), Error);
  const auto fixture = read_checkpoints_csv(testing::read_fixture("checkpoints.csv"));
  REQUIRE(fixture.size() == 2);
  CHECK(fixture[0].text == kCp1);
}

TEST_CASE("run_checklist: ordering, failure capture, summary and determinism") {
  DeterministicEmbedder emb;
  auto kb = fixture_kb(emb);
  std::vector<Checkpoint> cps = {{"10", "Unanswerable checkpoint", std::nullopt},
                                 {"2", kCp2, std::nullopt},
                                 {"1", kCp1, std::nullopt}};
  auto run = [&] {
    auto llm = MockLlmProvider::from_file(testing::fixture("mock_recorded.json"), 7);
    return run_checklist(cps, *kb, emb, *llm, PipelineConfig{}, RunMode::kBoth);
  };
  const Report rep = run();
  REQUIRE(rep.results.size() == 4);
  CHECK(rep.results[0].checkpoint.id == "1");
  CHECK(rep.results[0].mode == IdentificationMode::kAugmented);
  CHECK(rep.results[1].checkpoint.id == "1");
  CHECK(rep.results[1].mode == IdentificationMode::kStandard);
  CHECK(rep.results[2].checkpoint.id == "2");
  CHECK(rep.results[0].final_verdict == Verdict::kContradict);
  CHECK(rep.results[1].final_verdict == Verdict::kEntail);
  CHECK(rep.results[2].final_verdict == Verdict::kEntail);
  CHECK(rep.results[3].final_verdict == Verdict::kContradict);
  // The mock script has nothing for checkpoint 10 in either mode.
  REQUIRE(rep.failures.size() == 2);
  CHECK(rep.failures[0].checkpoint_id == "10");
  CHECK(rep.failures[0].code == "PROVIDER_UNAVAILABLE");
  CHECK(rep.summary.checkpoints == 3);
  CHECK(rep.summary.results == 4);
  CHECK(rep.summary.risky == 2);
  CHECK(rep.summary.non_risky == 2);
  CHECK(rep.summary.failed == 2);
  CHECK(render_json(rep) == render_json(run()));

  const auto j = json::parse(render_json(rep));
  CHECK(j.at("results").size() == 4);
  CHECK(j.at("run_metadata").at("mode") == "BOTH");
  CHECK(j.at("results")[0].get<IdentificationResult>() == rep.results[0]);

  const std::string md = render_report(rep, ReportFormat::kMarkdown);
  CHECK(md.find("# ") == 0);
  CHECK(md.find("CONTRADICT") != std::string::npos);
  CHECK(md.find("Failures") != std::string::npos);

  auto standard_only = [&] {
    auto llm = MockLlmProvider::from_file(testing::fixture("mock_recorded.json"), 7);
    return run_checklist({{"1", kCp1, std::nullopt}}, *kb, emb, *llm, PipelineConfig{}, RunMode::kStandard);
  }();
  REQUIRE(standard_only.results.size() == 1);
  CHECK(standard_only.results[0].mode == IdentificationMode::kStandard);
  CHECK_FALSE(standard_only.results[0].expert_knowledge_found);
}

TEST_CASE("run_checklist: an empty project base fails every checkpoint without aborting") {
  DeterministicEmbedder emb;
  KbOptions o;
  o.sync_writes = false;
  auto kb = KnowledgeBase::in_memory(o);
  MockLlmProvider llm(json{{"sequence", json::array({kA})}});
  const auto rep = run_checklist({{"1", kCp1, std::nullopt}, {"2", kCp2, std::nullopt}}, *kb, emb, llm,
                                 PipelineConfig{}, RunMode::kAugmented);
  CHECK(rep.results.empty());
  REQUIRE(rep.failures.size() == 2);
  CHECK(rep.failures[0].code == "EMPTY_PROJECT_BASE");
  CHECK(llm.calls() == 0);
}

TEST_CASE("run modes") {
  CHECK(run_mode_from_string("both") == RunMode::kBoth);
  CHECK(run_mode_from_string("augmented") == RunMode::kAugmented);
  CHECK(run_mode_from_string("standard") == RunMode::kStandard);
  CHECK_FALSE(run_mode_from_string("all"));
}
