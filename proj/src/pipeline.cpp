// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/pipeline.hpp"

#include <algorithm>

#include "clausecheck/csv.hpp"
#include "clausecheck/error.hpp"
#include "clausecheck/retrieval.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

int tie_rank(Verdict v) {
  switch (v) {
    case Verdict::kContradict: return 0;
    case Verdict::kNotFound: return 1;
    case Verdict::kEntail: return 2;
  }
  return 3;
}

VoteOutcome resolve_votes(const std::map<int, int>& votes, const SuggestionSet& suggestions) {
  int best = 0;
  for (const auto& [choice, count] : votes) {
    if (choice < 1 || static_cast<std::size_t>(choice) > suggestions.size()) {
      throw Error(ErrorCode::kContractViolation, "vote for unknown choice " + std::to_string(choice));
    }
    best = std::max(best, count);
  }
  if (best <= 0) throw Error(ErrorCode::kContractViolation, "no votes to resolve");

  std::optional<VoteOutcome> out;
  bool mixed = false;
  for (const auto& [choice, count] : votes) {  // ascending choice
    if (count != best) continue;
    const Verdict v = suggestions.suggestions[static_cast<std::size_t>(choice - 1)].verdict;
    if (!out) {
      out = VoteOutcome{choice, v, false};
    } else if (v != out->verdict) {
      mixed = true;
      if (tie_rank(v) < tie_rank(out->verdict)) out = VoteOutcome{choice, v, false};
    }
  }
  out->tie_broken = mixed;
  return *out;
}

MajorityOutcome majority_verdict(const std::map<Verdict, int>& tally) {
  int best = 0;
  for (const auto& [v, n] : tally) best = std::max(best, n);
  if (best <= 0) throw Error(ErrorCode::kContractViolation, "empty verdict tally");
  MajorityOutcome out;
  int tied = 0;
  int rank = 99;
  for (const auto& [v, n] : tally) {
    if (n != best) continue;
    ++tied;
    if (tie_rank(v) < rank) {
      rank = tie_rank(v);
      out.verdict = v;
    }
  }
  out.tie_broken = tied > 1;
  return out;
}

std::map<Verdict, int> tally_verdicts(const SuggestionSet& suggestions) {
  std::map<Verdict, int> tally;
  for (const auto& s : suggestions.suggestions) ++tally[s.verdict];
  return tally;
}

namespace {

struct QaStage {
  SuggestionSet suggestions;
  int unparseable = 0;
  int failed = 0;
};

// Draws n answers and parses them; each unparseable answer is re-drawn once
// under the same sample index.
QaStage collect_suggestions(const RenderedPrompt& prompt, LlmProvider& llm,
                            const PipelineConfig& config) {
  const int n = config.sampling.n_qa_samples;
  const auto batch = sample(prompt, n, config.sampling.temperature, llm, config.max_retries);
  QaStage stage;
  stage.failed = static_cast<int>(batch.failures.size());
  for (const auto& out : batch.outputs) {
    auto parsed = parse_answer(out.text);
    std::string raw = out.text;
    if (!parsed && config.resample_unparseable) {
      try {
        const auto retry = sample(prompt, 1, config.sampling.temperature, llm, config.max_retries,
                                  out.sample_index);
        raw = retry.outputs.front().text;
        parsed = parse_answer(raw);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kProviderUnavailable) throw;
        ++stage.unparseable;
        continue;
      }
    }
    if (!parsed) {
      ++stage.unparseable;
      continue;
    }
    stage.suggestions.suggestions.push_back(
        {parsed->verdict, std::move(parsed->explanation), std::move(raw), out.sample_index});
  }
  return stage;
}

void apply_qa_stage(IdentificationResult& r, QaStage& stage, const PipelineConfig& config) {
  r.qa_samples_requested = config.sampling.n_qa_samples;
  r.qa_samples_unparseable = stage.unparseable;
  r.qa_samples_failed = stage.failed;
  r.suggestions = std::move(stage.suggestions);
  if (r.suggestions.suggestions.empty()) {
    throw Error(ErrorCode::kNoSuggestions, "no parseable answer for checkpoint " + r.checkpoint.id);
  }
  const int missing = r.qa_samples_requested - static_cast<int>(r.suggestions.size());
  r.degraded = 2 * missing >= r.qa_samples_requested;
  r.verdict_tally = tally_verdicts(r.suggestions);
}

const Suggestion& first_with(const SuggestionSet& s, Verdict v) {
  for (const auto& sug : s.suggestions) {
    if (sug.verdict == v) return sug;
  }
  throw Error(ErrorCode::kContractViolation, "no suggestion carries the chosen verdict");
}

void finish_by_majority(IdentificationResult& r) {
  const auto m = majority_verdict(r.verdict_tally);
  r.final_verdict = m.verdict;
  r.tie_broken = m.tie_broken;
  r.final_explanation = first_with(r.suggestions, m.verdict).explanation;
}

IdentificationResult standard_from_bundle(const Checkpoint& checkpoint, const ClauseBundle& bundle,
                                          LlmProvider& llm, const PipelineConfig& config,
                                          const TemplateSet& templates,
                                          IdentificationResult r) {
  const auto prompt = render_standard_prompt(checkpoint, bundle.merged_text, templates);
  auto stage = collect_suggestions(prompt, llm, config);
  apply_qa_stage(r, stage, config);
  r.selection_skipped = true;
  finish_by_majority(r);
  return r;
}

IdentificationResult base_result(const Checkpoint& checkpoint, IdentificationMode mode,
                                 const PipelineConfig& config, const ClauseBundle& bundle) {
  IdentificationResult r;
  r.checkpoint = checkpoint;
  r.mode = mode;
  r.metric = config.retrieval.metric;
  r.retrieved_clauses = bundle.clauses;
  return r;
}

void check_inputs(const Checkpoint& checkpoint, const PipelineConfig& config) {
  if (const auto v = validate(checkpoint); !v.empty()) {
    throw Error(ErrorCode::kContractViolation,
                "invalid checkpoint " + checkpoint.id + ": " + v.violations.front().name);
  }
  if (const auto v = validate(config.sampling); !v.empty()) {
    throw Error(ErrorCode::kContractViolation, "invalid sampling config: " + v.violations.front().name);
  }
  if (const auto v = validate(config.retrieval); !v.empty()) {
    throw Error(ErrorCode::kContractViolation,
                "invalid retrieval config: " + v.violations.front().name);
  }
}

}  // namespace

IdentificationResult identify(const Checkpoint& checkpoint, const KnowledgeBase& kb,
                              Embedder& embedder, LlmProvider& llm, const PipelineConfig& config,
                              const TemplateSet& templates) {
  check_inputs(checkpoint, config);
  const ClauseBundle bundle = retrieve_project_clauses(checkpoint, kb, embedder, config.retrieval);
  IdentificationResult r = base_result(checkpoint, IdentificationMode::kAugmented, config, bundle);

  const PairRetrieval pairs =
      retrieve_clause_review_pairs(checkpoint, bundle, kb, embedder, config.retrieval);
  if (pairs.outcome == PairOutcome::kNoExpertKnowledge) {
    return standard_from_bundle(checkpoint, bundle, llm, config, templates, std::move(r));
  }
  r.expert_knowledge_found = true;
  r.retrieved_pairs = pairs.pairs;

  const auto qa = render_qa_prompt(checkpoint, bundle, pairs.pairs, templates);
  auto stage = collect_suggestions(qa, llm, config);
  apply_qa_stage(r, stage, config);

  const bool unanimous = r.verdict_tally.size() == 1;
  if (r.suggestions.size() < 2 || (unanimous && !config.strict_two_stage)) {
    r.selection_skipped = true;
    r.final_verdict = r.suggestions.suggestions.front().verdict;
    r.final_explanation = r.suggestions.suggestions.front().explanation;
    return r;
  }

  const auto selection = render_selection_prompt(checkpoint, bundle.merged_text, r.suggestions,
                                                 templates);
  const int n_vote = config.sampling.n_vote_samples;
  const auto ballots = sample(selection, n_vote, config.sampling.temperature, llm, config.max_retries);
  r.n_vote_samples = n_vote;
  r.votes_discarded = static_cast<int>(ballots.failures.size());
  for (const auto& b : ballots.outputs) {
    if (auto vote = parse_vote(b.text, r.suggestions.size())) {
      ++r.votes[vote->chosen_index];
    } else {
      ++r.votes_discarded;
    }
  }
  if (r.votes.empty()) {
    r.degraded = true;
    finish_by_majority(r);
    return r;
  }
  const auto outcome = resolve_votes(r.votes, r.suggestions);
  r.final_verdict = outcome.verdict;
  r.tie_broken = outcome.tie_broken;
  r.final_explanation =
      r.suggestions.suggestions[static_cast<std::size_t>(outcome.choice - 1)].explanation;
  return r;
}

IdentificationResult identify_standard(const Checkpoint& checkpoint, const KnowledgeBase& kb,
                                       Embedder& embedder, LlmProvider& llm,
                                       const PipelineConfig& config, const TemplateSet& templates) {
  check_inputs(checkpoint, config);
  const ClauseBundle bundle = retrieve_project_clauses(checkpoint, kb, embedder, config.retrieval);
  return standard_from_bundle(checkpoint, bundle, llm, config, templates,
                              base_result(checkpoint, IdentificationMode::kStandard, config, bundle));
}

// ---------------------------------------------------------------------------
// Batch runs

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::kAugmented: return "AUGMENTED";
    case RunMode::kStandard: return "STANDARD";
    case RunMode::kBoth: return "BOTH";
  }
  return "AUGMENTED";
}

std::optional<RunMode> run_mode_from_string(std::string_view s) {
  const std::string l = text::to_lower_ascii(s);
  if (l == "augmented") return RunMode::kAugmented;
  if (l == "standard") return RunMode::kStandard;
  if (l == "both") return RunMode::kBoth;
  return std::nullopt;
}

bool natural_less(std::string_view a, std::string_view b) {
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t i2 = i;
      std::size_t j2 = j;
      while (i2 < a.size() && is_digit(a[i2])) ++i2;
      while (j2 < b.size() && is_digit(b[j2])) ++j2;
      std::string_view da = a.substr(i, i2 - i);
      std::string_view db = b.substr(j, j2 - j);
      while (da.size() > 1 && da.front() == '0') da.remove_prefix(1);
      while (db.size() > 1 && db.front() == '0') db.remove_prefix(1);
      if (da.size() != db.size()) return da.size() < db.size();
      if (da != db) return da < db;
      i = i2;
      j = j2;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

void to_json(nlohmann::json& j, const CheckpointFailure& f) {
  j = {{"checkpoint_id", f.checkpoint_id},
       {"mode", f.mode},
       {"code", f.code},
       {"message", f.message}};
}

void to_json(nlohmann::json& j, const ReportSummary& s) {
  j = {{"checkpoints", s.checkpoints}, {"results", s.results},   {"risky", s.risky},
       {"non_risky", s.non_risky},     {"degraded", s.degraded}, {"failed", s.failed}};
}

void to_json(nlohmann::json& j, const Report& r) {
  j = {{"run_metadata", r.run_metadata},
       {"results", r.results},
       {"failures", r.failures},
       {"summary", r.summary}};
}

Report run_checklist(std::vector<Checkpoint> checkpoints, const KnowledgeBase& kb,
                     Embedder& embedder, LlmProvider& llm, const PipelineConfig& config,
                     RunMode mode, const TemplateSet& templates) {
  if (checkpoints.empty()) throw Error(ErrorCode::kContractViolation, "checklist is empty");
  std::stable_sort(checkpoints.begin(), checkpoints.end(),
                   [](const Checkpoint& a, const Checkpoint& b) { return natural_less(a.id, b.id); });

  Report report;
  report.run_metadata = {
      {"mode", std::string(to_string(mode))},
      {"embedder_model", embedder.model_name()},
      {"embedding_dim", embedder.dim()},
      {"llm_model", llm.model_id()},
      {"sampling", config.sampling},
      {"retrieval", config.retrieval},
      {"strict_two_stage", config.strict_two_stage},
      {"project_clauses", kb.project_clauses().size()},
      {"expert_pairs", kb.expert_pairs().size()},
  };
  std::vector<IdentificationMode> modes;
  if (mode != RunMode::kStandard) modes.push_back(IdentificationMode::kAugmented);
  if (mode != RunMode::kAugmented) modes.push_back(IdentificationMode::kStandard);

  report.summary.checkpoints = static_cast<int>(checkpoints.size());
  for (const auto& cp : checkpoints) {
    for (const auto m : modes) {
      try {
        auto r = m == IdentificationMode::kAugmented
                     ? identify(cp, kb, embedder, llm, config, templates)
                     : identify_standard(cp, kb, embedder, llm, config, templates);
        ++report.summary.results;
        if (r.is_risky()) ++report.summary.risky;
        else ++report.summary.non_risky;
        if (r.degraded) ++report.summary.degraded;
        report.results.push_back(std::move(r));
      } catch (const Error& e) {
        report.failures.push_back({cp.id, m, std::string(to_string(e.code())), e.what()});
        ++report.summary.failed;
      } catch (const std::exception& e) {
        report.failures.push_back({cp.id, m, "INTERNAL", e.what()});
        ++report.summary.failed;
      }
    }
  }
  return report;
}

std::vector<Checkpoint> read_checkpoints_csv(std::string_view csv_text) {
  const csv::Table table = csv::parse_table(csv_text);
  auto text_col = table.column("Checkpoints");
  if (!text_col) text_col = table.column("Checkpoint");
  if (!text_col) throw Error(ErrorCode::kSchema, "checkpoint file needs a 'Checkpoints' column");
  const auto id_col = table.column("ID");
  const auto topic_col = table.column("Topic");

  std::vector<Checkpoint> out;
  std::size_t n = 0;
  for (const auto& row : table.rows) {
    ++n;
    auto field = [&](std::optional<std::size_t> c) -> std::string {
      return c && *c < row.fields.size() ? std::string(text::trim(row.fields[*c])) : std::string();
    };
    Checkpoint cp;
    cp.text = field(text_col);
    if (cp.text.empty()) {
      throw Error(ErrorCode::kSchema, "line " + std::to_string(row.line) + ": empty checkpoint");
    }
    cp.id = field(id_col);
    if (cp.id.empty()) cp.id = std::to_string(n);
    if (auto t = field(topic_col); !t.empty()) cp.topic = t;
    out.push_back(std::move(cp));
  }
  return out;
}

}  // namespace clausecheck
