// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clausecheck/embedding.hpp"
#include "clausecheck/knowledge_base.hpp"
#include "clausecheck/llm_client.hpp"
#include "clausecheck/prompting.hpp"
#include "clausecheck/types.hpp"

namespace clausecheck {

struct PipelineConfig {
  SamplingConfig sampling;
  RetrievalConfig retrieval;
  /// Run the selection stage even when every suggestion agrees.
  bool strict_two_stage = false;
  /// Re-draw each unparseable answer once before counting it as missing.
  bool resample_unparseable = true;
  int max_retries = 2;
};

/// Verdict preference when counts tie: CONTRADICT, then NOT_FOUND, then ENTAIL.
int tie_rank(Verdict v);

struct VoteOutcome {
  int choice = 0;  // 1-based
  Verdict verdict = Verdict::kNotFound;
  bool tie_broken = false;  // tied choices carried different verdicts
};

/// Picks the most-voted choice. Among tied choices the verdict is chosen by
/// tie_rank; among tied choices sharing that verdict the lowest index wins.
/// Requires at least one vote, each for a choice in 1..suggestions.size().
VoteOutcome resolve_votes(const std::map<int, int>& votes, const SuggestionSet& suggestions);

struct MajorityOutcome {
  Verdict verdict = Verdict::kNotFound;
  bool tie_broken = false;
};

/// Most frequent verdict; ties resolved by tie_rank. Requires a non-empty tally.
MajorityOutcome majority_verdict(const std::map<Verdict, int>& tally);

std::map<Verdict, int> tally_verdicts(const SuggestionSet& suggestions);

/// Retrieval, question-answering samples, then selection votes. Falls back to
/// the standard prompt when no expert pair matches the checkpoint.
IdentificationResult identify(const Checkpoint& checkpoint, const KnowledgeBase& kb,
                              Embedder& embedder, LlmProvider& llm, const PipelineConfig& config,
                              const TemplateSet& templates = TemplateSet::defaults());

/// Baseline: project clauses only, standard prompt, majority over verdicts.
IdentificationResult identify_standard(const Checkpoint& checkpoint, const KnowledgeBase& kb,
                                       Embedder& embedder, LlmProvider& llm,
                                       const PipelineConfig& config,
                                       const TemplateSet& templates = TemplateSet::defaults());

enum class RunMode { kAugmented, kStandard, kBoth };

std::string_view to_string(RunMode m);
std::optional<RunMode> run_mode_from_string(std::string_view s);

struct CheckpointFailure {
  std::string checkpoint_id;
  IdentificationMode mode = IdentificationMode::kAugmented;
  std::string code;
  std::string message;
};

struct ReportSummary {
  int checkpoints = 0;
  int results = 0;
  int risky = 0;
  int non_risky = 0;
  int degraded = 0;
  int failed = 0;
};

struct Report {
  nlohmann::json run_metadata = nlohmann::json::object();
  std::vector<IdentificationResult> results;
  std::vector<CheckpointFailure> failures;
  ReportSummary summary;
};

void to_json(nlohmann::json& j, const CheckpointFailure& f);
void to_json(nlohmann::json& j, const ReportSummary& s);
void to_json(nlohmann::json& j, const Report& r);

/// Orders ids so digit runs compare numerically ("cp2" < "cp10").
bool natural_less(std::string_view a, std::string_view b);

/// One result per checkpoint per mode, ordered by checkpoint id then mode.
/// Failures are recorded per checkpoint and never stop the batch.
Report run_checklist(std::vector<Checkpoint> checkpoints, const KnowledgeBase& kb,
                     Embedder& embedder, LlmProvider& llm, const PipelineConfig& config,
                     RunMode mode, const TemplateSet& templates = TemplateSet::defaults());

/// Reads checkpoints from CSV. Needs a `Checkpoints` (or `Checkpoint`) column;
/// `ID` and `Topic` are optional. Rows without an id are numbered from 1.
std::vector<Checkpoint> read_checkpoints_csv(std::string_view csv_text);

}  // namespace clausecheck
