// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "clausecheck/embedding.hpp"
#include "clausecheck/knowledge_base.hpp"
#include "clausecheck/types.hpp"

namespace clausecheck {

/// Top project clauses for one checkpoint, best first, plus their texts joined
/// in that order.
struct ClauseBundle {
  std::vector<ScoredClause> clauses;
  std::string merged_text;
};

enum class PairOutcome { kFound, kNoExpertKnowledge };

struct PairRetrieval {
  PairOutcome outcome = PairOutcome::kNoExpertKnowledge;
  std::vector<ScoredPair> pairs;
};

inline constexpr std::string_view kMergeDelimiter = "\n\n";

/// Joins clause texts by descending similarity, ties by ascending id.
std::string merge_clauses(const std::vector<ScoredClause>& hits);

/// Embeds the checkpoint text and returns the k_clauses nearest project
/// clauses. Throws Error(kEmptyProjectBase) when the collection is empty.
ClauseBundle retrieve_project_clauses(const Checkpoint& checkpoint, const Collection& clauses,
                                      Embedder& embedder, const RetrievalConfig& config);
ClauseBundle retrieve_project_clauses(const Checkpoint& checkpoint, const KnowledgeBase& kb,
                                      Embedder& embedder, const RetrievalConfig& config);

/// Restricts the expert collection to pairs written against this checkpoint,
/// then ranks only those by similarity to the embedded merged bundle text.
PairRetrieval retrieve_clause_review_pairs(const Checkpoint& checkpoint,
                                           const ClauseBundle& bundle, const Collection& pairs,
                                           Embedder& embedder, const RetrievalConfig& config);
PairRetrieval retrieve_clause_review_pairs(const Checkpoint& checkpoint,
                                           const ClauseBundle& bundle, const KnowledgeBase& kb,
                                           Embedder& embedder, const RetrievalConfig& config);

}  // namespace clausecheck
