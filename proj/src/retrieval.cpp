// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/retrieval.hpp"

#include <algorithm>

#include "clausecheck/error.hpp"

namespace clausecheck {

std::string merge_clauses(const std::vector<ScoredClause>& hits) {
  std::vector<const ScoredClause*> order;
  order.reserve(hits.size());
  for (const auto& h : hits) order.push_back(&h);
  std::stable_sort(order.begin(), order.end(), [](const ScoredClause* a, const ScoredClause* b) {
    if (a->similarity != b->similarity) return a->similarity > b->similarity;
    return a->clause.id < b->clause.id;
  });
  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0) out += kMergeDelimiter;
    out += order[i]->clause.text;
  }
  return out;
}

ClauseBundle retrieve_project_clauses(const Checkpoint& checkpoint, const Collection& clauses,
                                      Embedder& embedder, const RetrievalConfig& config) {
  if (config.k_clauses < 1) throw Error(ErrorCode::kContractViolation, "k_clauses must be >= 1");
  if (clauses.size() == 0) {
    throw Error(ErrorCode::kEmptyProjectBase,
                "project clause collection '" + clauses.name() + "' is empty");
  }
  const EmbeddingVector query = embedder.embed(checkpoint.text);
  const auto found = clauses.search_ann(query, static_cast<std::size_t>(config.k_clauses),
                                        config.metric);
  ClauseBundle bundle;
  bundle.clauses.reserve(found.hits.size());
  for (const auto& h : found.hits) {
    bundle.clauses.push_back({h.record->clause(), h.similarity, h.distance});
  }
  bundle.merged_text = merge_clauses(bundle.clauses);
  return bundle;
}

ClauseBundle retrieve_project_clauses(const Checkpoint& checkpoint, const KnowledgeBase& kb,
                                      Embedder& embedder, const RetrievalConfig& config) {
  return retrieve_project_clauses(checkpoint, kb.project_clauses(), embedder, config);
}

PairRetrieval retrieve_clause_review_pairs(const Checkpoint& checkpoint,
                                           const ClauseBundle& bundle, const Collection& pairs,
                                           Embedder& embedder, const RetrievalConfig& config) {
  if (bundle.clauses.empty()) {
    throw Error(ErrorCode::kContractViolation, "clause bundle is empty");
  }
  if (config.k_pairs < 1) throw Error(ErrorCode::kContractViolation, "k_pairs must be >= 1");
  PairRetrieval out;
  const IdFilter candidates = pairs.filter_by_checkpoint(checkpoint.text);
  if (candidates.empty()) return out;

  const EmbeddingVector query = embedder.embed(bundle.merged_text);
  const auto found = pairs.search_ann(query, static_cast<std::size_t>(config.k_pairs),
                                      config.metric, &candidates);
  out.pairs.reserve(found.hits.size());
  for (const auto& h : found.hits) out.pairs.push_back({h.record->pair(), h.similarity, h.distance});
  out.outcome = out.pairs.empty() ? PairOutcome::kNoExpertKnowledge : PairOutcome::kFound;
  return out;
}

PairRetrieval retrieve_clause_review_pairs(const Checkpoint& checkpoint,
                                           const ClauseBundle& bundle, const KnowledgeBase& kb,
                                           Embedder& embedder, const RetrievalConfig& config) {
  return retrieve_clause_review_pairs(checkpoint, bundle, kb.expert_pairs(), embedder, config);
}

}  // namespace clausecheck
