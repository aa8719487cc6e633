// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace clausecheck {

using RecordId = std::int64_t;

inline constexpr std::size_t kDefaultEmbeddingDim = 1536;

/// Outcome of judging a specific condition against a checkpoint.
enum class Verdict { kContradict, kEntail, kNotFound };

inline constexpr Verdict kAllVerdicts[] = {Verdict::kContradict, Verdict::kEntail,
                                           Verdict::kNotFound};

/// Contradictions and omissions are both treated as contract risk.
constexpr bool is_risky(Verdict v) { return v != Verdict::kEntail; }

std::string_view to_string(Verdict v);
/// Accepts exactly CONTRADICT, ENTAIL or NOT_FOUND; anything else yields nullopt.
std::optional<Verdict> verdict_from_string(std::string_view s);

enum class Metric { kEuclidean, kCosine };

std::string_view to_string(Metric m);
std::optional<Metric> metric_from_string(std::string_view s);

enum class IdentificationMode { kAugmented, kStandard };

std::string_view to_string(IdentificationMode m);

struct Checkpoint {
  std::string id;
  std::string text;
  std::optional<std::string> topic;

  bool operator==(const Checkpoint&) const = default;
};

struct ClauseChunk {
  RecordId id = 0;
  std::string clause_type;
  std::string text;
  std::string source_doc;

  bool operator==(const ClauseChunk&) const = default;
};

/// A past risky clause with the expert review written against one checkpoint.
/// Several pairs may share a checkpoint.
struct ExpertPair {
  RecordId id = 0;
  std::string checkpoint_text;
  std::string clause_text;
  std::string review_text;

  bool operator==(const ExpertPair&) const = default;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// Raw metric value: cosine in [-1, 1], or Euclidean distance >= 0.
struct SimilarityScore {
  double value = 0.0;
  Metric metric = Metric::kEuclidean;

  bool operator==(const SimilarityScore&) const = default;
};

/// One sampled model answer.
struct Suggestion {
  Verdict verdict = Verdict::kNotFound;
  std::string explanation;
  std::string raw_response;
  int sample_index = 0;

  bool operator==(const Suggestion&) const = default;
};

struct SuggestionSet {
  std::vector<Suggestion> suggestions;

  std::size_t size() const noexcept { return suggestions.size(); }
  bool operator==(const SuggestionSet&) const = default;
};

struct SamplingConfig {
  int n_qa_samples = 5;
  int n_vote_samples = 5;
  double temperature = 0.3;

  bool operator==(const SamplingConfig&) const = default;
};

struct RetrievalConfig {
  int k_clauses = 5;
  int k_pairs = 3;
  Metric metric = Metric::kEuclidean;

  bool operator==(const RetrievalConfig&) const = default;
};

/// `similarity` is larger-is-better under either metric: cosine, or 1 - d^2/2
/// for Euclidean distance d between unit vectors. `distance` is always the raw
/// Euclidean distance.
struct ScoredClause {
  ClauseChunk clause;
  double similarity = 0.0;
  double distance = 0.0;

  bool operator==(const ScoredClause&) const = default;
};

struct ScoredPair {
  ExpertPair pair;
  double similarity = 0.0;
  double distance = 0.0;

  bool operator==(const ScoredPair&) const = default;
};

/// Final answer for one checkpoint together with everything that produced it.
///
/// `votes` is keyed by 1-based choice number, i.e. position in `suggestions`,
/// matching the "choice i" labels of the selection prompt. It is empty when the
/// selection stage did not run (unanimous suggestions or the standard prompt).
struct IdentificationResult {
  Checkpoint checkpoint;
  IdentificationMode mode = IdentificationMode::kAugmented;
  Metric metric = Metric::kEuclidean;
  std::vector<ScoredClause> retrieved_clauses;
  std::vector<ScoredPair> retrieved_pairs;
  bool expert_knowledge_found = false;
  SuggestionSet suggestions;
  std::map<int, int> votes;
  int n_vote_samples = 0;
  int votes_discarded = 0;
  std::map<Verdict, int> verdict_tally;
  bool selection_skipped = false;
  Verdict final_verdict = Verdict::kNotFound;
  std::string final_explanation;
  bool tie_broken = false;
  bool degraded = false;
  int qa_samples_requested = 0;
  int qa_samples_unparseable = 0;
  int qa_samples_failed = 0;

  bool is_risky() const noexcept { return clausecheck::is_risky(final_verdict); }
  bool operator==(const IdentificationResult&) const = default;
};

struct Violation {
  std::string name;
  std::string detail;
};

/// Empty (no violations) iff every invariant holds. Warnings never make a
/// record invalid.
struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  bool empty() const noexcept { return violations.empty(); }
  bool has(std::string_view name) const;
};

ValidationReport validate(const Checkpoint& c);
ValidationReport validate(const ClauseChunk& c);
ValidationReport validate(const ExpertPair& p);
ValidationReport validate(const EmbeddingVector& v, std::size_t expected_dim = kDefaultEmbeddingDim,
                          bool require_unit_norm = false);
ValidationReport validate(const Suggestion& s);
ValidationReport validate(const SuggestionSet& s);
ValidationReport validate(const SamplingConfig& c);
ValidationReport validate(const RetrievalConfig& c);
ValidationReport validate(const IdentificationResult& r);
ValidationReport validate_verdict_label(std::string_view label);

// Canonical flat-record serialization.
void to_json(nlohmann::json& j, Verdict v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, Metric m);
void from_json(const nlohmann::json& j, Metric& m);
void to_json(nlohmann::json& j, IdentificationMode m);
void from_json(const nlohmann::json& j, IdentificationMode& m);
void to_json(nlohmann::json& j, const Checkpoint& c);
void from_json(const nlohmann::json& j, Checkpoint& c);
void to_json(nlohmann::json& j, const ClauseChunk& c);
void from_json(const nlohmann::json& j, ClauseChunk& c);
void to_json(nlohmann::json& j, const ExpertPair& p);
void from_json(const nlohmann::json& j, ExpertPair& p);
void to_json(nlohmann::json& j, const EmbeddingVector& v);
void from_json(const nlohmann::json& j, EmbeddingVector& v);
void to_json(nlohmann::json& j, const SimilarityScore& s);
void from_json(const nlohmann::json& j, SimilarityScore& s);
void to_json(nlohmann::json& j, const Suggestion& s);
void from_json(const nlohmann::json& j, Suggestion& s);
void to_json(nlohmann::json& j, const SuggestionSet& s);
void from_json(const nlohmann::json& j, SuggestionSet& s);
void to_json(nlohmann::json& j, const SamplingConfig& c);
void from_json(const nlohmann::json& j, SamplingConfig& c);
void to_json(nlohmann::json& j, const RetrievalConfig& c);
void from_json(const nlohmann::json& j, RetrievalConfig& c);
void to_json(nlohmann::json& j, const ScoredClause& c);
void from_json(const nlohmann::json& j, ScoredClause& c);
void to_json(nlohmann::json& j, const ScoredPair& p);
void from_json(const nlohmann::json& j, ScoredPair& p);
void to_json(nlohmann::json& j, const IdentificationResult& r);
void from_json(const nlohmann::json& j, IdentificationResult& r);

}  // namespace clausecheck
