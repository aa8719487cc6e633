// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "clausecheck/error.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

using nlohmann::json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kContradict: return "CONTRADICT";
    case Verdict::kEntail: return "ENTAIL";
    case Verdict::kNotFound: return "NOT_FOUND";
  }
  return "NOT_FOUND";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  for (Verdict v : kAllVerdicts) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string_view to_string(Metric m) {
  return m == Metric::kCosine ? "COSINE" : "EUCLIDEAN";
}

std::optional<Metric> metric_from_string(std::string_view s) {
  const std::string lower = text::to_lower_ascii(s);
  if (lower == "euclidean") return Metric::kEuclidean;
  if (lower == "cosine") return Metric::kCosine;
  return std::nullopt;
}

std::string_view to_string(IdentificationMode m) {
  return m == IdentificationMode::kStandard ? "STANDARD" : "AUGMENTED";
}

bool ValidationReport::has(std::string_view name) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.name == name; });
}

namespace {

void require(ValidationReport& r, bool ok, std::string name, std::string detail) {
  if (!ok) r.violations.push_back({std::move(name), std::move(detail)});
}

bool blank(std::string_view s) { return text::trim(s).empty(); }

}  // namespace

ValidationReport validate(const Checkpoint& c) {
  ValidationReport r;
  require(r, !blank(c.text), "empty checkpoint text", "checkpoint " + c.id);
  return r;
}

ValidationReport validate(const ClauseChunk& c) {
  ValidationReport r;
  require(r, !blank(c.text), "empty clause text", "clause " + std::to_string(c.id));
  require(r, !blank(c.clause_type), "empty clause type", "clause " + std::to_string(c.id));
  return r;
}

ValidationReport validate(const ExpertPair& p) {
  ValidationReport r;
  const std::string id = "pair " + std::to_string(p.id);
  require(r, !blank(p.checkpoint_text), "empty checkpoint text", id);
  require(r, !blank(p.clause_text), "empty clause text", id);
  require(r, !blank(p.review_text), "empty review text", id);
  return r;
}

ValidationReport validate(const EmbeddingVector& v, std::size_t expected_dim,
                          bool require_unit_norm) {
  ValidationReport r;
  require(r, v.dim() > 0, "zero dimension", "");
  require(r, v.dim() == expected_dim, "dimension mismatch",
          "expected " + std::to_string(expected_dim) + ", got " + std::to_string(v.dim()));
  const bool finite =
      std::all_of(v.values.begin(), v.values.end(), [](double x) { return std::isfinite(x); });
  require(r, finite, "non-finite component", "");
  if (require_unit_norm && finite) {
    double sq = 0.0;
    for (double x : v.values) sq += x * x;
    require(r, std::abs(std::sqrt(sq) - 1.0) <= 1e-6, "not unit norm",
            "norm " + std::to_string(std::sqrt(sq)));
  }
  return r;
}

ValidationReport validate(const Suggestion& s) {
  ValidationReport r;
  require(r, !s.raw_response.empty(), "empty raw response",
          "sample " + std::to_string(s.sample_index));
  return r;
}

ValidationReport validate(const SuggestionSet& s) {
  ValidationReport r;
  require(r, !s.suggestions.empty(), "empty suggestion set", "");
  std::set<int> seen;
  for (const auto& sug : s.suggestions) {
    require(r, seen.insert(sug.sample_index).second, "duplicate sample index",
            std::to_string(sug.sample_index));
  }
  return r;
}

ValidationReport validate(const SamplingConfig& c) {
  ValidationReport r;
  require(r, c.n_qa_samples >= 1, "n_qa_samples below 1", std::to_string(c.n_qa_samples));
  require(r, c.n_vote_samples >= 1, "n_vote_samples below 1", std::to_string(c.n_vote_samples));
  require(r, c.temperature >= 0.0 && c.temperature <= 2.0, "temperature out of range",
          std::to_string(c.temperature));
  if (c.n_qa_samples < 5) {
    r.warnings.push_back("n_qa_samples=" + std::to_string(c.n_qa_samples) +
                         " is below the recommended minimum of 5");
  }
  return r;
}

ValidationReport validate(const RetrievalConfig& c) {
  ValidationReport r;
  require(r, c.k_clauses >= 1, "k_clauses below 1", std::to_string(c.k_clauses));
  require(r, c.k_pairs >= 1, "k_pairs below 1", std::to_string(c.k_pairs));
  return r;
}

ValidationReport validate(const IdentificationResult& res) {
  ValidationReport r = validate(res.suggestions);
  const auto& sugs = res.suggestions.suggestions;
  require(r,
          std::any_of(sugs.begin(), sugs.end(),
                      [&](const Suggestion& s) { return s.verdict == res.final_verdict; }),
          "final verdict not among suggestions", std::string(to_string(res.final_verdict)));
  require(r,
          std::any_of(sugs.begin(), sugs.end(),
                      [&](const Suggestion& s) { return s.explanation == res.final_explanation; }),
          "final explanation not among suggestions", "");
  if (!res.votes.empty()) {
    int total = res.votes_discarded;
    for (const auto& [choice, count] : res.votes) {
      total += count;
      require(r, choice >= 1 && static_cast<std::size_t>(choice) <= sugs.size(),
              "vote for unknown choice", std::to_string(choice));
    }
    require(r, total == res.n_vote_samples, "vote count mismatch",
            std::to_string(total) + " != " + std::to_string(res.n_vote_samples));
  }
  return r;
}

ValidationReport validate_verdict_label(std::string_view label) {
  ValidationReport r;
  require(r, verdict_from_string(label).has_value(), "unknown verdict label", std::string(label));
  return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename E>
E enum_from_json(const json& j, std::optional<E> (*parse)(std::string_view), const char* what) {
  const auto s = j.get<std::string>();
  auto v = parse(s);
  if (!v) throw Error(ErrorCode::kSchema, std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

std::optional<IdentificationMode> mode_from_string(std::string_view s) {
  if (s == "AUGMENTED") return IdentificationMode::kAugmented;
  if (s == "STANDARD") return IdentificationMode::kStandard;
  return std::nullopt;
}

std::optional<Metric> metric_from_canonical(std::string_view s) {
  if (s == "EUCLIDEAN") return Metric::kEuclidean;
  if (s == "COSINE") return Metric::kCosine;
  return std::nullopt;
}

}  // namespace

void to_json(json& j, Verdict v) { j = std::string(to_string(v)); }
void from_json(const json& j, Verdict& v) {
  v = enum_from_json<Verdict>(j, &verdict_from_string, "verdict");
}
void to_json(json& j, Metric m) { j = std::string(to_string(m)); }
void from_json(const json& j, Metric& m) {
  m = enum_from_json<Metric>(j, &metric_from_canonical, "metric");
}
void to_json(json& j, IdentificationMode m) { j = std::string(to_string(m)); }
void from_json(const json& j, IdentificationMode& m) {
  m = enum_from_json<IdentificationMode>(j, &mode_from_string, "mode");
}

void to_json(json& j, const Checkpoint& c) {
  j = json{{"id", c.id}, {"text", c.text}, {"topic", c.topic ? json(*c.topic) : json(nullptr)}};
}
void from_json(const json& j, Checkpoint& c) {
  j.at("id").get_to(c.id);
  j.at("text").get_to(c.text);
  if (j.contains("topic") && !j.at("topic").is_null()) {
    c.topic = j.at("topic").get<std::string>();
  } else {
    c.topic.reset();
  }
}

void to_json(json& j, const ClauseChunk& c) {
  j = json{{"id", c.id}, {"clause_type", c.clause_type}, {"text", c.text},
           {"source_doc", c.source_doc}};
}
void from_json(const json& j, ClauseChunk& c) {
  j.at("id").get_to(c.id);
  j.at("clause_type").get_to(c.clause_type);
  j.at("text").get_to(c.text);
  j.at("source_doc").get_to(c.source_doc);
}

void to_json(json& j, const ExpertPair& p) {
  j = json{{"id", p.id}, {"checkpoint_text", p.checkpoint_text}, {"clause_text", p.clause_text},
           {"review_text", p.review_text}};
}
void from_json(const json& j, ExpertPair& p) {
  j.at("id").get_to(p.id);
  j.at("checkpoint_text").get_to(p.checkpoint_text);
  j.at("clause_text").get_to(p.clause_text);
  j.at("review_text").get_to(p.review_text);
}

void to_json(json& j, const EmbeddingVector& v) {
  j = json{{"values", v.values}, {"dim", v.dim()}};
}
void from_json(const json& j, EmbeddingVector& v) {
  j.at("values").get_to(v.values);
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != v.values.size()) {
    throw Error(ErrorCode::kSchema, "embedding dim does not match values length");
  }
}

void to_json(json& j, const SimilarityScore& s) {
  j = json{{"value", s.value}, {"metric", s.metric}};
}
void from_json(const json& j, SimilarityScore& s) {
  j.at("value").get_to(s.value);
  j.at("metric").get_to(s.metric);
}

void to_json(json& j, const Suggestion& s) {
  j = json{{"verdict", s.verdict}, {"explanation", s.explanation},
           {"raw_response", s.raw_response}, {"sample_index", s.sample_index}};
}
void from_json(const json& j, Suggestion& s) {
  j.at("verdict").get_to(s.verdict);
  j.at("explanation").get_to(s.explanation);
  j.at("raw_response").get_to(s.raw_response);
  j.at("sample_index").get_to(s.sample_index);
}

void to_json(json& j, const SuggestionSet& s) { j = json{{"suggestions", s.suggestions}}; }
void from_json(const json& j, SuggestionSet& s) { j.at("suggestions").get_to(s.suggestions); }

void to_json(json& j, const SamplingConfig& c) {
  j = json{{"n_qa_samples", c.n_qa_samples}, {"n_vote_samples", c.n_vote_samples},
           {"temperature", c.temperature}};
}
void from_json(const json& j, SamplingConfig& c) {
  j.at("n_qa_samples").get_to(c.n_qa_samples);
  j.at("n_vote_samples").get_to(c.n_vote_samples);
  j.at("temperature").get_to(c.temperature);
}

void to_json(json& j, const RetrievalConfig& c) {
  j = json{{"k_clauses", c.k_clauses}, {"k_pairs", c.k_pairs}, {"metric", c.metric}};
}
void from_json(const json& j, RetrievalConfig& c) {
  j.at("k_clauses").get_to(c.k_clauses);
  j.at("k_pairs").get_to(c.k_pairs);
  j.at("metric").get_to(c.metric);
}

void to_json(json& j, const ScoredClause& c) {
  j = json{{"clause", c.clause}, {"similarity", c.similarity}, {"distance", c.distance}};
}
void from_json(const json& j, ScoredClause& c) {
  j.at("clause").get_to(c.clause);
  j.at("similarity").get_to(c.similarity);
  j.at("distance").get_to(c.distance);
}

void to_json(json& j, const ScoredPair& p) {
  j = json{{"pair", p.pair}, {"similarity", p.similarity}, {"distance", p.distance}};
}
void from_json(const json& j, ScoredPair& p) {
  j.at("pair").get_to(p.pair);
  j.at("similarity").get_to(p.similarity);
  j.at("distance").get_to(p.distance);
}

void to_json(json& j, const IdentificationResult& r) {
  json votes = json::object();
  for (const auto& [choice, count] : r.votes) votes[std::to_string(choice)] = count;
  json tally = json::object();
  for (const auto& [verdict, count] : r.verdict_tally) tally[std::string(to_string(verdict))] = count;
  j = json{{"checkpoint", r.checkpoint},
           {"mode", r.mode},
           {"metric", r.metric},
           {"retrieved_clauses", r.retrieved_clauses},
           {"retrieved_pairs", r.retrieved_pairs},
           {"expert_knowledge_found", r.expert_knowledge_found},
           {"suggestions", r.suggestions},
           {"votes", votes},
           {"n_vote_samples", r.n_vote_samples},
           {"votes_discarded", r.votes_discarded},
           {"verdict_tally", tally},
           {"selection_skipped", r.selection_skipped},
           {"final_verdict", r.final_verdict},
           {"final_explanation", r.final_explanation},
           {"tie_broken", r.tie_broken},
           {"degraded", r.degraded},
           {"is_risky", r.is_risky()},
           {"qa_samples_requested", r.qa_samples_requested},
           {"qa_samples_unparseable", r.qa_samples_unparseable},
           {"qa_samples_failed", r.qa_samples_failed}};
}

void from_json(const json& j, IdentificationResult& r) {
  j.at("checkpoint").get_to(r.checkpoint);
  j.at("mode").get_to(r.mode);
  j.at("metric").get_to(r.metric);
  j.at("retrieved_clauses").get_to(r.retrieved_clauses);
  j.at("retrieved_pairs").get_to(r.retrieved_pairs);
  j.at("expert_knowledge_found").get_to(r.expert_knowledge_found);
  j.at("suggestions").get_to(r.suggestions);
  r.votes.clear();
  for (const auto& [key, value] : j.at("votes").items()) r.votes[std::stoi(key)] = value.get<int>();
  j.at("n_vote_samples").get_to(r.n_vote_samples);
  j.at("votes_discarded").get_to(r.votes_discarded);
  r.verdict_tally.clear();
  for (const auto& [key, value] : j.at("verdict_tally").items()) {
    auto v = verdict_from_string(key);
    if (!v) throw Error(ErrorCode::kSchema, "unknown verdict '" + key + "' in tally");
    r.verdict_tally[*v] = value.get<int>();
  }
  j.at("selection_skipped").get_to(r.selection_skipped);
  j.at("final_verdict").get_to(r.final_verdict);
  j.at("final_explanation").get_to(r.final_explanation);
  j.at("tie_broken").get_to(r.tie_broken);
  j.at("degraded").get_to(r.degraded);
  j.at("qa_samples_requested").get_to(r.qa_samples_requested);
  j.at("qa_samples_unparseable").get_to(r.qa_samples_unparseable);
  j.at("qa_samples_failed").get_to(r.qa_samples_failed);
}

}  // namespace clausecheck
