// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "clausecheck/retrieval.hpp"
#include "clausecheck/types.hpp"

namespace clausecheck {

enum class PromptKind { kQa, kSelection, kStandard };

std::string_view to_string(PromptKind k);

struct RenderedPrompt {
  std::string text;
  PromptKind kind = PromptKind::kQa;
  std::map<std::string, std::string> slots;  // audit copy of inserted values
};

struct ParsedAnswer {
  Verdict verdict = Verdict::kNotFound;
  std::string explanation;
};

struct ParsedVote {
  int chosen_index = 0;  // 1-based
};

/// Named prompt templates. Slots are written `{name}`; `{{` and `}}` produce
/// literal braces. One trailing newline in a template file is ignored.
///
/// Names: qa_instruction, qa_exemplar {checkpoint, clause, review},
/// qa_question {checkpoint, specific_conditions}, selection {checkpoint,
/// specific_conditions, choices}, selection_choice {index, suggestion},
/// standard {checkpoint, specific_conditions}.
class TemplateSet {
 public:
  /// The shipped templates, compiled in from templates/.
  static const TemplateSet& defaults();
  /// Shipped templates overridden by any `<name>.txt` present in `dir`.
  static TemplateSet from_directory(const std::string& dir);

  const std::string& get(std::string_view name) const;
  void set(std::string name, std::string body);

 private:
  std::map<std::string, std::string, std::less<>> bodies_;
};

/// Single pass substitution. Throws Error(kTemplate) for a slot with no value.
std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values);

/// Instruction, one exemplar per pair, then the new question. Throws
/// Error(kContractViolation) for an empty pair list.
RenderedPrompt render_qa_prompt(const Checkpoint& checkpoint, const ClauseBundle& bundle,
                                std::span<const ScoredPair> pairs,
                                const TemplateSet& templates = TemplateSet::defaults());

/// One "choice i" line per suggestion in order, carrying its raw response.
RenderedPrompt render_selection_prompt(const Checkpoint& checkpoint,
                                       std::string_view merged_conditions,
                                       const SuggestionSet& suggestions,
                                       const TemplateSet& templates = TemplateSet::defaults());

RenderedPrompt render_standard_prompt(const Checkpoint& checkpoint,
                                      std::string_view merged_conditions,
                                      const TemplateSet& templates = TemplateSet::defaults());

/// Verdict from a model answer, by priority:
///   1. last bracketed option letter [A]/[B]/[C] outside an echoed options line
///   2. last "Condition situation: <keyword>" label
///   3. last standalone keyword (contradict*, entail*, "not found")
/// Returns nullopt when none is present.
std::optional<ParsedAnswer> parse_answer(std::string_view output);

/// Last "choice <i>" mention. Returns nullopt when there is none or when the
/// last one is outside 1..n_choices.
std::optional<ParsedVote> parse_vote(std::string_view output, std::size_t n_choices);

}  // namespace clausecheck
