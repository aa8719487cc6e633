// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/prompting.hpp"

#include <filesystem>
#include <regex>

#include "builtin_templates.hpp"
#include "clausecheck/error.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::kQa: return "QA";
    case PromptKind::kSelection: return "SELECTION";
    case PromptKind::kStandard: return "STANDARD";
  }
  return "QA";
}

namespace {

std::string strip_one_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

const TemplateSet& TemplateSet::defaults() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (const auto& [name, body] : detail::kBuiltinTemplates) {
      s.set(std::string(name), strip_one_newline(std::string(body)));
    }
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::from_directory(const std::string& dir) {
  TemplateSet s = defaults();
  for (const auto& [name, body] : detail::kBuiltinTemplates) {
    const auto path = std::filesystem::path(dir) / (std::string(name) + ".txt");
    if (std::filesystem::exists(path)) {
      s.set(std::string(name), strip_one_newline(text::read_file(path.string())));
    }
  }
  return s;
}

const std::string& TemplateSet::get(std::string_view name) const {
  auto it = bodies_.find(name);
  if (it == bodies_.end()) throw Error(ErrorCode::kTemplate, "no template named " + std::string(name));
  return it->second;
}

void TemplateSet::set(std::string name, std::string body) { bodies_[std::move(name)] = std::move(body); }

std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    const char c = tpl[i];
    if (c == '{' && i + 1 < tpl.size() && tpl[i + 1] == '{') {
      out += '{';
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < tpl.size() && tpl[i + 1] == '}') {
      out += '}';
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < tpl.size() && is_slot_char(tpl[j])) ++j;
      if (j > i + 1 && j < tpl.size() && tpl[j] == '}') {
        const std::string name(tpl.substr(i + 1, j - i - 1));
        auto it = values.find(name);
        if (it == values.end()) throw Error(ErrorCode::kTemplate, "no value for slot {" + name + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

RenderedPrompt render_qa_prompt(const Checkpoint& checkpoint, const ClauseBundle& bundle,
                                std::span<const ScoredPair> pairs, const TemplateSet& templates) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kContractViolation,
                "question-answering prompt needs at least one clause-review pair");
  }
  RenderedPrompt p;
  p.kind = PromptKind::kQa;
  p.slots["checkpoint"] = checkpoint.text;
  p.slots["specific_conditions"] = bundle.merged_text;

  p.text = fill_template(templates.get("qa_instruction"), {});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i].pair;
    const std::string n = std::to_string(i + 1);
    p.slots["clause_" + n] = pair.clause_text;
    p.slots["review_" + n] = pair.review_text;
    p.text += "\n\n";
    p.text += fill_template(templates.get("qa_exemplar"), {{"checkpoint", checkpoint.text},
                                                           {"clause", pair.clause_text},
                                                           {"review", pair.review_text}});
  }
  p.text += "\n\n";
  p.text += fill_template(templates.get("qa_question"),
                          {{"checkpoint", checkpoint.text},
                           {"specific_conditions", bundle.merged_text}});
  return p;
}

RenderedPrompt render_selection_prompt(const Checkpoint& checkpoint,
                                       std::string_view merged_conditions,
                                       const SuggestionSet& suggestions,
                                       const TemplateSet& templates) {
  if (suggestions.size() < 2) {
    throw Error(ErrorCode::kContractViolation, "selection needs at least two suggestions");
  }
  RenderedPrompt p;
  p.kind = PromptKind::kSelection;
  p.slots["checkpoint"] = checkpoint.text;
  p.slots["specific_conditions"] = std::string(merged_conditions);
  std::string choices;
  for (std::size_t i = 0; i < suggestions.size(); ++i) {
    const std::string n = std::to_string(i + 1);
    const auto& raw = suggestions.suggestions[i].raw_response;
    p.slots["suggestion_" + n] = raw;
    if (i > 0) choices += '\n';
    choices += fill_template(templates.get("selection_choice"), {{"index", n}, {"suggestion", raw}});
  }
  p.text = fill_template(templates.get("selection"),
                         {{"checkpoint", checkpoint.text},
                          {"specific_conditions", std::string(merged_conditions)},
                          {"choices", choices}});
  return p;
}

RenderedPrompt render_standard_prompt(const Checkpoint& checkpoint,
                                      std::string_view merged_conditions,
                                      const TemplateSet& templates) {
  RenderedPrompt p;
  p.kind = PromptKind::kStandard;
  p.slots["checkpoint"] = checkpoint.text;
  p.slots["specific_conditions"] = std::string(merged_conditions);
  p.text = fill_template(templates.get("standard"), p.slots);
  return p;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Hit {
  std::size_t pos = 0;
  std::size_t len = 0;
  std::string token;
};

std::optional<Hit> last_match(const std::string& s, const std::regex& re, int group = 0) {
  std::optional<Hit> last;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    last = Hit{static_cast<std::size_t>(m.position(group)), static_cast<std::size_t>(m.length(group)),
               m.str(group)};
  }
  return last;
}

std::optional<Verdict> verdict_from_keyword(std::string_view word) {
  const std::string w = text::to_lower_ascii(word);
  if (w.rfind("contradict", 0) == 0) return Verdict::kContradict;
  if (w.rfind("entail", 0) == 0) return Verdict::kEntail;
  if (w.rfind("not", 0) == 0) return Verdict::kNotFound;
  return std::nullopt;
}

Verdict verdict_from_letter(char c) {
  switch (c) {
    case 'A': case 'a': return Verdict::kContradict;
    case 'B': case 'b': return Verdict::kEntail;
    default: return Verdict::kNotFound;
  }
}

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

// Blanks out echoed option lists so their letters and keywords are not read as
// an answer. Positions are preserved.
std::string mask_echoes(std::string_view output) {
  static const std::regex options(
      R"(\[A\]\s*contradict\s*\[B\]\s*entail\s*\[C\]\s*not\s+found)", std::regex::icase);
  static const std::regex format(R"(<\s*contradict\s+or\s+entail\s+or\s+not\s+found\s*>)",
                                 std::regex::icase);
  std::string s(output);
  for (const auto* re : {&options, &format}) {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), *re); it != std::sregex_iterator(); ++it) {
      const auto pos = static_cast<std::size_t>(it->position());
      const auto len = static_cast<std::size_t>(it->length());
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] != '\n') s[i] = ' ';
      }
    }
  }
  return s;
}

}  // namespace

std::optional<ParsedAnswer> parse_answer(std::string_view output) {
  static const std::regex bracket(R"(\[([ABCabc])\])");
  static const std::regex label(
      R"(condition\s+situation\s*:\s*[*_"']*\s*(contradict\w*|entail\w*|not\s+found))",
      std::regex::icase);
  static const std::regex keyword(
      R"(\b(contradict(?:s|ed|ion|ory)?|entail(?:s|ed|ment)?|not\s+found)\b)", std::regex::icase);
  static const std::regex explanation_label(R"(explanation\s*:)", std::regex::icase);

  const std::string masked = mask_echoes(output);
  std::optional<Hit> hit;
  std::optional<Verdict> verdict;
  if ((hit = last_match(masked, bracket, 1))) {
    verdict = verdict_from_letter(hit->token[0]);
  } else if ((hit = last_match(masked, label, 1))) {
    verdict = verdict_from_keyword(hit->token);
  } else if ((hit = last_match(masked, keyword, 1))) {
    verdict = verdict_from_keyword(hit->token);
  }
  if (!verdict) return std::nullopt;

  // Explanation: text after the last "Explanation:" label if one exists, with
  // the sentence carrying the answer removed when it falls inside that text.
  std::size_t base_begin = 0;
  if (auto ex = last_match(masked, explanation_label)) {
    const std::size_t after = ex->pos + ex->len;
    if (!text::trim(std::string_view(output).substr(after)).empty()) base_begin = after;
  }
  std::string explanation;
  if (hit->pos >= base_begin) {
    std::size_t start = hit->pos;
    while (start > base_begin && !is_sentence_end(output[start - 1])) --start;
    std::size_t end = hit->pos + hit->len;
    while (end < output.size() && !is_sentence_end(output[end])) ++end;
    if (end < output.size() && output[end] != '\n') ++end;
    explanation = std::string(output.substr(base_begin, start - base_begin)) +
                  std::string(output.substr(end));
  } else {
    explanation = std::string(output.substr(base_begin));
  }
  explanation = std::string(text::trim(explanation));
  if (explanation.empty()) explanation = std::string(text::trim(output));
  return ParsedAnswer{*verdict, std::move(explanation)};
}

std::optional<ParsedVote> parse_vote(std::string_view output, std::size_t n_choices) {
  static const std::regex choice(R"(\bchoice\s*#?\s*(\d{1,9})\b)", std::regex::icase);
  const std::string s(output);
  auto hit = last_match(s, choice, 1);
  if (!hit) return std::nullopt;
  const long n = std::stol(hit->token);
  if (n < 1 || static_cast<std::size_t>(n) > n_choices) return std::nullopt;
  return ParsedVote{static_cast<int>(n)};
}

}  // namespace clausecheck
